// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "owa/verify.hpp"

#include <sstream>

#include "owa/oracles.hpp"

namespace owa {

void VerifyReport::merge(const VerifyReport& other) {
    passed += other.passed;
    failed += other.failed;
    lines.insert(lines.end(), other.lines.begin(), other.lines.end());
}

namespace {

struct Checker {
    VerifyReport& rep;

    void check(const std::string& name, bool ok, double worst) {
        std::ostringstream os;
        os << rep.suite << "." << name << " " << (ok ? "PASS" : "FAIL") << " worst=" << worst;
        rep.lines.push_back(os.str());
        ok ? ++rep.passed : ++rep.failed;
    }
};

OwaWeights random_descending_weights(Rng& rng, int m) {
    Vec w = random_vec(rng, m, 0.05, 1.0);
    std::sort(w.begin(), w.end(), std::greater<>());
    const double s = sum(w);
    for (double& v : w) v /= s;
    Vec fixed = w;
    fixed[0] += 1.0 - sum(fixed);
    return OwaWeights(fixed, false);
}

}  // namespace

VerifyReport verify_owa(uint64_t seed) {
    VerifyReport rep;
    rep.suite = "owa";
    Checker c{rep};
    Rng rng(seed);

    {  // min-form equivalence for descending weights
        double worst = 0.0;
        for (int t = 0; t < 300; ++t) {
            const int m = 2 + static_cast<int>(rng() % 5);
            const OwaWeights w = random_descending_weights(rng, m);
            const Vec y = random_vec(rng, m, -1.0, 1.0);
            worst = std::max(worst, std::abs(owa_value(w, y) - min_permuted_dot(w.values(), y)));
        }
        c.check("min_form", worst <= 1e-12, worst);
    }
    {  // impartiality under all permutations, small m
        double worst = 0.0;
        for (int t = 0; t < 50; ++t) {
            const int m = 2 + static_cast<int>(rng() % 3);
            const OwaWeights w = fair_gini_weights(m);
            const Vec y = random_vec(rng, m, -2.0, 2.0);
            const double base = owa_value(w, y);
            std::vector<int> perm(m);
            std::iota(perm.begin(), perm.end(), 0);
            do {
                Vec yp(m);
                for (int i = 0; i < m; ++i) yp[i] = y[perm[i]];
                worst = std::max(worst, std::abs(owa_value(w, yp) - base));
            } while (std::next_permutation(perm.begin(), perm.end()));
        }
        c.check("impartiality", worst <= 1e-12, worst);
    }
    {  // monotonicity
        double worst = 0.0;
        for (int t = 0; t < 200; ++t) {
            const int m = 2 + static_cast<int>(rng() % 4);
            const OwaWeights w = fair_gini_weights(m);
            Vec y = random_vec(rng, m, -1.0, 1.0);
            const double before = owa_value(w, y);
            y[rng() % m] += uniform(rng, 0.0, 1.0);
            worst = std::min(worst, owa_value(w, y) - before);
        }
        c.check("monotonicity", worst >= -1e-12, worst);
    }
    {  // equitability of fair weights
        double worst = 1.0;
        for (int t = 0; t < 200; ++t) {
            const int m = 2 + static_cast<int>(rng() % 4);
            const OwaWeights w = fair_gini_weights(m);
            Vec y = random_vec(rng, m, -1.0, 1.0);
            int i = static_cast<int>(rng() % m), j = static_cast<int>(rng() % m);
            if (y[i] < y[j]) std::swap(i, j);
            if (i == j || y[i] - y[j] < 0.2) continue;
            const double eps = 0.45 * (y[i] - y[j]);
            Vec ye = y;
            ye[i] -= eps;
            ye[j] += eps;
            worst = std::min(worst, owa_value(w, ye) - owa_value(w, y));
        }
        c.check("equitability", worst > 0.0, worst);
    }
    {  // subgradient: concavity inequality and finite differences
        double worst_ineq = 0.0, worst_fd = 0.0;
        for (int t = 0; t < 200; ++t) {
            const int m = 2 + static_cast<int>(rng() % 4);
            const OwaWeights w = fair_gini_weights(m);
            const Vec y = random_distinct_vec(rng, m, -1.0, 1.0);
            const Vec g = owa_subgradient(w, y);
            const Vec y2 = random_vec(rng, m, -1.0, 1.0);
            double lin = owa_value(w, y);
            for (int i = 0; i < m; ++i) lin += g[i] * (y2[i] - y[i]);
            worst_ineq = std::max(worst_ineq, owa_value(w, y2) - lin);
            const Vec fd = central_difference_gradient(
                [&](const Vec& v) { return owa_value(w, v); }, y);
            worst_fd = std::max(worst_fd, relative_error(g, fd));
        }
        c.check("subgradient_validity", worst_ineq <= 1e-9, worst_ineq);
        c.check("subgradient_fd", worst_fd <= 1e-5, worst_fd);
    }
    return rep;
}

VerifyReport verify_geometry(uint64_t seed) {
    VerifyReport rep;
    rep.suite = "geometry";
    Checker c{rep};
    Rng rng(seed);

    {  // simplex projection: feasibility, idempotence, VI optimality
        double worst_vi = -1.0, worst_idem = 0.0, worst_feas = 0.0;
        for (int t = 0; t < 200; ++t) {
            const int n = 2 + static_cast<int>(rng() % 6);
            const Vec v = random_vec(rng, n, -2.0, 2.0);
            const Vec p = project_simplex(v);
            worst_feas = std::max(worst_feas, std::abs(sum(p) - 1.0));
            for (double x : p) worst_feas = std::max(worst_feas, -x);
            worst_vi = std::max(worst_vi, simplex_projection_vi_violation(v, p));
            worst_idem = std::max(worst_idem, nrm_inf(project_simplex(p) - p));
        }
        c.check("simplex_feasible", worst_feas <= 1e-10, worst_feas);
        c.check("simplex_vi", worst_vi <= 1e-8, worst_vi);
        c.check("simplex_idempotent", worst_idem <= 1e-10, worst_idem);
    }
    {  // permutahedron projection: membership, VI over all vertices, Lipschitz
        double worst_vi = -1.0, worst_lip = 0.0;
        bool member_ok = true;
        for (int t = 0; t < 100; ++t) {
            const int m = 2 + static_cast<int>(rng() % 4);
            const OwaWeights w = fair_gini_weights(m);
            const Permutahedron P(w.values());
            const Vec v = random_vec(rng, m, -3.0, 3.0);
            const Vec p = project_permutahedron(P, v);
            member_ok = member_ok && P.contains(p);
            worst_vi = std::max(worst_vi, permutahedron_projection_vi_violation(w.values(), v, p));
            const Vec v2 = random_vec(rng, m, -3.0, 3.0);
            const Vec p2 = project_permutahedron(P, v2);
            worst_lip = std::max(worst_lip, nrm2(p - p2) - nrm2(v - v2));
        }
        c.check("perm_membership", member_ok, 0.0);
        c.check("perm_vi", worst_vi <= 1e-8, worst_vi);
        c.check("perm_lipschitz", worst_lip <= 1e-10, worst_lip);
    }
    {  // smoothed value/gradient consistency and limits
        double worst_fd = 0.0, worst_limit = 0.0, worst_env = 0.0;
        for (int t = 0; t < 60; ++t) {
            const int m = 2 + static_cast<int>(rng() % 3);
            const OwaWeights w = fair_gini_weights(m);
            const Vec y = random_distinct_vec(rng, m, -1.0, 1.0);
            const SmoothingParam beta(uniform(rng, 0.3, 1.5));
            const Vec g = moreau_owa_gradient(w, y, beta);
            const Vec fd = central_difference_gradient(
                [&](const Vec& v) { return moreau_owa_value(w, v, beta); }, y);
            worst_fd = std::max(worst_fd, relative_error(g, fd));
            const Vec g_small = moreau_owa_gradient(w, y, SmoothingParam(1e-6));
            worst_limit = std::max(worst_limit, nrm_inf(g_small - owa_subgradient(w, y)));
            worst_env = std::max(worst_env, owa_value(w, y) - moreau_owa_value(w, y, beta));
        }
        c.check("moreau_value_grad_fd", worst_fd <= 1e-5, worst_fd);
        c.check("moreau_small_beta", worst_limit <= 1e-6, worst_limit);
        c.check("moreau_envelope_above", worst_env <= 1e-12, worst_env);
    }
    return rep;
}

VerifyReport verify_solvers(uint64_t seed) {
    VerifyReport rep;
    rep.suite = "solvers";
    Checker c{rep};
    Rng rng(seed);

    {  // cross-agreement of the three simplex solvers and the grid oracle
        double worst_pair = 0.0, worst_oracle = 0.0;
        for (int t = 0; t < 8; ++t) {
            const int m = 2 + static_cast<int>(rng() % 3);
            const int n = 2 + static_cast<int>(rng() % 3);
            const OwaWeights w = fair_gini_weights(m);
            const Mat C = random_mat(rng, m, n, 0.0, 1.0);
            const double a = solve_owa_projected_subgradient(w, C, high_accuracy_pgd()).objective;
            const SolveReport fw = solve_owa_moreau_frankwolfe(w, C, SmoothingParam(1e-3), 200000);
            const double b = owa_of_decision(w, C, fw.x);
            OwaQpOptions qopt;
            qopt.epsilon = 0.0;
            const double q = solve_owa_qp(w, C, qopt).z;
            const double grid_step = 0.02;
            const double o = owa_enumeration_oracle(w, C, grid_step);
            const double hi = std::max({a, b, q});
            const double lo = std::min({a, b, q});
            worst_pair = std::max(worst_pair, hi - lo);
            worst_oracle = std::max(worst_oracle, std::abs(hi - o));
        }
        c.check("cross_agreement", worst_pair <= 1e-3, worst_pair);
        c.check("grid_oracle", worst_oracle <= 2.5 * 0.02, worst_oracle);
    }
    {  // shortest path vs exhaustive enumeration
        double worst = 0.0;
        const GridGraph g(4, 4);
        const auto paths = enumerate_simple_paths(g);
        for (int t = 0; t < 5; ++t) {
            const Vec cost = random_vec(rng, g.n_nodes(), 0.1, 2.0);
            const PathSolution sol = solve_shortest_path(g, cost);
            double best = std::numeric_limits<double>::infinity();
            for (const auto& path : paths) {
                double s = 0.0;
                for (int v : path) s += cost[v];
                best = std::min(best, s);
            }
            worst = std::max(worst, std::abs(sol.cost - best));
        }
        c.check("dijkstra_vs_enumeration", worst <= 1e-10, worst);
    }
    {  // QP factorial bookkeeping and the capacity refusal
        OwaQpOptions qopt;
        const OwaWeights w3 = fair_gini_weights(3);
        const Mat C = random_mat(rng, 3, 3, 0.0, 1.0);
        const OwaQpSolution sol = solve_owa_qp(w3, C, qopt);
        bool refused = false;
        try {
            solve_owa_qp(fair_gini_weights(7), random_mat(rng, 7, 3, 0.0, 1.0), qopt);
        } catch (const std::runtime_error&) {
            refused = true;
        }
        c.check("qp_constraint_count", sol.constraint_count == 6, static_cast<double>(sol.constraint_count));
        c.check("qp_refuses_m7", refused, refused ? 1.0 : 0.0);
    }
    {  // ranking policies stay doubly stochastic
        bool ok = true;
        for (int t = 0; t < 5; ++t) {
            const int n = 4 + static_cast<int>(rng() % 4);
            const Vec y = random_vec(rng, n, 0.0, 1.0);
            const GroupStructure groups = [&] {
                Vec q = random_vec(rng, n, 0.0, 1.0);
                Mat A(2, n, 0.0);
                std::vector<int> gof(n);
                for (int i = 0; i < n; ++i) {
                    gof[i] = q[i] > 0.5 ? 1 : 0;
                    A(gof[i], i) = 1.0;
                }
                // guarantee nonempty groups
                if (std::count(gof.begin(), gof.end(), 0) == 0 || std::count(gof.begin(), gof.end(), 1) == 0) {
                    A = Mat(2, n, 0.0);
                    for (int i = 0; i < n; ++i) {
                        gof[i] = i % 2;
                        A(gof[i], i) = 1.0;
                    }
                }
                return GroupStructure(A, gof);
            }();
            const RankingPolicy pi = solve_fair_ranking_fw(y, groups, dcg_position_bias(n),
                                                           uniform(rng, 0.0, 1.0), fair_gini_weights(2),
                                                           1.0, 60);
            ok = ok && is_doubly_stochastic(pi.Pi);
        }
        c.check("fw_doubly_stochastic", ok, 0.0);
    }
    return rep;
}

VerifyReport verify_gradients(uint64_t seed, MoreauGradFn moreau_grad) {
    VerifyReport rep;
    rep.suite = "gradients";
    Checker c{rep};
    Rng rng(seed);
    if (!moreau_grad)
        moreau_grad = [](const OwaWeights& w, const Vec& y, SmoothingParam b) {
            return moreau_owa_gradient(w, y, b);
        };

    {  // smoothed gradient against finite differences of the smoothed value
        double worst = 0.0;
        for (int t = 0; t < 40; ++t) {
            const int m = 2 + static_cast<int>(rng() % 3);
            const OwaWeights w = fair_gini_weights(m);
            const Vec y = random_distinct_vec(rng, m, -1.0, 1.0);
            const SmoothingParam beta(uniform(rng, 0.4, 1.2));
            const Vec g = moreau_grad(w, y, beta);
            const Vec fd = central_difference_gradient(
                [&](const Vec& v) { return moreau_owa_value(w, v, beta); }, y);
            worst = std::max(worst, relative_error(g, fd));
        }
        c.check("moreau_grad_fd", worst <= 1e-5, worst);
    }
    {  // fixed-point backward vs perturb-and-resolve
        double worst = 0.0;
        for (int t = 0; t < 3; ++t) {
            const int m = 2, n = 3;
            const OwaWeights w = fair_gini_weights(m);
            const Mat C = random_mat(rng, m, n, 0.2, 1.2);
            const SmoothingParam beta(0.2);
            const SmoothedSolve fwd = solve_owa_moreau_pgd(w, C, beta, 20000, -1.0, 1e-13);
            const Vec g = random_vec(rng, n, -1.0, 1.0);
            const Mat grad = backward_fixed_point(w, C, fwd.x, g, beta, fwd.alpha).grad_C;
            Mat fd(m, n);
            const double h = 1e-5;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    Mat Cp = C, Cm = C;
                    Cp(i, j) += h;
                    Cm(i, j) -= h;
                    const double up = dot(g, solve_owa_moreau_pgd(w, Cp, beta, 20000, fwd.alpha, 1e-13).x);
                    const double dn = dot(g, solve_owa_moreau_pgd(w, Cm, beta, 20000, fwd.alpha, 1e-13).x);
                    fd(i, j) = (up - dn) / (2.0 * h);
                }
            worst = std::max(worst, relative_error(grad.a, fd.a));
        }
        c.check("fixed_point_fd", worst <= 1e-3, worst);
    }
    {  // QP KKT backward vs perturb-and-resolve
        double worst = 0.0;
        for (int t = 0; t < 3; ++t) {
            const int m = 2, n = 3;
            const OwaWeights w = fair_gini_weights(m);
            const Mat C = random_mat(rng, m, n, 0.2, 1.2);
            OwaQpOptions qopt;
            qopt.epsilon = 0.3;
            const OwaQpSolution sol = solve_owa_qp(w, C, qopt);
            const Vec g = random_vec(rng, n, -1.0, 1.0);
            const Mat grad = backward_qp_kkt(sol, C, g).grad_C;
            Mat fd(m, n);
            const double h = 1e-5;
            for (int i = 0; i < m; ++i)
                for (int j = 0; j < n; ++j) {
                    Mat Cp = C, Cm = C;
                    Cp(i, j) += h;
                    Cm(i, j) -= h;
                    const double up = dot(g, solve_owa_qp(w, Cp, qopt).x);
                    const double dn = dot(g, solve_owa_qp(w, Cm, qopt).x);
                    fd(i, j) = (up - dn) / (2.0 * h);
                }
            worst = std::max(worst, relative_error(grad.a, fd.a));
        }
        c.check("qp_kkt_fd", worst <= 1e-3, worst);
    }
    {  // blackbox: zero cotangent and plateau behaviour
        const GridGraph g(3, 3);
        const Vec cost = random_vec(rng, g.n_nodes(), 0.5, 1.5);
        const Vec zero(g.n_nodes(), 0.0);
        const double z1 = nrm_inf(backward_blackbox_lp(g, cost, zero, 20.0));
        Vec tiny(g.n_nodes(), 0.0);
        tiny[4] = 1e-9;  // far below any path-switch threshold
        const double z2 = nrm_inf(backward_blackbox_lp(g, cost, tiny, 1e-3));
        c.check("blackbox_zero", z1 == 0.0 && z2 == 0.0, std::max(z1, z2));
    }
    {  // SPO+ is zero at the truth on every region
        double worst = 0.0;
        const FeasibleRegion rs = FeasibleRegion::simplex(4);
        const Vec gamma_s = random_vec(rng, 4, -1.0, 1.0);
        worst = std::max(worst, nrm_inf(spo_plus_subgradient(gamma_s, gamma_s, rs)));
        const FeasibleRegion rg = FeasibleRegion::grid_flow(GridGraph(3, 3));
        const Vec gamma_g = (-1.0) * random_vec(rng, 9, 0.5, 1.5);
        worst = std::max(worst, nrm_inf(spo_plus_subgradient(gamma_g, gamma_g, rg)));
        const FeasibleRegion rb = FeasibleRegion::birkhoff(3);
        const Vec gamma_b = random_vec(rng, 9, -1.0, 1.0);
        worst = std::max(worst, nrm_inf(spo_plus_subgradient(gamma_b, gamma_b, rb)));
        c.check("spo_zero_at_truth", worst == 0.0, worst);
    }
    return rep;
}

VerifyReport verify_rank(uint64_t seed) {
    VerifyReport rep;
    rep.suite = "rank";
    Checker c{rep};
    Rng rng(seed);

    const int n = 6;
    Mat A(2, n, 0.0);
    std::vector<int> gof(n);
    for (int i = 0; i < n; ++i) {
        gof[i] = i < 2 ? 0 : 1;  // sizes 2 and 4
        A(gof[i], i) = 1.0;
    }
    const GroupStructure groups(A, gof);
    const PositionBias bias = dcg_position_bias(n);
    const OwaWeights w2 = fair_gini_weights(2);

    {  // lambda = 0 reduces to the deterministic sort policy
        double worst = 0.0;
        for (int t = 0; t < 10; ++t) {
            const Vec y = random_distinct_vec(rng, n, 0.0, 1.0);
            const Mat Pi = solve_fair_ranking_fw(y, groups, bias, 0.0, w2, 1.0, 200).Pi;
            const Mat P = ranking_vertex_from_scores(y);
            worst = std::max(worst, std::abs(ranking_utility(y, Pi, bias) - ranking_utility(y, P, bias)));
        }
        c.check("lambda0_matches_sort", worst <= 1e-3, worst);
    }
    {  // FW linearized subproblem equals the Birkhoff vertex oracle
        double worst = 0.0;
        for (int t = 0; t < 20; ++t) {
            const int nn = 3;
            const Vec mu = random_distinct_vec(rng, nn, -1.0, 1.0);
            const Vec b = dcg_position_bias(nn).b;
            Vec gamma(static_cast<size_t>(nn) * nn);
            for (int i = 0; i < nn; ++i)
                for (int j = 0; j < nn; ++j) gamma[static_cast<size_t>(i) * nn + j] = mu[i] * b[j];
            const Mat P = ranking_vertex_from_scores(mu);
            const Vec oracle = birkhoff_vertex_argmax(gamma, nn);
            worst = std::max(worst, nrm_inf(P.a - oracle));
        }
        c.check("subproblem_vs_vertex_oracle", worst == 0.0, worst);
    }
    {  // full fairness weight drives exposures together
        const Vec y = random_vec(rng, n, 0.0, 1.0);
        const Mat Pi = solve_fair_ranking_fw(y, groups, bias, 1.0, w2, 1.0, 500).Pi;
        const Vec e = group_exposures(groups, Pi, bias);
        const double gap = std::abs(e[0] - e[1]);
        c.check("lambda1_equalizes", gap <= 0.05, gap);
    }
    {  // doubly stochastic across the lambda grid
        bool ok = true;
        for (double lam : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const Vec y = random_vec(rng, n, 0.0, 1.0);
            ok = ok && is_doubly_stochastic(solve_fair_ranking_fw(y, groups, bias, lam, w2, 1.0, 97).Pi);
        }
        c.check("doubly_stochastic_grid", ok, 0.0);
    }
    return rep;
}

VerifyReport run_verify_suite(const std::string& name, uint64_t seed) {
    if (name == "owa") return verify_owa(seed);
    if (name == "geometry") return verify_geometry(seed);
    if (name == "solvers") return verify_solvers(seed);
    if (name == "gradients") return verify_gradients(seed);
    if (name == "rank") return verify_rank(seed);
    if (name == "all") {
        VerifyReport all;
        all.suite = "all";
        for (const char* s : {"owa", "geometry", "solvers", "gradients", "rank"})
            all.merge(run_verify_suite(s, seed));
        return all;
    }
    throw std::invalid_argument("unknown verify suite: " + name +
                                " (expected owa|geometry|solvers|gradients|rank|all)");
}

}  // namespace owa
