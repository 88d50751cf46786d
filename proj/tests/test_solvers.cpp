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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "owa/oracles.hpp"
#include "owa/solvers.hpp"

using namespace owa;

namespace {

Mat identity(int n) {
    Mat I(n, n, 0.0);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

}  // namespace

TEST_CASE("projected subgradient: linear objective reaches the best vertex") {
    Mat C(1, 4, 0.0);
    C(0, 0) = 1.0;
    const SolveReport rep = solve_owa_projected_subgradient(fair_gini_weights(1), C, high_accuracy_pgd());
    CHECK(rep.objective == doctest::Approx(1.0).epsilon(1e-5));
    CHECK(rep.x[0] == doctest::Approx(1.0).epsilon(1e-4));
}

TEST_CASE("projected subgradient: symmetric two-criteria case splits evenly") {
    const SolveReport rep =
        solve_owa_projected_subgradient(fair_gini_weights(2), identity(2), high_accuracy_pgd());
    CHECK(rep.x[0] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(rep.x[1] == doctest::Approx(0.5).epsilon(1e-5));
    CHECK(rep.objective == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("projected subgradient vs fine grid oracle on random instances") {
    Rng rng(101);
    for (int t = 0; t < 5; ++t) {
        const OwaWeights w = fair_gini_weights(3);
        const Mat C = random_mat(rng, 3, 4, 0.0, 1.0);
        const double best = solve_owa_projected_subgradient(w, C, high_accuracy_pgd()).objective;
        const double oracle = owa_enumeration_oracle(w, C, 0.01);
        CHECK(best >= oracle - 1e-9);  // grid points are feasible
        CHECK(best <= oracle + 1e-2);  // and the grid is within a step of optimal
    }
}

TEST_CASE("solver report: feasibility and default iteration schedule") {
    Rng rng(103);
    for (int m : {3, 5, 7}) {
        const Mat C = random_mat(rng, m, 5, 0.0, 1.0);
        const SolveReport rep = solve_owa_projected_subgradient(fair_gini_weights(m), C);
        CHECK(FeasibleRegion::simplex(5).contains(rep.x));
        CHECK(rep.iterations == (m <= 3 ? 300 : m <= 5 ? 500 : 750));
    }
}

TEST_CASE("Frank-Wolfe: linear case converges to the vertex at 1/k rate") {
    Mat C(1, 3, 0.0);
    C(0, 0) = 2.0;
    C(0, 1) = 1.0;
    const int iters = 500;
    const SolveReport rep = solve_owa_moreau_frankwolfe(fair_gini_weights(1), C, SmoothingParam(1e-3), iters);
    // objective gap bounded by 2 D / (k+2), D = objective spread over the simplex
    const double gap = 2.0 - owa_of_decision(fair_gini_weights(1), C, rep.x);
    CHECK(gap <= 2.0 * 2.0 / (iters + 2.0) + 1e-6);
    CHECK(FeasibleRegion::simplex(3).contains(rep.x));
}

TEST_CASE("Frank-Wolfe matches the projected-subgradient solution on the symmetric case") {
    const OwaWeights w = fair_gini_weights(2);
    const SolveReport fw = solve_owa_moreau_frankwolfe(w, identity(2), SmoothingParam(1e-3), 500);
    const SolveReport pgd = solve_owa_projected_subgradient(w, identity(2), high_accuracy_pgd());
    CHECK(std::abs(owa_of_decision(w, identity(2), fw.x) - pgd.objective) <= 1e-3);
}

TEST_CASE("Frank-Wolfe: smoothed objective within O(beta) of the unsmoothed optimum") {
    Rng rng(107);
    for (int t = 0; t < 4; ++t) {
        const OwaWeights w = fair_gini_weights(3);
        const Mat C = random_mat(rng, 3, 4, 0.0, 1.0);
        const double pgd = solve_owa_projected_subgradient(w, C, high_accuracy_pgd()).objective;
        for (double beta : {1e-2, 1e-3}) {
            const SolveReport fw = solve_owa_moreau_frankwolfe(w, C, SmoothingParam(beta), 100000);
            CHECK(std::abs(owa_of_decision(w, C, fw.x) - pgd) <= beta + 2e-3);
        }
    }
}

TEST_CASE("Frank-Wolfe: best-so-far objective is nondecreasing in the budget") {
    Rng rng(109);
    const OwaWeights w = fair_gini_weights(3);
    const Mat C = random_mat(rng, 3, 5, 0.0, 1.0);
    double prev = -1e18;
    for (int iters : {50, 100, 200, 400, 800}) {
        const double obj = solve_owa_moreau_frankwolfe(w, C, SmoothingParam(1e-2), iters).objective;
        CHECK(obj >= prev - 1e-12);
        prev = obj;
    }
}

TEST_CASE("QP reformulation: eps = 0 recovers the LP and binds z at the OWA value") {
    Rng rng(113);
    for (int t = 0; t < 5; ++t) {
        const OwaWeights w = fair_gini_weights(2 + static_cast<int>(rng() % 2));
        const Mat C = random_mat(rng, w.dim(), 3, 0.0, 1.0);
        OwaQpOptions opt;
        opt.epsilon = 0.0;
        const OwaQpSolution sol = solve_owa_qp(w, C, opt);
        CHECK(std::abs(sol.z - owa_of_decision(w, C, sol.x)) <= 1e-6);
        CHECK(FeasibleRegion::simplex(3).contains(sol.x));
        // against the other route
        const double pgd = solve_owa_projected_subgradient(w, C, high_accuracy_pgd()).objective;
        CHECK(std::abs(sol.z - pgd) <= 1e-3);
    }
}

TEST_CASE("QP reformulation: hand-checkable symmetric instance") {
    const OwaWeights w({0.7, 0.3}, true);
    OwaQpOptions opt;
    opt.epsilon = 0.0;
    const OwaQpSolution sol = solve_owa_qp(w, identity(2), opt);
    CHECK(sol.z == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(sol.x[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(sol.y[0] == doctest::Approx(0.5).epsilon(1e-4));
    CHECK(sol.constraint_count == 2);
}

TEST_CASE("QP reformulation: eps continuation approaches the LP objective") {
    Rng rng(127);
    const OwaWeights w = fair_gini_weights(3);
    const Mat C = random_mat(rng, 3, 4, 0.25, 2.25);
    OwaQpOptions opt;
    opt.epsilon = 0.0;
    const double lp = solve_owa_qp(w, C, opt).z;
    double prev_gap = 1e18;
    for (double eps : {1e-1, 1e-2, 1e-3}) {
        OwaQpOptions o;
        o.epsilon = eps;
        const OwaQpSolution sol = solve_owa_qp(w, C, o);
        const double gap = std::abs(owa_of_decision(w, C, sol.x) - lp);
        CHECK(gap <= 10.0 * eps + 1e-5);
        CHECK(gap <= prev_gap + 1e-6);
        prev_gap = gap;
    }
}

TEST_CASE("QP reformulation: factorial bookkeeping and capacity refusal") {
    Rng rng(131);
    for (int m = 2; m <= 4; ++m) {
        long f = 1;
        for (int i = 2; i <= m; ++i) f *= i;
        const OwaQpSolution sol = solve_owa_qp(fair_gini_weights(m), random_mat(rng, m, 3, 0.0, 1.0));
        CHECK(sol.constraint_count == f);
    }
    CHECK_THROWS_AS(solve_owa_qp(fair_gini_weights(7), random_mat(rng, 7, 3, 0.0, 1.0)),
                    std::runtime_error);
}

TEST_CASE("shortest path: uniform 2x2 grid ties deterministically") {
    const GridGraph g(2, 2);
    const Vec cost(4, 0.7);
    const PathSolution a = solve_shortest_path(g, cost);
    CHECK(a.nodes.size() == 3);
    CHECK(a.cost == doctest::Approx(3 * 0.7));
    const PathSolution b = solve_shortest_path(g, cost);
    CHECK(a.nodes == b.nodes);  // deterministic tie-break
}

TEST_CASE("shortest path: hugs the cheap row on a 3x3 grid") {
    const GridGraph g(3, 3);
    Vec cost(9, 5.0);
    // bottom row cheap
    for (int j = 0; j < 3; ++j) cost[g.node_id(2, j)] = 0.1;
    cost[g.source] = 5.0;
    const PathSolution sol = solve_shortest_path(g, cost);
    // exhaustive check over all simple paths
    double best = 1e18;
    for (const auto& path : enumerate_simple_paths(g)) {
        double s = 0.0;
        for (int v : path) s += cost[v];
        best = std::min(best, s);
    }
    CHECK(sol.cost == doctest::Approx(best).epsilon(1e-12));
    // the optimal route descends to the cheap bottom row immediately
    CHECK(sol.node_x[g.node_id(1, 0)] == 1.0);
    CHECK(sol.node_x[g.node_id(2, 0)] == 1.0);
    CHECK(sol.node_x[g.node_id(2, 1)] == 1.0);
}

TEST_CASE("shortest path: random 4x4 grids match exhaustive enumeration") {
    Rng rng(137);
    const GridGraph g(4, 4);
    const auto paths = enumerate_simple_paths(g);
    for (int t = 0; t < 10; ++t) {
        const Vec cost = random_vec(rng, g.n_nodes(), 0.05, 2.0);
        const PathSolution sol = solve_shortest_path(g, cost);
        double best = 1e18;
        for (const auto& path : paths) {
            double s = 0.0;
            for (int v : path) s += cost[v];
            best = std::min(best, s);
        }
        CHECK(sol.cost == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("shortest path: flow conservation of the edge indicator") {
    Rng rng(139);
    const GridGraph g(4, 3);
    const Vec cost = random_vec(rng, g.n_nodes(), 0.1, 1.0);
    const PathSolution sol = solve_shortest_path(g, cost);
    Vec net(g.n_nodes(), 0.0);
    for (int e = 0; e < g.n_edges(); ++e) {
        net[g.edges[e].first] += sol.edge_x[e];
        net[g.edges[e].second] -= sol.edge_x[e];
    }
    for (int v = 0; v < g.n_nodes(); ++v) {
        const double expect = v == g.source ? 1.0 : v == g.sink ? -1.0 : 0.0;
        CHECK(net[v] == doctest::Approx(expect));
    }
    for (double v : sol.edge_x) CHECK((v == 0.0 || v == 1.0));
}

TEST_CASE("shortest path: negative predictions are clamped, unreachable sink throws") {
    const GridGraph g(2, 3);
    Vec cost(6, 1.0);
    cost[1] = -5.0;  // clamped to a tiny positive cost for the solve
    const PathSolution sol = solve_shortest_path(g, cost);
    CHECK(sol.node_x[1] == 1.0);
    GridGraph broken(2, 2);
    broken.edges.clear();
    CHECK_THROWS_AS(solve_shortest_path(broken, Vec(4, 1.0)), std::runtime_error);
}

TEST_CASE("enumeration oracle basics") {
    Mat C(1, 3, 0.0);
    C(0, 0) = 0.4;
    C(0, 1) = 0.9;
    C(0, 2) = 0.1;
    CHECK(owa_enumeration_oracle(fair_gini_weights(1), C, 0.05) ==
          doctest::Approx(0.9).epsilon(1e-12));
    CHECK(owa_enumeration_oracle(OwaWeights({0.7, 0.3}, true), identity(2), 0.01) ==
          doctest::Approx(0.5).epsilon(1e-12));
    CHECK_THROWS_AS(owa_enumeration_oracle(fair_gini_weights(1), Mat(1, 5, 1.0), 0.1),
                    std::invalid_argument);
}

TEST_CASE("fair ranking FW: lambda = 0 keeps the relevance sort") {
    Rng rng(149);
    const int n = 5;
    const Vec y = random_distinct_vec(rng, n, 0.0, 1.0);
    Mat A(2, n, 0.0);
    std::vector<int> gof{0, 0, 1, 1, 1};
    for (int i = 0; i < n; ++i) A(gof[i], i) = 1.0;
    const GroupStructure groups(A, gof);
    const PositionBias bias = dcg_position_bias(n);
    const Mat Pi = solve_fair_ranking_fw(y, groups, bias, 0.0, fair_gini_weights(2), 1.0, 500).Pi;
    const Mat P = ranking_vertex_from_scores(y);
    CHECK(std::abs(ranking_utility(y, Pi, bias) - ranking_utility(y, P, bias)) <= 1e-3);
}

TEST_CASE("fair ranking FW: full fairness weight equalizes group exposures") {
    // n = 3, two groups of sizes 1 and 2
    const int n = 3;
    Mat A(2, n, 0.0);
    std::vector<int> gof{0, 1, 1};
    for (int i = 0; i < n; ++i) A(gof[i], i) = 1.0;
    const GroupStructure groups(A, gof);
    const PositionBias bias = dcg_position_bias(n);
    const OwaWeights w = fair_gini_weights(2);
    const Vec y{0.9, 0.5, 0.1};
    const Mat Pi = solve_fair_ranking_fw(y, groups, bias, 1.0, w, 1.0, 500).Pi;
    CHECK(is_doubly_stochastic(Pi));
    const Vec e = group_exposures(groups, Pi, bias);

    // exhaustive oracle: best achievable equalization over convex combinations
    // of the 6 permutation matrices on a fine grid
    std::vector<Mat> verts;
    {
        std::vector<int> perm{0, 1, 2};
        do {
            Mat P(n, n, 0.0);
            for (int pos = 0; pos < n; ++pos) P(perm[pos], pos) = 1.0;
            verts.push_back(P);
        } while (std::next_permutation(perm.begin(), perm.end()));
    }
    double best_gap = 1e18;
    const int steps = 20;
    std::function<void(int, int, std::vector<int>&)> rec = [&](int i, int left, std::vector<int>& kcur) {
        if (i == 5) {
            kcur[5] = left;
            Mat M(n, n, 0.0);
            for (int v = 0; v < 6; ++v)
                for (size_t t = 0; t < M.a.size(); ++t) M.a[t] += (static_cast<double>(kcur[v]) / steps) * verts[v].a[t];
            const Vec ee = group_exposures(groups, M, bias);
            best_gap = std::min(best_gap, std::abs(ee[0] - ee[1]));
            return;
        }
        for (int k = 0; k <= left; ++k) {
            kcur[i] = k;
            rec(i + 1, left - k, kcur);
        }
    };
    std::vector<int> kcur(6, 0);
    rec(0, steps, kcur);

    const double fw_gap = std::abs(e[0] - e[1]);
    CHECK(fw_gap <= best_gap + 0.05);  // fairness violation within 0.05 of the oracle optimum
}

TEST_CASE("fair ranking FW: linear subproblem equals the Birkhoff vertex oracle") {
    Rng rng(151);
    for (int t = 0; t < 20; ++t) {
        const int n = 3;
        const Vec mu = random_distinct_vec(rng, n, -1.0, 1.0);
        const Vec b = dcg_position_bias(n).b;
        Vec gamma(static_cast<size_t>(n) * n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) gamma[static_cast<size_t>(i) * n + j] = mu[i] * b[j];
        CHECK(nrm_inf(ranking_vertex_from_scores(mu).a - birkhoff_vertex_argmax(gamma, n)) == 0.0);
    }
}

TEST_CASE("fair ranking FW: doubly stochastic for every T, lambda, seed") {
    Rng rng(157);
    for (int t = 0; t < 12; ++t) {
        const int n = 2 + static_cast<int>(rng() % 6);
        const Vec y = random_vec(rng, n, 0.0, 1.0);
        std::vector<int> gof(n);
        Mat A(2, n, 0.0);
        for (int i = 0; i < n; ++i) {
            gof[i] = i % 2;
            A(gof[i], i) = 1.0;
        }
        const GroupStructure groups(A, gof);
        const int T = 1 + static_cast<int>(rng() % 300);
        const double lam = uniform(rng, 0.0, 1.0);
        const Mat Pi =
            solve_fair_ranking_fw(y, groups, dcg_position_bias(n), lam, fair_gini_weights(2), 1.0, T).Pi;
        CHECK(is_doubly_stochastic(Pi));
    }
}

TEST_CASE("feasible regions: linear argmax and membership") {
    const FeasibleRegion s = FeasibleRegion::simplex(3);
    CHECK(s.linear_argmax({0.1, 0.9, 0.3})[1] == 1.0);
    CHECK(s.contains({0.2, 0.3, 0.5}));
    CHECK_FALSE(s.contains({0.5, 0.6, -0.1}));

    const FeasibleRegion b = FeasibleRegion::birkhoff(3);
    Rng rng(163);
    const Vec gamma = random_vec(rng, 9, -1.0, 1.0);
    CHECK(nrm_inf(b.linear_argmax(gamma) - birkhoff_vertex_argmax(gamma, 3)) == 0.0);

    const FeasibleRegion gf = FeasibleRegion::grid_flow(GridGraph(3, 3));
    const Vec gamma_g = (-1.0) * random_vec(rng, 9, 0.5, 1.5);
    const Vec x = gf.linear_argmax(gamma_g);
    CHECK(gf.contains(x));
}
