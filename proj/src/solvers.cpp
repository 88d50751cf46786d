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

#include "owa/solvers.hpp"

#include <limits>

namespace owa {

// ---------------------------------------------------------------------------
// FeasibleRegion

FeasibleRegion FeasibleRegion::simplex(int n) {
    if (n < 1) throw std::invalid_argument("FeasibleRegion: simplex dimension must be >= 1");
    FeasibleRegion r;
    r.kind = Kind::Simplex;
    r.n = n;
    return r;
}

FeasibleRegion FeasibleRegion::grid_flow(GridGraph g) {
    FeasibleRegion r;
    r.kind = Kind::GridFlow;
    r.n = g.n_nodes();
    r.graph = std::move(g);
    return r;
}

FeasibleRegion FeasibleRegion::birkhoff(int n) {
    if (n < 1) throw std::invalid_argument("FeasibleRegion: Birkhoff order must be >= 1");
    FeasibleRegion r;
    r.kind = Kind::Birkhoff;
    r.n = n;
    return r;
}

int FeasibleRegion::decision_dim() const {
    switch (kind) {
        case Kind::Simplex: return n;
        case Kind::GridFlow: return graph.n_nodes();
        case Kind::Birkhoff: return n * n;
    }
    return 0;
}

Vec FeasibleRegion::linear_argmax(const Vec& gamma) const {
    if (static_cast<int>(gamma.size()) != decision_dim())
        throw std::invalid_argument("FeasibleRegion::linear_argmax: dimension mismatch");
    switch (kind) {
        case Kind::Simplex: {
            int best = 0;
            for (int i = 1; i < n; ++i)
                if (gamma[i] > gamma[best]) best = i;
            Vec x(n, 0.0);
            x[best] = 1.0;
            return x;
        }
        case Kind::GridFlow: {
            // max gamma^T x over paths = min (-gamma)^T x.
            Vec cost(gamma.size());
            for (size_t i = 0; i < gamma.size(); ++i) cost[i] = -gamma[i];
            return solve_shortest_path(graph, cost).node_x;
        }
        case Kind::Birkhoff: {
            if (n > 8) throw std::invalid_argument("FeasibleRegion: Birkhoff argmax enumerates vertices, n <= 8");
            std::vector<int> perm(n);
            std::iota(perm.begin(), perm.end(), 0);
            double best = -std::numeric_limits<double>::infinity();
            std::vector<int> best_perm = perm;
            do {
                double v = 0.0;
                for (int j = 0; j < n; ++j) v += gamma[static_cast<size_t>(perm[j]) * n + j];
                if (v > best) {
                    best = v;
                    best_perm = perm;
                }
            } while (std::next_permutation(perm.begin(), perm.end()));
            Vec x(static_cast<size_t>(n) * n, 0.0);
            for (int j = 0; j < n; ++j) x[static_cast<size_t>(best_perm[j]) * n + j] = 1.0;
            return x;
        }
    }
    throw std::logic_error("unreachable");
}

bool FeasibleRegion::contains(const Vec& x, double tol) const {
    if (static_cast<int>(x.size()) != decision_dim()) return false;
    switch (kind) {
        case Kind::Simplex: {
            if (std::abs(sum(x) - 1.0) > tol) return false;
            for (double v : x)
                if (v < -tol) return false;
            return true;
        }
        case Kind::GridFlow: {
            // Binary node indicator containing source and sink.
            for (double v : x)
                if (std::abs(v) > tol && std::abs(v - 1.0) > tol) return false;
            return std::abs(x[graph.source] - 1.0) <= tol && std::abs(x[graph.sink] - 1.0) <= tol;
        }
        case Kind::Birkhoff: {
            Mat Pi(n, n);
            Pi.a = x;
            return is_doubly_stochastic(Pi, tol);
        }
    }
    return false;
}

// ---------------------------------------------------------------------------
// Projected subgradient ascent over the simplex.

PgdOptions high_accuracy_pgd() {
    PgdOptions o;
    o.iters = 20000;
    o.alpha = 0.1;
    o.step_decay = true;
    o.decay_rate = 0.5;
    o.decay_every = 1000;
    return o;
}

namespace {

int default_subgrad_iters(int m) {
    if (m <= 3) return 300;
    if (m <= 5) return 500;
    return 750;
}

}  // namespace

SolveReport solve_owa_projected_subgradient(const OwaWeights& w, const Mat& C, PgdOptions opt) {
    const int n = C.cols;
    if (C.rows != w.dim()) throw std::invalid_argument("solve_owa_projected_subgradient: shape mismatch");
    const int iters = opt.iters > 0 ? opt.iters : default_subgrad_iters(w.dim());

    Vec x(n, 1.0 / n);
    Vec best_x = x;
    double best = owa_of_decision(w, C, x);
    double step = opt.alpha;
    double residual = 0.0;

    int stage = 0;
    for (int k = 0; k < iters; ++k) {
        Vec g = owa_decision_subgradient(w, C, x);
        if (opt.step_decay) {
            // Staged schedule: constant normalized steps within a stage, step
            // halved between stages, and each stage restarts from the best
            // iterate so far. Reliable on sharp piecewise-linear objectives
            // where a monotone decay can strand the iterate mid-oscillation.
            const int s = k / opt.decay_every;
            if (s != stage) {
                stage = s;
                x = best_x;
            }
            step = opt.alpha * std::pow(opt.decay_rate, stage);
            const double gn = nrm2(g);
            if (gn > 0.0) g = (1.0 / gn) * g;
        }
        Vec next = project_simplex(x + step * g);
        residual = nrm2(next - x);
        x = std::move(next);
        const double val = owa_of_decision(w, C, x);
        if (std::isnan(val)) throw std::runtime_error("solve_owa_projected_subgradient: objective diverged (NaN)");
        if (val > best) {
            best = val;
            best_x = x;
        }
    }

    SolveReport rep;
    rep.x = std::move(best_x);
    rep.objective = best;
    rep.iterations = iters;
    rep.final_step = step;
    rep.residual = residual;
    return rep;
}

// ---------------------------------------------------------------------------
// Frank-Wolfe on the Moreau-smoothed objective.

SolveReport solve_owa_moreau_frankwolfe(const OwaWeights& w, const Mat& C, SmoothingParam beta,
                                        int iters) {
    const int n = C.cols;
    if (C.rows != w.dim()) throw std::invalid_argument("solve_owa_moreau_frankwolfe: shape mismatch");
    if (iters < 1) throw std::invalid_argument("solve_owa_moreau_frankwolfe: iters must be >= 1");

    Vec x(n, 1.0 / n);
    Vec best_x = x;
    double best = moreau_owa_value(w, matvec(C, x), beta);
    double gap = 0.0;

    for (int k = 0; k < iters; ++k) {
        const Vec grad_x = matTvec(C, moreau_owa_gradient(w, matvec(C, x), beta));
        int top = 0;
        for (int i = 1; i < n; ++i)
            if (grad_x[i] > grad_x[top]) top = i;
        gap = grad_x[top] - dot(grad_x, x);  // FW duality gap estimate
        const double step = 2.0 / (k + 2.0);
        for (int i = 0; i < n; ++i) x[i] *= (1.0 - step);
        x[top] += step;
        const double val = moreau_owa_value(w, matvec(C, x), beta);
        if (std::isnan(val)) throw std::runtime_error("solve_owa_moreau_frankwolfe: objective diverged (NaN)");
        if (val > best) {
            best = val;
            best_x = x;
        }
    }

    SolveReport rep;
    rep.x = std::move(best_x);
    rep.objective = best;
    rep.iterations = iters;
    rep.final_step = 2.0 / (iters + 1.0);
    rep.residual = gap;
    return rep;
}

namespace {

// Spectral norm estimate of C^T C by power iteration; deterministic start.
double sigma_max_sq(const Mat& C) {
    Vec v(C.cols, 1.0 / std::sqrt(static_cast<double>(C.cols)));
    double lam = 0.0;
    for (int it = 0; it < 60; ++it) {
        Vec u = matTvec(C, matvec(C, v));
        lam = nrm2(u);
        if (lam <= 0.0) return 0.0;
        v = (1.0 / lam) * u;
    }
    return lam;
}

}  // namespace

SmoothedSolve solve_owa_moreau_pgd(const OwaWeights& w, const Mat& C, SmoothingParam beta,
                                   int iters, double alpha, double tol, const Vec* x0) {
    const int n = C.cols;
    if (C.rows != w.dim()) throw std::invalid_argument("solve_owa_moreau_pgd: shape mismatch");
    if (alpha <= 0.0) {
        const double s2 = sigma_max_sq(C);
        alpha = s2 > 0.0 ? std::min(0.02, beta.beta / s2) : 0.02;
    }

    Vec x = x0 && static_cast<int>(x0->size()) == n ? project_simplex(*x0) : Vec(n, 1.0 / n);
    SmoothedSolve out;
    out.alpha = alpha;
    for (int k = 0; k < iters; ++k) {
        const Vec grad_x = matTvec(C, moreau_owa_gradient(w, matvec(C, x), beta));
        Vec next = project_simplex(x + alpha * grad_x);
        out.residual = nrm2(next - x);
        x = std::move(next);
        out.iterations = k + 1;
        if (out.residual <= tol) break;
    }
    out.x = std::move(x);
    out.objective = moreau_owa_value(w, matvec(C, out.x), beta);
    if (std::isnan(out.objective)) throw std::runtime_error("solve_owa_moreau_pgd: objective diverged (NaN)");
    return out;
}

// ---------------------------------------------------------------------------
// QP reformulation with the factorial constraint block.

namespace {

long factorial(int m) {
    long f = 1;
    for (int i = 2; i <= m; ++i) f *= i;
    return f;
}

std::vector<std::vector<int>> all_permutations(int m) {
    std::vector<int> p(m);
    std::iota(p.begin(), p.end(), 0);
    std::vector<std::vector<int>> out;
    out.reserve(factorial(m));
    do {
        out.push_back(p);
    } while (std::next_permutation(p.begin(), p.end()));
    return out;
}

struct QpWork {
    int m = 0, n = 0;
    double eps = 0.0;
    Mat W;  // m! x m permuted weight rows
    std::vector<std::vector<int>> perms;
    const Mat* C = nullptr;
    double cap = 0.0;  // unconstrained-in-z maximizer 1/(2 eps)

    double min_row(const Vec& y, int* arg = nullptr) const {
        double best = std::numeric_limits<double>::infinity();
        int bi = 0;
        for (int r = 0; r < W.rows; ++r) {
            double s = 0.0;
            const double* row = W.row(r);
            for (int i = 0; i < m; ++i) s += row[i] * y[i];
            if (s < best) {
                best = s;
                bi = r;
            }
        }
        if (arg) *arg = bi;
        return best;
    }

    double objective(const Vec& x, const Vec& y, double z) const {
        return z - eps * (dot(x, x) + dot(y, y) + z * z);
    }
};

// Square KKT system on the conjectured active structure. Unknown layout:
// [x_F, y, z, mu, lambda_A, nu].
struct KktSystem {
    Mat K;
    Vec rhs;
    int f = 0, m = 0, na = 0;
    int ox = 0, oy = 0, oz = 0, omu = 0, ola = 0, onu = 0;
};

KktSystem assemble_kkt(const QpWork& qp, const std::vector<int>& F, const std::vector<int>& A) {
    const int f = static_cast<int>(F.size());
    const int m = qp.m;
    const int na = static_cast<int>(A.size());
    const int N = f + 2 * m + na + 2;
    KktSystem s;
    s.f = f;
    s.m = m;
    s.na = na;
    s.ox = 0;
    s.oy = f;
    s.oz = f + m;
    s.omu = f + m + 1;
    s.ola = f + 2 * m + 1;
    s.onu = f + 2 * m + 1 + na;
    s.K = Mat(N, N, 0.0);
    s.rhs.assign(N, 0.0);
    const Mat& C = *qp.C;
    int row = 0;
    // x-stationarity on free coordinates: -2e x_i - (C^T mu)_i + nu = 0
    for (int a = 0; a < f; ++a, ++row) {
        const int i = F[a];
        s.K(row, s.ox + a) = -2.0 * qp.eps;
        for (int t = 0; t < m; ++t) s.K(row, s.omu + t) = -C(t, i);
        s.K(row, s.onu) = 1.0;
    }
    // y-stationarity: -2e y + mu + W_A^T lambda = 0
    for (int t = 0; t < m; ++t, ++row) {
        s.K(row, s.oy + t) = -2.0 * qp.eps;
        s.K(row, s.omu + t) = 1.0;
        for (int r = 0; r < na; ++r) s.K(row, s.ola + r) = qp.W(A[r], t);
    }
    // z-stationarity: -2e z - sum lambda = -1
    s.K(row, s.oz) = -2.0 * qp.eps;
    for (int r = 0; r < na; ++r) s.K(row, s.ola + r) = -1.0;
    s.rhs[row] = -1.0;
    ++row;
    // coupling y = C x (x zero off the free set)
    for (int t = 0; t < m; ++t, ++row) {
        s.K(row, s.oy + t) = 1.0;
        for (int a = 0; a < f; ++a) s.K(row, s.ox + a) = -C(t, F[a]);
    }
    // active permutation rows: w_r . y - z = 0
    for (int r = 0; r < na; ++r, ++row) {
        for (int t = 0; t < m; ++t) s.K(row, s.oy + t) = qp.W(A[r], t);
        s.K(row, s.oz) = -1.0;
    }
    // simplex equality
    for (int a = 0; a < f; ++a) s.K(row, s.ox + a) = 1.0;
    s.rhs[row] = 1.0;
    return s;
}

}  // namespace

OwaQpSolution solve_owa_qp(const OwaWeights& w, const Mat& C, OwaQpOptions opt) {
    const int m = w.dim();
    const int n = C.cols;
    if (C.rows != m) throw std::invalid_argument("solve_owa_qp: shape mismatch");
    if (m > 6)
        throw std::runtime_error(
            "solve_owa_qp: refusing m > 6; the reformulation materializes m! permutation "
            "constraints and grows factorially");
    if (opt.epsilon < 0.0) throw std::invalid_argument("solve_owa_qp: epsilon must be >= 0");

    QpWork qp;
    qp.m = m;
    qp.n = n;
    qp.eps = opt.epsilon;
    qp.C = &C;
    qp.perms = all_permutations(m);
    qp.W = Mat(static_cast<int>(qp.perms.size()), m);
    for (size_t r = 0; r < qp.perms.size(); ++r)
        for (int i = 0; i < m; ++i) qp.W(static_cast<int>(r), i) = w[qp.perms[r][i]];
    qp.cap = qp.eps > 0.0 ? 0.5 / qp.eps : std::numeric_limits<double>::infinity();

    // Warm start: projected supergradient on the reduced problem in x, staged
    // halving steps with best-iterate restarts.
    Vec x(n, 1.0 / n);
    Vec best_x = x;
    double best_phi = -std::numeric_limits<double>::infinity();
    const int stage_len = std::max(300, opt.warm_iters / 20);
    int stage = 0;
    for (int k = 0; k < opt.warm_iters; ++k) {
        const int s = k / stage_len;
        if (s != stage) {
            stage = s;
            x = best_x;
        }
        const Vec y = matvec(C, x);
        int rstar = 0;
        const double h = qp.min_row(y, &rstar);
        const double z = std::min(h, qp.cap);
        const double phi = qp.objective(x, y, z);
        if (phi > best_phi) {
            best_phi = phi;
            best_x = x;
        }
        Vec g(n, 0.0);
        if (h <= qp.cap) {
            const Vec wr = qp.W.row_vec(rstar);
            g = (1.0 - 2.0 * qp.eps * z) * matTvec(C, wr);
        }
        axpy(-2.0 * qp.eps, x, g);
        Vec cty = matTvec(C, y);
        axpy(-2.0 * qp.eps, cty, g);
        const double gn = nrm2(g);
        if (gn > 0.0) g = (1.0 / gn) * g;
        const double step = 0.1 * std::pow(0.5, stage);
        x = project_simplex(x + step * g);
    }
    x = best_x;

    OwaQpSolution sol;
    sol.epsilon = qp.eps;
    sol.constraint_count = static_cast<long>(qp.perms.size());

    // Conjecture the active structure from the warm solution.
    Vec y = matvec(C, x);
    int rstar = 0;
    double h = qp.min_row(y, &rstar);
    double z = std::min(h, qp.cap);
    const double scale = std::max(1.0, std::abs(z));
    std::vector<int> F, A;
    for (int i = 0; i < n; ++i)
        if (x[i] > 1e-6) F.push_back(i);
    if (F.empty()) F.push_back(rstar % n);
    if (h <= qp.cap + 1e-4 * scale) {
        for (int r = 0; r < qp.W.rows; ++r) {
            double s = 0.0;
            for (int t = 0; t < m; ++t) s += qp.W(r, t) * y[t];
            if (s <= z + 1e-4 * scale) A.push_back(r);
        }
    }

    Vec xs, ys, mu, lambda;
    double zs = z, nu = 0.0;
    bool solved = false;
    for (int round = 0; round < opt.max_active_rounds; ++round) {
        KktSystem sys = assemble_kkt(qp, F, A);
        auto u = solve_lu(sys.K, sys.rhs);
        if (!u) {
            sol.degenerate = true;
            u = solve_least_squares(sys.K, sys.rhs);
        }
        const Vec& uv = *u;
        xs.assign(n, 0.0);
        for (int a = 0; a < sys.f; ++a) xs[F[a]] = uv[sys.ox + a];
        ys.assign(uv.begin() + sys.oy, uv.begin() + sys.oy + m);
        zs = uv[sys.oz];
        mu.assign(uv.begin() + sys.omu, uv.begin() + sys.omu + m);
        lambda.assign(uv.begin() + sys.ola, uv.begin() + sys.ola + sys.na);
        nu = uv[sys.onu];

        const double tol = 1e-9 * scale;
        // Release order mirrors a primal-dual active set method: fix primal
        // bound violations first, then dual signs, then missed constraints.
        int worst_i = -1;
        double worst = -tol;
        for (int a = 0; a < sys.f; ++a)
            if (xs[F[a]] < worst) {
                worst = xs[F[a]];
                worst_i = a;
            }
        if (worst_i >= 0 && F.size() > 1) {
            F.erase(F.begin() + worst_i);
            continue;
        }
        int worst_r = -1;
        worst = -tol;
        for (int r = 0; r < sys.na; ++r)
            if (lambda[r] < worst) {
                worst = lambda[r];
                worst_r = r;
            }
        if (worst_r >= 0) {
            A.erase(A.begin() + worst_r);
            continue;
        }
        // Most violated inactive permutation row.
        int add_r = -1;
        double viol = 1e-9 * scale;
        for (int r = 0; r < qp.W.rows; ++r) {
            double s = 0.0;
            for (int t = 0; t < m; ++t) s += qp.W(r, t) * ys[t];
            const double v = zs - s;
            if (v > viol && std::find(A.begin(), A.end(), r) == A.end()) {
                viol = v;
                add_r = r;
            }
        }
        if (add_r >= 0) {
            A.push_back(add_r);
            continue;
        }
        // Bound duals on fixed coordinates.
        int add_i = -1;
        double rho_min = -1e-9 * scale;
        const Vec ctmu = matTvec(C, mu);
        for (int i = 0; i < n; ++i) {
            if (std::find(F.begin(), F.end(), i) != F.end()) continue;
            const double rho = ctmu[i] - nu;
            if (rho < rho_min) {
                rho_min = rho;
                add_i = i;
            }
        }
        if (add_i >= 0) {
            F.push_back(add_i);
            std::sort(F.begin(), F.end());
            continue;
        }
        solved = true;
        break;
    }

    bool use_polish = solved && all_finite(xs) && all_finite(ys) && std::isfinite(zs);
    if (use_polish) {
        // The polished point must be feasible and no worse than the warm
        // iterate, else the conjectured active structure was wrong.
        const double s2 = std::max(1.0, std::abs(zs));
        bool feasible = std::abs(sum(xs) - 1.0) <= 1e-7;
        for (double v : xs) feasible = feasible && v >= -1e-7;
        feasible = feasible && zs <= qp.min_row(ys) + 1e-6 * s2;
        use_polish = feasible && qp.objective(xs, ys, zs) >= best_phi - 1e-9;
    }
    if (!use_polish) {
        // Fall back to the warm-start iterate; duals undetermined.
        xs = x;
        ys = matvec(C, xs);
        zs = std::min(qp.min_row(ys), qp.cap);
        mu.assign(m, 0.0);
        lambda.clear();
        A.clear();
        sol.degenerate = true;
    }

    // KKT residual over the full condition set.
    double res = 0.0;
    {
        const Vec ctmu = matTvec(C, mu);
        Vec wsum(m, 0.0);
        double lam_sum = 0.0;
        for (size_t r = 0; r < A.size(); ++r) {
            for (int t = 0; t < m; ++t) wsum[t] += lambda[r] * qp.W(A[r], t);
            lam_sum += lambda[r];
            res = std::max(res, std::max(0.0, -lambda[r]));
        }
        for (int i = 0; i < n; ++i) {
            const double stat = -2.0 * qp.eps * xs[i] - ctmu[i] + nu;
            if (xs[i] > 1e-9)
                res = std::max(res, std::abs(stat));
            else
                res = std::max(res, std::max(0.0, stat));  // rho = -stat must be >= 0
            res = std::max(res, std::max(0.0, -xs[i]));
        }
        for (int t = 0; t < m; ++t) res = std::max(res, std::abs(-2.0 * qp.eps * ys[t] + mu[t] + wsum[t]));
        res = std::max(res, std::abs(1.0 - 2.0 * qp.eps * zs - lam_sum));
        const Vec cx = matvec(C, xs);
        for (int t = 0; t < m; ++t) res = std::max(res, std::abs(ys[t] - cx[t]));
        res = std::max(res, std::abs(sum(xs) - 1.0));
        res = std::max(res, std::max(0.0, zs - qp.min_row(ys)));
    }

    sol.x = xs;
    sol.y = ys;
    sol.z = zs;
    sol.mu = mu;
    sol.lambda = lambda;
    sol.nu = nu;
    sol.free_idx = F;
    sol.active_W = Mat(static_cast<int>(A.size()), m);
    for (size_t r = 0; r < A.size(); ++r) {
        sol.active_perms.push_back(qp.perms[A[r]]);
        for (int t = 0; t < m; ++t) sol.active_W(static_cast<int>(r), t) = qp.W(A[r], t);
    }
    sol.kkt_residual = res;
    sol.certified = res <= opt.kkt_tol;

    sol.report.x = sol.x;
    sol.report.objective = qp.objective(sol.x, sol.y, sol.z);
    sol.report.iterations = opt.warm_iters;
    sol.report.final_step = 0.0;
    sol.report.residual = res;
    sol.report.warning = !sol.certified;
    if (!sol.certified) sol.report.note = "active-set polish did not certify KKT";
    return sol;
}

// ---------------------------------------------------------------------------
// Grid-search oracle over the simplex.

namespace {

void grid_recurse(const OwaWeights& w, const Mat& C, Vec& x, int i, int remaining, int steps,
                  double& best, Vec* arg) {
    const int n = C.cols;
    if (i == n - 1) {
        x[i] = static_cast<double>(remaining) / steps;
        const double v = owa_of_decision(w, C, x);
        if (v > best) {
            best = v;
            if (arg) *arg = x;
        }
        return;
    }
    for (int k = 0; k <= remaining; ++k) {
        x[i] = static_cast<double>(k) / steps;
        grid_recurse(w, C, x, i + 1, remaining - k, steps, best, arg);
    }
}

}  // namespace

double owa_enumeration_oracle(const OwaWeights& w, const Mat& C, double grid_step, Vec* argmax_out) {
    if (C.cols > 4) throw std::invalid_argument("owa_enumeration_oracle: n <= 4 required");
    if (!(grid_step > 0.0 && grid_step <= 1.0)) throw std::invalid_argument("owa_enumeration_oracle: bad grid step");
    const int steps = std::max(1, static_cast<int>(std::lround(1.0 / grid_step)));
    Vec x(C.cols, 0.0);
    double best = -std::numeric_limits<double>::infinity();
    grid_recurse(w, C, x, 0, steps, steps, best, argmax_out);
    return best;
}

// ---------------------------------------------------------------------------
// Fair ranking.

GroupStructure::GroupStructure(Mat indicator, std::vector<int> assignment)
    : A(std::move(indicator)), group_of(std::move(assignment)) {
    if (A.cols != static_cast<int>(group_of.size()))
        throw std::invalid_argument("GroupStructure: item count mismatch");
    for (int i = 0; i < A.cols; ++i) {
        double colsum = 0.0;
        for (int g = 0; g < A.rows; ++g) {
            const double v = A(g, i);
            if (v != 0.0 && v != 1.0) throw std::invalid_argument("GroupStructure: indicator must be binary");
            colsum += v;
        }
        if (colsum != 1.0) throw std::invalid_argument("GroupStructure: each item must be in exactly one group");
        if (group_of[i] < 0 || group_of[i] >= A.rows || A(group_of[i], i) != 1.0)
            throw std::invalid_argument("GroupStructure: assignment inconsistent with indicator");
    }
}

PositionBias::PositionBias(Vec bias) : b(std::move(bias)) {
    if (b.empty()) throw std::invalid_argument("PositionBias: empty");
    for (size_t j = 0; j < b.size(); ++j) {
        if (!(b[j] > 0.0)) throw std::invalid_argument("PositionBias: entries must be positive");
        if (j > 0 && !(b[j] < b[j - 1])) throw std::invalid_argument("PositionBias: entries must be strictly decreasing");
    }
}

PositionBias dcg_position_bias(int n) {
    if (n < 1) throw std::invalid_argument("dcg_position_bias: n must be >= 1");
    Vec b(n);
    for (int j = 0; j < n; ++j) b[j] = 1.0 / std::log2(2.0 + j);
    return PositionBias(std::move(b));
}

bool is_doubly_stochastic(const Mat& Pi, double tol) {
    if (Pi.rows != Pi.cols) return false;
    for (double v : Pi.a)
        if (v < -tol || v > 1.0 + tol) return false;
    for (int i = 0; i < Pi.rows; ++i) {
        double rs = 0.0;
        for (int j = 0; j < Pi.cols; ++j) rs += Pi(i, j);
        if (std::abs(rs - 1.0) > tol) return false;
    }
    for (int j = 0; j < Pi.cols; ++j) {
        double cs = 0.0;
        for (int i = 0; i < Pi.rows; ++i) cs += Pi(i, j);
        if (std::abs(cs - 1.0) > tol) return false;
    }
    return true;
}

Mat ranking_vertex_from_scores(const Vec& scores) {
    const int n = static_cast<int>(scores.size());
    const std::vector<int> order = argsort_descending(scores);
    Mat P(n, n, 0.0);
    for (int pos = 0; pos < n; ++pos) P(order[pos], pos) = 1.0;
    return P;
}

double ranking_utility(const Vec& c, const Mat& Pi, const PositionBias& bias) {
    return dot(c, matvec(Pi, bias.b));
}

Vec group_exposures(const GroupStructure& groups, const Mat& Pi, const PositionBias& bias) {
    return matvec(groups.A, matvec(Pi, bias.b));
}

RankingPolicy solve_fair_ranking_fw(const Vec& y_hat, const GroupStructure& groups,
                                    const PositionBias& bias, double lambda, const OwaWeights& w,
                                    double beta0, int T) {
    const int n = static_cast<int>(y_hat.size());
    if (groups.n_items() != n || static_cast<int>(bias.b.size()) != n)
        throw std::invalid_argument("solve_fair_ranking_fw: dimension mismatch");
    if (w.dim() != groups.n_groups()) throw std::invalid_argument("solve_fair_ranking_fw: weights must match group count");
    if (lambda < 0.0 || lambda > 1.0) throw std::invalid_argument("solve_fair_ranking_fw: lambda in [0,1]");
    if (T < 1) throw std::invalid_argument("solve_fair_ranking_fw: T >= 1");
    if (!(beta0 > 0.0)) throw std::invalid_argument("solve_fair_ranking_fw: beta0 > 0");

    Mat Pi = ranking_vertex_from_scores(y_hat);
    for (int k = 1; k <= T; ++k) {
        const SmoothingParam beta_k(beta0 / std::sqrt(static_cast<double>(k) + 1.0));
        const Vec exposures = group_exposures(groups, Pi, bias);
        const Vec mu_t = moreau_owa_gradient(w, exposures, beta_k);
        Vec mu_hat = matTvec(groups.A, mu_t);
        for (int i = 0; i < n; ++i) mu_hat[i] = (1.0 - lambda) * y_hat[i] + lambda * mu_hat[i];
        const Mat P = ranking_vertex_from_scores(mu_hat);
        const double step = 2.0 / (k + 2.0);
        for (size_t t = 0; t < Pi.a.size(); ++t) Pi.a[t] = (1.0 - step) * Pi.a[t] + step * P.a[t];
    }
    return RankingPolicy{std::move(Pi)};
}

}  // namespace owa
