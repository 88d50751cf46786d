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

#include "owa/diff.hpp"

namespace owa {

namespace {

double spectral_radius_estimate(const Mat& A, int iters = 60) {
    Vec v(A.rows, 1.0 / std::sqrt(static_cast<double>(A.rows)));
    double lam = 0.0;
    for (int k = 0; k < iters; ++k) {
        Vec u = matvec(A, v);
        lam = nrm2(u);
        if (lam <= 1e-300) return 0.0;
        v = (1.0 / lam) * u;
    }
    return lam;
}

}  // namespace

FixedPointBackward backward_fixed_point(const OwaWeights& w, const Mat& C, const Vec& x_star,
                                        const Vec& g, SmoothingParam beta, double alpha) {
    const int n = C.cols;
    const int m = C.rows;
    if (static_cast<int>(x_star.size()) != n || static_cast<int>(g.size()) != n || w.dim() != m)
        throw std::invalid_argument("backward_fixed_point: shape mismatch");
    if (!(alpha > 0.0)) throw std::invalid_argument("backward_fixed_point: alpha must be positive");

    // One update at the solution, saving both projection structures.
    const Vec y = matvec(C, x_star);
    const PermProjection inner = moreau_owa_gradient_full(w, y, beta);
    const Vec grad_x = matTvec(C, inner.p);
    Vec pre = x_star;
    axpy(alpha, grad_x, pre);
    const SimplexProjection outer = project_simplex_full(pre);

    FixedPointBackward out;
    out.fp_residual = nrm2(outer.p - x_star);

    if (nrm_inf(g) == 0.0) {
        out.grad_C = Mat(m, n, 0.0);
        return out;
    }

    // Phi = J_simplex (I - (alpha/beta) C^T J_perm C), columnwise.
    Mat Phi(n, n, 0.0);
    {
        Vec e(n, 0.0);
        for (int j = 0; j < n; ++j) {
            e.assign(n, 0.0);
            e[j] = 1.0;
            Vec t = matTvec(C, inner.apply_jacobian(matvec(C, e)));
            Vec col = e - (alpha / beta.beta) * t;
            col = outer.apply_jacobian(col);
            for (int i = 0; i < n; ++i) Phi(i, j) = col[i];
        }
    }
    out.spectral_estimate = spectral_radius_estimate(Phi);

    // Solve (I - Phi)^T u = g; damp on singularity.
    Mat S(n, n, 0.0);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) S(i, j) = (i == j ? 1.0 : 0.0) - Phi(j, i);
    auto u = solve_lu(S, g, 1e-10);
    if (!u) {
        out.damped = true;
        const double rho = 0.99;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) S(i, j) = (i == j ? 1.0 : 0.0) - rho * Phi(j, i);
        u = solve_lu(S, g, 0.0);
        if (!u) throw std::runtime_error("backward_fixed_point: damped system still singular");
    }

    // Psi^T u without materializing Psi:
    // dL/dC = alpha [ p q^T - (1/beta) (J_perm C q) x*^T ],  q = J_simplex u.
    const Vec q = outer.apply_jacobian(*u);
    const Vec r = inner.apply_jacobian(matvec(C, q));
    out.grad_C = Mat(m, n, 0.0);
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            out.grad_C(i, j) = alpha * (inner.p[i] * q[j] - (1.0 / beta.beta) * r[i] * x_star[j]);
    return out;
}

QpKktBackward backward_qp_kkt(const OwaQpSolution& sol, const Mat& C, const Vec& g) {
    const int n = C.cols;
    const int m = C.rows;
    if (static_cast<int>(g.size()) != n || static_cast<int>(sol.x.size()) != n)
        throw std::invalid_argument("backward_qp_kkt: shape mismatch");

    QpKktBackward out;
    out.grad_C = Mat(m, n, 0.0);
    if (nrm_inf(g) == 0.0) return out;

    const auto& F = sol.free_idx;
    const int f = static_cast<int>(F.size());
    const int na = sol.active_W.rows;
    const double eps = sol.epsilon;

    // Linearized active KKT system; unknowns [dx_F, dy, dz, dmu, dlambda, dnu]
    // in the same layout as the forward polish. The perturbation dC enters the
    // right-hand side through the x-stationarity rows ((dC^T mu)_F) and the
    // coupling rows (dC x); one adjoint solve contracts with g.
    const int N = f + 2 * m + na + 2;
    const int ox = 0, oy = f, oz = f + m, omu = f + m + 1, ola = f + 2 * m + 1, onu = f + 2 * m + 1 + na;
    Mat K(N, N, 0.0);
    int row = 0;
    for (int a = 0; a < f; ++a, ++row) {
        K(row, ox + a) = -2.0 * eps;
        for (int t = 0; t < m; ++t) K(row, omu + t) = -C(t, F[a]);
        K(row, onu) = 1.0;
    }
    for (int t = 0; t < m; ++t, ++row) {
        K(row, oy + t) = -2.0 * eps;
        K(row, omu + t) = 1.0;
        for (int r = 0; r < na; ++r) K(row, ola + r) = sol.active_W(r, t);
    }
    K(row, oz) = -2.0 * eps;
    for (int r = 0; r < na; ++r) K(row, ola + r) = -1.0;
    ++row;
    const int coupling_row = row;
    for (int t = 0; t < m; ++t, ++row) {
        K(row, oy + t) = 1.0;
        for (int a = 0; a < f; ++a) K(row, ox + a) = -C(t, F[a]);
    }
    for (int r = 0; r < na; ++r, ++row) {
        for (int t = 0; t < m; ++t) K(row, oy + t) = sol.active_W(r, t);
        K(row, oz) = -1.0;
    }
    for (int a = 0; a < f; ++a) K(row, ox + a) = 1.0;

    // Adjoint solve K^T xi = E^T g, where E extracts the free solution block.
    Mat Kt = transpose(K);
    Vec rhs(N, 0.0);
    for (int a = 0; a < f; ++a) rhs[ox + a] = g[F[a]];
    auto xi = solve_lu(Kt, rhs, 1e-12);
    if (!xi) {
        out.degenerate = true;
        xi = solve_least_squares(Kt, rhs);
    }

    // dL/dC(i,j) = mu_i xi_xstat[a(j)] (j free) + xi_coupling[i] x_j.
    const Vec& v = *xi;
    for (int a = 0; a < f; ++a)
        for (int i = 0; i < m; ++i) out.grad_C(i, F[a]) += sol.mu[i] * v[a];
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j) out.grad_C(i, j) += v[coupling_row + i] * sol.x[j];
    return out;
}

Vec backward_blackbox_lp(const GridGraph& graph, const Vec& c_hat, const Vec& g, double lambda_bb) {
    if (!(lambda_bb > 0.0)) throw std::invalid_argument("backward_blackbox_lp: lambda_bb must be positive");
    if (c_hat.size() != g.size()) throw std::invalid_argument("backward_blackbox_lp: shape mismatch");
    const Vec base = solve_shortest_path(graph, c_hat).node_x;
    Vec shifted = c_hat;
    axpy(lambda_bb, g, shifted);
    const Vec pert = solve_shortest_path(graph, shifted).node_x;
    // (x*(c + lambda g) - x*(c)) / lambda: the interpolated-loss gradient of
    // the piecewise-constant solver map. Exactly zero while the perturbed
    // path is unchanged.
    Vec grad(c_hat.size());
    for (size_t i = 0; i < grad.size(); ++i) grad[i] = (pert[i] - base[i]) / lambda_bb;
    return grad;
}

Vec spo_plus_subgradient(const Vec& gamma_hat, const Vec& gamma_true,
                         const std::function<Vec(const Vec&)>& linear_maximizer) {
    if (gamma_hat.size() != gamma_true.size()) throw std::invalid_argument("spo_plus_subgradient: shape mismatch");
    Vec probe(gamma_hat.size());
    for (size_t i = 0; i < probe.size(); ++i) probe[i] = 2.0 * gamma_hat[i] - gamma_true[i];
    return linear_maximizer(probe) - linear_maximizer(gamma_true);
}

Vec spo_plus_subgradient(const Vec& gamma_hat, const Vec& gamma_true, const FeasibleRegion& region) {
    return spo_plus_subgradient(gamma_hat, gamma_true,
                                [&](const Vec& gamma) { return region.linear_argmax(gamma); });
}

SpoRankResult spo_plus_for_owa_rank(const Vec& c_hat, const Vec& c_true,
                                    const GroupStructure& groups, const PositionBias& bias,
                                    double lambda, const OwaWeights& w, double beta0, int T) {
    if (c_hat.size() != c_true.size()) throw std::invalid_argument("spo_plus_for_owa_rank: shape mismatch");
    const int n = static_cast<int>(c_hat.size());

    Vec probe(n);
    for (int i = 0; i < n; ++i) probe[i] = 2.0 * c_hat[i] - c_true[i];

    SpoRankResult out;
    out.Pi_true = solve_fair_ranking_fw(c_true, groups, bias, lambda, w, beta0, T).Pi;
    out.Pi_perturbed = solve_fair_ranking_fw(probe, groups, bias, lambda, w, beta0, T).Pi;

    // Lifted auxiliary variables recovered from the solver output.
    out.exposures_true = group_exposures(groups, out.Pi_true, bias);
    out.z_true = owa_value(w, out.exposures_true);

    // Joint objective gamma = ((1-lambda) c b^T, 0, lambda) evaluated at both
    // lifted solutions; the gap is the SPO+ surrogate ingredient worth logging.
    auto joint_value = [&](const Mat& Pi, const Vec& c) {
        const Vec e = group_exposures(groups, Pi, bias);
        return (1.0 - lambda) * ranking_utility(c, Pi, bias) + lambda * owa_value(w, e);
    };
    out.spo_loss_gap = joint_value(out.Pi_perturbed, probe) - joint_value(out.Pi_true, probe);

    // Only the c-block of the lifted subgradient depends on c_hat:
    // d/dc_hat = (1-lambda) (Pi_plus - Pi_true) b.
    Vec diff_b(n, 0.0);
    const Vec pb_plus = matvec(out.Pi_perturbed, bias.b);
    const Vec pb_true = matvec(out.Pi_true, bias.b);
    for (int i = 0; i < n; ++i) diff_b[i] = (1.0 - lambda) * (pb_plus[i] - pb_true[i]);
    out.grad_c_hat = std::move(diff_b);
    return out;
}

}  // namespace owa
