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

#pragma once

#include "owa/solvers.hpp"

// Backpropagation routes through the optimization mappings. Every function
// here is a pure map from a saved forward state and an output cotangent to an
// input cotangent; zero cotangents map to zero.

namespace owa {

/// Jacobians of the projected-gradient update U(x, C) at a solution, in the
/// contracted form the backward pass needs. Phi = dU/dx is materialized
/// (n x n); the C-sensitivity is applied as a vector-Jacobian product and
/// never formed as an n x (m n) matrix.
struct FixedPointJacobians {
    Mat Phi;
    double spectral_estimate = 0.0;  // power-iteration estimate of rho(Phi)
};

struct FixedPointBackward {
    Mat grad_C;            // cotangent on C
    bool damped = false;   // singular (I - Phi): solved (I - 0.99 Phi) instead
    double fp_residual = 0.0;
    double spectral_estimate = 0.0;
};

/// Implicit differentiation of the Moreau-smoothed solve through the
/// fixed-point conditions of the projected-gradient update
/// U(x, C) = proj_simplex(x + alpha C^T proj_{C(w)}(-Cx/beta)).
/// x_star must be a converged solution (residual ||U(x*) - x*|| <= 1e-6);
/// solves (I - Phi)^T u = g and returns Psi^T u.
FixedPointBackward backward_fixed_point(const OwaWeights& w, const Mat& C, const Vec& x_star,
                                        const Vec& g, SmoothingParam beta, double alpha);

struct QpKktBackward {
    Mat grad_C;
    bool degenerate = false;  // rank-deficient active system, least-squares solve
};

/// Differentiates the active-set KKT system of solve_owa_qp at its solution;
/// the C-dependence enters only through the y = Cx coupling. Contracts the
/// solution sensitivity with g in one adjoint solve.
QpKktBackward backward_qp_kkt(const OwaQpSolution& sol, const Mat& C, const Vec& g);

/// Blackbox differentiation of the shortest-path solver: returns
/// (1/lambda_bb) (x*(c_hat + lambda_bb g) - x*(c_hat)) over node costs,
/// using two solver calls. Exactly zero when the perturbed path is unchanged.
Vec backward_blackbox_lp(const GridGraph& graph, const Vec& c_hat, const Vec& g, double lambda_bb);

/// SPO+ subgradient v*(2 gamma_hat - gamma) - v*(gamma) for a linear
/// maximizer over a fixed feasible set.
Vec spo_plus_subgradient(const Vec& gamma_hat, const Vec& gamma_true,
                         const std::function<Vec(const Vec&)>& linear_maximizer);

Vec spo_plus_subgradient(const Vec& gamma_hat, const Vec& gamma_true, const FeasibleRegion& region);

/// SPO+ through the fair-ranking mapping. Lifts the problem to joint
/// variables (Pi, exposures y, z = OWA of exposures), applies the two-solve
/// subgradient formula with the Frank-Wolfe solver, and chains back to the
/// predicted relevance block: (1-lambda) (Pi_plus - Pi_true) b.
struct SpoRankResult {
    Vec grad_c_hat;
    Mat Pi_true;       // solver output at the true relevance
    Mat Pi_perturbed;  // solver output at 2 c_hat - c_true
    Vec exposures_true;
    double z_true = 0.0;  // OWA of the true-solution exposures
    double spo_loss_gap = 0.0;  // joint-objective gap between the two solves
};
SpoRankResult spo_plus_for_owa_rank(const Vec& c_hat, const Vec& c_true,
                                    const GroupStructure& groups, const PositionBias& bias,
                                    double lambda, const OwaWeights& w, double beta0, int T);

}  // namespace owa
