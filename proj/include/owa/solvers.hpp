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

#include <functional>

#include "owa/grid.hpp"
#include "owa/projections.hpp"

// Forward solvers for the OWA optimization mappings: projected subgradient
// ascent and Frank-Wolfe over the simplex, the factorial-constraint QP
// reformulation with quadratic smoothing, Frank-Wolfe with diminishing
// Moreau smoothing over the Birkhoff polytope, and small exact oracles.

namespace owa {

/// Tagged feasible region, used by the SPO+ layer and feasibility checks.
struct FeasibleRegion {
    enum class Kind { Simplex, GridFlow, Birkhoff };
    Kind kind = Kind::Simplex;
    int n = 0;        // simplex dimension or Birkhoff order
    GridGraph graph;  // GridFlow payload

    static FeasibleRegion simplex(int n);
    static FeasibleRegion grid_flow(GridGraph g);
    static FeasibleRegion birkhoff(int n);

    /// Dimension of the decision vector for this region.
    int decision_dim() const;

    /// argmax of <gamma, x> over the region. Simplex: best vertex. GridFlow:
    /// shortest path under negated weights (node indicator). Birkhoff:
    /// exhaustive vertex enumeration, n <= 8 (exact, oracle-scale).
    Vec linear_argmax(const Vec& gamma) const;

    bool contains(const Vec& x, double tol = 1e-8) const;
};

struct SolveReport {
    Vec x;
    double objective = 0.0;
    int iterations = 0;
    double final_step = 0.0;
    double residual = 0.0;
    bool warning = false;
    std::string note;
};

struct PgdOptions {
    int iters = -1;           // <0: 300/500/750 for m <= 3/5/7
    double alpha = 0.02;
    bool step_decay = false;  // normalized directions with geometric decay
    double decay_rate = 0.75;
    int decay_every = 80;
};

/// Options tuned for reference-grade accuracy (regret baselines, oracles).
PgdOptions high_accuracy_pgd();

/// Projected subgradient ascent on owa_value(w, Cx) over the simplex:
/// x <- proj(x + alpha * C^T owa_subgradient(w, Cx)). Returns the best
/// iterate by objective. Throws on NaN objective (divergence).
SolveReport solve_owa_projected_subgradient(const OwaWeights& w, const Mat& C, PgdOptions opt = {});

/// Frank-Wolfe on the Moreau-smoothed objective over the simplex with the
/// classic 2/(k+2) step; the linear subproblem is a single argmax. Returns
/// the iterate with the best smoothed objective; report.objective is the
/// smoothed value at that iterate.
SolveReport solve_owa_moreau_frankwolfe(const OwaWeights& w, const Mat& C, SmoothingParam beta,
                                        int iters = 500);

/// Projected gradient ascent on the same smoothed objective, run to a small
/// fixed-point residual; this is the forward pass the implicit-differentiation
/// layer differentiates. alpha <= 0 picks min(0.02, beta/sigma_max(C)^2) to
/// stay inside the smooth-step stability bound.
struct SmoothedSolve {
    Vec x;
    double objective = 0.0;  // smoothed objective at x
    double alpha = 0.0;      // step actually used
    double residual = 0.0;   // ||proj step(x) - x||
    int iterations = 0;
};
SmoothedSolve solve_owa_moreau_pgd(const OwaWeights& w, const Mat& C, SmoothingParam beta,
                                   int iters = 300, double alpha = -1.0, double tol = 1e-11,
                                   const Vec* x0 = nullptr);

struct OwaQpOptions {
    double epsilon = 0.1;
    int warm_iters = 2400;
    int max_active_rounds = 40;
    double kkt_tol = 1e-7;
    double active_tol = 1e-6;
};

/// Solution of the joint-variable smoothed reformulation
///   max z - eps(||x||^2 + ||y||^2 + z^2)  s.t.  y = Cx, z <= w_tau . y
/// for every permutation tau, x on the simplex. Carries the duals and the
/// active set needed for KKT differentiation.
struct OwaQpSolution {
    Vec x, y;
    double z = 0.0;
    double epsilon = 0.0;
    Vec mu;                               // duals of y = Cx
    Vec lambda;                           // duals of active permutation rows
    std::vector<std::vector<int>> active_perms;  // active rows as index permutations
    Mat active_W;                         // the active permuted-weight rows themselves
    std::vector<int> free_idx;            // simplex coordinates off their bound
    double nu = 0.0;                      // dual of 1^T x = 1
    double kkt_residual = 1e9;
    bool certified = false;
    bool degenerate = false;
    long constraint_count = 0;            // m!, the materialized row count
    SolveReport report;
};

/// Builds the m! permutation constraints explicitly (refuses m > 6), warm
/// starts with projected supergradient on the reduced problem, then polishes
/// with an active-set KKT solve. epsilon = 0 recovers the exact LP value.
OwaQpSolution solve_owa_qp(const OwaWeights& w, const Mat& C, OwaQpOptions opt = {});

/// Brute-force maximum of owa_of_decision over a grid discretization of the
/// simplex (test oracle; n <= 4 for tractability).
double owa_enumeration_oracle(const OwaWeights& w, const Mat& C, double grid_step,
                              Vec* argmax_out = nullptr);

// ---------------------------------------------------------------------------
// Fair ranking over the Birkhoff polytope.

/// Partition of n items into groups; A stacks the binary indicator rows.
struct GroupStructure {
    Mat A;                      // |G| x n, binary
    std::vector<int> group_of;  // size n

    GroupStructure() = default;
    GroupStructure(Mat indicator, std::vector<int> assignment);
    int n_groups() const { return A.rows; }
    int n_items() const { return A.cols; }
};

/// Strictly decreasing positive position-bias factors.
struct PositionBias {
    Vec b;
    PositionBias() = default;
    explicit PositionBias(Vec bias);
};

/// b_j = 1 / log2(1 + j), the standard DCG discount.
PositionBias dcg_position_bias(int n);

/// Doubly stochastic ranking policy; (i, j) is the probability that item i
/// takes position j.
struct RankingPolicy {
    Mat Pi;
};

bool is_doubly_stochastic(const Mat& Pi, double tol = 1e-8);

/// Permutation matrix placing items by descending score: position k gets the
/// item with the k-th largest score. Solves the Frank-Wolfe linear subproblem
/// for any objective of the form <Pi, scores b^T> with decreasing b.
Mat ranking_vertex_from_scores(const Vec& scores);

/// Expected utility c^T Pi b.
double ranking_utility(const Vec& c, const Mat& Pi, const PositionBias& bias);

/// Group exposure vector A Pi b.
Vec group_exposures(const GroupStructure& groups, const Mat& Pi, const PositionBias& bias);

/// Frank-Wolfe with Moreau-envelope smoothing for
///   max (1-lambda) c^T Pi b + lambda OWA_w(A Pi b)  over bistochastic Pi.
/// Initializes at the policy sorting y_hat, smooths at beta_k = beta0/sqrt(k+1),
/// and takes argsort vertices with the 2/(k+2) step. The output is a convex
/// combination of permutation matrices, hence doubly stochastic for every T.
RankingPolicy solve_fair_ranking_fw(const Vec& y_hat, const GroupStructure& groups,
                                    const PositionBias& bias, double lambda, const OwaWeights& w,
                                    double beta0, int T);

}  // namespace owa
