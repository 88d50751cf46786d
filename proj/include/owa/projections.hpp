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

#include "owa/core.hpp"

// Euclidean projections onto the probability simplex and onto permutahedra
// (convex hulls of all permutations of a generator vector), plus the smoothed
// OWA gradient/value built from the latter. Both projections expose enough of
// their piecewise-linear structure to apply their Jacobians exactly, which is
// what the implicit differentiation layers consume.

namespace owa {

/// Permutahedron C(base): convex hull of all permutations of `base`.
struct Permutahedron {
    Vec base;

    explicit Permutahedron(Vec b);
    int dim() const { return static_cast<int>(base.size()); }

    /// Majorization membership test: sum(p) = sum(base) and, for every k, the
    /// sum of the k largest entries of p is at most that of base (tol 1e-9).
    bool contains(const Vec& p, double tol = 1e-9) const;
};

/// Positive Moreau smoothing scale; the smoothed OWA is (1/beta)-smooth.
struct SmoothingParam {
    double beta;
    explicit SmoothingParam(double b) : beta(b) {
        if (!(b > 0.0)) throw std::invalid_argument("SmoothingParam: beta must be positive");
    }
};

/// Euclidean projection onto the simplex plus the active-set structure needed
/// for its (piecewise linear) Jacobian.
struct SimplexProjection {
    Vec p;                        // the projection
    std::vector<uint8_t> active;  // active[i] = 1 iff p[i] > 0
    int n_active = 0;

    /// J z where J is the projection's Jacobian at the projected input:
    /// centering of z over the active coordinates, zero elsewhere. Symmetric.
    Vec apply_jacobian(const Vec& z) const;
};

/// Projection onto Delta_n = {x : 1^T x = 1, x >= 0}. Output sums to one
/// within 1e-10 with nonnegative entries. O(n log n).
SimplexProjection project_simplex_full(const Vec& v);

/// Convenience wrapper returning just the projected point.
Vec project_simplex(const Vec& v);

/// Projection onto a permutahedron plus the sort order and pooled-block
/// structure of the isotonic reduction, from which the Jacobian follows.
struct PermProjection {
    Vec p;                         // the projection
    std::vector<int> order;        // order[k] = original index of k-th largest input entry
    std::vector<int> block_start;  // pooled segments in sorted coordinates; size nblocks+1

    /// J z, with J = P^T (I - blockavg) P: permute by `order`, subtract the
    /// mean within each pooled block, unpermute. Symmetric, idempotent.
    Vec apply_jacobian(const Vec& z) const;
};

/// Euclidean projection of v onto C(base) via isotonic regression
/// (pool-adjacent-violators) on the descending-sorted difference. O(m log m).
PermProjection project_permutahedron_full(const Permutahedron& P, const Vec& v);

Vec project_permutahedron(const Permutahedron& P, const Vec& v);

/// Gradient of the smoothed OWA at y: proj_{C(w)}(-y/beta). Lies in C(w), so
/// its entries sum to one and are nonnegative; recovers owa_subgradient as
/// beta -> 0 and the centroid (1/m,...,1/m) as beta -> infinity.
Vec moreau_owa_gradient(const OwaWeights& w, const Vec& y, SmoothingParam beta);

/// Same, exposing the projection structure (for implicit differentiation).
PermProjection moreau_owa_gradient_full(const OwaWeights& w, const Vec& y, SmoothingParam beta);

/// Smoothed OWA value: max_v [ owa_value(w,v) - ||v-y||^2/(2 beta) ], computed
/// in closed form as <p,y> + (beta/2)||p||^2 with p = moreau_owa_gradient.
/// Concave and (1/beta)-smooth in y; finite differences of this value match
/// the gradient above, and it decreases to owa_value as beta -> 0.
double moreau_owa_value(const OwaWeights& w, const Vec& y, SmoothingParam beta);

}  // namespace owa
