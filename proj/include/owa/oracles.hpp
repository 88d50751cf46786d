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

#include "owa/common.hpp"

// Brute-force oracles and finite-difference utilities. Everything here is an
// independent route: enumeration over permutations or vertices, variational
// inequalities, central differences. None of it reuses the solver code it is
// used to check.

namespace owa {

/// min over all permutations pi of w_pi . y, by explicit enumeration.
inline double min_permuted_dot(const Vec& w, const Vec& y) {
    std::vector<int> perm(w.size());
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (size_t i = 0; i < w.size(); ++i) s += w[perm[i]] * y[i];
        best = std::min(best, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best;
}

/// Central finite-difference gradient of a scalar function.
inline Vec central_difference_gradient(const std::function<double(const Vec&)>& f, const Vec& y,
                                       double h = 1e-6) {
    Vec g(y.size());
    Vec p = y;
    for (size_t i = 0; i < y.size(); ++i) {
        const double saved = p[i];
        p[i] = saved + h;
        const double up = f(p);
        p[i] = saved - h;
        const double dn = f(p);
        p[i] = saved;
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

inline double relative_error(const Vec& a, const Vec& b) {
    Vec d = a;
    for (size_t i = 0; i < d.size(); ++i) d[i] -= b[i];
    return nrm2(d) / std::max(nrm2(b), 1e-12);
}

/// Variational-inequality check on a Euclidean projection: <v - p, q - p> <= tol
/// for every vertex q of the convex body certifies optimality over its hull.
inline double simplex_projection_vi_violation(const Vec& v, const Vec& p) {
    const size_t n = v.size();
    double worst = -std::numeric_limits<double>::infinity();
    for (size_t k = 0; k < n; ++k) {
        double s = 0.0;
        for (size_t i = 0; i < n; ++i) {
            const double q = (i == k) ? 1.0 : 0.0;
            s += (v[i] - p[i]) * (q - p[i]);
        }
        worst = std::max(worst, s);
    }
    return worst;
}

/// Worst VI inner product over all m! permutations of base.
inline double permutahedron_projection_vi_violation(const Vec& base, const Vec& v, const Vec& p) {
    std::vector<int> perm(base.size());
    std::iota(perm.begin(), perm.end(), 0);
    double worst = -std::numeric_limits<double>::infinity();
    do {
        double s = 0.0;
        for (size_t i = 0; i < base.size(); ++i) s += (v[i] - p[i]) * (base[perm[i]] - p[i]);
        worst = std::max(worst, s);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return worst;
}

/// argmax of <Gamma, P> over all n x n permutation matrices, vectorized
/// row-major like the Birkhoff decision vectors.
inline Vec birkhoff_vertex_argmax(const Vec& gamma, int n) {
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = -std::numeric_limits<double>::infinity();
    std::vector<int> best_perm = perm;
    do {
        double s = 0.0;
        for (int j = 0; j < n; ++j) s += gamma[static_cast<size_t>(perm[j]) * n + j];
        if (s > best) {
            best = s;
            best_perm = perm;
        }
    } while (std::next_permutation(perm.begin(), perm.end()));
    Vec x(static_cast<size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) x[static_cast<size_t>(best_perm[j]) * n + j] = 1.0;
    return x;
}

/// Random y with pairwise-distinct entries (margin enforced), for tests that
/// must stay away from sorting ties.
inline Vec random_distinct_vec(Rng& rng, int n, double lo, double hi, double min_gap = 1e-3) {
    for (int attempt = 0; attempt < 1000; ++attempt) {
        Vec y = random_vec(rng, n, lo, hi);
        Vec s = y;
        std::sort(s.begin(), s.end());
        bool ok = true;
        for (int i = 0; i + 1 < n; ++i)
            if (s[i + 1] - s[i] < min_gap) ok = false;
        if (ok) return y;
    }
    throw std::runtime_error("random_distinct_vec: could not generate distinct entries");
}

}  // namespace owa
