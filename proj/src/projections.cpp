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

#include "owa/projections.hpp"

namespace owa {

Permutahedron::Permutahedron(Vec b) : base(std::move(b)) {
    if (base.empty()) throw std::invalid_argument("Permutahedron: empty base");
    if (!all_finite(base)) throw std::invalid_argument("Permutahedron: base must be finite");
}

bool Permutahedron::contains(const Vec& p, double tol) const {
    if (p.size() != base.size()) return false;
    if (std::abs(sum(p) - sum(base)) > tol) return false;
    Vec ps = p, bs = base;
    std::sort(ps.begin(), ps.end(), std::greater<>());
    std::sort(bs.begin(), bs.end(), std::greater<>());
    double cp = 0.0, cb = 0.0;
    for (size_t k = 0; k < ps.size(); ++k) {
        cp += ps[k];
        cb += bs[k];
        if (cp > cb + tol) return false;
    }
    return true;
}

Vec SimplexProjection::apply_jacobian(const Vec& z) const {
    Vec out(z.size(), 0.0);
    if (n_active == 0) return out;
    double mean = 0.0;
    for (size_t i = 0; i < z.size(); ++i)
        if (active[i]) mean += z[i];
    mean /= n_active;
    for (size_t i = 0; i < z.size(); ++i)
        if (active[i]) out[i] = z[i] - mean;
    return out;
}

SimplexProjection project_simplex_full(const Vec& v) {
    if (v.empty()) throw std::invalid_argument("project_simplex: empty input");
    if (!all_finite(v)) throw std::invalid_argument("project_simplex: input must be finite");
    const int n = static_cast<int>(v.size());
    Vec u = v;
    std::sort(u.begin(), u.end(), std::greater<>());
    // Largest k with u_k + (1 - sum_{j<=k} u_j)/k > 0.
    double cssv = 0.0, theta = 0.0;
    int rho = 0;
    double running = 0.0;
    for (int k = 1; k <= n; ++k) {
        running += u[k - 1];
        const double t = (1.0 - running) / k;
        if (u[k - 1] + t > 0.0) {
            rho = k;
            cssv = running;
        }
    }
    theta = (1.0 - cssv) / rho;
    SimplexProjection out;
    out.p.resize(n);
    out.active.assign(n, 0);
    for (int i = 0; i < n; ++i) {
        const double pi = v[i] + theta;
        if (pi > 0.0) {
            out.p[i] = pi;
            out.active[i] = 1;
            ++out.n_active;
        } else {
            out.p[i] = 0.0;
        }
    }
    return out;
}

Vec project_simplex(const Vec& v) { return project_simplex_full(v).p; }

namespace {

// Isotonic regression with nonincreasing constraint: argmin ||v - d||^2 over
// v_1 >= v_2 >= ... >= v_m. Classic pool-adjacent-violators with explicit
// block tracking; pooled blocks average exactly.
struct IsoBlock {
    int start;
    int count;
    double total;
    double mean() const { return total / count; }
};

std::vector<IsoBlock> pav_decreasing(const Vec& d) {
    std::vector<IsoBlock> blocks;
    blocks.reserve(d.size());
    for (int i = 0; i < static_cast<int>(d.size()); ++i) {
        blocks.push_back({i, 1, d[i]});
        while (blocks.size() >= 2) {
            IsoBlock& prev = blocks[blocks.size() - 2];
            IsoBlock& last = blocks.back();
            if (prev.mean() >= last.mean()) break;  // nonincreasing holds
            prev.count += last.count;
            prev.total += last.total;
            blocks.pop_back();
        }
    }
    return blocks;
}

}  // namespace

Vec PermProjection::apply_jacobian(const Vec& z) const {
    const int m = static_cast<int>(p.size());
    Vec zs(m), out(m);
    for (int k = 0; k < m; ++k) zs[k] = z[order[k]];
    for (size_t b = 0; b + 1 < block_start.size(); ++b) {
        const int lo = block_start[b], hi = block_start[b + 1];
        double mean = 0.0;
        for (int k = lo; k < hi; ++k) mean += zs[k];
        mean /= (hi - lo);
        for (int k = lo; k < hi; ++k) out[order[k]] = zs[k] - mean;
    }
    return out;
}

PermProjection project_permutahedron_full(const Permutahedron& P, const Vec& v) {
    const int m = P.dim();
    if (static_cast<int>(v.size()) != m) throw std::invalid_argument("project_permutahedron: dimension mismatch");
    if (!all_finite(v)) throw std::invalid_argument("project_permutahedron: input must be finite");

    PermProjection out;
    out.order = argsort_descending(v);
    Vec base_sorted = P.base;
    std::sort(base_sorted.begin(), base_sorted.end(), std::greater<>());

    Vec d(m);
    for (int k = 0; k < m; ++k) d[k] = v[out.order[k]] - base_sorted[k];

    const std::vector<IsoBlock> blocks = pav_decreasing(d);
    out.p.assign(m, 0.0);
    out.block_start.clear();
    out.block_start.reserve(blocks.size() + 1);
    for (const IsoBlock& b : blocks) {
        out.block_start.push_back(b.start);
        const double mu = b.mean();
        for (int k = b.start; k < b.start + b.count; ++k) out.p[out.order[k]] = v[out.order[k]] - mu;
    }
    out.block_start.push_back(m);
    return out;
}

Vec project_permutahedron(const Permutahedron& P, const Vec& v) {
    return project_permutahedron_full(P, v).p;
}

PermProjection moreau_owa_gradient_full(const OwaWeights& w, const Vec& y, SmoothingParam beta) {
    if (w.dim() != static_cast<int>(y.size())) throw std::invalid_argument("moreau_owa_gradient: dimension mismatch");
    Vec target(y.size());
    for (size_t i = 0; i < y.size(); ++i) target[i] = -y[i] / beta.beta;
    return project_permutahedron_full(Permutahedron(w.values()), target);
}

Vec moreau_owa_gradient(const OwaWeights& w, const Vec& y, SmoothingParam beta) {
    return moreau_owa_gradient_full(w, y, beta).p;
}

double moreau_owa_value(const OwaWeights& w, const Vec& y, SmoothingParam beta) {
    const Vec p = moreau_owa_gradient(w, y, beta);
    return dot(p, y) + 0.5 * beta.beta * dot(p, p);
}

}  // namespace owa
