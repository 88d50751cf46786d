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

#include "owa/core.hpp"

namespace owa {

OwaWeights::OwaWeights(Vec w, bool fair) : w_(std::move(w)), fair_(fair) {
    if (w_.empty()) throw std::invalid_argument("OwaWeights: empty weight vector");
    double s = 0.0;
    for (double x : w_) {
        if (!std::isfinite(x) || x < 0.0) throw std::invalid_argument("OwaWeights: entries must be finite and nonnegative");
        s += x;
    }
    if (std::abs(s - 1.0) > 1e-12) throw std::invalid_argument("OwaWeights: entries must sum to 1 within 1e-12");
    if (fair_) {
        for (size_t j = 0; j + 1 < w_.size(); ++j)
            if (!(w_[j] > w_[j + 1])) throw std::invalid_argument("OwaWeights: fair weights must be strictly decreasing");
    }
}

OwaWeights fair_gini_weights(int m) {
    if (m < 1) throw std::invalid_argument("fair_gini_weights: m must be >= 1");
    Vec w(m);
    double s = 0.0;
    for (int j = 0; j < m; ++j) {
        const double t = static_cast<double>(m - j) / m;  // (m+1-(j+1))/m for 1-based j
        w[j] = t * t;
        s += w[j];
    }
    for (double& x : w) x /= s;
    // Normalization leaves the sum within one ulp of 1; nudge the largest
    // entry so construction never trips the 1e-12 gate.
    double total = sum(w);
    w[0] += 1.0 - total;
    return OwaWeights(std::move(w), /*fair=*/true);
}

double owa_value(const OwaWeights& w, const Vec& y) {
    if (w.dim() != static_cast<int>(y.size())) throw std::invalid_argument("owa_value: dimension mismatch");
    Vec sorted = y;
    std::sort(sorted.begin(), sorted.end());
    double v = 0.0;
    for (int j = 0; j < w.dim(); ++j) v += w[j] * sorted[j];
    return v;
}

Vec owa_subgradient(const OwaWeights& w, const Vec& y) {
    if (w.dim() != static_cast<int>(y.size())) throw std::invalid_argument("owa_subgradient: dimension mismatch");
    const std::vector<int> sigma = argsort_ascending(y);
    Vec g(y.size(), 0.0);
    for (int k = 0; k < w.dim(); ++k) g[sigma[k]] = w[k];
    return g;
}

double owa_of_decision(const OwaWeights& w, const Mat& C, const Vec& x) {
    if (C.cols != static_cast<int>(x.size())) throw std::invalid_argument("owa_of_decision: shape mismatch");
    return owa_value(w, matvec(C, x));
}

Vec owa_decision_subgradient(const OwaWeights& w, const Mat& C, const Vec& x) {
    if (C.cols != static_cast<int>(x.size())) throw std::invalid_argument("owa_decision_subgradient: shape mismatch");
    return matTvec(C, owa_subgradient(w, matvec(C, x)));
}

}  // namespace owa
