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

#include "owa/common.hpp"

// Ordered weighted averaging: the aggregation w^T tau(y) that applies a fixed
// weight vector to the criteria values sorted in increasing order. Concave and
// piecewise linear in y; with strictly decreasing weights it is impartial,
// equitable and monotone, which is what makes it usable as a fairness
// objective. All functions here are pure.

namespace owa {

/// OWA weight vector. Entries are nonnegative and sum to one (checked to
/// 1e-12 at construction); with fair = true the entries must be strictly
/// decreasing. Invalid weights are rejected, never renormalized silently.
class OwaWeights {
  public:
    OwaWeights(Vec w, bool fair);

    const Vec& values() const { return w_; }
    int dim() const { return static_cast<int>(w_.size()); }
    bool fair() const { return fair_; }
    double operator[](int i) const { return w_[i]; }

  private:
    Vec w_;
    bool fair_;
};

/// Normalized squared-index fair weights: w_j proportional to ((m+1-j)/m)^2,
/// strictly decreasing and summing to one. m = 1 gives (1).
OwaWeights fair_gini_weights(int m);

/// w^T tau(y) with tau the ascending sort of y. For descending w this equals
/// the minimum of w_pi . y over all permutations pi.
double owa_value(const OwaWeights& w, const Vec& y);

/// Subgradient of owa_value at y: entry i receives the weight of y_i's
/// ascending rank. Ties are broken by stable sort (equal entries keep their
/// original order), so the selection is deterministic. Exact gradient when
/// the entries of y are distinct.
Vec owa_subgradient(const OwaWeights& w, const Vec& y);

/// owa_value(w, C x): the scalarized multi-criteria objective of a decision x
/// under criteria matrix C. Its subgradient in x is C^T owa_subgradient(w, Cx).
double owa_of_decision(const OwaWeights& w, const Mat& C, const Vec& x);

/// C^T owa_subgradient(w, C x), the chain-rule subgradient of owa_of_decision.
Vec owa_decision_subgradient(const OwaWeights& w, const Mat& C, const Vec& x);

}  // namespace owa
