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

#include "owa/diff.hpp"

// Self-contained verification suites driven by the CLI: brute-force oracle
// checks, property checks, and gradient checks with machine-readable
// pass/fail lines. The gradients suite accepts an injectable smoothed-OWA
// gradient so a broken implementation is demonstrably caught.

namespace owa {

struct VerifyReport {
    std::string suite;
    int passed = 0;
    int failed = 0;
    std::vector<std::string> lines;  // "<suite>.<check> PASS|FAIL <details>"

    bool ok() const { return failed == 0; }
    void merge(const VerifyReport& other);
};

using MoreauGradFn = std::function<Vec(const OwaWeights&, const Vec&, SmoothingParam)>;

VerifyReport verify_owa(uint64_t seed = 7);
VerifyReport verify_geometry(uint64_t seed = 7);
VerifyReport verify_solvers(uint64_t seed = 7);
VerifyReport verify_gradients(uint64_t seed = 7, MoreauGradFn moreau_grad = {});
VerifyReport verify_rank(uint64_t seed = 7);

/// Dispatch by suite name; "all" runs everything. Throws on unknown names.
VerifyReport run_verify_suite(const std::string& name, uint64_t seed = 7);

}  // namespace owa
