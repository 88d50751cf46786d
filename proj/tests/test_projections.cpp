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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "owa/oracles.hpp"
#include "owa/projections.hpp"

using namespace owa;

TEST_CASE("simplex projection basics") {
    // members project to themselves
    const Vec member{0.2, 0.5, 0.3};
    CHECK(nrm_inf(project_simplex(member) - member) < 1e-14);

    // symmetric point goes to the uniform vector
    const Vec p = project_simplex({0.2, 0.2, 0.2});
    for (double v : p) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

    // far vertex direction lands on the vertex; certified by the VI
    const Vec q = project_simplex({2.0, 0.0, 0.0});
    CHECK(q[0] == doctest::Approx(1.0));
    CHECK(simplex_projection_vi_violation({2.0, 0.0, 0.0}, q) <= 1e-12);
}

TEST_CASE("simplex projection: feasibility, VI optimality, idempotence, Lipschitz") {
    Rng rng(41);
    for (int t = 0; t < 300; ++t) {
        const int n = 1 + static_cast<int>(rng() % 7);
        const Vec v = random_vec(rng, n, -3.0, 3.0);
        const Vec p = project_simplex(v);
        CHECK(std::abs(sum(p) - 1.0) <= 1e-10);
        for (double x : p) CHECK(x >= 0.0);
        CHECK(simplex_projection_vi_violation(v, p) <= 1e-8);
        CHECK(nrm_inf(project_simplex(p) - p) <= 1e-10);
        const Vec u = random_vec(rng, n, -3.0, 3.0);
        CHECK(nrm2(project_simplex(u) - p) <= nrm2(u - v) + 1e-12);
    }
}

TEST_CASE("permutahedron membership test") {
    const Permutahedron P({0.6, 0.3, 0.1});
    CHECK(P.contains({0.6, 0.3, 0.1}));
    CHECK(P.contains({0.1, 0.3, 0.6}));
    CHECK(P.contains({1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0}));  // centroid
    CHECK_FALSE(P.contains({0.7, 0.2, 0.1}));              // violates top-1 majorization
    CHECK_FALSE(P.contains({0.5, 0.5, 0.1}));              // wrong sum is caught too
}

TEST_CASE("permutahedron projection: fixed points and the worked example") {
    const OwaWeights w3 = fair_gini_weights(3);
    const Permutahedron P(w3.values());

    // vertices and the centroid are members, hence fixed points
    Vec vert = w3.values();
    std::swap(vert[0], vert[2]);
    CHECK(nrm_inf(project_permutahedron(P, vert) - vert) < 1e-12);
    const Vec centroid(3, sum(w3.values()) / 3.0);
    CHECK(nrm_inf(project_permutahedron(P, centroid) - centroid) < 1e-12);

    // far direction: largest coordinate first, certified by the VI over all 6 vertices
    const Vec v{10.0, 0.0, 0.0};
    const Vec p = project_permutahedron(P, v);
    CHECK(p[0] >= p[1]);
    CHECK(p[1] >= p[2]);
    CHECK(p[0] == doctest::Approx(w3[0]));
    CHECK(permutahedron_projection_vi_violation(w3.values(), v, p) <= 1e-8);
}

TEST_CASE("permutahedron projection: VI optimality and membership up to m = 6") {
    Rng rng(43);
    for (int m = 2; m <= 6; ++m) {
        const OwaWeights w = fair_gini_weights(m);
        const Permutahedron P(w.values());
        for (int t = 0; t < 20; ++t) {
            const Vec v = random_vec(rng, m, -4.0, 4.0);
            const Vec p = project_permutahedron(P, v);
            CHECK(P.contains(p));
            CHECK(permutahedron_projection_vi_violation(w.values(), v, p) <= 1e-8);
        }
    }
}

TEST_CASE("permutahedron projection: idempotence and 1-Lipschitz") {
    Rng rng(47);
    const OwaWeights w = fair_gini_weights(4);
    const Permutahedron P(w.values());
    for (int t = 0; t < 100; ++t) {
        const Vec u = random_vec(rng, 4, -2.0, 2.0);
        const Vec v = random_vec(rng, 4, -2.0, 2.0);
        const Vec pu = project_permutahedron(P, u);
        const Vec pv = project_permutahedron(P, v);
        CHECK(nrm_inf(project_permutahedron(P, pu) - pu) <= 1e-10);
        CHECK(nrm2(pu - pv) <= nrm2(u - v) + 1e-12);
    }
}

TEST_CASE("moreau gradient limits") {
    const OwaWeights w = fair_gini_weights(3);
    Rng rng(53);
    const Vec y = random_distinct_vec(rng, 3, -1.0, 1.0);

    // beta -> infinity: centroid
    const Vec g_inf = moreau_owa_gradient(w, y, SmoothingParam(1e12));
    for (double v : g_inf) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-6));

    // small beta: the subgradient selection
    const Vec g0 = moreau_owa_gradient(w, y, SmoothingParam(1e-6));
    CHECK(nrm_inf(g0 - owa_subgradient(w, y)) <= 1e-6);
}

TEST_CASE("moreau gradient on the two-criteria worked example") {
    const OwaWeights w({0.7, 0.3}, true);
    const Vec y{1.0, 2.0};
    const Vec p = moreau_owa_gradient(w, y, SmoothingParam(1.0));
    // projection of (-1,-2) onto the segment between (0.7,0.3) and (0.3,0.7)
    CHECK(p[0] == doctest::Approx(0.7));
    CHECK(p[1] == doctest::Approx(0.3));
    CHECK(permutahedron_projection_vi_violation(w.values(), {-1.0, -2.0}, p) <= 1e-10);
}

TEST_CASE("moreau value: envelope of the concave objective") {
    Rng rng(59);
    const OwaWeights w = fair_gini_weights(3);

    // beta -> 0 with a linear-in-beta gap
    const Vec y = random_distinct_vec(rng, 3, -1.0, 1.0);
    const double exact = owa_value(w, y);
    double prev_gap = 1e9;
    for (double beta : {1e-2, 1e-4, 1e-6}) {
        const double gap = moreau_owa_value(w, y, SmoothingParam(beta)) - exact;
        CHECK(gap >= -1e-9);          // the envelope lies above the function
        CHECK(gap <= 0.5 * beta * dot(w.values(), w.values()) + 1e-9);  // and within (beta/2)||w||^2
        CHECK(gap <= prev_gap + 1e-15);
        prev_gap = gap;
    }

    // constant input: projection is the centroid and the value is exact
    const double c = 0.37;
    const double val = moreau_owa_value(w, Vec(3, c), SmoothingParam(0.5));
    CHECK(val == doctest::Approx(c + 0.5 * 0.5 / 3.0).epsilon(1e-12));
    CHECK(val >= owa_value(w, Vec(3, c)));
}

TEST_CASE("moreau value/gradient: finite-difference consistency") {
    Rng rng(61);
    for (int t = 0; t < 50; ++t) {
        const int m = 2 + static_cast<int>(rng() % 4);
        const OwaWeights w = fair_gini_weights(m);
        const Vec y = random_distinct_vec(rng, m, -1.0, 1.0);
        const SmoothingParam beta(uniform(rng, 0.3, 2.0));
        const Vec g = moreau_owa_gradient(w, y, beta);
        const Vec fd = central_difference_gradient(
            [&](const Vec& v) { return moreau_owa_value(w, v, beta); }, y);
        CHECK(relative_error(g, fd) < 1e-5);
    }
}

TEST_CASE("moreau value is concave along segments") {
    Rng rng(67);
    const OwaWeights w = fair_gini_weights(4);
    const SmoothingParam beta(0.7);
    for (int t = 0; t < 100; ++t) {
        const Vec a = random_vec(rng, 4, -2.0, 2.0);
        const Vec b = random_vec(rng, 4, -2.0, 2.0);
        Vec mid(4);
        for (int i = 0; i < 4; ++i) mid[i] = 0.5 * (a[i] + b[i]);
        const double lhs = moreau_owa_value(w, mid, beta);
        const double rhs = 0.5 * (moreau_owa_value(w, a, beta) + moreau_owa_value(w, b, beta));
        CHECK(lhs >= rhs - 1e-10);
    }
}

TEST_CASE("moreau gradient: Lipschitz in y and a convex combination of weight permutations") {
    Rng rng(71);
    const OwaWeights w = fair_gini_weights(3);
    const Permutahedron P(w.values());
    const double beta = 0.4;
    for (int t = 0; t < 100; ++t) {
        const Vec y1 = random_vec(rng, 3, -2.0, 2.0);
        const Vec y2 = random_vec(rng, 3, -2.0, 2.0);
        const Vec g1 = moreau_owa_gradient(w, y1, SmoothingParam(beta));
        const Vec g2 = moreau_owa_gradient(w, y2, SmoothingParam(beta));
        CHECK(nrm2(g1 - g2) <= nrm2(y1 - y2) / beta + 1e-12);
        CHECK(std::abs(sum(g1) - 1.0) <= 1e-10);
        CHECK(P.contains(g1));  // majorized by w
        for (double v : g1) CHECK(v >= -1e-12);
    }
}

TEST_CASE("parameter validation") {
    CHECK_THROWS_AS(SmoothingParam(0.0), std::invalid_argument);
    CHECK_THROWS_AS(SmoothingParam(-1.0), std::invalid_argument);
    CHECK_THROWS_AS(Permutahedron(Vec{}), std::invalid_argument);
    const OwaWeights w = fair_gini_weights(3);
    CHECK_THROWS_AS(moreau_owa_gradient(w, {1.0, 2.0}, SmoothingParam(1.0)), std::invalid_argument);
}
