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

#include <cstdio>
#include <set>

#include "owa/oracles.hpp"
#include "owa/tasks.hpp"

using namespace owa;

TEST_CASE("portfolio generator: degenerate factor range copies base prices across scenarios") {
    PortfolioTaskConfig cfg;
    cfg.assets = 6;
    cfg.scenarios = 3;
    cfg.samples = 40;
    cfg.factor_low = cfg.factor_high = 1.0;
    cfg.seed = 21;
    const TaskDataset ds = gen_portfolio(cfg);
    for (const TaskSample& s : ds.samples)
        for (int r = 1; r < 3; ++r)
            for (int j = 0; j < 6; ++j) CHECK(s.C(r, j) == doctest::Approx(s.C(0, j)).epsilon(1e-15));
}

TEST_CASE("portfolio generator: single scenario reduces to one row") {
    PortfolioTaskConfig cfg;
    cfg.scenarios = 1;
    cfg.samples = 10;
    const TaskDataset ds = gen_portfolio(cfg);
    CHECK(ds.samples[0].C.rows == 1);
}

TEST_CASE("portfolio generator: factor mean obeys the law of large numbers") {
    // Same seed with and without the degenerate range: the base-price draws
    // coincide, so the elementwise ratio recovers the factors themselves.
    PortfolioTaskConfig base;
    base.assets = 10;
    base.scenarios = 3;
    base.samples = 400;
    base.seed = 33;
    PortfolioTaskConfig deg = base;
    deg.factor_low = deg.factor_high = 1.0;
    const TaskDataset with_factors = gen_portfolio(base);
    const TaskDataset without = gen_portfolio(deg);
    double acc = 0.0;
    long cnt = 0;
    for (int i = 0; i < base.samples; ++i)
        for (size_t k = 0; k < with_factors.samples[i].C.a.size(); ++k) {
            acc += with_factors.samples[i].C.a[k] / without.samples[i].C.a[k];
            ++cnt;
        }
    const double mean = acc / cnt;
    const double sigma = (base.factor_high - base.factor_low) / std::sqrt(12.0) / std::sqrt(cnt);
    CHECK(std::abs(mean - 1.0) <= 3.0 * sigma);
}

TEST_CASE("portfolio generator: deterministic per seed, disjoint covering splits") {
    PortfolioTaskConfig cfg;
    cfg.samples = 100;
    cfg.seed = 5;
    const TaskDataset a = gen_portfolio(cfg);
    const TaskDataset b = gen_portfolio(cfg);
    CHECK(a.samples[7].C.a == b.samples[7].C.a);
    CHECK(a.samples[63].z == b.samples[63].z);
    CHECK(a.train_idx == b.train_idx);

    std::set<int> seen;
    for (const auto* idx : {&a.train_idx, &a.val_idx, &a.test_idx})
        for (int i : *idx) CHECK(seen.insert(i).second);
    CHECK(static_cast<int>(seen.size()) == cfg.samples);
}

TEST_CASE("grid generator: species with identical tables get identical cost rows") {
    GridTaskConfig cfg;
    cfg.rows = cfg.cols = 4;
    cfg.train_samples = 4;
    cfg.val_samples = 2;
    cfg.test_samples = 2;
    cfg.species = 2;
    cfg.cost_table = Mat(2, 3);
    for (int k = 0; k < 3; ++k) cfg.cost_table(0, k) = cfg.cost_table(1, k) = 1.0 + k;
    const TaskDataset ds = gen_grid_task(cfg);
    for (const TaskSample& s : ds.samples)
        for (int t = 0; t < 16; ++t) CHECK(s.C(0, t) == s.C(1, t));
}

TEST_CASE("grid task: uniform terrain makes equal-length paths tie") {
    const GridGraph g(3, 3);
    const Vec cost(9, 2.0);
    const PathSolution sol = solve_shortest_path(g, cost);
    CHECK(sol.cost == doctest::Approx(5 * 2.0));  // any monotone path visits 5 tiles
}

TEST_CASE("grid task: OWA-optimal joint path matches exhaustive enumeration on 4x4") {
    Rng rng(401);
    const GridGraph g(4, 4);
    const OwaWeights w = fair_gini_weights(3);
    const auto paths = enumerate_simple_paths(g);
    for (int t = 0; t < 5; ++t) {
        const Mat C = random_mat(rng, 3, 16, 0.2, 3.0);
        const PathSolution sol = owa_optimal_joint_path(g, C, w);
        double best = 1e18;
        for (const auto& path : paths) {
            Vec costs(3, 0.0);
            for (int v : path)
                for (int s = 0; s < 3; ++s) costs[s] += C(s, v);
            std::sort(costs.begin(), costs.end(), std::greater<>());
            double agg = 0.0;
            for (int j = 0; j < 3; ++j) agg += w[j] * costs[j];
            best = std::min(best, agg);
        }
        CHECK(sol.cost == doctest::Approx(best).epsilon(1e-10));
    }
}

TEST_CASE("grid generator: feature encoding is a noisy one-hot of terrain") {
    GridTaskConfig cfg;
    cfg.rows = cfg.cols = 4;
    cfg.train_samples = 3;
    cfg.val_samples = 1;
    cfg.test_samples = 1;
    cfg.feature_noise = 0.0;
    const TaskDataset ds = gen_grid_task(cfg);
    const Mat table = ds.cost_table;
    for (const TaskSample& s : ds.samples)
        for (int t = 0; t < 16; ++t) {
            int hot = -1;
            for (int k = 0; k < 3; ++k)
                if (s.z[3 * t + k] == 1.0) hot = k;
            REQUIRE(hot >= 0);
            for (int sp = 0; sp < 3; ++sp) CHECK(s.C(sp, t) == table(sp, hot));
        }
}

TEST_CASE("quantile groups: sizes differ by at most one, every item in exactly one group") {
    Rng rng(409);
    for (int n : {7, 12, 20}) {
        for (int G : {2, 3, 5, 7}) {
            const Vec q = random_vec(rng, n, 0.0, 1.0);
            const GroupStructure groups = groups_from_quantiles(q, G);
            Vec sizes(G, 0.0);
            for (int i = 0; i < n; ++i) sizes[groups.group_of[i]] += 1.0;
            const double lo = *std::min_element(sizes.begin(), sizes.end());
            const double hi = *std::max_element(sizes.begin(), sizes.end());
            CHECK(hi - lo <= 1.0);
            for (int i = 0; i < n; ++i) {
                double colsum = 0.0;
                for (int g = 0; g < G; ++g) colsum += groups.A(g, i);
                CHECK(colsum == 1.0);
            }
        }
    }
}

TEST_CASE("rank generator: relevance in [0,1], groups track the designated feature") {
    RankTaskConfig cfg;
    cfg.samples = 30;
    cfg.seed = 17;
    const TaskDataset ds = gen_rank_task(cfg);
    CHECK(ds.groups.n_groups() == 2);
    for (const TaskSample& s : ds.samples)
        for (double c : s.c) {
            CHECK(c >= 0.0);
            CHECK(c <= 1.0);
        }
    // designated feature column orders consistently with the group labels on average
    double mean0 = 0.0, mean1 = 0.0;
    int c0 = 0, c1 = 0;
    for (const TaskSample& s : ds.samples)
        for (int i = 0; i < cfg.list_size; ++i) {
            if (ds.groups.group_of[i] == 0) {
                mean0 += s.feat(i, 0);
                ++c0;
            } else {
                mean1 += s.feat(i, 0);
                ++c1;
            }
        }
    CHECK(mean0 / c0 < mean1 / c1);
}

TEST_CASE("eval_ranking: identity policy on sorted relevance attains the permutation maximum") {
    const int n = 3;
    const Vec c{0.9, 0.5, 0.2};  // sorted descending already
    Mat I(n, n, 0.0);
    for (int i = 0; i < n; ++i) I(i, i) = 1.0;
    Mat A(1, n, 1.0);
    const GroupStructure groups(A, std::vector<int>(n, 0));
    const PositionBias bias = dcg_position_bias(n);
    const RankScores s = eval_ranking(I, c, groups, bias);
    double expect = 0.0;
    for (int j = 0; j < n; ++j) expect += c[j] * bias.b[j];
    CHECK(s.utility == doctest::Approx(expect));
    // maximum over all 6 permutation matrices
    std::vector<int> perm{0, 1, 2};
    double best = -1e18;
    do {
        Mat P(n, n, 0.0);
        for (int pos = 0; pos < n; ++pos) P(perm[pos], pos) = 1.0;
        best = std::max(best, ranking_utility(c, P, bias));
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(s.utility == doctest::Approx(best));
    // single group: violation identically zero
    CHECK(s.violation == doctest::Approx(0.0));
}

TEST_CASE("eval_ranking: uniform policy gives equal-size groups zero violation") {
    const int n = 4;
    Mat U(n, n, 1.0 / n);
    Mat A(2, n, 0.0);
    std::vector<int> gof{0, 0, 1, 1};
    for (int i = 0; i < n; ++i) A(gof[i], i) = 1.0;
    const GroupStructure groups(A, gof);
    const RankScores s = eval_ranking(U, {0.1, 0.2, 0.3, 0.4}, groups, dcg_position_bias(n));
    CHECK(s.violation == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("eval_ranking: the printed mean normalization is available behind the switch") {
    const int n = 4;
    Mat U(n, n, 1.0 / n);
    Mat A(2, n, 0.0);
    std::vector<int> gof{0, 0, 1, 1};
    for (int i = 0; i < n; ++i) A(gof[i], i) = 1.0;
    const GroupStructure groups(A, gof);
    RankEvalOptions paper;
    paper.paper_mean_over_n = true;
    const RankScores def = eval_ranking(U, {0.1, 0.2, 0.3, 0.4}, groups, dcg_position_bias(n));
    const RankScores alt = eval_ranking(U, {0.1, 0.2, 0.3, 0.4}, groups, dcg_position_bias(n), paper);
    CHECK(def.violation == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(alt.violation > 0.0);  // the 1/n mean term shifts the baseline
    Mat bad = U;
    bad(0, 0) += 0.2;
    CHECK_THROWS_AS(eval_ranking(bad, {0.1, 0.2, 0.3, 0.4}, groups, dcg_position_bias(n)),
                    std::invalid_argument);
}

TEST_CASE("regret suite: truth decisions give an all-zeros table, others nonnegative") {
    PortfolioTaskConfig cfg;
    cfg.assets = 4;
    cfg.scenarios = 2;
    cfg.samples = 30;
    cfg.seed = 43;
    const TaskDataset ds = gen_portfolio(cfg);
    const OwaWeights w = fair_gini_weights(2);
    std::vector<int> idx{0, 1, 2, 3, 4};
    const Vec ref = portfolio_reference_optima(ds, idx, w);

    std::vector<Vec> truth_decisions;
    for (int i : idx)
        truth_decisions.push_back(
            solve_owa_projected_subgradient(w, ds.samples[i].C, high_accuracy_pgd()).x);
    const RegretTable t0 = eval_regret_portfolio(ds, idx, truth_decisions, w, ref);
    for (const RegretRow& r : t0.rows) CHECK(std::abs(r.owa_regret_pct) <= 1e-4);

    Rng rng(47);
    std::vector<Vec> random_decisions;
    for (size_t k = 0; k < idx.size(); ++k)
        random_decisions.push_back(project_simplex(random_vec(rng, 4, -1.0, 1.0)));
    const RegretTable t1 = eval_regret_portfolio(ds, idx, random_decisions, w, ref);
    for (const RegretRow& r : t1.rows) CHECK(r.owa_regret_pct >= -1e-6);
}

TEST_CASE("regret suite: hand-built two-sample fixture") {
    // two criteria over two assets, identity criteria matrices, w = (0.8, 0.2):
    // the optimum splits evenly with value 0.5
    TaskDataset ds;
    ds.task = "portfolio";
    Mat I2(2, 2, 0.0);
    I2(0, 0) = I2(1, 1) = 1.0;
    ds.samples.resize(2);
    ds.samples[0].C = I2;
    ds.samples[1].C = I2;
    const OwaWeights w = fair_gini_weights(2);
    const std::vector<int> idx{0, 1};
    const Vec reference{0.5, 0.5};
    // decision 1: everything on asset 0 -> owa = 0.8*0 + 0.2*1 = 0.2 -> 60% regret
    // decision 2: even split -> 0% regret
    const std::vector<Vec> decisions{{1.0, 0.0}, {0.5, 0.5}};
    const RegretTable t = eval_regret_portfolio(ds, idx, decisions, w, reference);
    CHECK(t.rows[0].owa_regret_pct == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(t.rows[1].owa_regret_pct == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(t.mean_owa_regret_pct == doctest::Approx(30.0).epsilon(1e-9));
}

TEST_CASE("grid regret suite: per-species regrets nonnegative, zero at species optima") {
    GridTaskConfig cfg;
    cfg.rows = cfg.cols = 4;
    cfg.train_samples = 2;
    cfg.val_samples = 1;
    cfg.test_samples = 3;
    cfg.seed = 51;
    const TaskDataset ds = gen_grid_task(cfg);
    const OwaWeights w = fair_gini_weights(3);
    const GridReference ref = grid_reference_optima(ds, ds.test_idx, w);

    std::vector<Vec> decisions;
    for (int i : ds.test_idx)
        decisions.push_back(owa_optimal_joint_path(ds.graph, ds.samples[i].C, w).node_x);
    const RegretTable t = eval_regret_grid(ds, ds.test_idx, decisions, w, ref);
    for (const RegretRow& r : t.rows) {
        CHECK(std::abs(r.owa_regret_pct) <= 1e-9);
        for (double v : r.species_regret_pct) CHECK(v >= -1e-9);
    }
    CHECK(t.worst_species_mean_pct >= 0.0);
}

TEST_CASE("rank task: solver-side tradeoff is monotone on true relevance") {
    RankTaskConfig cfg;
    cfg.list_size = 12;
    cfg.samples = 25;
    cfg.seed = 61;
    const TaskDataset ds = gen_rank_task(cfg);
    const OwaWeights w = fair_gini_weights(2);
    double prev_util = 1e18, prev_viol = 1e18;
    for (double lam : {0.0, 0.5, 0.95}) {
        double util = 0.0, viol = 0.0;
        for (int q = 0; q < 10; ++q) {
            const Mat Pi =
                solve_fair_ranking_fw(ds.samples[q].c, ds.groups, ds.bias, lam, w, 1.0, 300).Pi;
            const RankScores s = eval_ranking(Pi, ds.samples[q].c, ds.groups, ds.bias);
            util += s.utility;
            viol += s.violation;
        }
        CHECK(util <= prev_util + 1e-9);
        CHECK(viol <= prev_viol + 1e-9);
        prev_util = util;
        prev_viol = viol;
    }
}

TEST_CASE("dataset serialization round trip") {
    PortfolioTaskConfig pc;
    pc.assets = 4;
    pc.scenarios = 2;
    pc.samples = 12;
    pc.seed = 71;
    const TaskDataset p = gen_portfolio(pc);
    save_dataset("/tmp/owa_ds_p.txt", p);
    const TaskDataset p2 = load_dataset("/tmp/owa_ds_p.txt");
    CHECK(p2.task == "portfolio");
    CHECK(p2.seed == p.seed);
    CHECK(p2.samples.size() == p.samples.size());
    CHECK(p2.train_idx == p.train_idx);
    CHECK(nrm_inf(p2.samples[3].C.a - p.samples[3].C.a) == 0.0);
    CHECK(nrm_inf(p2.samples[5].z - p.samples[5].z) == 0.0);

    GridTaskConfig gc;
    gc.rows = gc.cols = 4;
    gc.train_samples = 3;
    gc.val_samples = 1;
    gc.test_samples = 2;
    const TaskDataset g = gen_grid_task(gc);
    save_dataset("/tmp/owa_ds_g.txt", g);
    const TaskDataset g2 = load_dataset("/tmp/owa_ds_g.txt");
    CHECK(g2.graph.rows == 4);
    CHECK(nrm_inf(g2.samples[1].C.a - g.samples[1].C.a) == 0.0);
    CHECK(g2.cost_table.a == g.cost_table.a);

    RankTaskConfig rc;
    rc.list_size = 6;
    rc.samples = 8;
    const TaskDataset r = gen_rank_task(rc);
    save_dataset("/tmp/owa_ds_r.txt", r);
    const TaskDataset r2 = load_dataset("/tmp/owa_ds_r.txt");
    CHECK(r2.groups.group_of == r.groups.group_of);
    CHECK(nrm_inf(r2.samples[2].feat.a - r.samples[2].feat.a) == 0.0);
    CHECK(nrm_inf(r2.samples[2].c - r.samples[2].c) == 0.0);
    CHECK(r2.bias.b == r.bias.b);

    std::remove("/tmp/owa_ds_p.txt");
    std::remove("/tmp/owa_ds_g.txt");
    std::remove("/tmp/owa_ds_r.txt");
}
