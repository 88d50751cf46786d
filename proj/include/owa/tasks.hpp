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

#include "owa/learn.hpp"
#include "owa/solvers.hpp"

// Synthetic data for the three experiment settings (robust portfolio,
// multi-species grid shortest path, fair ranking) and their evaluation
// metrics. Generation is deterministic per seed; splits are disjoint.

namespace owa {

struct PortfolioTaskConfig {
    int assets = 10;
    int scenarios = 3;
    int samples = 1000;
    double noise = 0.1;           // Gaussian noise on drawn base prices
    double factor_low = 0.5;
    double factor_high = 1.5;
    int feature_dim = -1;         // <0: 2 * assets
    double feature_noise = 0.05;
    uint64_t seed = 1;
};

struct GridTaskConfig {
    int rows = 6;
    int cols = 6;
    int species = 3;
    int train_samples = 50;
    int val_samples = 10;
    int test_samples = 200;
    double feature_noise = 0.5;   // noise on the one-hot terrain encoding
    bool smooth_terrain = true;   // one majority-filter pass over tiles
    uint64_t seed = 1;
    Mat cost_table;               // species x terrain; empty: built-in defaults
};

struct RankTaskConfig {
    int list_size = 20;
    int feature_dim = 8;
    int n_groups = 2;
    int samples = 400;
    double noise = 0.1;           // relevance observation noise
    uint64_t seed = 1;
};

struct TaskSample {
    Vec z;    // features (portfolio, grid)
    Mat C;    // criteria matrix (portfolio, grid)
    Vec c;    // relevance scores (rank)
    Mat feat; // per-item features, list_size x feature_dim (rank)
};

struct TaskDataset {
    std::string task;  // portfolio | grid | rank
    uint64_t seed = 0;
    std::vector<TaskSample> samples;
    std::vector<int> train_idx, val_idx, test_idx;
    GridGraph graph;        // grid payload
    Mat cost_table;         // grid payload
    GroupStructure groups;  // rank payload
    PositionBias bias;      // rank payload
    std::string config_echo;
};

TaskDataset gen_portfolio(const PortfolioTaskConfig& cfg);
TaskDataset gen_grid_task(const GridTaskConfig& cfg);
TaskDataset gen_rank_task(const RankTaskConfig& cfg);

/// Quantile grouping over a designated per-item value: items sorted by the
/// value and cut into contiguous buckets whose sizes differ by at most one.
GroupStructure groups_from_quantiles(const Vec& designated_feature, int n_groups);

struct RankEvalOptions {
    // The violation's mean term divides by |G| (default) or, matching the
    // printed formula, by the list size n.
    bool paper_mean_over_n = false;
};

struct RankScores {
    double utility = 0.0;
    double violation = 0.0;
};

/// utility = c^T Pi b; violation = (1/|G|) sum_g |mean_term - E_g(Pi)|.
/// Throws if Pi is not doubly stochastic (tol 1e-8).
RankScores eval_ranking(const Mat& Pi, const Vec& c, const GroupStructure& groups,
                        const PositionBias& bias, RankEvalOptions opts = {});

struct RegretRow {
    int sample = 0;
    double owa_regret_pct = 0.0;
    Vec species_regret_pct;  // grid only
};

struct RegretTable {
    std::vector<RegretRow> rows;
    double mean_owa_regret_pct = 0.0;
    Vec mean_species_regret_pct;
    double worst_species_mean_pct = 0.0;  // mean over samples of max-over-species regret
};

/// Reference OWA optima per sample, solved on the true matrices with the
/// projected-subgradient solver.
Vec portfolio_reference_optima(const TaskDataset& ds, const std::vector<int>& idx,
                               const OwaWeights& w, PgdOptions ref = high_accuracy_pgd());

RegretTable eval_regret_portfolio(const TaskDataset& ds, const std::vector<int>& idx,
                                  const std::vector<Vec>& decisions, const OwaWeights& w,
                                  const Vec& reference);

struct GridReference {
    Vec owa_star;      // per sample: optimal descending-weighted species cost
    Mat species_star;  // per sample x species: that species' own optimal path cost
};

GridReference grid_reference_optima(const TaskDataset& ds, const std::vector<int>& idx,
                                    const OwaWeights& w);

/// Per-sample OWA path regret plus the per-species path-length regret
/// against each species' own optimum.
RegretTable eval_regret_grid(const TaskDataset& ds, const std::vector<int>& idx,
                             const std::vector<Vec>& node_decisions, const OwaWeights& w,
                             const GridReference& reference);

/// Columnar text serialization (header: config echo + seed; one row per
/// sample) so generated runs are replayable.
void save_dataset(const std::string& path, const TaskDataset& ds);
TaskDataset load_dataset(const std::string& path);

}  // namespace owa
