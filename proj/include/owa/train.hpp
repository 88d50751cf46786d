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
#include "owa/tasks.hpp"

// Mini-batch training loops wiring each method's forward solver to its
// backward route. Single-threaded and bit-reproducible given (seed, config,
// dataset); independent runs may execute in parallel processes.

namespace owa {

enum class Method { TwoStage, Uws, OwaQp, OwaMoreau, SurrogateLp, SpoRank };

Method method_from_string(const std::string& name);
std::string method_name(Method m);
bool method_valid_for_task(Method m, const std::string& task);

struct TrainConfig {
    double lr = -1.0;         // <0: per-method default
    int batch = 64;
    int epochs = -1;          // <0: per-task default
    uint64_t seed = 1;
    double lambda_mse = -1.0; // <0: per-method default

    // solver knobs
    double qp_epsilon = 0.1;
    double moreau_beta = 0.05;
    int moreau_iters = -1;    // <0: 300/500/750 by scenario count
    double uws_epsilon = 0.1;
    double lambda_bb = 20.0;
    double rank_lambda = 0.5;
    double rank_beta0 = 1.0;
    int rank_T_train = 100;
    int rank_T_eval = 500;
};

struct TrainHistory {
    std::vector<double> train_loss;
    std::vector<double> val_metric;  // regret % (portfolio/grid), utility (rank)
};

struct TrainResult {
    Predictor model;
    TrainHistory history;
};

TrainResult train(const TaskDataset& data, Method method, const TrainConfig& cfg);

/// Test-time decisions. Portfolio: every method's prediction goes through the
/// projected-subgradient OWA solver. Grid: matrix predictors take the
/// shortest path on the mean predicted species cost, vector predictors on
/// their own prediction.
std::vector<Vec> portfolio_decisions(const Predictor& model, const TaskDataset& ds,
                                     const std::vector<int>& idx, const OwaWeights& w,
                                     PgdOptions solver = high_accuracy_pgd());

std::vector<Vec> grid_decisions(const Predictor& model, const TaskDataset& ds,
                                const std::vector<int>& idx);

struct RankEvalResult {
    double utility = 0.0;
    double violation = 0.0;
};

RankEvalResult rank_evaluate(const Predictor& model, const TaskDataset& ds,
                             const std::vector<int>& idx, double lambda, const OwaWeights& w,
                             double beta0, int T, RankEvalOptions opts = {});

/// Per-item scores from a scorer model (out shape 1x1) over a feature matrix.
Vec score_items(const Predictor& model, const Mat& feat);

}  // namespace owa
