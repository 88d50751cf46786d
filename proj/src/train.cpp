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

#include "owa/train.hpp"

namespace owa {

Method method_from_string(const std::string& name) {
    if (name == "two_stage") return Method::TwoStage;
    if (name == "uws") return Method::Uws;
    if (name == "owa_qp") return Method::OwaQp;
    if (name == "owa_moreau") return Method::OwaMoreau;
    if (name == "surrogate_lp") return Method::SurrogateLp;
    if (name == "spo_rank") return Method::SpoRank;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::TwoStage: return "two_stage";
        case Method::Uws: return "uws";
        case Method::OwaQp: return "owa_qp";
        case Method::OwaMoreau: return "owa_moreau";
        case Method::SurrogateLp: return "surrogate_lp";
        case Method::SpoRank: return "spo_rank";
    }
    return "?";
}

bool method_valid_for_task(Method m, const std::string& task) {
    if (task == "portfolio") return m == Method::TwoStage || m == Method::Uws || m == Method::OwaQp || m == Method::OwaMoreau;
    if (task == "grid") return m == Method::TwoStage || m == Method::Uws || m == Method::SurrogateLp;
    if (task == "rank") return m == Method::TwoStage || m == Method::SpoRank;
    return false;
}

namespace {

double default_lr(Method m) {
    switch (m) {
        case Method::TwoStage: return 5e-3;
        case Method::SpoRank: return 1e-1;
        default: return 1e-2;
    }
}

double default_lambda_mse(Method m) {
    switch (m) {
        case Method::TwoStage: return 1.0;
        case Method::Uws: return 0.3;
        case Method::OwaQp: return 0.4;
        case Method::OwaMoreau: return 0.1;
        case Method::SurrogateLp: return 0.3;
        case Method::SpoRank: return 0.0;
    }
    return 0.0;
}

int default_epochs(const std::string& task) {
    if (task == "portfolio") return 30;
    if (task == "grid") return 60;
    return 12;  // rank
}

int default_moreau_iters(int m) {
    if (m <= 3) return 300;
    if (m <= 5) return 500;
    return 750;
}

std::vector<int> shuffled(std::vector<int> idx, Rng& rng) {
    for (size_t i = idx.size(); i > 1; --i) {
        const size_t j = rng() % i;
        std::swap(idx[i - 1], idx[j]);
    }
    return idx;
}

Vec mean_species_cost(const Mat& C) {
    Vec mean(C.cols, 0.0);
    for (int s = 0; s < C.rows; ++s) axpy(1.0 / C.rows, C.row_vec(s), mean);
    return mean;
}

struct SampleGrad {
    double loss = 0.0;
    Mat d_out;
};

// Per-sample loss and output cotangent (of the minimized objective) for the
// portfolio methods.
SampleGrad portfolio_sample(Method method, const OwaWeights& w, const TaskSample& sample,
                            const Mat& C_hat, const TrainConfig& cfg, Vec* warm_x) {
    SampleGrad out;
    const double lam = cfg.lambda_mse >= 0.0 ? cfg.lambda_mse : default_lambda_mse(method);
    const Mat& C_true = sample.C;

    if (method == Method::TwoStage) {
        out.loss = loss_two_stage(C_hat, C_true);
        out.d_out = loss_two_stage_grad(C_hat, C_true);
        return out;
    }

    Vec x_star;
    Mat d_dq(C_hat.rows, C_hat.cols, 0.0);  // d(DQ)/d C_hat
    if (method == Method::Uws) {
        // Smoothed unweighted-sum mapping: argmax cbar^T x - eps ||x||^2 over
        // the simplex, i.e. the projection of cbar / (2 eps).
        const double eps = cfg.uws_epsilon;
        const Vec cbar = matTvec(C_hat, Vec(C_hat.rows, 1.0));
        const SimplexProjection proj = project_simplex_full((1.0 / (2.0 * eps)) * cbar);
        x_star = proj.p;
        const Vec g = loss_owa_dq_cotangent(w, C_true, x_star);
        const Vec d_cbar = (1.0 / (2.0 * eps)) * proj.apply_jacobian(g);
        for (int r = 0; r < C_hat.rows; ++r)
            for (int j = 0; j < C_hat.cols; ++j) d_dq(r, j) = d_cbar[j];
    } else if (method == Method::OwaQp) {
        OwaQpOptions qopt;
        qopt.epsilon = cfg.qp_epsilon;
        const OwaQpSolution sol = solve_owa_qp(w, C_hat, qopt);
        x_star = sol.x;
        const Vec g = loss_owa_dq_cotangent(w, C_true, x_star);
        d_dq = backward_qp_kkt(sol, C_hat, g).grad_C;
    } else if (method == Method::OwaMoreau) {
        const SmoothingParam beta(cfg.moreau_beta);
        // Run to the fixed point (the backward route differentiates the update
        // map there); iterations are cheap once warm-started across epochs.
        const int iters = cfg.moreau_iters > 0 ? cfg.moreau_iters
                                               : std::max(4000, default_moreau_iters(C_hat.rows));
        const SmoothedSolve fwd = solve_owa_moreau_pgd(
            w, C_hat, beta, iters, -1.0, 1e-10, warm_x && !warm_x->empty() ? warm_x : nullptr);
        if (warm_x) *warm_x = fwd.x;
        x_star = fwd.x;
        const Vec g = loss_owa_dq_cotangent(w, C_true, x_star);
        d_dq = backward_fixed_point(w, C_hat, x_star, g, beta, fwd.alpha).grad_C;
    } else {
        throw std::invalid_argument("portfolio_sample: method not applicable");
    }

    const double dq = loss_owa_dq(w, C_true, x_star);
    const double mse = loss_two_stage(C_hat, C_true);
    out.loss = -(1.0 - lam) * dq + lam * mse;
    const Mat d_mse = loss_two_stage_grad(C_hat, C_true);
    out.d_out = Mat(C_hat.rows, C_hat.cols);
    for (size_t i = 0; i < out.d_out.a.size(); ++i)
        out.d_out.a[i] = -(1.0 - lam) * d_dq.a[i] + lam * d_mse.a[i];
    return out;
}

SampleGrad grid_sample(Method method, const OwaWeights& w, const GridGraph& graph,
                       const TaskSample& sample, const Mat& out_hat, const TrainConfig& cfg) {
    SampleGrad out;
    const double lam = cfg.lambda_mse >= 0.0 ? cfg.lambda_mse : default_lambda_mse(method);
    const Mat& C_true = sample.C;

    if (method == Method::TwoStage) {
        out.loss = loss_two_stage(out_hat, C_true);
        out.d_out = loss_two_stage_grad(out_hat, C_true);
        return out;
    }

    // Vector predictors trained end-to-end through the shortest-path surrogate.
    const Vec c_hat = out_hat.row_vec(0);
    const Vec x_nodes = solve_shortest_path(graph, c_hat).node_x;
    const Vec costs = species_path_costs(C_true, x_nodes);

    Vec d_agg_dx;  // cotangent of the aggregation over node indicators
    double agg = 0.0;
    if (method == Method::SurrogateLp) {
        // OWA of negated species costs, as a minimized aggregate
        // w^T sort_desc(costs); its subgradient over costs is the OWA
        // subgradient evaluated at the negated costs.
        Vec sorted = costs;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        for (int j = 0; j < C_true.rows; ++j) agg += w[j] * sorted[j];
        Vec neg = (-1.0) * costs;
        d_agg_dx = matTvec(C_true, owa_subgradient(w, neg));
    } else if (method == Method::Uws) {
        agg = sum(costs);
        d_agg_dx = matTvec(C_true, Vec(C_true.rows, 1.0));
    } else {
        throw std::invalid_argument("grid_sample: method not applicable");
    }

    const Vec d_bb = backward_blackbox_lp(graph, c_hat, d_agg_dx, cfg.lambda_bb);
    const Vec target = mean_species_cost(C_true);
    double mse = 0.0;
    Vec d_mse(c_hat.size());
    for (size_t i = 0; i < c_hat.size(); ++i) {
        const double d = c_hat[i] - target[i];
        mse += d * d;
        d_mse[i] = 2.0 * d;
    }
    out.loss = (1.0 - lam) * agg + lam * mse;
    out.d_out = Mat(1, static_cast<int>(c_hat.size()));
    for (size_t i = 0; i < c_hat.size(); ++i)
        out.d_out(0, static_cast<int>(i)) = (1.0 - lam) * d_bb[i] + lam * d_mse[i];
    return out;
}

}  // namespace

Vec score_items(const Predictor& model, const Mat& feat) {
    Vec scores(feat.rows);
    for (int i = 0; i < feat.rows; ++i) scores[i] = model.forward(feat.row_vec(i))(0, 0);
    return scores;
}

TrainResult train(const TaskDataset& data, Method method, const TrainConfig& cfg) {
    if (!method_valid_for_task(method, data.task))
        throw std::invalid_argument("method " + method_name(method) + " is not applicable to task " + data.task);
    if (cfg.batch < 1) throw std::invalid_argument("train: batch must be >= 1");

    const double lr = cfg.lr > 0.0 ? cfg.lr : default_lr(method);
    const int epochs = cfg.epochs > 0 ? cfg.epochs : default_epochs(data.task);

    // Model shape per task/method; identical shapes share the init seed so
    // method comparisons are paired.
    Predictor model;
    OwaWeights w = fair_gini_weights(1);
    if (data.task == "portfolio") {
        const int m = data.samples[0].C.rows, n = data.samples[0].C.cols;
        const int dz = static_cast<int>(data.samples[0].z.size());
        w = fair_gini_weights(m);
        model = Predictor::make(dz, m, n, Predictor::default_hidden(dz), cfg.seed);
    } else if (data.task == "grid") {
        const int m = data.samples[0].C.rows, n = data.samples[0].C.cols;
        const int dz = static_cast<int>(data.samples[0].z.size());
        w = fair_gini_weights(m);
        const int rows = method == Method::TwoStage ? m : 1;
        model = Predictor::make(dz, rows, n, Predictor::default_hidden(dz), cfg.seed);
    } else {  // rank
        const int d = data.samples[0].feat.cols;
        w = fair_gini_weights(data.groups.n_groups());
        model = Predictor::make(d, 1, 1, Predictor::default_hidden(d), cfg.seed);
    }

    Vec theta = model.flatten_params();
    Adam opt(theta.size(), lr);
    Rng shuffle_rng(cfg.seed ^ 0xd1b54a32d192ed03ull);

    // Per-sample warm starts for the smoothed forward solves.
    std::vector<Vec> warm_cache(data.samples.size());

    // Validation references computed once.
    Vec val_ref;
    GridReference grid_ref;
    if (data.task == "portfolio") val_ref = portfolio_reference_optima(data, data.val_idx, w);
    if (data.task == "grid") grid_ref = grid_reference_optima(data, data.val_idx, w);

    TrainResult result;
    result.history.train_loss.reserve(epochs);
    result.history.val_metric.reserve(epochs);

    for (int epoch = 0; epoch < epochs; ++epoch) {
        const std::vector<int> order = shuffled(data.train_idx, shuffle_rng);
        double epoch_loss = 0.0;
        size_t seen = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch) {
            const size_t stop = std::min(order.size(), start + cfg.batch);
            Predictor grads = model.zeros_like();
            double batch_loss = 0.0;
            for (size_t t = start; t < stop; ++t) {
                const TaskSample& sample = data.samples[order[t]];
                if (data.task == "rank") {
                    const Vec c_hat = score_items(model, sample.feat);
                    Vec d_scores(c_hat.size(), 0.0);
                    if (method == Method::TwoStage) {
                        for (size_t i = 0; i < c_hat.size(); ++i) {
                            const double d = c_hat[i] - sample.c[i];
                            batch_loss += d * d;
                            d_scores[i] = 2.0 * d;
                        }
                    } else {
                        const SpoRankResult spo =
                            spo_plus_for_owa_rank(c_hat, sample.c, data.groups, data.bias,
                                                  cfg.rank_lambda, w, cfg.rank_beta0, cfg.rank_T_train);
                        batch_loss += spo.spo_loss_gap;
                        d_scores = spo.grad_c_hat;
                    }
                    for (int i = 0; i < sample.feat.rows; ++i) {
                        Predictor::Cache cache;
                        model.forward(sample.feat.row_vec(i), &cache);
                        Mat d_item(1, 1);
                        d_item(0, 0) = d_scores[i];
                        model.backward(cache, d_item, grads);
                    }
                } else {
                    Predictor::Cache cache;
                    const Mat out_hat = model.forward(sample.z, &cache);
                    const SampleGrad sg =
                        data.task == "portfolio"
                            ? portfolio_sample(method, w, sample, out_hat, cfg, &warm_cache[order[t]])
                            : grid_sample(method, w, data.graph, sample, out_hat, cfg);
                    batch_loss += sg.loss;
                    model.backward(cache, sg.d_out, grads);
                }
            }
            const double scale = 1.0 / static_cast<double>(stop - start);
            if (std::isnan(batch_loss))
                throw std::runtime_error("train: NaN loss in method " + method_name(method) +
                                         " at epoch " + std::to_string(epoch));
            Vec gflat = grads.flatten_params();
            for (double& v : gflat) v *= scale;
            opt.step(theta, gflat);
            model.set_params(theta);
            epoch_loss += batch_loss;
            seen += stop - start;
        }
        result.history.train_loss.push_back(epoch_loss / std::max<size_t>(seen, 1));

        // Validation metric.
        if (data.task == "portfolio") {
            PgdOptions eval_opt;  // paper-protocol evaluation solver
            const auto decisions = portfolio_decisions(model, data, data.val_idx, w, eval_opt);
            result.history.val_metric.push_back(
                eval_regret_portfolio(data, data.val_idx, decisions, w, val_ref).mean_owa_regret_pct);
        } else if (data.task == "grid") {
            const auto decisions = grid_decisions(model, data, data.val_idx);
            result.history.val_metric.push_back(
                eval_regret_grid(data, data.val_idx, decisions, w, grid_ref).mean_owa_regret_pct);
        } else {
            double util = 0.0;
            for (int q : data.val_idx) {
                const Vec c_hat = score_items(model, data.samples[q].feat);
                const Mat Pi = solve_fair_ranking_fw(c_hat, data.groups, data.bias, cfg.rank_lambda,
                                                     w, cfg.rank_beta0, cfg.rank_T_train)
                                   .Pi;
                util += eval_ranking(Pi, data.samples[q].c, data.groups, data.bias).utility;
            }
            result.history.val_metric.push_back(util / std::max<size_t>(data.val_idx.size(), 1));
        }
    }

    result.model = std::move(model);
    return result;
}

std::vector<Vec> portfolio_decisions(const Predictor& model, const TaskDataset& ds,
                                     const std::vector<int>& idx, const OwaWeights& w,
                                     PgdOptions solver) {
    std::vector<Vec> out;
    out.reserve(idx.size());
    for (int i : idx) {
        const Mat C_hat = model.forward(ds.samples[i].z);
        out.push_back(solve_owa_projected_subgradient(w, C_hat, solver).x);
    }
    return out;
}

std::vector<Vec> grid_decisions(const Predictor& model, const TaskDataset& ds,
                                const std::vector<int>& idx) {
    std::vector<Vec> out;
    out.reserve(idx.size());
    for (int i : idx) {
        const Mat out_hat = model.forward(ds.samples[i].z);
        const Vec c = out_hat.rows == 1 ? out_hat.row_vec(0) : mean_species_cost(out_hat);
        out.push_back(solve_shortest_path(ds.graph, c).node_x);
    }
    return out;
}

RankEvalResult rank_evaluate(const Predictor& model, const TaskDataset& ds,
                             const std::vector<int>& idx, double lambda, const OwaWeights& w,
                             double beta0, int T, RankEvalOptions opts) {
    RankEvalResult out;
    for (int q : idx) {
        const Vec c_hat = score_items(model, ds.samples[q].feat);
        const Mat Pi = solve_fair_ranking_fw(c_hat, ds.groups, ds.bias, lambda, w, beta0, T).Pi;
        const RankScores s = eval_ranking(Pi, ds.samples[q].c, ds.groups, ds.bias, opts);
        out.utility += s.utility;
        out.violation += s.violation;
    }
    const double denom = std::max<size_t>(idx.size(), 1);
    out.utility /= denom;
    out.violation /= denom;
    return out;
}

}  // namespace owa
