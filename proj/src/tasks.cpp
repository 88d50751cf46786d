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

#include "owa/tasks.hpp"

#include <fstream>
#include <sstream>

namespace owa {

namespace {

constexpr uint64_t kFeatureMapSeedSalt = 0x9e3779b97f4a7c15ull;

std::vector<int> shuffled_indices(int n, Rng& rng) {
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    for (int i = n - 1; i > 0; --i) {
        const int j = static_cast<int>(rng() % static_cast<uint64_t>(i + 1));
        std::swap(idx[i], idx[j]);
    }
    return idx;
}

void split_70_10_20(int n, Rng& rng, std::vector<int>& train, std::vector<int>& val,
                    std::vector<int>& test) {
    const std::vector<int> idx = shuffled_indices(n, rng);
    const int n_train = static_cast<int>(0.7 * n);
    const int n_val = static_cast<int>(0.1 * n);
    train.assign(idx.begin(), idx.begin() + n_train);
    val.assign(idx.begin() + n_train, idx.begin() + n_train + n_val);
    test.assign(idx.begin() + n_train + n_val, idx.end());
}

}  // namespace

TaskDataset gen_portfolio(const PortfolioTaskConfig& cfg) {
    if (cfg.assets < 1 || cfg.scenarios < 1 || cfg.samples < 1)
        throw std::invalid_argument("gen_portfolio: bad config");
    if (!(cfg.factor_low <= cfg.factor_high)) throw std::invalid_argument("gen_portfolio: factor range empty");

    const int n = cfg.assets, m = cfg.scenarios, N = cfg.samples;
    const int dz = cfg.feature_dim > 0 ? cfg.feature_dim : 2 * n;
    Rng rng(cfg.seed);

    // Pool of base price vectors standing in for drawn historical prices.
    const int pool_size = std::max(50, N / 10);
    std::vector<Vec> pool(pool_size);
    for (Vec& p : pool) p = random_vec(rng, n, 0.5, 1.5);

    const RandomFeatureMap fmap =
        RandomFeatureMap::make(m * n, m * n, dz, cfg.seed ^ kFeatureMapSeedSalt, cfg.feature_noise);

    TaskDataset ds;
    ds.task = "portfolio";
    ds.seed = cfg.seed;
    ds.samples.resize(N);
    for (int i = 0; i < N; ++i) {
        const Vec& base = pool[rng() % pool.size()];
        Vec c(n);
        for (int j = 0; j < n; ++j) c[j] = std::max(base[j] + normal(rng, 0.0, cfg.noise), 0.01);
        Mat C(m, n);
        for (int s = 0; s < m; ++s)
            for (int j = 0; j < n; ++j) C(s, j) = c[j] * uniform(rng, cfg.factor_low, cfg.factor_high);
        ds.samples[i].C = C;
        ds.samples[i].z = fmap.apply(C.a, rng);
    }
    split_70_10_20(N, rng, ds.train_idx, ds.val_idx, ds.test_idx);

    std::ostringstream echo;
    echo << "task=portfolio assets=" << n << " scenarios=" << m << " samples=" << N
         << " noise=" << cfg.noise << " factor_low=" << cfg.factor_low
         << " factor_high=" << cfg.factor_high << " feature_dim=" << dz << " seed=" << cfg.seed;
    ds.config_echo = echo.str();
    return ds;
}

namespace {

Mat default_cost_table(int species) {
    // terrain columns: land, water, rock. Each species is fastest on its own
    // terrain: humans on land, naga on water, dwarves on rock.
    Mat t(species, 3);
    const double rows3[3][3] = {{1.0, 8.0, 4.0}, {8.0, 1.0, 4.0}, {4.0, 8.0, 1.0}};
    for (int s = 0; s < species; ++s)
        for (int k = 0; k < 3; ++k) t(s, k) = rows3[s % 3][k];
    return t;
}

std::vector<int> smooth_majority(const std::vector<int>& terrain, int rows, int cols) {
    std::vector<int> out = terrain;
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) {
            int count[3] = {0, 0, 0};
            for (int di = -1; di <= 1; ++di)
                for (int dj = -1; dj <= 1; ++dj) {
                    const int ni = i + di, nj = j + dj;
                    if (ni < 0 || ni >= rows || nj < 0 || nj >= cols) continue;
                    ++count[terrain[ni * cols + nj]];
                }
            const int self = terrain[i * cols + j];
            int best = self;
            for (int t = 0; t < 3; ++t)
                if (count[t] > count[best]) best = t;
            out[i * cols + j] = best;
        }
    return out;
}

}  // namespace

TaskDataset gen_grid_task(const GridTaskConfig& cfg) {
    if (cfg.rows < 2 || cfg.cols < 2 || cfg.species < 1) throw std::invalid_argument("gen_grid_task: bad config");
    const int tiles = cfg.rows * cfg.cols;
    if (tiles > 62) throw std::invalid_argument("gen_grid_task: grid too large for the exact reference");
    const Mat table = cfg.cost_table.rows > 0 ? cfg.cost_table : default_cost_table(cfg.species);
    for (double v : table.a)
        if (!(v > 0.0)) throw std::invalid_argument("gen_grid_task: speed table must be positive");

    Rng rng(cfg.seed);
    TaskDataset ds;
    ds.task = "grid";
    ds.seed = cfg.seed;
    ds.graph = GridGraph(cfg.rows, cfg.cols);
    ds.cost_table = table;

    const int N = cfg.train_samples + cfg.val_samples + cfg.test_samples;
    ds.samples.resize(N);
    for (int i = 0; i < N; ++i) {
        std::vector<int> terrain(tiles);
        for (int& t : terrain) t = static_cast<int>(rng() % 3);
        if (cfg.smooth_terrain) terrain = smooth_majority(terrain, cfg.rows, cfg.cols);
        Mat C(cfg.species, tiles);
        for (int s = 0; s < cfg.species; ++s)
            for (int t = 0; t < tiles; ++t) C(s, t) = table(s, terrain[t]);
        Vec z(3 * tiles, 0.0);
        for (int t = 0; t < tiles; ++t) {
            z[3 * t + terrain[t]] = 1.0;
            for (int k = 0; k < 3; ++k) z[3 * t + k] += normal(rng, 0.0, cfg.feature_noise);
        }
        ds.samples[i].C = std::move(C);
        ds.samples[i].z = std::move(z);
    }
    ds.train_idx.resize(cfg.train_samples);
    std::iota(ds.train_idx.begin(), ds.train_idx.end(), 0);
    ds.val_idx.resize(cfg.val_samples);
    std::iota(ds.val_idx.begin(), ds.val_idx.end(), cfg.train_samples);
    ds.test_idx.resize(cfg.test_samples);
    std::iota(ds.test_idx.begin(), ds.test_idx.end(), cfg.train_samples + cfg.val_samples);

    std::ostringstream echo;
    echo << "task=grid rows=" << cfg.rows << " cols=" << cfg.cols << " species=" << cfg.species
         << " train=" << cfg.train_samples << " val=" << cfg.val_samples
         << " test=" << cfg.test_samples << " feature_noise=" << cfg.feature_noise
         << " smooth=" << cfg.smooth_terrain << " seed=" << cfg.seed;
    ds.config_echo = echo.str();
    return ds;
}

GroupStructure groups_from_quantiles(const Vec& designated_feature, int n_groups) {
    const int n = static_cast<int>(designated_feature.size());
    if (n_groups < 1 || n_groups > n) throw std::invalid_argument("groups_from_quantiles: bad group count");
    const std::vector<int> order = argsort_ascending(designated_feature);
    std::vector<int> group_of(n, 0);
    for (int rank = 0; rank < n; ++rank)
        group_of[order[rank]] = static_cast<int>((static_cast<long>(rank) * n_groups) / n);
    Mat A(n_groups, n, 0.0);
    for (int i = 0; i < n; ++i) A(group_of[i], i) = 1.0;
    return GroupStructure(std::move(A), std::move(group_of));
}

TaskDataset gen_rank_task(const RankTaskConfig& cfg) {
    if (cfg.list_size < 1 || cfg.feature_dim < 1 || cfg.samples < 1)
        throw std::invalid_argument("gen_rank_task: bad config");
    if (cfg.n_groups < 1 || cfg.n_groups > cfg.list_size)
        throw std::invalid_argument("gen_rank_task: bad group count");

    const int n = cfg.list_size, d = cfg.feature_dim;
    Rng rng(cfg.seed);

    // Dataset-level latent quality per item slot; groups are its quantiles
    // and the designated feature column tracks it.
    Vec quality = random_vec(rng, n, 0.0, 1.0);
    TaskDataset ds;
    ds.task = "rank";
    ds.seed = cfg.seed;
    ds.groups = groups_from_quantiles(quality, cfg.n_groups);
    ds.bias = dcg_position_bias(n);

    // Fixed nonlinear relevance map over the non-designated features.
    const RandomFeatureMap rel_map =
        RandomFeatureMap::make(d - 1 > 0 ? d - 1 : 1, 2 * d, 1, cfg.seed ^ kFeatureMapSeedSalt, 0.0);

    ds.samples.resize(cfg.samples);
    Rng noise_rng(cfg.seed ^ 0x5bf03635ull);
    for (int q = 0; q < cfg.samples; ++q) {
        Mat feat(n, d);
        Vec c(n);
        for (int i = 0; i < n; ++i) {
            feat(i, 0) = quality[i] + normal(rng, 0.0, 0.05);
            for (int k = 1; k < d; ++k) feat(i, k) = normal(rng, 0.0, 1.0);
            Vec rest(std::max(d - 1, 1), 0.0);
            for (int k = 1; k < d; ++k) rest[k - 1] = feat(i, k);
            const double u = rel_map.apply(rest, noise_rng)[0];
            const double raw = 3.0 * (feat(i, 0) - 0.5) + std::tanh(u) + normal(rng, 0.0, cfg.noise);
            c[i] = 1.0 / (1.0 + std::exp(-raw));
        }
        ds.samples[q].feat = std::move(feat);
        ds.samples[q].c = std::move(c);
    }
    split_70_10_20(cfg.samples, rng, ds.train_idx, ds.val_idx, ds.test_idx);

    std::ostringstream echo;
    echo << "task=rank list_size=" << n << " feature_dim=" << d << " groups=" << cfg.n_groups
         << " samples=" << cfg.samples << " noise=" << cfg.noise << " seed=" << cfg.seed;
    ds.config_echo = echo.str();
    return ds;
}

RankScores eval_ranking(const Mat& Pi, const Vec& c, const GroupStructure& groups,
                        const PositionBias& bias, RankEvalOptions opts) {
    if (!is_doubly_stochastic(Pi)) throw std::invalid_argument("eval_ranking: policy is not doubly stochastic");
    RankScores out;
    out.utility = ranking_utility(c, Pi, bias);
    const Vec E = group_exposures(groups, Pi, bias);
    const int G = static_cast<int>(E.size());
    const double mean_term = sum(E) / (opts.paper_mean_over_n ? static_cast<double>(c.size()) : G);
    double v = 0.0;
    for (double e : E) v += std::abs(mean_term - e);
    out.violation = v / G;
    return out;
}

Vec portfolio_reference_optima(const TaskDataset& ds, const std::vector<int>& idx,
                               const OwaWeights& w, PgdOptions ref) {
    Vec out(idx.size());
    for (size_t k = 0; k < idx.size(); ++k)
        out[k] = solve_owa_projected_subgradient(w, ds.samples[idx[k]].C, ref).objective;
    return out;
}

RegretTable eval_regret_portfolio(const TaskDataset& ds, const std::vector<int>& idx,
                                  const std::vector<Vec>& decisions, const OwaWeights& w,
                                  const Vec& reference) {
    if (decisions.size() != idx.size() || reference.size() != idx.size())
        throw std::invalid_argument("eval_regret_portfolio: size mismatch");
    RegretTable table;
    double acc = 0.0;
    for (size_t k = 0; k < idx.size(); ++k) {
        const double star = reference[k];
        const double got = owa_of_decision(w, ds.samples[idx[k]].C, decisions[k]);
        RegretRow row;
        row.sample = idx[k];
        row.owa_regret_pct = 100.0 * (star - got) / std::max(std::abs(star), 1e-12);
        acc += row.owa_regret_pct;
        table.rows.push_back(std::move(row));
    }
    table.mean_owa_regret_pct = acc / std::max<size_t>(idx.size(), 1);
    return table;
}

GridReference grid_reference_optima(const TaskDataset& ds, const std::vector<int>& idx,
                                    const OwaWeights& w) {
    GridReference ref;
    const int m = ds.samples.empty() ? 0 : ds.samples[0].C.rows;
    ref.owa_star.resize(idx.size());
    ref.species_star = Mat(static_cast<int>(idx.size()), m);
    for (size_t k = 0; k < idx.size(); ++k) {
        const Mat& C = ds.samples[idx[k]].C;
        ref.owa_star[k] = owa_optimal_joint_path(ds.graph, C, w).cost;
        for (int s = 0; s < m; ++s)
            ref.species_star(static_cast<int>(k), s) = solve_shortest_path(ds.graph, C.row_vec(s)).cost;
    }
    return ref;
}

RegretTable eval_regret_grid(const TaskDataset& ds, const std::vector<int>& idx,
                             const std::vector<Vec>& node_decisions, const OwaWeights& w,
                             const GridReference& reference) {
    if (node_decisions.size() != idx.size()) throw std::invalid_argument("eval_regret_grid: size mismatch");
    RegretTable table;
    const int m = ds.samples.empty() ? 0 : ds.samples[0].C.rows;
    double acc = 0.0;
    Vec species_acc(m, 0.0);
    double worst_acc = 0.0;
    for (size_t k = 0; k < idx.size(); ++k) {
        const Mat& C = ds.samples[idx[k]].C;
        const Vec costs = species_path_costs(C, node_decisions[k]);
        Vec sorted = costs;
        std::sort(sorted.begin(), sorted.end(), std::greater<>());
        double agg = 0.0;
        for (int j = 0; j < m; ++j) agg += w[j] * sorted[j];
        RegretRow row;
        row.sample = idx[k];
        const double star = reference.owa_star[k];
        row.owa_regret_pct = 100.0 * (agg - star) / std::max(std::abs(star), 1e-12);
        row.species_regret_pct.resize(m);
        double worst = 0.0;
        for (int s = 0; s < m; ++s) {
            const double own = reference.species_star(static_cast<int>(k), s);
            row.species_regret_pct[s] = 100.0 * (costs[s] - own) / std::max(std::abs(own), 1e-12);
            species_acc[s] += row.species_regret_pct[s];
            worst = std::max(worst, row.species_regret_pct[s]);
        }
        worst_acc += worst;
        acc += row.owa_regret_pct;
        table.rows.push_back(std::move(row));
    }
    const double denom = std::max<size_t>(idx.size(), 1);
    table.mean_owa_regret_pct = acc / denom;
    table.mean_species_regret_pct = (1.0 / denom) * species_acc;
    table.worst_species_mean_pct = worst_acc / denom;
    return table;
}

// ---------------------------------------------------------------------------
// Columnar text serialization.

namespace {

void write_vec(std::ostream& os, const Vec& v) {
    os.precision(17);
    for (size_t i = 0; i < v.size(); ++i) os << " " << v[i];
}

void write_idx(std::ostream& os, const char* name, const std::vector<int>& idx) {
    os << "# split " << name;
    for (int i : idx) os << " " << i;
    os << "\n";
}

std::vector<int> read_idx_line(const std::string& line) {
    std::istringstream is(line);
    std::string hash, word, name;
    is >> hash >> word >> name;
    std::vector<int> idx;
    int v;
    while (is >> v) idx.push_back(v);
    return idx;
}

}  // namespace

void save_dataset(const std::string& path, const TaskDataset& ds) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("save_dataset: cannot open " + path);
    os << "# owa-dataset " << kLibraryVersion << "\n";
    os << "# task " << ds.task << "\n";
    os << "# seed " << ds.seed << "\n";
    os << "# config " << ds.config_echo << "\n";
    const int N = static_cast<int>(ds.samples.size());
    if (ds.task == "portfolio") {
        const int m = ds.samples[0].C.rows, n = ds.samples[0].C.cols;
        const int dz = static_cast<int>(ds.samples[0].z.size());
        os << "# dims samples " << N << " m " << m << " n " << n << " dz " << dz << "\n";
        os << "# columns id z[dz] C[m*n]\n";
        for (int i = 0; i < N; ++i) {
            os << i;
            write_vec(os, ds.samples[i].z);
            write_vec(os, ds.samples[i].C.a);
            os << "\n";
        }
    } else if (ds.task == "grid") {
        const int m = ds.samples[0].C.rows, n = ds.samples[0].C.cols;
        const int dz = static_cast<int>(ds.samples[0].z.size());
        os << "# dims samples " << N << " m " << m << " n " << n << " dz " << dz << " rows "
           << ds.graph.rows << " cols " << ds.graph.cols << "\n";
        os << "# cost_table";
        write_vec(os, ds.cost_table.a);
        os << "\n# columns id z[dz] C[m*n]\n";
        for (int i = 0; i < N; ++i) {
            os << i;
            write_vec(os, ds.samples[i].z);
            write_vec(os, ds.samples[i].C.a);
            os << "\n";
        }
    } else if (ds.task == "rank") {
        const int n = ds.groups.n_items();
        const int d = ds.samples[0].feat.cols;
        os << "# dims samples " << N << " n " << n << " d " << d << " groups "
           << ds.groups.n_groups() << "\n";
        os << "# group_of";
        for (int g : ds.groups.group_of) os << " " << g;
        os << "\n# columns id feat[n*d] c[n]\n";
        for (int i = 0; i < N; ++i) {
            os << i;
            write_vec(os, ds.samples[i].feat.a);
            write_vec(os, ds.samples[i].c);
            os << "\n";
        }
    } else {
        throw std::invalid_argument("save_dataset: unknown task " + ds.task);
    }
    write_idx(os, "train", ds.train_idx);
    write_idx(os, "val", ds.val_idx);
    write_idx(os, "test", ds.test_idx);
}

TaskDataset load_dataset(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("load_dataset: cannot open " + path);
    TaskDataset ds;
    std::string line;
    int N = 0, m = 0, n = 0, dz = 0, rows = 0, cols = 0, d = 0, groups = 0;
    std::vector<int> group_of;
    Vec cost_table;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            std::istringstream hs(line);
            std::string hash, key;
            hs >> hash >> key;
            if (key == "task") hs >> ds.task;
            else if (key == "seed") hs >> ds.seed;
            else if (key == "config") ds.config_echo = line.substr(line.find("config") + 7);
            else if (key == "dims") {
                std::string w;
                while (hs >> w) {
                    if (w == "samples") hs >> N;
                    else if (w == "m") hs >> m;
                    else if (w == "n") hs >> n;
                    else if (w == "dz") hs >> dz;
                    else if (w == "rows") hs >> rows;
                    else if (w == "cols") hs >> cols;
                    else if (w == "d") hs >> d;
                    else if (w == "groups") hs >> groups;
                }
                ds.samples.resize(N);
            } else if (key == "cost_table") {
                double v;
                while (hs >> v) cost_table.push_back(v);
            } else if (key == "group_of") {
                int v;
                while (hs >> v) group_of.push_back(v);
            } else if (key == "split") {
                std::string name;
                std::istringstream ss(line);
                ss >> hash >> key >> name;
                auto idx = read_idx_line(line);
                if (name == "train") ds.train_idx = idx;
                else if (name == "val") ds.val_idx = idx;
                else if (name == "test") ds.test_idx = idx;
            }
            continue;
        }
        std::istringstream rs(line);
        int id = 0;
        rs >> id;
        TaskSample& s = ds.samples.at(id);
        if (ds.task == "portfolio" || ds.task == "grid") {
            s.z.resize(dz);
            for (double& v : s.z) rs >> v;
            s.C = Mat(m, n);
            for (double& v : s.C.a) rs >> v;
        } else if (ds.task == "rank") {
            s.feat = Mat(n, d);
            for (double& v : s.feat.a) rs >> v;
            s.c.resize(n);
            for (double& v : s.c) rs >> v;
        }
    }
    if (ds.task == "grid") {
        ds.graph = GridGraph(rows, cols);
        ds.cost_table = Mat(m, 3);
        ds.cost_table.a = cost_table;
    } else if (ds.task == "rank") {
        Mat A(groups, n, 0.0);
        for (int i = 0; i < n; ++i) A(group_of[i], i) = 1.0;
        ds.groups = GroupStructure(std::move(A), std::move(group_of));
        ds.bias = dcg_position_bias(n);
    }
    return ds;
}

}  // namespace owa
