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

// Experiment runner and verification driver. Subcommands:
//   run      train methods on a task and emit result tables + histories
//   verify   run the oracle/property suites
//   scaling  time the QP and Moreau-smoothed solvers across criteria counts
//   gen      emit a dataset file for a task config

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "owa/train.hpp"
#include "owa/verify.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct ResultRow {
    std::string task, method, split, metric;
    uint64_t seed = 0;
    double value = 0.0;
    double walltime_s = 0.0;
};

void write_rows_atomic(const std::string& path, const std::string& echo,
                       const std::vector<ResultRow>& rows) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        os << "# owa-results " << owa::kLibraryVersion << "\n";
        os << "# " << echo << "\n";
        os << "task,method,seed,split,metric,value,walltime_s\n";
        os.precision(12);
        for (const ResultRow& r : rows)
            os << r.task << "," << r.method << "," << r.seed << "," << r.split << "," << r.metric
               << "," << r.value << "," << r.walltime_s << "\n";
    }
    fs::rename(tmp, path);
}

void write_history_atomic(const std::string& path, const std::string& echo,
                          const owa::TrainHistory& h) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream os(tmp);
        if (!os) throw std::runtime_error("cannot open " + tmp);
        os << "# owa-history " << owa::kLibraryVersion << "\n";
        os << "# " << echo << "\n";
        os << "epoch,train_loss,val_metric\n";
        os.precision(12);
        for (size_t e = 0; e < h.train_loss.size(); ++e)
            os << e << "," << h.train_loss[e] << "," << h.val_metric[e] << "\n";
    }
    fs::rename(tmp, path);
}

owa::TrainConfig train_config_from(const json& j) {
    owa::TrainConfig cfg;
    if (!j.contains("train")) return cfg;
    const json& t = j["train"];
    if (t.contains("lr")) cfg.lr = t["lr"];
    if (t.contains("batch")) cfg.batch = t["batch"];
    if (t.contains("epochs")) cfg.epochs = t["epochs"];
    if (t.contains("lambda_mse")) cfg.lambda_mse = t["lambda_mse"];
    if (t.contains("qp_epsilon")) cfg.qp_epsilon = t["qp_epsilon"];
    if (t.contains("moreau_beta")) cfg.moreau_beta = t["moreau_beta"];
    if (t.contains("moreau_iters")) cfg.moreau_iters = t["moreau_iters"];
    if (t.contains("uws_epsilon")) cfg.uws_epsilon = t["uws_epsilon"];
    if (t.contains("lambda_bb")) cfg.lambda_bb = t["lambda_bb"];
    if (t.contains("rank_lambda")) cfg.rank_lambda = t["rank_lambda"];
    if (t.contains("rank_beta0")) cfg.rank_beta0 = t["rank_beta0"];
    if (t.contains("rank_T_train")) cfg.rank_T_train = t["rank_T_train"];
    if (t.contains("rank_T_eval")) cfg.rank_T_eval = t["rank_T_eval"];
    return cfg;
}

owa::TaskDataset dataset_from(const json& j, const std::string& task, uint64_t seed) {
    if (task == "portfolio") {
        owa::PortfolioTaskConfig cfg;
        if (j.contains("portfolio")) {
            const json& p = j["portfolio"];
            if (p.contains("assets")) cfg.assets = p["assets"];
            if (p.contains("scenarios")) cfg.scenarios = p["scenarios"];
            if (p.contains("samples")) cfg.samples = p["samples"];
            if (p.contains("noise")) cfg.noise = p["noise"];
            if (p.contains("factor_low")) cfg.factor_low = p["factor_low"];
            if (p.contains("factor_high")) cfg.factor_high = p["factor_high"];
            if (p.contains("feature_dim")) cfg.feature_dim = p["feature_dim"];
        }
        cfg.seed = seed;
        return owa::gen_portfolio(cfg);
    }
    if (task == "grid") {
        owa::GridTaskConfig cfg;
        if (j.contains("grid")) {
            const json& g = j["grid"];
            if (g.contains("rows")) cfg.rows = g["rows"];
            if (g.contains("cols")) cfg.cols = g["cols"];
            if (g.contains("species")) cfg.species = g["species"];
            if (g.contains("train_samples")) cfg.train_samples = g["train_samples"];
            if (g.contains("val_samples")) cfg.val_samples = g["val_samples"];
            if (g.contains("test_samples")) cfg.test_samples = g["test_samples"];
            if (g.contains("feature_noise")) cfg.feature_noise = g["feature_noise"];
            if (g.contains("smooth_terrain")) cfg.smooth_terrain = g["smooth_terrain"];
        }
        cfg.seed = seed;
        return owa::gen_grid_task(cfg);
    }
    if (task == "rank") {
        owa::RankTaskConfig cfg;
        if (j.contains("rank")) {
            const json& r = j["rank"];
            if (r.contains("list_size")) cfg.list_size = r["list_size"];
            if (r.contains("feature_dim")) cfg.feature_dim = r["feature_dim"];
            if (r.contains("n_groups")) cfg.n_groups = r["n_groups"];
            if (r.contains("samples")) cfg.samples = r["samples"];
            if (r.contains("noise")) cfg.noise = r["noise"];
        }
        cfg.seed = seed;
        return owa::gen_rank_task(cfg);
    }
    throw std::invalid_argument("unknown task: " + task);
}

int cmd_run(const std::string& config_path, long seed_override, const std::string& out_override,
            const std::string& methods_override) {
    std::ifstream is(config_path);
    if (!is) {
        std::cerr << "error: cannot open config " << config_path << "\n";
        return 1;
    }
    json j = json::parse(is);
    const std::string task = j.at("task");
    std::vector<std::string> methods;
    if (!methods_override.empty()) {
        std::stringstream ss(methods_override);
        std::string tok;
        while (std::getline(ss, tok, ',')) methods.push_back(tok);
    } else {
        for (const auto& m : j.at("methods")) methods.push_back(m);
    }
    if (methods.empty()) {
        std::cerr << "error: no methods configured\n";
        return 1;
    }
    std::vector<uint64_t> seeds;
    if (seed_override >= 0)
        seeds.push_back(static_cast<uint64_t>(seed_override));
    else if (j.contains("seeds"))
        for (const auto& s : j["seeds"]) seeds.push_back(s.get<uint64_t>());
    else
        seeds.push_back(1);
    const std::string out_dir = !out_override.empty() ? out_override
                                : j.contains("out")   ? j["out"].get<std::string>()
                                                      : std::string("results");
    fs::create_directories(out_dir);

    const owa::TrainConfig base_cfg = train_config_from(j);
    std::vector<ResultRow> all_rows;
    std::string echo;

    for (uint64_t seed : seeds) {
        const owa::TaskDataset ds = dataset_from(j, task, seed);
        echo = ds.config_echo;
        const owa::OwaWeights w = owa::fair_gini_weights(
            task == "rank" ? ds.groups.n_groups() : ds.samples[0].C.rows);

        // Shared references per seed (portfolio/grid).
        owa::Vec ref;
        owa::GridReference grid_ref;
        if (task == "portfolio") ref = owa::portfolio_reference_optima(ds, ds.test_idx, w);
        if (task == "grid") grid_ref = owa::grid_reference_optima(ds, ds.test_idx, w);

        for (const std::string& mname : methods) {
            const owa::Method method = owa::method_from_string(mname);
            owa::TrainConfig cfg = base_cfg;
            cfg.seed = seed;
            const auto t0 = std::chrono::steady_clock::now();
            const owa::TrainResult res = owa::train(ds, method, cfg);
            std::vector<ResultRow> rows;
            if (task == "portfolio") {
                const auto decisions = owa::portfolio_decisions(res.model, ds, ds.test_idx, w);
                const owa::RegretTable table = owa::eval_regret_portfolio(ds, ds.test_idx, decisions, w, ref);
                rows.push_back({task, mname, "test", "owa_regret_pct", seed, table.mean_owa_regret_pct, 0.0});
            } else if (task == "grid") {
                const auto decisions = owa::grid_decisions(res.model, ds, ds.test_idx);
                const owa::RegretTable table = owa::eval_regret_grid(ds, ds.test_idx, decisions, w, grid_ref);
                rows.push_back({task, mname, "test", "owa_regret_pct", seed, table.mean_owa_regret_pct, 0.0});
                rows.push_back({task, mname, "test", "worst_species_regret_pct", seed, table.worst_species_mean_pct, 0.0});
                for (size_t s = 0; s < table.mean_species_regret_pct.size(); ++s)
                    rows.push_back({task, mname, "test", "species" + std::to_string(s) + "_regret_pct",
                                    seed, table.mean_species_regret_pct[s], 0.0});
            } else {
                const owa::RankEvalResult r = owa::rank_evaluate(res.model, ds, ds.test_idx, cfg.rank_lambda,
                                                                 w, cfg.rank_beta0, cfg.rank_T_eval);
                rows.push_back({task, mname, "test", "utility", seed, r.utility, 0.0});
                rows.push_back({task, mname, "test", "violation", seed, r.violation, 0.0});
            }
            const auto t1 = std::chrono::steady_clock::now();
            const double wall = std::chrono::duration<double>(t1 - t0).count();
            for (ResultRow& r : rows) r.walltime_s = wall;
            const std::string tag = task + "_" + mname + "_" + std::to_string(seed);
            write_rows_atomic(out_dir + "/result_" + tag + ".csv", echo, rows);
            write_history_atomic(out_dir + "/history_" + tag + ".csv", echo, res.history);
            all_rows.insert(all_rows.end(), rows.begin(), rows.end());
            std::cout << "done " << tag << " (" << wall << " s)\n";
        }
    }
    write_rows_atomic(out_dir + "/summary_" + task + ".csv", echo, all_rows);
    std::cout << "wrote " << out_dir << "/summary_" << task << ".csv\n";
    return 0;
}

int cmd_verify(const std::string& suite, uint64_t seed) {
    try {
        const owa::VerifyReport rep = owa::run_verify_suite(suite, seed);
        for (const std::string& line : rep.lines) std::cout << line << "\n";
        std::cout << "suite " << suite << ": " << rep.passed << " passed, " << rep.failed
                  << " failed\n";
        return rep.ok() ? 0 : 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }
}

int cmd_scaling(const std::string& m_list, int assets, int samples, const std::string& out_dir) {
    std::vector<int> ms;
    {
        std::stringstream ss(m_list);
        std::string tok;
        while (std::getline(ss, tok, ',')) ms.push_back(std::stoi(tok));
    }
    fs::create_directories(out_dir);
    const std::string path = out_dir + "/scaling.csv";
    const std::string tmp = path + ".tmp";
    std::ofstream os(tmp);
    os << "# owa-scaling " << owa::kLibraryVersion << " assets=" << assets
       << " samples=" << samples << " seed=1\n";
    os << "m,qp_constraints,qp_ms_per_solve,moreau_ms_per_solve,qp_status\n";
    owa::Rng rng(1);
    for (int m : ms) {
        const owa::OwaWeights w = owa::fair_gini_weights(m);
        double qp_ms = 0.0, mo_ms = 0.0;
        long n_constraints = 0;
        std::string status = "ok";
        for (int t = 0; t < samples; ++t) {
            const owa::Mat C = owa::random_mat(rng, m, assets, 0.25, 2.25);
            const owa::Vec g = owa::random_vec(rng, assets, -1.0, 1.0);
            {
                const auto t0 = std::chrono::steady_clock::now();
                const owa::SmoothedSolve fwd = owa::solve_owa_moreau_pgd(w, C, owa::SmoothingParam(0.05), 300);
                owa::backward_fixed_point(w, C, fwd.x, g, owa::SmoothingParam(0.05), fwd.alpha);
                mo_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
            }
            if (m <= 6) {
                try {
                    const auto t0 = std::chrono::steady_clock::now();
                    const owa::OwaQpSolution sol = owa::solve_owa_qp(w, C);
                    owa::backward_qp_kkt(sol, C, g);
                    qp_ms += std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
                    n_constraints = sol.constraint_count;
                } catch (const std::exception& e) {
                    status = e.what();
                }
            } else {
                status = "refused: m! constraints exceed capacity (m > 6)";
            }
        }
        os.precision(6);
        os << m << "," << n_constraints << "," << (m <= 6 ? qp_ms / samples : -1.0) << ","
           << mo_ms / samples << "," << '"' << status << '"' << "\n";
        std::cout << "m=" << m << " moreau " << mo_ms / samples << " ms";
        if (m <= 6)
            std::cout << ", qp " << qp_ms / samples << " ms (" << n_constraints << " constraints)";
        else
            std::cout << ", qp refused (m > 6)";
        std::cout << "\n";
    }
    os.close();
    fs::rename(tmp, path);
    std::cout << "wrote " << path << "\n";
    return 0;
}

int cmd_gen(const std::string& config_path, long seed_override, const std::string& out_dir) {
    std::ifstream is(config_path);
    if (!is) {
        std::cerr << "error: cannot open config " << config_path << "\n";
        return 1;
    }
    json j = json::parse(is);
    const std::string task = j.at("task");
    uint64_t seed = seed_override >= 0 ? static_cast<uint64_t>(seed_override)
                    : j.contains("seeds") && !j["seeds"].empty() ? j["seeds"][0].get<uint64_t>()
                                                                 : 1;
    const owa::TaskDataset ds = dataset_from(j, task, seed);
    fs::create_directories(out_dir);
    const std::string path = out_dir + "/dataset_" + task + "_" + std::to_string(seed) + ".txt";
    owa::save_dataset(path, ds);
    std::cout << "wrote " << path << " (" << ds.samples.size() << " samples)\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OWA predict-then-optimize experiment runner"};
    app.require_subcommand(1);

    std::string config_path, out_dir, methods, suite, m_list = "2,3,4,5,6";
    long seed_override = -1;
    uint64_t verify_seed = 7;
    int assets = 10, samples = 5;

    CLI::App* run = app.add_subcommand("run", "train methods on a task and emit results");
    run->add_option("--config", config_path, "config file (json)")->required();
    run->add_option("--seed", seed_override, "override the seed list with one seed");
    run->add_option("--out", out_dir, "output directory");
    run->add_option("--methods", methods, "comma-separated method override");

    CLI::App* verify = app.add_subcommand("verify", "run oracle/property suites");
    verify->add_option("--suite", suite, "owa|geometry|solvers|gradients|rank|all")->required();
    verify->add_option("--seed", verify_seed, "suite rng seed");

    CLI::App* scaling = app.add_subcommand("scaling", "time QP vs Moreau solvers across m");
    scaling->add_option("--m", m_list, "comma-separated criteria counts");
    scaling->add_option("--assets", assets, "decision dimension");
    scaling->add_option("--samples", samples, "timed solves per m");
    scaling->add_option("--out", out_dir, "output directory")->default_val("results");

    CLI::App* gen = app.add_subcommand("gen", "emit a dataset file");
    gen->add_option("--config", config_path, "config file (json)")->required();
    gen->add_option("--seed", seed_override, "override seed");
    gen->add_option("--out", out_dir, "output directory")->default_val("results");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run->parsed()) return cmd_run(config_path, seed_override, out_dir, methods);
        if (verify->parsed()) return cmd_verify(suite, verify_seed);
        if (scaling->parsed()) return cmd_scaling(m_list, assets, samples, out_dir);
        if (gen->parsed()) return cmd_gen(config_path, seed_override, out_dir);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
