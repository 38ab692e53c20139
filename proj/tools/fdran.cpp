// SPDX-License-Identifier: Apache-2.0
//
// fdran: geolocation-driven CSI prediction and RB allocation simulator
// Copyright (C) 2026 The fdran Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdran/allocator.hpp"
#include "fdran/errors.hpp"
#include "fdran/harness.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using fdran::ExperimentConfig;

namespace {

constexpr const char *kVersion = "1.0.0";

struct CommonArgs
{
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out;
};

ExperimentConfig resolve(const CommonArgs &args)
{
    auto cfg = fdran::load_experiment_config(args.config_path);
    if (args.seed)
        cfg.seed = *args.seed;
    if (!args.out.empty())
        cfg.output_dir = args.out;
    cfg.validate();
    return cfg;
}

// Collects output files and writes the manifest last.
class OutputDir
{
  public:
    OutputDir(const ExperimentConfig &cfg, std::string command) : cfg_(cfg), command_(std::move(command))
    {
        fs::create_directories(cfg.output_dir);
    }

    std::ofstream open(const std::string &name, const std::string &columns = {})
    {
        std::ofstream out(fs::path(cfg_.output_dir) / name, std::ios::binary);
        if (!out)
            throw std::runtime_error("cannot write " + (fs::path(cfg_.output_dir) / name).string());
        files_.push_back(name);
        if (!columns.empty())
            columns_[name] = columns;
        return out;
    }

    std::string path(const std::string &name) const { return (fs::path(cfg_.output_dir) / name).string(); }
    void add(const std::string &name) { files_.push_back(name); }
    nlohmann::json &extra() { return extra_; }

    void finish()
    {
        nlohmann::json m;
        m["tool"] = "fdran";
        m["version"] = kVersion;
        m["command"] = command_;
        m["seed"] = cfg_.seed;
        m["csv_format_version"] = fdran::kCsvFormatVersion;
        m["config"] = cfg_;
        m["files"] = files_;
        m["csv_columns"] = columns_;
        if (!extra_.is_null())
            m["results"] = extra_;
        std::ofstream out(fs::path(cfg_.output_dir) / "manifest.json");
        out << m.dump(2) << '\n';
    }

  private:
    const ExperimentConfig &cfg_;
    std::string command_;
    std::vector<std::string> files_;
    nlohmann::json columns_ = nlohmann::json::object();
    nlohmann::json extra_;
};

std::string first_line(const std::string &s) { return s.substr(0, s.find('\n')); }

template <typename Fn>
std::string csv_header(Fn writer)
{
    std::ostringstream s;
    writer(s);
    return first_line(s.str());
}

void cmd_scenario_gen(const CommonArgs &args)
{
    const auto cfg = resolve(args);
    const auto env = fdran::make_environment(cfg);
    OutputDir out(cfg, "scenario gen");
    out.open("scenario.json") << nlohmann::json(env.scenario).dump(2) << '\n';
    out.open("codebook.json") << fdran::codebook_to_json(env.codebook).dump() << '\n';
    out.extra() = {{"num_bs", env.scenario.bs_list.size()},
                   {"buildings", env.scenario.buildings.size()},
                   {"codebook_size", env.codebook.size()}};
    out.finish();
    std::cout << "scenario with " << env.scenario.bs_list.size() << " BSs written to " << out.path("scenario.json")
              << '\n';
}

void cmd_dataset_gen(const CommonArgs &args)
{
    auto cfg = resolve(args);
    cfg.dataset_path.clear();
    const auto env = fdran::make_environment(cfg);
    const auto ds = fdran::load_or_generate_dataset(cfg, env);
    OutputDir out(cfg, "dataset gen");
    auto f = out.open("dataset.jsonl");
    fdran::write_dataset_jsonl(ds, f);
    out.extra() = {{"records", ds.records.size()},
                   {"train_records", ds.split("train").records.size()},
                   {"test_records", ds.split("test").records.size()}};
    out.finish();
    std::cout << ds.records.size() << " records written to " << out.path("dataset.jsonl") << '\n';
}

void write_loss_trace(OutputDir &out, const fdran::TrainedPredictor &tp)
{
    auto f = out.open("train_loss.csv", "epoch,mean_loss");
    f << "epoch,mean_loss\n0," << fdran::format_number(tp.initial_loss) << '\n';
    for (std::size_t e = 0; e < tp.loss_trace.size(); ++e)
        f << e + 1 << ',' << fdran::format_number(tp.loss_trace[e]) << '\n';
}

void cmd_train(const CommonArgs &args)
{
    auto cfg = resolve(args);
    if (cfg.predictor.kind != "lqtn" && cfg.predictor.kind != "independent")
        throw fdran::ConfigError("train needs predictor.kind \"lqtn\" or \"independent\"");
    cfg.predictor.checkpoint.clear();
    const auto env = fdran::make_environment(cfg);
    auto tp = fdran::make_predictor(cfg, env);
    OutputDir out(cfg, "train");
    write_loss_trace(out, tp);
    if (auto *lp = dynamic_cast<fdran::LqtnPredictor *>(tp.predictor.get())) {
        fdran::save_checkpoint(lp->model(), out.path("lqtn"), {{"train", cfg.predictor.train}});
        out.add("lqtn.bin");
        out.add("lqtn.json");
    } else if (auto *ip = dynamic_cast<fdran::IndependentPerRbPredictor *>(tp.predictor.get())) {
        ip->save(out.path("lqtn_rb"));
        for (int rb = 0; rb < env.scenario.bs_list.front().rb_count; ++rb) {
            out.add("lqtn_rb" + std::to_string(rb) + ".bin");
            out.add("lqtn_rb" + std::to_string(rb) + ".json");
        }
    }
    out.extra() = {{"parameter_count", tp.parameter_count},
                   {"memory_mb", fdran::model_memory_mb(tp.parameter_count)},
                   {"initial_loss", tp.initial_loss},
                   {"final_loss", tp.loss_trace.empty() ? tp.initial_loss : tp.loss_trace.back()}};
    out.finish();
    std::cout << "trained " << cfg.predictor.kind << " (" << tp.parameter_count << " parameters), loss "
              << tp.initial_loss << " -> " << (tp.loss_trace.empty() ? tp.initial_loss : tp.loss_trace.back())
              << '\n';
}

void cmd_eval_csi(const CommonArgs &args)
{
    const auto cfg = resolve(args);
    const auto env = fdran::make_environment(cfg);
    const auto test = fdran::load_or_generate_dataset(cfg, env).split("test");
    auto tp = fdran::make_predictor(cfg, env);
    const auto rep = fdran::evaluate_mae(*tp.predictor, test);
    OutputDir out(cfg, "eval-csi");
    auto f = out.open("csi_mae.csv", "field,normalized_mae,accuracy,label_range");
    f << "field,normalized_mae,accuracy,label_range\n";
    for (std::size_t i = 0; i < 4; ++i)
        f << fdran::MaeReport::kFields[i] << ',' << fdran::format_number(rep.normalized_mae[i]) << ','
          << fdran::format_number(rep.accuracy[i]) << ',' << fdran::format_number(rep.label_range[i]) << '\n';
    out.extra() = {{"predictor", tp.predictor->name()},
                   {"mae", rep},
                   {"parameter_count", tp.parameter_count},
                   {"memory_mb", fdran::model_memory_mb(tp.parameter_count)}};
    out.finish();
    std::cout << tp.predictor->name() << " mean normalized MAE " << rep.mean_normalized_mae << " over " << rep.count
              << " RB reports\n";
}

void cmd_alloc_run(const CommonArgs &args, const std::string &rates_override, std::optional<int> quota_override)
{
    auto cfg = resolve(args);
    if (!rates_override.empty())
        cfg.rates_csv = rates_override;
    if (quota_override)
        cfg.alloc_quota = *quota_override;
    if (cfg.rates_csv.empty())
        throw fdran::ConfigError("alloc run needs a rate matrix: set alloc.rates_csv or pass --rates");
    std::ifstream in(cfg.rates_csv);
    if (!in)
        throw fdran::ConfigError("cannot open rate matrix " + cfg.rates_csv);
    fdran::AllocProblem p;
    p.rates = fdran::read_rates_csv(in);
    p.quota = cfg.alloc_quota;
    p.validate();

    OutputDir out(cfg, "alloc run");
    nlohmann::json matchings = nlohmann::json::object();
    auto f = out.open("alloc_results.csv", "algorithm,sum_rate_mbps,jain_index,feasible,pairwise_stable");
    f << "algorithm,sum_rate_mbps,jain_index,feasible,pairwise_stable\n";
    auto emit = [&](const std::string &name, const fdran::Matching &m) {
        const auto thr = fdran::per_ue_throughput(m, p);
        f << name << ',' << fdran::format_number(fdran::sum_rate(m, p)) << ','
          << fdran::format_number(fdran::jain_index(thr)) << ',' << fdran::is_feasible(m, p) << ','
          << fdran::is_pairwise_stable(m, p).stable << '\n';
        matchings[name] = m;
    };
    const auto mama = fdran::m3_mama(p);
    emit("m3_mama", mama.matching);
    emit("best_cqi", fdran::best_cqi(p));
    emit("round_robin", fdran::round_robin(p));
    if (std::pow(static_cast<double>(p.num_ues()), p.num_rbs()) <= fdran::kBruteForceLimit)
        emit("brute_force", fdran::brute_force_optimal(p).matching);
    out.open("matchings.json") << matchings.dump(2) << '\n';
    out.extra() = {{"m3_mama", {{"sweeps", mama.sweeps}, {"accepted", mama.accepted}, {"trace", mama.trace}}}};
    out.finish();
    std::cout << "allocated " << p.num_rbs() << " BS-RB pairs to " << p.num_ues() << " UEs\n";
}

void write_static(OutputDir &out, const std::vector<fdran::RunRecord> &records,
                  const std::vector<fdran::Aggregate> &aggs, const std::string &prefix)
{
    auto header = [](auto writer) { return csv_header(writer); };
    {
        auto f = out.open(prefix + "summary.csv",
                          header([&](std::ostream &s) { fdran::write_aggregates_csv({}, s); }));
        fdran::write_aggregates_csv(aggs, f);
    }
    {
        auto f = out.open(prefix + "per_rb_cdf.csv", header([&](std::ostream &s) { fdran::write_cdf_csv({}, s); }));
        fdran::write_cdf_csv(records, f);
    }
}

void cmd_experiment_static(const CommonArgs &args)
{
    const auto cfg = resolve(args);
    const auto env = fdran::make_environment(cfg);
    auto tp = fdran::make_predictor(cfg, env);
    const auto rep = fdran::run_static_experiment(cfg, env, *tp.predictor);
    OutputDir out(cfg, "experiment static");
    {
        auto f = out.open("static_runs.csv", csv_header([](std::ostream &s) { fdran::write_runs_csv({}, s); }));
        fdran::write_runs_csv(rep.records, f);
    }
    write_static(out, rep.records, rep.aggregates, "static_");
    nlohmann::json traces = nlohmann::json::array();
    for (const auto &r : rep.records)
        if (r.algorithm == "m3_mama")
            traces.push_back({{"seed", r.seed},
                              {"ue_count", r.ue_count},
                              {"quota", r.quota},
                              {"sweeps", r.sweeps},
                              {"trace", r.convergence_trace}});
    out.open("static_traces.json") << traces.dump() << '\n';
    out.extra() = {{"predictor", tp.predictor->name()}, {"runs", rep.records.size()}};
    out.finish();
    for (const auto &a : rep.aggregates)
        std::cout << a.algorithm << " M=" << a.ue_count << " Q=" << a.quota << " SE " << a.se_mean << " Jain "
                  << a.jain_mean << '\n';
}

void cmd_experiment_mobility(const CommonArgs &args)
{
    const auto cfg = resolve(args);
    const auto env = fdran::make_environment(cfg);
    auto tp = fdran::make_predictor(cfg, env);
    const auto rep = fdran::run_mobility_experiment(cfg, env, *tp.predictor);
    OutputDir out(cfg, "experiment mobility");
    {
        auto f = out.open("mobility_runs.csv", csv_header([](std::ostream &s) { fdran::write_mobility_csv({}, s); }));
        fdran::write_mobility_csv(rep.records, f);
    }
    {
        auto f = out.open("mobility_summary.csv",
                          csv_header([](std::ostream &s) { fdran::write_mobility_summary_csv({}, s); }));
        fdran::write_mobility_summary_csv(rep.summary, f);
    }
    out.extra() = {{"predictor", tp.predictor->name()}, {"records", rep.records.size()}};
    out.finish();
    for (const auto &s : rep.summary)
        std::cout << s.speed_kmh << " km/h: CLSM " << s.clsm_mean << " Mbps, geolocation-predicted " << s.geo_mean << " Mbps\n";
}

void cmd_report(const CommonArgs &args)
{
    const auto cfg = resolve(args);
    const fs::path dir(cfg.output_dir);
    bool any = false;
    OutputDir out(cfg, "report");
    nlohmann::json headline = nlohmann::json::object();
    if (std::ifstream in(dir / "static_runs.csv"); in) {
        const auto records = fdran::read_runs_csv(in);
        const auto aggs = fdran::aggregate_runs(records);
        write_static(out, records, aggs, "report_static_");
        for (const auto &a : aggs)
            headline["static"].push_back(
                {{"algorithm", a.algorithm}, {"ue_count", a.ue_count}, {"quota", a.quota}, {"se_mean", a.se_mean},
                 {"jain_mean", a.jain_mean}});
        any = true;
    }
    if (std::ifstream in(dir / "mobility_runs.csv"); in) {
        const auto records = fdran::read_mobility_csv(in);
        const auto summary = fdran::summarize_mobility(records);
        auto f = out.open("report_mobility_summary.csv",
                          csv_header([](std::ostream &s) { fdran::write_mobility_summary_csv({}, s); }));
        fdran::write_mobility_summary_csv(summary, f);
        for (const auto &s : summary)
            headline["mobility"].push_back(
                {{"speed_kmh", s.speed_kmh}, {"clsm_mean", s.clsm_mean}, {"geo_mean", s.geo_mean}});
        any = true;
    }
    if (!any)
        throw std::runtime_error("no static_runs.csv or mobility_runs.csv in " + cfg.output_dir);
    out.open("report.json") << headline.dump(2) << '\n';
    out.finish();
    std::cout << "report written to " << out.path("report.json") << '\n';
}

void add_common(CLI::App *cmd, CommonArgs &args)
{
    cmd->add_option("--config", args.config_path, "experiment config JSON")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", args.seed, "override the config seed");
    cmd->add_option("--out", args.out, "override the output directory");
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"fdran: geolocation-driven CSI prediction and multi-BS RB allocation"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    CommonArgs args;
    std::function<void()> action;
    std::string rates;
    std::optional<int> quota;

    auto *scenario = app.add_subcommand("scenario", "scenario tools")->require_subcommand(1);
    auto *scenario_gen = scenario->add_subcommand("gen", "generate and write the scenario");
    add_common(scenario_gen, args);
    scenario_gen->callback([&] { action = [&] { cmd_scenario_gen(args); }; });

    auto *dataset = app.add_subcommand("dataset", "dataset tools")->require_subcommand(1);
    auto *dataset_gen = dataset->add_subcommand("gen", "label geolocations with ground-truth CSI");
    add_common(dataset_gen, args);
    dataset_gen->callback([&] { action = [&] { cmd_dataset_gen(args); }; });

    auto *train = app.add_subcommand("train", "train the configured LQTN predictor");
    add_common(train, args);
    train->callback([&] { action = [&] { cmd_train(args); }; });

    auto *eval = app.add_subcommand("eval-csi", "normalized MAE of the configured predictor on the test split");
    add_common(eval, args);
    eval->callback([&] { action = [&] { cmd_eval_csi(args); }; });

    auto *alloc = app.add_subcommand("alloc", "allocation tools")->require_subcommand(1);
    auto *alloc_run = alloc->add_subcommand("run", "run all allocators on a rate-matrix CSV");
    add_common(alloc_run, args);
    alloc_run->add_option("--rates", rates, "rate matrix CSV (rows BS-RB pairs, columns UEs)");
    alloc_run->add_option("--quota", quota, "minimum RBs per UE");
    alloc_run->callback([&] { action = [&] { cmd_alloc_run(args, rates, quota); }; });

    auto *experiment = app.add_subcommand("experiment", "experiments")->require_subcommand(1);
    auto *exp_static = experiment->add_subcommand("static", "capacity comparison of the three schedulers");
    add_common(exp_static, args);
    exp_static->callback([&] { action = [&] { cmd_experiment_static(args); }; });
    auto *exp_mobility = experiment->add_subcommand("mobility", "delayed-feedback CSI versus geolocation-predicted CSI");
    add_common(exp_mobility, args);
    exp_mobility->callback([&] { action = [&] { cmd_experiment_mobility(args); }; });

    auto *report = app.add_subcommand("report", "regenerate summaries from per-run CSVs");
    add_common(report, args);
    report->callback([&] { action = [&] { cmd_report(args); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        action();
    } catch (const fdran::ConfigError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const fdran::InfeasibleProblemError &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const nlohmann::json::exception &e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception &e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
