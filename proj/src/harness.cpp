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

#include "fdran/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <set>
#include <sstream>

#include "fdran/errors.hpp"
#include "fdran/link.hpp"
#include "fdran/random.hpp"

namespace fdran {

namespace {

void reject_unknown_keys(const nlohmann::json &j, const std::set<std::string> &known, const std::string &where)
{
    if (!j.is_object())
        throw ConfigError(where + " must be a JSON object");
    for (const auto &[key, value] : j.items())
        if (!known.count(key))
            throw ConfigError("unknown key \"" + key + "\" in " + where);
}

std::pair<double, double> mean_and_variance(const std::vector<double> &v)
{
    if (v.empty())
        return {0.0, 0.0};
    double mean = 0.0;
    for (double x : v)
        mean += x;
    mean /= static_cast<double>(v.size());
    if (v.size() < 2)
        return {mean, 0.0};
    double ss = 0.0;
    for (double x : v)
        ss += (x - mean) * (x - mean);
    return {mean, ss / static_cast<double>(v.size() - 1)};
}

std::string join(const std::vector<double> &v)
{
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i)
            s += ';';
        s += format_number(v[i]);
    }
    return s;
}

std::vector<double> split_numbers(const std::string &s)
{
    std::vector<double> out;
    std::istringstream in(s);
    std::string cell;
    while (std::getline(in, cell, ';'))
        if (!cell.empty())
            out.push_back(std::stod(cell));
    return out;
}

std::vector<std::string> split_csv_line(const std::string &line)
{
    std::vector<std::string> out;
    std::istringstream in(line);
    std::string cell;
    while (std::getline(in, cell, ','))
        out.push_back(cell);
    if (!line.empty() && line.back() == ',')
        out.emplace_back();
    return out;
}

const char *kRunsHeader = "seed,algorithm,ue_count,quota,sum_rate_mbps,spectral_efficiency,jain_index,sweeps,accepted,"
                          "per_user_throughputs,per_rb_rates,convergence_trace";
const char *kMobilityHeader = "speed_kmh,ue,bs_id,clsm_mbps,geo_mbps,genie_mbps";

int nearest_bs(const Scenario &s, const Vec3 &p)
{
    int best = s.bs_list.front().id;
    double best_d = INFINITY;
    for (const auto &b : s.bs_list) {
        const double d = (b.position.head<2>() - p.head<2>()).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = b.id;
        }
    }
    return best;
}

} // namespace

std::string format_number(double v)
{
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

int ExperimentConfig::total_rbs() const { return scenario.num_bs * scenario.rb_count; }

void ExperimentConfig::validate() const
{
    scenario.validate();
    if (oversampling_h < 1 || oversampling_v < 1)
        throw ConfigError("oversampling factors must be at least 1");
    if (max_rank < 1 || max_rank > 4)
        throw ConfigError("max_rank must lie in 1..4");
    if (!(cqi_margin > 0.0))
        throw ConfigError("cqi_margin must be positive");
    if (n_train < 0 || n_test < 0)
        throw ConfigError("dataset sizes must be nonnegative");
    static const std::set<std::string> kinds = {"oracle", "knn", "lqtn", "independent"};
    if (!kinds.count(predictor.kind))
        throw ConfigError("unknown predictor kind \"" + predictor.kind + "\"");
    if (predictor.knn_k < 1)
        throw ConfigError("knn_k must be positive");
    if (predictor.embed_dim < 1 || predictor.num_heads < 1 || predictor.embed_dim % predictor.num_heads != 0 ||
        predictor.ff_dim < 1)
        throw ConfigError("LQTN embed_dim must be a positive multiple of num_heads and ff_dim positive");
    predictor.train.validate();
    if (predictor.kind != "oracle" && n_train < 1 && dataset_path.empty())
        throw ConfigError("a learned predictor needs n_train >= 1");
    if (ue_counts.empty() || quotas.empty())
        throw ConfigError("ue_counts and quotas must be non-empty");
    for (int m : ue_counts)
        if (m < 1)
            throw ConfigError("ue_counts entries must be positive");
    for (int q : quotas)
        if (q < 1)
            throw ConfigError("quota entries must be at least 1");
    for (int m : ue_counts)
        for (int q : quotas)
            if (total_rbs() < q * m)
                throw InfeasibleProblemError("infeasible cell: " + std::to_string(total_rbs()) + " BS-RB pairs < Q*M = " +
                                             std::to_string(q) + "*" + std::to_string(m));
    if (num_seeds < 1)
        throw ConfigError("num_seeds must be positive");
    for (double v : speeds_kmh)
        if (!(v >= 0.0))
            throw ConfigError("speeds must be nonnegative");
    if (!(feedback_delay_s >= 0.0) || !(geolocation_staleness_s >= 0.0))
        throw ConfigError("feedback delay and geolocation staleness must be nonnegative");
    if (mobility_ues < 1)
        throw ConfigError("mobility_ues must be positive");
    if (alloc_quota < 1)
        throw ConfigError("alloc quota must be at least 1");
}

void to_json(nlohmann::json &j, const ExperimentConfig &c)
{
    j = {{"seed", c.seed},
         {"output_dir", c.output_dir},
         {"scenario", c.scenario},
         {"codebook", {{"o1", c.oversampling_h}, {"o2", c.oversampling_v}, {"max_rank", c.max_rank}}},
         {"esm", {{"cqi_margin", c.cqi_margin}}},
         {"dataset", {{"n_train", c.n_train}, {"n_test", c.n_test}, {"path", c.dataset_path}}},
         {"predictor",
          {{"kind", c.predictor.kind},
           {"knn_k", c.predictor.knn_k},
           {"embed_dim", c.predictor.embed_dim},
           {"num_heads", c.predictor.num_heads},
           {"ff_dim", c.predictor.ff_dim},
           {"train", c.predictor.train},
           {"checkpoint", c.predictor.checkpoint}}},
         {"static", {{"ue_counts", c.ue_counts}, {"quotas", c.quotas}, {"num_seeds", c.num_seeds}}},
         {"mobility",
          {{"speeds_kmh", c.speeds_kmh},
           {"feedback_delay_s", c.feedback_delay_s},
           {"geolocation_staleness_s", c.geolocation_staleness_s},
           {"num_ues", c.mobility_ues}}},
         {"alloc", {{"rates_csv", c.rates_csv}, {"quota", c.alloc_quota}}}};
}

void from_json(const nlohmann::json &j, ExperimentConfig &c)
{
    reject_unknown_keys(j,
                        {"seed", "output_dir", "scenario", "codebook", "esm", "dataset", "predictor", "static",
                         "mobility", "alloc"},
                        "config");
    c.seed = j.value("seed", c.seed);
    c.output_dir = j.value("output_dir", c.output_dir);
    if (j.contains("scenario"))
        c.scenario = j.at("scenario").get<ScenarioConfig>();
    if (j.contains("codebook")) {
        const auto &k = j.at("codebook");
        reject_unknown_keys(k, {"o1", "o2", "max_rank"}, "codebook");
        c.oversampling_h = k.value("o1", c.oversampling_h);
        c.oversampling_v = k.value("o2", c.oversampling_v);
        c.max_rank = k.value("max_rank", c.max_rank);
    }
    if (j.contains("esm")) {
        reject_unknown_keys(j.at("esm"), {"cqi_margin"}, "esm");
        c.cqi_margin = j.at("esm").value("cqi_margin", c.cqi_margin);
    }
    if (j.contains("dataset")) {
        const auto &d = j.at("dataset");
        reject_unknown_keys(d, {"n_train", "n_test", "path"}, "dataset");
        c.n_train = d.value("n_train", c.n_train);
        c.n_test = d.value("n_test", c.n_test);
        c.dataset_path = d.value("path", c.dataset_path);
    }
    if (j.contains("predictor")) {
        const auto &p = j.at("predictor");
        reject_unknown_keys(p, {"kind", "knn_k", "embed_dim", "num_heads", "ff_dim", "train", "checkpoint"},
                            "predictor");
        c.predictor.kind = p.value("kind", c.predictor.kind);
        c.predictor.knn_k = p.value("knn_k", c.predictor.knn_k);
        c.predictor.embed_dim = p.value("embed_dim", c.predictor.embed_dim);
        c.predictor.num_heads = p.value("num_heads", c.predictor.num_heads);
        c.predictor.ff_dim = p.value("ff_dim", c.predictor.ff_dim);
        if (p.contains("train")) {
            reject_unknown_keys(p.at("train"),
                                {"learning_rate", "batch_size", "epochs", "seed", "optimizer", "beta1", "beta2",
                                 "epsilon", "target_loss"},
                                "predictor.train");
            c.predictor.train = p.at("train").get<TrainParams>();
        }
        c.predictor.checkpoint = p.value("checkpoint", c.predictor.checkpoint);
    }
    if (j.contains("static")) {
        const auto &s = j.at("static");
        reject_unknown_keys(s, {"ue_counts", "quotas", "num_seeds"}, "static");
        c.ue_counts = s.value("ue_counts", c.ue_counts);
        c.quotas = s.value("quotas", c.quotas);
        c.num_seeds = s.value("num_seeds", c.num_seeds);
    }
    if (j.contains("mobility")) {
        const auto &m = j.at("mobility");
        reject_unknown_keys(m, {"speeds_kmh", "feedback_delay_s", "geolocation_staleness_s", "num_ues"}, "mobility");
        c.speeds_kmh = m.value("speeds_kmh", c.speeds_kmh);
        c.feedback_delay_s = m.value("feedback_delay_s", c.feedback_delay_s);
        c.geolocation_staleness_s = m.value("geolocation_staleness_s", c.geolocation_staleness_s);
        c.mobility_ues = m.value("num_ues", c.mobility_ues);
    }
    if (j.contains("alloc")) {
        const auto &a = j.at("alloc");
        reject_unknown_keys(a, {"rates_csv", "quota"}, "alloc");
        c.rates_csv = a.value("rates_csv", c.rates_csv);
        c.alloc_quota = a.value("quota", c.alloc_quota);
    }
}

ExperimentConfig load_experiment_config(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file " + path);
    ExperimentConfig cfg;
    try {
        cfg = nlohmann::json::parse(in).get<ExperimentConfig>();
    } catch (const nlohmann::json::exception &e) {
        throw ConfigError(path + ": " + e.what());
    }
    return cfg;
}

Environment make_environment(const ExperimentConfig &cfg)
{
    cfg.validate();
    Scenario s = generate_scenario(cfg.scenario, cfg.seed);
    const CodebookConfig cc =
        codebook_config_for(s, s.bs_list.front().id, cfg.oversampling_h, cfg.oversampling_v, cfg.max_rank);
    Codebook cb = build_codebook(cc);
    return {std::move(s), cc, std::move(cb), default_esm_config(McsTable::standard(), cfg.cqi_margin)};
}

CsiDataset generate_dataset(const Scenario &s, int n_train, int n_test, std::uint64_t seed, const Codebook &cb,
                            const EsmConfig &esm)
{
    if (n_train < 0 || n_test < 0)
        throw std::invalid_argument("dataset sizes must be nonnegative");
    const auto locs = sample_geolocations(s, static_cast<std::size_t>(n_train + n_test), seed);
    CsiDataset ds;
    ds.records.reserve(locs.size() * s.bs_list.size());
    for (std::size_t i = 0; i < locs.size(); ++i)
        for (const auto &b : s.bs_list)
            ds.records.push_back({b.id, locs[i], compute_csi_reports(s, b.id, locs[i], cb, esm),
                                  static_cast<int>(i) < n_train ? "train" : "test"});
    return ds;
}

CsiDataset load_or_generate_dataset(const ExperimentConfig &cfg, const Environment &env)
{
    if (!cfg.dataset_path.empty()) {
        std::ifstream in(cfg.dataset_path);
        if (!in)
            throw ConfigError("cannot open dataset " + cfg.dataset_path);
        auto ds = read_dataset_jsonl(in);
        ds.validate(env.scenario);
        return ds;
    }
    return generate_dataset(env.scenario, cfg.n_train, cfg.n_test, mix_seed(cfg.seed, 0xda7a), env.codebook,
                            env.esm);
}

TrainedPredictor make_predictor(const ExperimentConfig &cfg, const Environment &env)
{
    TrainedPredictor out;
    const auto &pc = cfg.predictor;
    if (pc.kind == "oracle") {
        out.predictor = std::make_unique<OraclePredictor>(env.scenario, env.codebook_config, env.esm);
        return out;
    }
    const auto model_cfg = lqtn_config_for(env.scenario, env.codebook, pc.embed_dim, pc.num_heads, pc.ff_dim,
                                           mix_seed(cfg.seed, 0x4d0d));
    if (pc.kind == "lqtn" && !pc.checkpoint.empty()) {
        auto model = load_checkpoint(pc.checkpoint);
        out.parameter_count = model.parameter_count();
        out.predictor = std::make_unique<LqtnPredictor>(std::move(model), env.scenario, env.codebook);
        return out;
    }
    const auto train = load_or_generate_dataset(cfg, env).split("train");
    if (train.records.empty())
        throw ConfigError("the dataset has no training records");
    if (pc.kind == "knn") {
        out.predictor = std::make_unique<KnnPredictor>(train, pc.knn_k);
    } else if (pc.kind == "lqtn") {
        LqtnModel model(model_cfg);
        const auto r = train_lqtn(model, train, env.scenario, pc.train);
        out.loss_trace = r.loss_trace;
        out.initial_loss = r.initial_loss;
        out.parameter_count = model.parameter_count();
        out.predictor = std::make_unique<LqtnPredictor>(std::move(model), env.scenario, env.codebook);
    } else {
        auto p = std::make_unique<IndependentPerRbPredictor>(model_cfg, env.scenario, env.codebook);
        const auto rs = p->train(train, pc.train);
        std::size_t epochs = 0;
        for (const auto &r : rs) {
            epochs = std::max(epochs, r.loss_trace.size());
            out.initial_loss += r.initial_loss;
        }
        // Sum of per-RB losses; a model that stopped early keeps its last value.
        out.loss_trace.assign(epochs, 0.0);
        for (const auto &r : rs)
            for (std::size_t e = 0; e < epochs; ++e)
                out.loss_trace[e] += r.loss_trace.empty() ? r.initial_loss
                                                          : r.loss_trace[std::min(e, r.loss_trace.size() - 1)];
        out.parameter_count = p->parameter_count();
        out.predictor = std::move(p);
    }
    return out;
}

double realized_throughput(std::span<const CMatrix> actual_channels, const CsiReport &report, const Codebook &cb,
                           const EsmConfig &esm, double noise_power, const McsTable &tbl, const FrameConfig &fc)
{
    if (report.pmi < 0 || report.pmi >= static_cast<int>(cb.size()))
        throw std::out_of_range("PMI " + std::to_string(report.pmi) + " outside the codebook");
    const auto &w = cb[static_cast<std::size_t>(report.pmi)];
    if (w.rank() != report.ri)
        throw std::invalid_argument("report RI " + std::to_string(report.ri) + " does not match the rank " +
                                    std::to_string(w.rank()) + " of its PMI");
    SinrGrid grid;
    std::vector<double> sinr;
    for (const auto &h : actual_channels) {
        if (!try_post_eq_sinr(h, w.matrix, noise_power, sinr))
            return 0.0;
        grid.push_back(sinr);
    }
    const auto split = codeword_layers(report.ri);
    auto credit = [&](int cqi, int first, int layers) {
        if (cqi <= 0 || layers == 0)
            return 0.0;
        if (codeword_effective_snr(grid, first, layers, cqi, esm) < esm.threshold_linear(cqi))
            return 0.0;
        return codeword_rate_mbps(tbl, fc, cqi, layers);
    };
    return credit(report.cqi1, 0, split.cw0) + credit(report.cqi2, split.cw0, split.cw1);
}

std::vector<Aggregate> aggregate_runs(std::span<const RunRecord> records)
{
    std::vector<Aggregate> out;
    std::vector<std::array<std::vector<double>, 3>> values;
    for (const auto &r : records) {
        auto it = std::find_if(out.begin(), out.end(), [&](const Aggregate &a) {
            return a.algorithm == r.algorithm && a.ue_count == r.ue_count && a.quota == r.quota;
        });
        std::size_t idx;
        if (it == out.end()) {
            Aggregate a;
            a.algorithm = r.algorithm;
            a.ue_count = r.ue_count;
            a.quota = r.quota;
            out.push_back(a);
            values.emplace_back();
            idx = out.size() - 1;
        } else {
            idx = static_cast<std::size_t>(it - out.begin());
        }
        values[idx][0].push_back(r.sum_rate);
        values[idx][1].push_back(r.spectral_efficiency);
        values[idx][2].push_back(r.jain_index);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].runs = values[i][0].size();
        std::tie(out[i].sum_rate_mean, out[i].sum_rate_var) = mean_and_variance(values[i][0]);
        std::tie(out[i].se_mean, out[i].se_var) = mean_and_variance(values[i][1]);
        std::tie(out[i].jain_mean, out[i].jain_var) = mean_and_variance(values[i][2]);
    }
    return out;
}

ExperimentReport run_static_experiment(const ExperimentConfig &cfg, const Environment &env,
                                       const CsiPredictor &predictor)
{
    cfg.validate();
    const FrameConfig fc;
    ExperimentReport rep;
    for (int ue_count : cfg.ue_counts) {
        for (int s = 0; s < cfg.num_seeds; ++s) {
            const std::uint64_t run_seed = mix_seed(cfg.seed, 0x5000 + static_cast<std::uint64_t>(s));
            const auto ues = sample_geolocations(env.scenario, static_cast<std::size_t>(ue_count),
                                                 mix_seed(run_seed, static_cast<std::uint64_t>(ue_count)));
            const auto rm = rate_matrix(predictor, env.scenario, ues);
            const double bandwidth_mhz = static_cast<double>(rm.rows.size()) * fc.rb_bandwidth_hz() / 1e6;
            for (int q : cfg.quotas) {
                const auto prob = make_problem(rm, q);
                for (const auto &algo : kAlgorithms) {
                    RunRecord r;
                    r.seed = run_seed;
                    r.algorithm = algo;
                    r.ue_count = ue_count;
                    r.quota = q;
                    Matching m;
                    if (algo == "m3_mama") {
                        auto res = m3_mama(prob);
                        m = std::move(res.matching);
                        r.convergence_trace.push_back(res.init_sum_rate);
                        r.convergence_trace.insert(r.convergence_trace.end(), res.trace.begin(), res.trace.end());
                        r.sweeps = res.sweeps;
                        r.accepted = res.accepted;
                    } else if (algo == "best_cqi") {
                        m = best_cqi(prob);
                    } else {
                        m = round_robin(prob);
                    }
                    r.sum_rate = sum_rate(m, prob);
                    r.spectral_efficiency = spectral_efficiency(r.sum_rate, bandwidth_mhz);
                    r.per_user_throughputs = per_ue_throughput(m, prob);
                    r.jain_index = jain_index(r.per_user_throughputs);
                    r.per_rb_rates = assigned_rates(m, prob);
                    rep.records.push_back(std::move(r));
                }
            }
        }
    }
    rep.aggregates = aggregate_runs(rep.records);
    return rep;
}

std::vector<MobilitySummary> summarize_mobility(std::span<const MobilityRecord> records)
{
    std::vector<MobilitySummary> out;
    std::vector<std::array<std::vector<double>, 3>> values;
    for (const auto &r : records) {
        auto it = std::find_if(out.begin(), out.end(), [&](const MobilitySummary &m) { return m.speed_kmh == r.speed_kmh; });
        std::size_t idx;
        if (it == out.end()) {
            out.push_back({});
            out.back().speed_kmh = r.speed_kmh;
            values.emplace_back();
            idx = out.size() - 1;
        } else {
            idx = static_cast<std::size_t>(it - out.begin());
        }
        values[idx][0].push_back(r.clsm_mbps);
        values[idx][1].push_back(r.geo_mbps);
        values[idx][2].push_back(r.genie_mbps);
    }
    for (std::size_t i = 0; i < out.size(); ++i) {
        out[i].users = values[i][0].size();
        std::tie(out[i].clsm_mean, out[i].clsm_var) = mean_and_variance(values[i][0]);
        std::tie(out[i].geo_mean, out[i].geo_var) = mean_and_variance(values[i][1]);
        out[i].genie_mean = mean_and_variance(values[i][2]).first;
    }
    return out;
}

MobilityReport run_mobility_experiment(const ExperimentConfig &cfg, const Environment &env,
                                       const CsiPredictor &predictor)
{
    cfg.validate();
    const auto &s = env.scenario;
    const auto starts = sample_geolocations(s, static_cast<std::size_t>(cfg.mobility_ues), mix_seed(cfg.seed, 0x6001));
    Rng rng(mix_seed(cfg.seed, 0x6002));
    std::vector<double> headings;
    for (std::size_t i = 0; i < starts.size(); ++i)
        headings.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));

    MobilityReport rep;
    for (double speed : cfg.speeds_kmh) {
        for (std::size_t u = 0; u < starts.size(); ++u) {
            // CSI is measured at the start and used one feedback delay later.
            const Geolocation measured = advance(starts[u], s.area, speed, 0.0, headings[u]);
            const Geolocation now = advance(measured, s.area, speed, cfg.feedback_delay_s, headings[u]);
            const Geolocation reported = advance(now, s.area, speed, -cfg.geolocation_staleness_s, headings[u]);
            MobilityRecord rec;
            rec.speed_kmh = speed;
            rec.ue = static_cast<int>(u);
            rec.bs_id = nearest_bs(s, now.position);
            const auto clsm = compute_csi_reports(s, rec.bs_id, measured, env.codebook, env.esm);
            const auto geo = predictor.predict(rec.bs_id, reported);
            const auto genie = compute_csi_reports(s, rec.bs_id, now, env.codebook, env.esm);
            for (int rb = 0; rb < s.bs(rec.bs_id).rb_count; ++rb) {
                const auto channels = rb_channels(s, rec.bs_id, now, rb);
                const auto i = static_cast<std::size_t>(rb);
                rec.clsm_mbps += realized_throughput(channels, clsm[i], env.codebook, env.esm, s.noise_power);
                rec.geo_mbps += realized_throughput(channels, geo.at(i), env.codebook, env.esm, s.noise_power);
                rec.genie_mbps += realized_throughput(channels, genie[i], env.codebook, env.esm, s.noise_power);
            }
            rep.records.push_back(rec);
        }
    }
    rep.summary = summarize_mobility(rep.records);
    return rep;
}

void write_runs_csv(std::span<const RunRecord> records, std::ostream &out)
{
    out << kRunsHeader << '\n';
    for (const auto &r : records)
        out << r.seed << ',' << r.algorithm << ',' << r.ue_count << ',' << r.quota << ',' << format_number(r.sum_rate)
            << ',' << format_number(r.spectral_efficiency) << ',' << format_number(r.jain_index) << ',' << r.sweeps
            << ',' << r.accepted << ',' << join(r.per_user_throughputs) << ',' << join(r.per_rb_rates) << ','
            << join(r.convergence_trace) << '\n';
}

std::vector<RunRecord> read_runs_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line != kRunsHeader)
        throw ConfigError("runs CSV header does not match format version " + std::to_string(kCsvFormatVersion));
    std::vector<RunRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 12)
            throw ConfigError("runs CSV row has " + std::to_string(f.size()) + " fields, expected 12");
        RunRecord r;
        r.seed = std::stoull(f[0]);
        r.algorithm = f[1];
        r.ue_count = std::stoi(f[2]);
        r.quota = std::stoi(f[3]);
        r.sum_rate = std::stod(f[4]);
        r.spectral_efficiency = std::stod(f[5]);
        r.jain_index = std::stod(f[6]);
        r.sweeps = std::stoi(f[7]);
        r.accepted = std::stoi(f[8]);
        r.per_user_throughputs = split_numbers(f[9]);
        r.per_rb_rates = split_numbers(f[10]);
        r.convergence_trace = split_numbers(f[11]);
        out.push_back(std::move(r));
    }
    return out;
}

void write_aggregates_csv(std::span<const Aggregate> aggs, std::ostream &out)
{
    out << "algorithm,ue_count,quota,runs,sum_rate_mean,sum_rate_var,se_mean,se_var,jain_mean,jain_var\n";
    for (const auto &a : aggs)
        out << a.algorithm << ',' << a.ue_count << ',' << a.quota << ',' << a.runs << ','
            << format_number(a.sum_rate_mean) << ',' << format_number(a.sum_rate_var) << ','
            << format_number(a.se_mean) << ',' << format_number(a.se_var) << ',' << format_number(a.jain_mean)
            << ',' << format_number(a.jain_var) << '\n';
}

void write_cdf_csv(std::span<const RunRecord> records, std::ostream &out)
{
    out << "algorithm,ue_count,quota,rate_mbps,cumulative_fraction\n";
    std::map<std::tuple<std::string, int, int>, std::vector<double>> pooled;
    std::vector<std::tuple<std::string, int, int>> order;
    for (const auto &r : records) {
        const auto key = std::make_tuple(r.algorithm, r.ue_count, r.quota);
        if (!pooled.count(key))
            order.push_back(key);
        auto &v = pooled[key];
        v.insert(v.end(), r.per_rb_rates.begin(), r.per_rb_rates.end());
    }
    for (const auto &key : order) {
        auto v = pooled[key];
        std::sort(v.begin(), v.end());
        for (std::size_t i = 0; i < v.size(); ++i)
            out << std::get<0>(key) << ',' << std::get<1>(key) << ',' << std::get<2>(key) << ','
                << format_number(v[i]) << ','
                << format_number(static_cast<double>(i + 1) / static_cast<double>(v.size())) << '\n';
    }
}

void write_mobility_csv(std::span<const MobilityRecord> records, std::ostream &out)
{
    out << kMobilityHeader << '\n';
    for (const auto &r : records)
        out << format_number(r.speed_kmh) << ',' << r.ue << ',' << r.bs_id << ',' << format_number(r.clsm_mbps) << ','
            << format_number(r.geo_mbps) << ',' << format_number(r.genie_mbps) << '\n';
}

std::vector<MobilityRecord> read_mobility_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line) || line != kMobilityHeader)
        throw ConfigError("mobility CSV header does not match format version " + std::to_string(kCsvFormatVersion));
    std::vector<MobilityRecord> out;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto f = split_csv_line(line);
        if (f.size() != 6)
            throw ConfigError("mobility CSV row has " + std::to_string(f.size()) + " fields, expected 6");
        out.push_back({std::stod(f[0]), std::stoi(f[1]), std::stoi(f[2]), std::stod(f[3]), std::stod(f[4]),
                       std::stod(f[5])});
    }
    return out;
}

void write_mobility_summary_csv(std::span<const MobilitySummary> summary, std::ostream &out)
{
    out << "speed_kmh,users,clsm_mean,clsm_var,geo_mean,geo_var,genie_mean\n";
    for (const auto &m : summary)
        out << format_number(m.speed_kmh) << ',' << m.users << ',' << format_number(m.clsm_mean) << ','
            << format_number(m.clsm_var) << ',' << format_number(m.geo_mean) << ','
            << format_number(m.geo_var) << ',' << format_number(m.genie_mean) << '\n';
}

} // namespace fdran
