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
#include <set>
#include <sstream>

#include "doctest.h"
#include "fdran/errors.hpp"
#include "fdran/harness.hpp"
#include "fdran/link.hpp"

using namespace fdran;

namespace {

ExperimentConfig small_config()
{
    ExperimentConfig cfg;
    cfg.seed = 21;
    cfg.scenario.num_bs = 2;
    cfg.scenario.rb_count = 4;
    cfg.n_train = 12;
    cfg.n_test = 4;
    cfg.ue_counts = {3, 4};
    cfg.quotas = {1, 2};
    cfg.num_seeds = 2;
    cfg.speeds_kmh = {0.0, 60.0};
    cfg.mobility_ues = 3;
    return cfg;
}

} // namespace

TEST_CASE("config parsing rejects unknown keys and infeasible cells")
{
    const auto dir = std::filesystem::temp_directory_path();
    const auto good = (dir / "fdran_good.json").string();
    std::ofstream(good) << R"({"seed": 4, "static": {"ue_counts": [2], "quotas": [1]}, "predictor": {"kind": "knn"}})";
    const auto cfg = load_experiment_config(good);
    CHECK(cfg.seed == 4);
    CHECK(cfg.predictor.kind == "knn");
    CHECK(cfg.ue_counts == std::vector<int>{2});

    const auto typo = (dir / "fdran_typo.json").string();
    std::ofstream(typo) << R"({"static": {"ue_count": [2]}})";
    CHECK_THROWS_AS(load_experiment_config(typo), ConfigError);

    ExperimentConfig big = small_config();
    big.ue_counts = {5};
    big.quotas = {2}; // 8 BS-RB pairs < 10
    CHECK_THROWS_AS(big.validate(), InfeasibleProblemError);
    CHECK_THROWS_AS(load_experiment_config((dir / "fdran_missing.json").string()), ConfigError);
}

TEST_CASE("dataset splits are disjoint and labels are ground truth")
{
    const auto cfg = small_config();
    const auto env = make_environment(cfg);
    const auto ds = load_or_generate_dataset(cfg, env);
    CHECK(ds.records.size() == static_cast<std::size_t>((cfg.n_train + cfg.n_test) * cfg.scenario.num_bs));
    std::set<std::array<double, 3>> train;
    for (const auto &r : ds.split("train").records)
        train.insert({r.ue.position.x(), r.ue.position.y(), r.ue.position.z()});
    for (const auto &r : ds.split("test").records)
        CHECK(train.count({r.ue.position.x(), r.ue.position.y(), r.ue.position.z()}) == 0);
    for (std::size_t i = 0; i < ds.records.size(); i += 7) {
        const auto &r = ds.records[i];
        CHECK(r.labels == compute_csi_reports(env.scenario, r.bs_id, r.ue, env.codebook, env.esm));
    }
}

TEST_CASE("realized throughput credits only decodable codewords")
{
    const auto cfg = small_config();
    const auto env = make_environment(cfg);
    Geolocation ue;
    ue.position = Vec3(200.0, 150.0, kUeHeight);
    const auto hs = rb_channels(env.scenario, 0, ue, 1);
    const auto genie = compute_csi_report(env.scenario, 0, ue, 1, env.codebook, env.esm);
    const auto &tbl = McsTable::standard();
    CHECK(realized_throughput(hs, genie, env.codebook, env.esm, env.scenario.noise_power) ==
          doctest::Approx(max_phy_rate(genie, tbl)).epsilon(1e-15));
    if (genie.cqi1 < 15) {
        auto greedy = genie;
        greedy.cqi1 = 15;
        const double r = realized_throughput(hs, greedy, env.codebook, env.esm, env.scenario.noise_power);
        CHECK(r < max_phy_rate(genie, tbl));
    }
}

TEST_CASE("static experiment records and aggregates")
{
    const auto cfg = small_config();
    const auto env = make_environment(cfg);
    auto tp = make_predictor(cfg, env);
    const auto rep = run_static_experiment(cfg, env, *tp.predictor);
    CHECK(rep.records.size() == 2 * 2 * 2 * kAlgorithms.size());
    for (const auto &r : rep.records) {
        CHECK(r.per_user_throughputs.size() == static_cast<std::size_t>(r.ue_count));
        CHECK(r.per_rb_rates.size() == 8);
        CHECK(r.spectral_efficiency == doctest::Approx(r.sum_rate / (8 * 0.18)));
    }
    std::stringstream ss;
    write_runs_csv(rep.records, ss);
    const auto back = read_runs_csv(ss);
    REQUIRE(back.size() == rep.records.size());
    CHECK(back[3].sum_rate == rep.records[3].sum_rate);
    CHECK(back[3].convergence_trace == rep.records[3].convergence_trace);
    const auto aggs = aggregate_runs(back);
    CHECK(aggs.size() == 2 * 2 * kAlgorithms.size());
    for (const auto &a : aggs)
        CHECK(a.runs == 2);

    const auto again = run_static_experiment(cfg, env, *tp.predictor);
    std::stringstream s2;
    write_runs_csv(again.records, s2);
    std::stringstream s1;
    write_runs_csv(rep.records, s1);
    CHECK(s1.str() == s2.str());
}

TEST_CASE("mobility experiment")
{
    const auto cfg = small_config();
    const auto env = make_environment(cfg);
    auto tp = make_predictor(cfg, env);
    const auto rep = run_mobility_experiment(cfg, env, *tp.predictor);
    CHECK(rep.records.size() == 2 * 3);
    REQUIRE(rep.summary.size() == 2);
    // at rest with the oracle predictor all three policies see the same channel
    CHECK(rep.summary[0].clsm_mean == doctest::Approx(rep.summary[0].genie_mean));
    CHECK(rep.summary[0].geo_mean == doctest::Approx(rep.summary[0].genie_mean));
    std::stringstream ss;
    write_mobility_csv(rep.records, ss);
    const auto back = read_mobility_csv(ss);
    CHECK(summarize_mobility(back).size() == 2);
}

TEST_CASE("number formatting round-trips")
{
    for (double v : {0.1, 1.0 / 3.0, 12345.678901234567, 0.0})
        CHECK(std::stod(format_number(v)) == v);
}
