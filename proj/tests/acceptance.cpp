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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "fdran/allocator.hpp"
#include "fdran/csi_map.hpp"
#include "fdran/esm.hpp"
#include "fdran/harness.hpp"
#include "fdran/link.hpp"
#include "fdran/lqtn.hpp"
#include "fdran/rate_model.hpp"
#include "gradcheck.hpp"
#include "oracles.hpp"

using namespace fdran;
using Clock = std::chrono::steady_clock;
namespace fs = std::filesystem;

namespace {

struct Outcome
{
    bool pass = false;
    std::string detail;
};

std::string fmt(double v, int precision = 6)
{
    std::ostringstream s;
    s << std::setprecision(precision) << v;
    return s.str();
}

double seconds_since(Clock::time_point t0)
{
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// 1
Outcome rate_anchor()
{
    const auto &tbl = McsTable::standard();
    const CsiReport r{1, 1, 1, 0};
    const auto t0 = Clock::now();
    const double rate = max_phy_rate(r, tbl);
    const double ms = seconds_since(t0) * 1e3;
    const FrameConfig fc;
    const bool ok = rate == 0.020064 && fc.data_res_per_rb() == 132 && ms < 1.0;
    return {ok, "rate=" + fmt(rate, 12) + " Mbps (bit-exact: " + (rate == 0.020064 ? "yes" : "no") + "), REs=" + std::to_string(fc.data_res_per_rb()) +
                    ", time=" + fmt(ms, 3) + " ms"};
}

// 2
Outcome zf_identity()
{
    Rng rng(0x2f);
    double worst = 0.0;
    int done = 0;
    while (done < 1000) {
        const int nr = 1 + static_cast<int>(rng.below(4));
        const int nt = 1 + static_cast<int>(rng.below(6));
        const int l = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(std::min(nr, nt))));
        const CMatrix h = testing::random_complex(rng, nr, nt);
        const CMatrix w = testing::random_complex(rng, nt, l);
        const CMatrix f = zf_equalizer(h, w);
        worst = std::max(worst, (f * h * w - CMatrix::Identity(l, l)).norm());
        ++done;
    }
    return {worst < 1e-9, "1000 instances, max ||FHW - I||_F = " + fmt(worst)};
}

// 3
Outcome esm_fixed_point()
{
    const auto cfg = default_esm_config();
    Rng rng(0x35);
    double worst = 0.0;
    for (int g = 0; g < 100; ++g) {
        const double s = std::pow(10.0, rng.uniform(-2.0, 3.0));
        const std::size_t n = 1 + rng.below(64);
        const std::vector<double> grid(n, s);
        for (int cqi = 0; cqi < kNumCqi; ++cqi)
            worst = std::max(worst, std::abs(effective_snr(grid, cqi, cfg) - s) / s);
    }
    return {worst <= 1e-10, "100 grids x 16 CQIs, max relative error = " + fmt(worst)};
}

// 4
Outcome pmi_oracle()
{
    struct Shape
    {
        int n1, o1, max_rank, nr;
    };
    const std::vector<Shape> shapes{{2, 4, 1, 4}, {2, 2, 2, 4}, {1, 4, 2, 2}, {2, 1, 4, 4}, {2, 2, 2, 2}};
    std::vector<Codebook> books;
    for (const auto &sh : shapes) {
        CodebookConfig c;
        c.n1 = sh.n1;
        c.o1 = sh.o1;
        c.max_rank = sh.max_rank;
        c.num_tx_antennas = 2 * sh.n1;
        c.num_rx_antennas = sh.nr;
        books.emplace_back(c);
    }
    std::size_t largest = 0;
    for (const auto &b : books)
        largest = std::max(largest, b.size());

    Rng rng(0x44);
    int mismatches = 0, ties = 0;
    for (int i = 0; i < 200; ++i) {
        const std::size_t which = static_cast<std::size_t>(i) % books.size();
        const auto &cb = books[which];
        const int nt = cb.config().num_tx_antennas;
        const int nr = shapes[which].nr;
        const int re = 1 + static_cast<int>(rng.below(4));
        std::vector<CMatrix> hs;
        const bool tie_case = i % 4 == 3;
        for (int k = 0; k < re; ++k) {
            CMatrix h = testing::random_complex(rng, nr, nt);
            // Silencing the second antenna half makes every co-phase i2 tie exactly.
            if (tie_case)
                h.rightCols(nt / 2).setZero();
            hs.push_back(h);
        }
        const double sigma2 = std::pow(10.0, rng.uniform(-2.0, 0.5));
        const auto got = select_pmi_ri(hs, cb, sigma2);
        const auto want = testing::exhaustive_pmi_ri(hs, cb, sigma2);
        ties += tie_case;
        if (got.ri != want.ri || got.pmi != want.pmi)
            ++mismatches;
    }
    return {mismatches == 0 && largest <= 64, "200 instances (" + std::to_string(ties) +
                                                  " with exact ties), codebooks up to " + std::to_string(largest) +
                                                  " precoders, mismatches = " + std::to_string(mismatches)};
}

struct AllocStats
{
    int instances = 0;
    int unstable = 0;
    int below_init = 0;
    int below_rr = 0;
    int gap_instances = 0;
    double mean_gap = 0.0;
    int max_sweeps = 0;
    int max_accepted = 0;
};

AllocStats allocation_study()
{
    Rng rng(0x55);
    AllocStats st;
    double gap_sum = 0.0;
    while (st.instances < 100) {
        const int m = 3 + static_cast<int>(rng.below(4));
        const int q = 1 + static_cast<int>(rng.below(3));
        const int lo = std::max(9, q * m);
        if (lo > 18)
            continue;
        const int w = lo + static_cast<int>(rng.below(static_cast<std::uint64_t>(18 - lo + 1)));
        const auto p = testing::random_problem(rng, m, w, q);
        const auto r = m3_mama(p);
        const double sr = sum_rate(r.matching, p);
        ++st.instances;
        st.unstable += !is_pairwise_stable(r.matching, p).stable || !is_feasible(r.matching, p);
        st.below_init += sr < r.init_sum_rate;
        st.below_rr += sr < sum_rate(round_robin(p), p);
        st.max_sweeps = std::max(st.max_sweeps, r.sweeps);
        st.max_accepted = std::max(st.max_accepted, r.accepted);
        if (std::pow(static_cast<double>(m), w) <= 1e6) {
            const double opt = sum_rate(brute_force_optimal(p).matching, p);
            gap_sum += (opt - sr) / opt;
            ++st.gap_instances;
        }
    }
    st.mean_gap = st.gap_instances ? gap_sum / st.gap_instances : 0.0;
    return st;
}

// 5
Outcome stability(const AllocStats &st)
{
    const bool ok = st.unstable == 0 && st.below_init == 0 && st.below_rr == 0 && st.gap_instances > 0 &&
                    st.mean_gap <= 0.10;
    return {ok, std::to_string(st.instances) + " instances: unstable=" + std::to_string(st.unstable) +
                    ", below init=" + std::to_string(st.below_init) + ", below round robin=" +
                    std::to_string(st.below_rr) + ", mean optimality gap=" + fmt(100.0 * st.mean_gap, 4) +
                    "% over " + std::to_string(st.gap_instances) + " brute-forced"};
}

// 6
Outcome termination(const AllocStats &st)
{
    return {st.max_sweeps <= 50, "max sweeps=" + std::to_string(st.max_sweeps) +
                                     ", max accepted exchanges=" + std::to_string(st.max_accepted)};
}

// 7
Outcome jain()
{
    const double a = jain_index(std::vector<double>{1, 2, 3});
    const double b = jain_index(std::vector<double>(5, 2.5));
    const double c = jain_index(std::vector<double>{0, 0, 7, 0});
    const bool ok = a == 6.0 / 7.0 && b == 1.0 && c == 0.25;
    return {ok, "[1,2,3] -> " + format_number(a) + ", equal -> " + format_number(b) + ", one-hot n=4 -> " +
                    format_number(c)};
}

// 8
Outcome gradient()
{
    LqtnModel model(testing::tiny_config());
    const auto tokens = model.features(Vec3(50, 60, 25), Vec3(210, 140, 1.5));
    std::vector<CsiReport> labels{{2, 7, 3, 5}, {1, 12, 12, 0}, {4, 0, 15, 11}};
    double worst = 0.0;
    int tensors = 0, vanishing = 0, bad = 0;
    for (const auto &e : testing::gradient_check(model, tokens, labels)) {
        ++tensors;
        if (e.vanishing)
            ++vanishing;
        else
            worst = std::max(worst, e.relative_error);
        bad += !e.ok(1e-4, testing::kVanishingGradient);
    }
    return {bad == 0, std::to_string(tensors) + " tensors, max relative error=" + fmt(worst) + ", " +
                          std::to_string(vanishing) + " key-bias tensors with |grad| < 1e-6 (identically zero)"};
}

// 9
Outcome learning()
{
    const auto s = generate_scenario(ScenarioConfig{}, 7);
    const Codebook cb(codebook_config_for(s, 0));
    const auto esm = default_esm_config();
    auto ds = generate_dataset(s, 167, 0, 0x9a, cb, esm);
    ds.records.resize(500);
    LqtnModel model(lqtn_config_for(s, cb, 32, 4, 64, 9));
    const auto samples = make_samples(ds, s, model);
    const double init = mean_loss(model, samples);
    TrainParams hp;
    hp.learning_rate = 0.002;
    hp.batch_size = 16;
    hp.epochs = 200;
    hp.seed = 9;
    hp.target_loss = 0.5 * init;
    const auto r = lqtn_train(model, samples, hp);
    const double after = mean_loss(model, samples);
    const std::size_t epochs = r.loss_trace.size();

    LqtnModel single(lqtn_config_for(s, cb, 32, 4, 64, 10));
    const std::vector<LqtnSample> one{samples.front()};
    TrainParams hp1;
    hp1.learning_rate = 0.005;
    hp1.batch_size = 1;
    hp1.epochs = 2000;
    hp1.seed = 10;
    hp1.target_loss = 0.001;
    lqtn_train(single, one, hp1);
    const double overfit = mean_loss(single, one);

    const bool ok = after <= 0.5 * init && epochs <= 200 && overfit < 0.01;
    return {ok, "500 samples: loss " + fmt(init) + " -> " + fmt(after) + " in " + std::to_string(epochs) +
                    " epochs; single-sample loss " + fmt(overfit)};
}

ExperimentConfig base_config(std::uint64_t seed)
{
    ExperimentConfig cfg;
    cfg.seed = seed;
    cfg.predictor.embed_dim = 32;
    cfg.predictor.num_heads = 4;
    cfg.predictor.ff_dim = 64;
    cfg.predictor.train.learning_rate = 0.002;
    cfg.predictor.train.batch_size = 16;
    cfg.predictor.train.epochs = 20;
    cfg.predictor.train.seed = seed;
    return cfg;
}

// 10
Outcome frequency_correlation()
{
    double shared_sum = 0.0, indep_sum = 0.0;
    std::string per_seed;
    const int seeds = 5;
    for (int k = 0; k < seeds; ++k) {
        auto cfg = base_config(100 + static_cast<std::uint64_t>(k));
        cfg.n_train = 200;
        cfg.n_test = 50;
        const auto env = make_environment(cfg);
        const auto test = load_or_generate_dataset(cfg, env).split("test");
        cfg.predictor.kind = "lqtn";
        const auto shared = make_predictor(cfg, env);
        cfg.predictor.kind = "independent";
        const auto indep = make_predictor(cfg, env);
        const double a = evaluate_mae(*shared.predictor, test).mean_normalized_mae;
        const double b = evaluate_mae(*indep.predictor, test).mean_normalized_mae;
        shared_sum += a;
        indep_sum += b;
        per_seed += (k ? " " : "") + fmt(a, 4) + "/" + fmt(b, 4);
    }
    const double a = shared_sum / seeds, b = indep_sum / seeds;
    return {a <= b, "mean normalized MAE shared=" + fmt(a, 4) + " independent=" + fmt(b, 4) +
                        " (per seed shared/independent: " + per_seed + ")"};
}

// 11
Outcome mobility()
{
    auto cfg = base_config(7);
    cfg.n_train = 300;
    cfg.n_test = 0;
    cfg.predictor.kind = "lqtn";
    cfg.predictor.train.epochs = 30;
    cfg.speeds_kmh = {0.0, 10.0, 15.0, 60.0};
    cfg.feedback_delay_s = 0.003;
    cfg.mobility_ues = 20;
    const auto env = make_environment(cfg);
    const auto tp = make_predictor(cfg, env);
    const auto rep = run_mobility_experiment(cfg, env, *tp.predictor);
    const auto &first = rep.summary.front();
    const auto &last = rep.summary.back();
    std::string detail;
    for (const auto &s : rep.summary)
        detail += (detail.empty() ? "" : "; ") + fmt(s.speed_kmh, 3) + " km/h CLSM=" + fmt(s.clsm_mean, 4) +
                  " geo-predicted=" + fmt(s.geo_mean, 4);
    const bool ok = first.speed_kmh == 0.0 && first.clsm_mean >= first.geo_mean &&
                    last.geo_mean >= last.clsm_mean;
    return {ok, detail + " Mbps"};
}

// 12
Outcome capacity()
{
    ExperimentConfig cfg;
    cfg.seed = 12;
    cfg.predictor.kind = "oracle";
    cfg.ue_counts = {4, 6, 8};
    cfg.quotas = {1, 2, 3};
    cfg.num_seeds = 20;
    const auto env = make_environment(cfg);
    const auto tp = make_predictor(cfg, env);
    const auto rep = run_static_experiment(cfg, env, *tp.predictor);
    std::map<std::pair<int, int>, std::map<std::string, double>> se;
    for (const auto &a : rep.aggregates)
        se[{a.ue_count, a.quota}][a.algorithm] = a.se_mean;
    int cells = 0, held = 0;
    std::string detail;
    std::map<std::string, double> overall;
    for (const auto &[key, v] : se) {
        for (const auto &[alg, x] : v)
            overall[alg] += x / static_cast<double>(se.size());
        const bool ok = v.at("m3_mama") >= v.at("best_cqi") && v.at("best_cqi") >= v.at("round_robin");
        ++cells;
        held += ok;
        detail += (detail.empty() ? "" : "; ") + std::string("M=") + std::to_string(key.first) +
                  " Q=" + std::to_string(key.second) + " " + fmt(v.at("m3_mama"), 5) + "/" +
                  fmt(v.at("best_cqi"), 5) + "/" + fmt(v.at("round_robin"), 5) + (ok ? "" : " (violated)");
    }
    return {held == cells, std::to_string(held) + "/" + std::to_string(cells) +
                               " cells ordered, SE M3/BestCQI/RR: " + detail + "; all cells " +
                               fmt(overall["m3_mama"], 5) + "/" + fmt(overall["best_cqi"], 5) + "/" +
                               fmt(overall["round_robin"], 5)};
}

std::string slurp(const fs::path &p)
{
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// 13
Outcome determinism(const std::string &cli, Clock::time_point suite_start)
{
    const fs::path dir = fs::temp_directory_path() / "fdran_acceptance_determinism";
    fs::remove_all(dir);
    fs::create_directories(dir);
    const fs::path cfg = dir / "config.json";
    std::ofstream(cfg) << R"({"seed": 13, "scenario": {"num_bs": 2, "rb_count": 6},
  "predictor": {"kind": "oracle"},
  "static": {"ue_counts": [3, 5], "quotas": [1, 2], "num_seeds": 3}})";
    std::vector<std::string> files;
    for (const char *run : {"a", "b"}) {
        const std::string cmd = "\"" + cli + "\" experiment static --config \"" + cfg.string() + "\" --out \"" +
                                (dir / run).string() + "\" > /dev/null";
        if (std::system(cmd.c_str()) != 0)
            return {false, "CLI run failed: " + cmd};
    }
    int compared = 0, differing = 0;
    for (const auto &e : fs::directory_iterator(dir / "a")) {
        if (e.path().extension() != ".csv")
            continue;
        ++compared;
        const auto other = dir / "b" / e.path().filename();
        if (!fs::exists(other) || slurp(e.path()) != slurp(other))
            ++differing;
    }
    const double elapsed = seconds_since(suite_start);
    const bool ok = compared > 0 && differing == 0 && elapsed < 15 * 60;
    return {ok, std::to_string(compared) + " CSV files compared, " + std::to_string(differing) +
                    " differ; acceptance wall time " + fmt(elapsed, 4) + " s (limit 900 s)"};
}

} // namespace

int main(int argc, char **argv)
{
    const std::string cli = argc > 1 ? argv[1] : "fdran";
    const auto start = Clock::now();
    int failed = 0;
    auto report = [&](int id, const std::string &name, const std::function<Outcome()> &fn) {
        Outcome o;
        try {
            o = fn();
        } catch (const std::exception &e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::cout << (o.pass ? "PASS" : "FAIL") << " [" << id << "] " << name << ": " << o.detail << std::endl;
    };

    report(1, "rate anchor", rate_anchor);
    report(2, "ZF identity", zf_identity);
    report(3, "ESM fixed point", esm_fixed_point);
    report(4, "PMI/RI oracle equivalence", pmi_oracle);
    const auto st = allocation_study();
    report(5, "matching stability and dominance", [&] { return stability(st); });
    report(6, "termination bound", [&] { return termination(st); });
    report(7, "Jain anchor", jain);
    report(8, "gradient check", gradient);
    report(9, "learning sanity", learning);
    report(10, "frequency-correlation trend", frequency_correlation);
    report(11, "mobility crossover", mobility);
    report(12, "capacity ordering", capacity);
    report(13, "end-to-end determinism", [&] { return determinism(cli, start); });
    std::cout << (failed ? std::to_string(failed) + " criteria failed" : std::string("all criteria passed"))
              << std::endl;
    return failed ? 1 : 0;
}
