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

#ifndef FDRAN_HARNESS_HPP
#define FDRAN_HARNESS_HPP

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "fdran/allocator.hpp"
#include "fdran/codebook.hpp"
#include "fdran/csi_map.hpp"
#include "fdran/esm.hpp"
#include "fdran/lqtn.hpp"
#include "fdran/rate_model.hpp"
#include "fdran/scenario.hpp"
#include "json.hpp"

namespace fdran {

struct PredictorConfig
{
    std::string kind = "oracle"; // oracle, knn, lqtn, independent
    int knn_k = 5;
    int embed_dim = 32;
    int num_heads = 4;
    int ff_dim = 64;
    TrainParams train;
    std::string checkpoint; // stem of a saved LQTN checkpoint; empty = train in process
};

struct ExperimentConfig
{
    std::uint64_t seed = 1;
    std::string output_dir = "out";
    ScenarioConfig scenario;
    int oversampling_h = 4; // O1
    int oversampling_v = 1; // O2
    int max_rank = 4;
    double cqi_margin = 1.0;
    int n_train = 500;
    int n_test = 100;
    std::string dataset_path; // JSON-lines; empty = generate
    PredictorConfig predictor;
    std::vector<int> ue_counts{4, 8};
    std::vector<int> quotas{1, 2};
    int num_seeds = 5;
    std::vector<double> speeds_kmh{0.0, 30.0, 60.0, 120.0};
    double feedback_delay_s = 0.003;
    double geolocation_staleness_s = 0.0;
    int mobility_ues = 20;
    std::string rates_csv; // input of `alloc run`
    int alloc_quota = 1;

    // Total BS-RB pairs the scenario will provide.
    int total_rbs() const;
    void validate() const;
};

void to_json(nlohmann::json &j, const ExperimentConfig &c);
void from_json(const nlohmann::json &j, ExperimentConfig &c);
ExperimentConfig load_experiment_config(const std::string &path);

// Everything derived deterministically from the config and seed.
struct Environment
{
    Scenario scenario;
    CodebookConfig codebook_config;
    Codebook codebook;
    EsmConfig esm;
};

Environment make_environment(const ExperimentConfig &cfg);

// Records are per (geolocation, BS); the first n_train geolocations are tagged train.
CsiDataset generate_dataset(const Scenario &s, int n_train, int n_test, std::uint64_t seed, const Codebook &cb,
                            const EsmConfig &esm);

CsiDataset load_or_generate_dataset(const ExperimentConfig &cfg, const Environment &env);

struct TrainedPredictor
{
    std::unique_ptr<CsiPredictor> predictor;
    std::vector<double> loss_trace; // empty for non-trained kinds
    double initial_loss = 0.0;
    std::size_t parameter_count = 0;
};

TrainedPredictor make_predictor(const ExperimentConfig &cfg, const Environment &env);

// Credit-or-zero per codeword under the channel actually experienced.
double realized_throughput(std::span<const CMatrix> actual_channels, const CsiReport &report, const Codebook &cb,
                           const EsmConfig &esm, double noise_power, const McsTable &tbl = McsTable::standard(),
                           const FrameConfig &fc = {});

struct RunRecord
{
    std::uint64_t seed = 0;
    std::string algorithm;
    int ue_count = 0;
    int quota = 0;
    double sum_rate = 0.0;
    double spectral_efficiency = 0.0;
    double jain_index = 0.0;
    std::vector<double> per_user_throughputs;
    std::vector<double> per_rb_rates;
    std::vector<double> convergence_trace; // M3-MAMA only
    int sweeps = 0;
    int accepted = 0;
};

struct Aggregate
{
    std::string algorithm;
    int ue_count = 0;
    int quota = 0;
    std::size_t runs = 0;
    double sum_rate_mean = 0.0;
    double sum_rate_var = 0.0;
    double se_mean = 0.0;
    double se_var = 0.0;
    double jain_mean = 0.0;
    double jain_var = 0.0;
};

struct ExperimentReport
{
    std::vector<RunRecord> records;
    std::vector<Aggregate> aggregates;
};

std::vector<Aggregate> aggregate_runs(std::span<const RunRecord> records);

inline const std::vector<std::string> kAlgorithms = {"m3_mama", "best_cqi", "round_robin"};

ExperimentReport run_static_experiment(const ExperimentConfig &cfg, const Environment &env,
                                       const CsiPredictor &predictor);

struct MobilityRecord
{
    double speed_kmh = 0.0;
    int ue = 0;
    int bs_id = 0;
    double clsm_mbps = 0.0;
    double geo_mbps = 0.0;
    double genie_mbps = 0.0; // fresh CSI at the transmit position
};

struct MobilitySummary
{
    double speed_kmh = 0.0;
    std::size_t users = 0;
    double clsm_mean = 0.0;
    double clsm_var = 0.0;
    double geo_mean = 0.0;
    double geo_var = 0.0;
    double genie_mean = 0.0;
};

struct MobilityReport
{
    std::vector<MobilityRecord> records;
    std::vector<MobilitySummary> summary;
};

std::vector<MobilitySummary> summarize_mobility(std::span<const MobilityRecord> records);

MobilityReport run_mobility_experiment(const ExperimentConfig &cfg, const Environment &env,
                                       const CsiPredictor &predictor);

// CSV writers and readers; column order is fixed (kCsvFormatVersion).
inline constexpr int kCsvFormatVersion = 1;
void write_runs_csv(std::span<const RunRecord> records, std::ostream &out);
std::vector<RunRecord> read_runs_csv(std::istream &in);
void write_aggregates_csv(std::span<const Aggregate> aggs, std::ostream &out);
void write_cdf_csv(std::span<const RunRecord> records, std::ostream &out);
void write_mobility_csv(std::span<const MobilityRecord> records, std::ostream &out);
std::vector<MobilityRecord> read_mobility_csv(std::istream &in);
void write_mobility_summary_csv(std::span<const MobilitySummary> summary, std::ostream &out);

std::string format_number(double v);

} // namespace fdran

#endif
