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

#ifndef FDRAN_CSI_MAP_HPP
#define FDRAN_CSI_MAP_HPP

#include <array>
#include <iosfwd>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "fdran/codebook.hpp"
#include "fdran/csi.hpp"
#include "fdran/esm.hpp"
#include "fdran/lqtn.hpp"
#include "fdran/scenario.hpp"

namespace fdran {

class CsiPredictor
{
  public:
    virtual ~CsiPredictor() = default;
    // One report per RB of the BS.
    virtual std::vector<CsiReport> predict(int bs_id, const Geolocation &ue) const = 0;
    virtual std::string name() const = 0;
};

struct CsiRecord
{
    int bs_id = 0;
    Geolocation ue;
    std::vector<CsiReport> labels; // one per RB
    std::string split = "train";   // "train" or "test"
};

struct CsiDataset
{
    std::vector<CsiRecord> records;

    CsiDataset split(const std::string &tag) const;
    // Label lists must have rb_count entries for their BS.
    void validate(const Scenario &s) const;
};

void write_dataset_jsonl(const CsiDataset &ds, std::ostream &out);
CsiDataset read_dataset_jsonl(std::istream &in);

void to_json(nlohmann::json &j, const CsiRecord &r);
void from_json(const nlohmann::json &j, CsiRecord &r);

// Ground truth: runs the link-level selection on the true channel.
class OraclePredictor : public CsiPredictor
{
  public:
    OraclePredictor(Scenario s, const CodebookConfig &cb_cfg, EsmConfig esm);

    std::vector<CsiReport> predict(int bs_id, const Geolocation &ue) const override;
    std::string name() const override { return "oracle"; }

  private:
    Scenario scenario_;
    std::vector<Codebook> codebooks_; // per BS, indexed like bs_list
    EsmConfig esm_;
};

// Per-RB, per-field majority vote over the k nearest training geolocations of the same BS.
std::vector<CsiReport> knn_predict(const CsiDataset &ds, int bs_id, const Geolocation &ue, int k);

class KnnPredictor : public CsiPredictor
{
  public:
    KnnPredictor(CsiDataset train, int k);

    std::vector<CsiReport> predict(int bs_id, const Geolocation &ue) const override;
    std::string name() const override { return "knn"; }

  private:
    CsiDataset train_;
    int k_;
};

LqtnConfig lqtn_config_for(const Scenario &s, const Codebook &cb, int embed_dim, int num_heads, int ff_dim,
                           std::uint64_t seed);

// Argmax decoding; the PMI is restricted to precoders of the predicted rank.
CsiReport decode_report(const LqtnLogits &logits, int row, const Codebook &cb);

// rb = nullopt keeps all labels; otherwise a single-RB label list.
std::vector<LqtnSample> make_samples(const CsiDataset &ds, const Scenario &s, const LqtnModel &model,
                                     std::optional<int> rb = std::nullopt);

class LqtnPredictor : public CsiPredictor
{
  public:
    LqtnPredictor(LqtnModel model, Scenario s, Codebook cb);

    std::vector<CsiReport> predict(int bs_id, const Geolocation &ue) const override;
    std::string name() const override { return "lqtn"; }
    LqtnModel &model() { return model_; }

  private:
    mutable std::mutex mutex_;
    mutable LqtnModel model_;
    Scenario scenario_;
    Codebook cb_;
};

// One single-query model per RB; the ablation without cross-RB sharing.
class IndependentPerRbPredictor : public CsiPredictor
{
  public:
    IndependentPerRbPredictor(const LqtnConfig &shared, Scenario s, Codebook cb);

    // Each RB model gets the same hyperparameters and epoch budget as a shared model would.
    std::vector<TrainResult> train(const CsiDataset &train, const TrainParams &hp);
    std::vector<CsiReport> predict(int bs_id, const Geolocation &ue) const override;
    std::string name() const override { return "independent"; }
    std::size_t parameter_count();
    // Writes <prefix><rb>.bin/.json per RB model.
    void save(const std::string &prefix);

  private:
    mutable std::mutex mutex_;
    mutable std::vector<LqtnModel> models_;
    Scenario scenario_;
    Codebook cb_;
};

TrainResult train_lqtn(LqtnModel &model, const CsiDataset &train, const Scenario &s, const TrainParams &hp);

struct MaeReport
{
    static constexpr std::array<const char *, 4> kFields = {"ri", "cqi1", "cqi2", "pmi"};

    std::array<double, 4> normalized_mae{};
    std::array<double, 4> accuracy{};
    std::array<double, 4> label_range{};
    double mean_normalized_mae = 0.0;
    std::size_t count = 0; // RB reports compared
};

// Per-field MAE divided by the field's label range over the evaluated records (range 0 divides by 1).
MaeReport evaluate_mae(const CsiPredictor &p, const CsiDataset &test);

void to_json(nlohmann::json &j, const MaeReport &r);

} // namespace fdran

#endif
