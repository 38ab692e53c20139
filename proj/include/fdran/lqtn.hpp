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

#ifndef FDRAN_LQTN_HPP
#define FDRAN_LQTN_HPP

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "fdran/csi.hpp"
#include "fdran/nn.hpp"
#include "fdran/scenario.hpp"
#include "json.hpp"

namespace fdran {

struct LqtnConfig
{
    static constexpr int kEncoderLayers = 1;
    static constexpr int kDecoderLayers = 2;

    int embed_dim = 64;
    int num_heads = 4;
    int ff_dim = 128;
    int rb_count = 8;
    int max_rank = 4;
    int num_pmi = 160;
    // Position features are min-max normalized into these bounds.
    Vec3 bounds_min = Vec3::Zero();
    Vec3 bounds_max = Vec3(400.0, 300.0, 30.0);
    std::uint64_t seed = 1;

    // 1024-wide model over 100 RBs; only used for parameter-count reporting.
    static LqtnConfig full_scale(int num_pmi);
    void validate() const;
};

std::size_t analytic_parameter_count(const LqtnConfig &cfg);

double model_memory_mb(std::size_t num_parameters);

// Per-RB logits, one row per RB.
struct LqtnLogits
{
    nn::Mat ri;
    nn::Mat cqi1;
    nn::Mat cqi2;
    nn::Mat pmi;
};

using PositionTokens = Eigen::Matrix<double, 2, 3>; // row 0 = BS, row 1 = UE

class LqtnModel
{
  public:
    explicit LqtnModel(const LqtnConfig &cfg);

    const LqtnConfig &config() const { return cfg_; }
    PositionTokens features(const Vec3 &bs, const Vec3 &ue) const;

    // Caches activations for backward(); not safe for concurrent use on one instance.
    LqtnLogits forward(const PositionTokens &tokens);
    LqtnLogits forward(const Vec3 &bs, const Vec3 &ue) { return forward(features(bs, ue)); }
    // Accumulates parameter gradients for the last forward call.
    void backward(const LqtnLogits &grad);

    nn::ParamList params();
    std::size_t parameter_count();
    void zero_grad();

    nn::MultiHeadAttention &cross_attention(int layer) { return decoder_.at(static_cast<std::size_t>(layer)).cross; }
    nn::MultiHeadAttention &encoder_attention() { return encoder_.attn; }

  private:
    struct EncoderLayer
    {
        nn::MultiHeadAttention attn;
        nn::LayerNorm ln1;
        nn::FeedForward ffn;
        nn::LayerNorm ln2;
    };
    struct DecoderLayer
    {
        nn::MultiHeadAttention self;
        nn::LayerNorm ln1;
        nn::MultiHeadAttention cross;
        nn::LayerNorm ln2;
        nn::FeedForward ffn;
        nn::LayerNorm ln3;
    };

    LqtnConfig cfg_;
    nn::FeedForward input_;
    nn::Param token_type_; // 2 x d
    EncoderLayer encoder_;
    nn::Param queries_; // rb_count x d
    std::vector<DecoderLayer> decoder_;
    nn::FeedForward head_ri_;
    nn::FeedForward head_cqi1_;
    nn::FeedForward head_cqi2_;
    nn::FeedForward head_pmi_;
};

// Sum over RBs and heads of cross-entropy. Labels: ri in 1..max_rank, cqi in 0..15, flat pmi.
double lqtn_loss(const LqtnLogits &logits, std::span<const CsiReport> labels, LqtnLogits *grad = nullptr);

struct LqtnSample
{
    PositionTokens tokens;
    std::vector<CsiReport> labels;
};

struct TrainParams
{
    double learning_rate = 1e-3;
    int batch_size = 16;
    int epochs = 50;
    std::uint64_t seed = 1;
    std::string optimizer = "adam"; // "sgd" or "adam"
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    // Stop once an epoch's mean loss falls to this value; 0 disables.
    double target_loss = 0.0;

    void validate() const;
};

struct TrainResult
{
    double initial_loss = 0.0;       // mean loss before the first update
    std::vector<double> loss_trace;  // mean loss per epoch, accumulated during the epoch
};

double mean_loss(LqtnModel &model, std::span<const LqtnSample> samples);

TrainResult lqtn_train(LqtnModel &model, std::span<const LqtnSample> samples, const TrainParams &hp);

// Writes <stem>.bin (named tensors, little-endian doubles) and <stem>.json (manifest).
void save_checkpoint(LqtnModel &model, const std::string &stem, const nlohmann::json &extra = {});
LqtnModel load_checkpoint(const std::string &stem);

void to_json(nlohmann::json &j, const LqtnConfig &c);
void from_json(const nlohmann::json &j, LqtnConfig &c);
void to_json(nlohmann::json &j, const TrainParams &p);
void from_json(const nlohmann::json &j, TrainParams &p);

} // namespace fdran

#endif
