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

#include "fdran/lqtn.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

#include "fdran/errors.hpp"
#include "fdran/random.hpp"

namespace fdran {

namespace {

constexpr char kMagic[8] = {'F', 'D', 'R', 'A', 'N', 'C', 'K', '1'};

std::size_t linear_count(std::size_t in, std::size_t out) { return in * out + out; }

std::size_t ffn_count(std::size_t in, std::size_t hidden, std::size_t out)
{
    return linear_count(in, hidden) + linear_count(hidden, out);
}

} // namespace

LqtnConfig LqtnConfig::full_scale(int num_pmi)
{
    LqtnConfig c;
    c.embed_dim = 1024;
    c.num_heads = 8;
    c.ff_dim = 4096;
    c.rb_count = 100;
    c.max_rank = 4;
    c.num_pmi = num_pmi;
    return c;
}

void LqtnConfig::validate() const
{
    if (embed_dim <= 0 || num_heads <= 0 || embed_dim % num_heads != 0)
        throw ConfigError("embed_dim must be a positive multiple of num_heads");
    if (ff_dim <= 0)
        throw ConfigError("ff_dim must be positive");
    if (rb_count <= 0)
        throw ConfigError("rb_count must be positive");
    if (max_rank < 1 || max_rank > 4)
        throw ConfigError("max_rank must lie in 1..4");
    if (num_pmi <= 0)
        throw ConfigError("num_pmi must be positive");
    if (!((bounds_max - bounds_min).array() > 0.0).all())
        throw ConfigError("feature bounds must have positive extent on every axis");
}

std::size_t analytic_parameter_count(const LqtnConfig &cfg)
{
    const auto d = static_cast<std::size_t>(cfg.embed_dim);
    const auto f = static_cast<std::size_t>(cfg.ff_dim);
    const std::size_t mha = 4 * linear_count(d, d);
    const std::size_t ln = 2 * d;
    std::size_t n = ffn_count(3, d, d) + 2 * d;
    n += LqtnConfig::kEncoderLayers * (mha + ln + ffn_count(d, f, d) + ln);
    n += static_cast<std::size_t>(cfg.rb_count) * d;
    n += LqtnConfig::kDecoderLayers * (2 * mha + 3 * ln + ffn_count(d, f, d));
    for (int classes : {cfg.max_rank, kNumCqi, kNumCqi, cfg.num_pmi})
        n += ffn_count(d, d, static_cast<std::size_t>(classes));
    return n;
}

double model_memory_mb(std::size_t num_parameters)
{
    return 4.0 * static_cast<double>(num_parameters) / (1024.0 * 1024.0);
}

LqtnModel::LqtnModel(const LqtnConfig &cfg) : cfg_(cfg)
{
    cfg_.validate();
    const int d = cfg_.embed_dim;
    const int h = cfg_.num_heads;
    input_ = nn::FeedForward("input", 3, d, d);
    token_type_ = nn::Param("token_type", 2, d);
    encoder_ = {nn::MultiHeadAttention("enc0.attn", d, h), nn::LayerNorm("enc0.ln1", d),
                nn::FeedForward("enc0.ffn", d, cfg_.ff_dim, d), nn::LayerNorm("enc0.ln2", d)};
    queries_ = nn::Param("queries", cfg_.rb_count, d);
    for (int l = 0; l < LqtnConfig::kDecoderLayers; ++l) {
        const std::string p = "dec" + std::to_string(l);
        decoder_.push_back({nn::MultiHeadAttention(p + ".self", d, h), nn::LayerNorm(p + ".ln1", d),
                            nn::MultiHeadAttention(p + ".cross", d, h), nn::LayerNorm(p + ".ln2", d),
                            nn::FeedForward(p + ".ffn", d, cfg_.ff_dim, d), nn::LayerNorm(p + ".ln3", d)});
    }
    head_ri_ = nn::FeedForward("head.ri", d, d, cfg_.max_rank);
    head_cqi1_ = nn::FeedForward("head.cqi1", d, d, kNumCqi);
    head_cqi2_ = nn::FeedForward("head.cqi2", d, d, kNumCqi);
    head_pmi_ = nn::FeedForward("head.pmi", d, d, cfg_.num_pmi);

    Rng rng(mix_seed(cfg_.seed, 0x4c51));
    input_.init(rng);
    for (Eigen::Index i = 0; i < token_type_.value.size(); ++i)
        token_type_.value.data()[i] = 0.1 * rng.normal();
    encoder_.attn.init(rng);
    encoder_.ffn.init(rng);
    for (Eigen::Index i = 0; i < queries_.value.size(); ++i)
        queries_.value.data()[i] = rng.normal();
    for (auto &layer : decoder_) {
        layer.self.init(rng);
        layer.cross.init(rng);
        layer.ffn.init(rng);
    }
    head_ri_.init(rng);
    head_cqi1_.init(rng);
    head_cqi2_.init(rng);
    head_pmi_.init(rng);
}

PositionTokens LqtnModel::features(const Vec3 &bs, const Vec3 &ue) const
{
    if (!bs.allFinite() || !ue.allFinite())
        throw std::invalid_argument("LQTN input positions must be finite");
    const Vec3 span = cfg_.bounds_max - cfg_.bounds_min;
    PositionTokens t;
    t.row(0) = ((bs - cfg_.bounds_min).array() / span.array()).matrix().transpose();
    t.row(1) = ((ue - cfg_.bounds_min).array() / span.array()).matrix().transpose();
    return t;
}

LqtnLogits LqtnModel::forward(const PositionTokens &tokens)
{
    if (!tokens.allFinite())
        throw std::invalid_argument("LQTN input features must be finite");
    nn::Mat e = input_.forward(tokens) + token_type_.value;
    {
        auto &enc = encoder_;
        const nn::Mat h1 = enc.ln1.forward(e + enc.attn.forward(e, e));
        e = enc.ln2.forward(h1 + enc.ffn.forward(h1));
    }
    nn::Mat y = queries_.value;
    for (auto &layer : decoder_) {
        const nn::Mat y1 = layer.ln1.forward(y + layer.self.forward(y, y));
        const nn::Mat y2 = layer.ln2.forward(y1 + layer.cross.forward(y1, e));
        y = layer.ln3.forward(y2 + layer.ffn.forward(y2));
    }
    return {head_ri_.forward(y), head_cqi1_.forward(y), head_cqi2_.forward(y), head_pmi_.forward(y)};
}

void LqtnModel::backward(const LqtnLogits &grad)
{
    nn::Mat dy = head_ri_.backward(grad.ri) + head_cqi1_.backward(grad.cqi1) + head_cqi2_.backward(grad.cqi2) +
                 head_pmi_.backward(grad.pmi);
    nn::Mat denc = nn::Mat::Zero(2, cfg_.embed_dim);
    for (auto it = decoder_.rbegin(); it != decoder_.rend(); ++it) {
        const nn::Mat d3 = it->ln3.backward(dy);
        const nn::Mat dy2 = d3 + it->ffn.backward(d3);
        const nn::Mat d2 = it->ln2.backward(dy2);
        auto [dq_cross, dkv_cross] = it->cross.backward(d2);
        denc += dkv_cross;
        const nn::Mat dy1 = d2 + dq_cross;
        const nn::Mat d1 = it->ln1.backward(dy1);
        auto [dq_self, dkv_self] = it->self.backward(d1);
        dy = d1 + dq_self + dkv_self;
    }
    queries_.grad += dy;
    auto &enc = encoder_;
    const nn::Mat d2 = enc.ln2.backward(denc);
    const nn::Mat dh1 = d2 + enc.ffn.backward(d2);
    const nn::Mat d1 = enc.ln1.backward(dh1);
    auto [dq, dkv] = enc.attn.backward(d1);
    const nn::Mat de = d1 + dq + dkv;
    token_type_.grad += de;
    input_.backward(de);
}

nn::ParamList LqtnModel::params()
{
    nn::ParamList out;
    input_.collect(out);
    out.push_back(&token_type_);
    encoder_.attn.collect(out);
    encoder_.ln1.collect(out);
    encoder_.ffn.collect(out);
    encoder_.ln2.collect(out);
    out.push_back(&queries_);
    for (auto &layer : decoder_) {
        layer.self.collect(out);
        layer.ln1.collect(out);
        layer.cross.collect(out);
        layer.ln2.collect(out);
        layer.ffn.collect(out);
        layer.ln3.collect(out);
    }
    head_ri_.collect(out);
    head_cqi1_.collect(out);
    head_cqi2_.collect(out);
    head_pmi_.collect(out);
    return out;
}

std::size_t LqtnModel::parameter_count() { return nn::count_parameters(params()); }

void LqtnModel::zero_grad()
{
    for (auto *p : params())
        p->zero_grad();
}

double lqtn_loss(const LqtnLogits &logits, std::span<const CsiReport> labels, LqtnLogits *grad)
{
    const auto rbs = logits.ri.rows();
    if (static_cast<Eigen::Index>(labels.size()) != rbs)
        throw std::invalid_argument("label count " + std::to_string(labels.size()) + " does not match " +
                                    std::to_string(rbs) + " RB logits");
    if (grad) {
        grad->ri.resize(logits.ri.rows(), logits.ri.cols());
        grad->cqi1.resize(logits.cqi1.rows(), logits.cqi1.cols());
        grad->cqi2.resize(logits.cqi2.rows(), logits.cqi2.cols());
        grad->pmi.resize(logits.pmi.rows(), logits.pmi.cols());
    }
    auto check = [](int label, Eigen::Index classes, const char *field) {
        if (label < 0 || label >= classes)
            throw std::out_of_range(std::string(field) + " label " + std::to_string(label) + " outside 0.." +
                                    std::to_string(classes - 1));
    };
    double loss = 0.0;
    for (Eigen::Index r = 0; r < rbs; ++r) {
        const auto &lab = labels[static_cast<std::size_t>(r)];
        check(lab.ri - 1, logits.ri.cols(), "ri");
        check(lab.cqi1, logits.cqi1.cols(), "cqi1");
        check(lab.cqi2, logits.cqi2.cols(), "cqi2");
        check(lab.pmi, logits.pmi.cols(), "pmi");
        if (grad) {
            Eigen::RowVectorXd g;
            g.resize(logits.ri.cols());
            loss += nn::cross_entropy(logits.ri.row(r), lab.ri - 1, g);
            grad->ri.row(r) = g;
            g.resize(kNumCqi);
            loss += nn::cross_entropy(logits.cqi1.row(r), lab.cqi1, g);
            grad->cqi1.row(r) = g;
            loss += nn::cross_entropy(logits.cqi2.row(r), lab.cqi2, g);
            grad->cqi2.row(r) = g;
            g.resize(logits.pmi.cols());
            loss += nn::cross_entropy(logits.pmi.row(r), lab.pmi, g);
            grad->pmi.row(r) = g;
        } else {
            loss += nn::cross_entropy(logits.ri.row(r), lab.ri - 1) + nn::cross_entropy(logits.cqi1.row(r), lab.cqi1) +
                    nn::cross_entropy(logits.cqi2.row(r), lab.cqi2) + nn::cross_entropy(logits.pmi.row(r), lab.pmi);
        }
    }
    return loss;
}

void TrainParams::validate() const
{
    if (!(learning_rate > 0.0))
        throw ConfigError("learning_rate must be positive");
    if (batch_size <= 0 || epochs < 0)
        throw ConfigError("batch_size must be positive and epochs nonnegative");
    if (optimizer != "sgd" && optimizer != "adam")
        throw ConfigError("optimizer must be \"sgd\" or \"adam\", got \"" + optimizer + "\"");
    if (!(beta1 >= 0.0 && beta1 < 1.0 && beta2 >= 0.0 && beta2 < 1.0 && epsilon > 0.0))
        throw ConfigError("invalid Adam moment parameters");
    if (target_loss < 0.0)
        throw ConfigError("target_loss must be nonnegative");
}

double mean_loss(LqtnModel &model, std::span<const LqtnSample> samples)
{
    if (samples.empty())
        throw std::invalid_argument("cannot evaluate the loss of an empty sample set");
    double total = 0.0;
    for (const auto &s : samples)
        total += lqtn_loss(model.forward(s.tokens), s.labels);
    return total / static_cast<double>(samples.size());
}

TrainResult lqtn_train(LqtnModel &model, std::span<const LqtnSample> samples, const TrainParams &hp)
{
    hp.validate();
    if (samples.empty())
        throw std::invalid_argument("cannot train on an empty dataset");
    TrainResult result;
    result.initial_loss = mean_loss(model, samples);

    auto params = model.params();
    for (auto *p : params) {
        p->m1.setZero();
        p->m2.setZero();
    }
    Rng rng(mix_seed(hp.seed, 0x7261));
    std::vector<std::size_t> order(samples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    long step = 0;
    LqtnLogits grad;
    for (int epoch = 0; epoch < hp.epochs; ++epoch) {
        rng.shuffle(order.begin(), order.end());
        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(hp.batch_size)) {
            const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(hp.batch_size));
            model.zero_grad();
            for (std::size_t i = start; i < end; ++i) {
                const auto &s = samples[order[i]];
                total += lqtn_loss(model.forward(s.tokens), s.labels, &grad);
                model.backward(grad);
            }
            const double scale = 1.0 / static_cast<double>(end - start);
            ++step;
            for (auto *p : params) {
                p->grad *= scale;
                if (hp.optimizer == "sgd") {
                    p->value -= hp.learning_rate * p->grad;
                    continue;
                }
                p->m1 = hp.beta1 * p->m1 + (1.0 - hp.beta1) * p->grad;
                p->m2 = hp.beta2 * p->m2 + (1.0 - hp.beta2) * p->grad.cwiseAbs2();
                const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(step));
                const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(step));
                p->value.array() -=
                    hp.learning_rate * (p->m1.array() / c1) / ((p->m2.array() / c2).sqrt() + hp.epsilon);
            }
        }
        result.loss_trace.push_back(total / static_cast<double>(samples.size()));
        if (hp.target_loss > 0.0 && result.loss_trace.back() <= hp.target_loss)
            break;
    }
    return result;
}

void save_checkpoint(LqtnModel &model, const std::string &stem, const nlohmann::json &extra)
{
    static_assert(std::endian::native == std::endian::little, "checkpoint format assumes little-endian doubles");
    const auto params = model.params();
    nlohmann::json manifest;
    manifest["format"] = "fdran-lqtn-checkpoint-v1";
    manifest["config"] = model.config();
    manifest["seed"] = model.config().seed;
    manifest["parameter_count"] = nn::count_parameters(params);
    manifest["memory_mb"] = model_memory_mb(nn::count_parameters(params));
    std::ofstream bin(stem + ".bin", std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot write " + stem + ".bin");
    bin.write(kMagic, sizeof kMagic);
    std::uint64_t offset = 0;
    nlohmann::json tensors = nlohmann::json::array();
    for (const auto *p : params) {
        tensors.push_back({{"name", p->name}, {"shape", {p->value.rows(), p->value.cols()}}, {"offset", offset}});
        // column-major, as Eigen stores it
        bin.write(reinterpret_cast<const char *>(p->value.data()),
                  static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p->value.size())));
        offset += static_cast<std::uint64_t>(p->value.size());
    }
    manifest["tensors"] = tensors;
    if (!extra.is_null())
        manifest["extra"] = extra;
    std::ofstream js(stem + ".json");
    if (!js)
        throw std::runtime_error("cannot write " + stem + ".json");
    js << manifest.dump(2) << '\n';
}

LqtnModel load_checkpoint(const std::string &stem)
{
    std::ifstream js(stem + ".json");
    if (!js)
        throw std::runtime_error("cannot read " + stem + ".json");
    const auto manifest = nlohmann::json::parse(js);
    LqtnModel model(manifest.at("config").get<LqtnConfig>());
    std::ifstream bin(stem + ".bin", std::ios::binary);
    if (!bin)
        throw std::runtime_error("cannot read " + stem + ".bin");
    char magic[sizeof kMagic];
    bin.read(magic, sizeof magic);
    if (!bin || std::memcmp(magic, kMagic, sizeof kMagic) != 0)
        throw std::runtime_error(stem + ".bin is not an LQTN checkpoint");
    const auto &tensors = manifest.at("tensors");
    auto params = model.params();
    if (tensors.size() != params.size())
        throw std::runtime_error("checkpoint tensor count does not match the configured model");
    for (std::size_t i = 0; i < params.size(); ++i) {
        auto *p = params[i];
        const auto &t = tensors[i];
        if (t.at("name").get<std::string>() != p->name || t.at("shape")[0].get<Eigen::Index>() != p->value.rows() ||
            t.at("shape")[1].get<Eigen::Index>() != p->value.cols())
            throw std::runtime_error("checkpoint tensor " + t.at("name").get<std::string>() + " does not match " +
                                     p->name);
        bin.read(reinterpret_cast<char *>(p->value.data()),
                 static_cast<std::streamsize>(sizeof(double) * static_cast<std::size_t>(p->value.size())));
    }
    if (!bin)
        throw std::runtime_error(stem + ".bin is truncated");
    return model;
}

void to_json(nlohmann::json &j, const LqtnConfig &c)
{
    j = {{"embed_dim", c.embed_dim},
         {"num_heads", c.num_heads},
         {"ff_dim", c.ff_dim},
         {"rb_count", c.rb_count},
         {"max_rank", c.max_rank},
         {"num_pmi", c.num_pmi},
         {"bounds_min", {c.bounds_min.x(), c.bounds_min.y(), c.bounds_min.z()}},
         {"bounds_max", {c.bounds_max.x(), c.bounds_max.y(), c.bounds_max.z()}},
         {"seed", c.seed}};
}

void from_json(const nlohmann::json &j, LqtnConfig &c)
{
    c.embed_dim = j.value("embed_dim", c.embed_dim);
    c.num_heads = j.value("num_heads", c.num_heads);
    c.ff_dim = j.value("ff_dim", c.ff_dim);
    c.rb_count = j.value("rb_count", c.rb_count);
    c.max_rank = j.value("max_rank", c.max_rank);
    c.num_pmi = j.value("num_pmi", c.num_pmi);
    auto vec = [](const nlohmann::json &a) {
        if (!a.is_array() || a.size() != 3)
            throw ConfigError("expected a 3-element bounds array");
        return Vec3(a[0].get<double>(), a[1].get<double>(), a[2].get<double>());
    };
    if (j.contains("bounds_min"))
        c.bounds_min = vec(j.at("bounds_min"));
    if (j.contains("bounds_max"))
        c.bounds_max = vec(j.at("bounds_max"));
    c.seed = j.value("seed", c.seed);
}

void to_json(nlohmann::json &j, const TrainParams &p)
{
    j = {{"learning_rate", p.learning_rate}, {"batch_size", p.batch_size}, {"epochs", p.epochs},
         {"seed", p.seed},                   {"optimizer", p.optimizer},   {"beta1", p.beta1},
         {"beta2", p.beta2},                 {"epsilon", p.epsilon},       {"target_loss", p.target_loss}};
}

void from_json(const nlohmann::json &j, TrainParams &p)
{
    p.learning_rate = j.value("learning_rate", p.learning_rate);
    p.batch_size = j.value("batch_size", p.batch_size);
    p.epochs = j.value("epochs", p.epochs);
    p.seed = j.value("seed", p.seed);
    p.optimizer = j.value("optimizer", p.optimizer);
    p.beta1 = j.value("beta1", p.beta1);
    p.beta2 = j.value("beta2", p.beta2);
    p.epsilon = j.value("epsilon", p.epsilon);
    p.target_loss = j.value("target_loss", p.target_loss);
}

} // namespace fdran
