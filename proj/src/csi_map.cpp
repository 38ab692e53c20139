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

#include "fdran/csi_map.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>

#include "fdran/errors.hpp"
#include "fdran/link.hpp"

namespace fdran {

namespace {

std::size_t bs_index(const Scenario &s, int bs_id)
{
    for (std::size_t i = 0; i < s.bs_list.size(); ++i)
        if (s.bs_list[i].id == bs_id)
            return i;
    throw std::out_of_range("no BS with id " + std::to_string(bs_id));
}

// Most frequent value; among equally frequent values the one seen first (nearest) wins.
int vote(const std::vector<int> &values_by_distance)
{
    std::map<int, int> counts;
    int best_count = 0;
    for (int v : values_by_distance)
        best_count = std::max(best_count, ++counts[v]);
    for (int v : values_by_distance)
        if (counts[v] == best_count)
            return v;
    throw std::logic_error("vote over an empty list");
}

} // namespace

CsiDataset CsiDataset::split(const std::string &tag) const
{
    CsiDataset out;
    for (const auto &r : records)
        if (r.split == tag)
            out.records.push_back(r);
    return out;
}

void CsiDataset::validate(const Scenario &s) const
{
    for (const auto &r : records) {
        if (static_cast<int>(r.labels.size()) != s.bs(r.bs_id).rb_count)
            throw ConfigError("record for BS " + std::to_string(r.bs_id) + " has " + std::to_string(r.labels.size()) +
                              " labels, expected " + std::to_string(s.bs(r.bs_id).rb_count));
        if (r.split != "train" && r.split != "test")
            throw ConfigError("record split must be \"train\" or \"test\", got \"" + r.split + "\"");
    }
}

void to_json(nlohmann::json &j, const CsiRecord &r)
{
    j = {{"bs_id", r.bs_id}, {"ue_loc", r.ue}, {"labels", r.labels}, {"split", r.split}};
}

void from_json(const nlohmann::json &j, CsiRecord &r)
{
    r.bs_id = j.at("bs_id").get<int>();
    r.ue = j.at("ue_loc").get<Geolocation>();
    r.labels = j.at("labels").get<std::vector<CsiReport>>();
    r.split = j.value("split", std::string("train"));
}

void write_dataset_jsonl(const CsiDataset &ds, std::ostream &out)
{
    for (const auto &r : ds.records)
        out << nlohmann::json(r).dump() << '\n';
}

CsiDataset read_dataset_jsonl(std::istream &in)
{
    CsiDataset ds;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            ds.records.push_back(nlohmann::json::parse(line).get<CsiRecord>());
        } catch (const nlohmann::json::exception &e) {
            throw ConfigError("dataset line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return ds;
}

OraclePredictor::OraclePredictor(Scenario s, const CodebookConfig &cb_cfg, EsmConfig esm)
    : scenario_(std::move(s)), esm_(std::move(esm))
{
    for (const auto &b : scenario_.bs_list)
        codebooks_.emplace_back(
            codebook_config_for(scenario_, b.id, cb_cfg.o1, cb_cfg.o2, cb_cfg.max_rank));
}

std::vector<CsiReport> OraclePredictor::predict(int bs_id, const Geolocation &ue) const
{
    return compute_csi_reports(scenario_, bs_id, ue, codebooks_[bs_index(scenario_, bs_id)], esm_);
}

std::vector<CsiReport> knn_predict(const CsiDataset &ds, int bs_id, const Geolocation &ue, int k)
{
    std::vector<const CsiRecord *> pool;
    for (const auto &r : ds.records)
        if (r.bs_id == bs_id)
            pool.push_back(&r);
    if (k <= 0)
        throw std::invalid_argument("k must be positive");
    if (static_cast<std::size_t>(k) > pool.size())
        throw std::invalid_argument("k = " + std::to_string(k) + " exceeds the " + std::to_string(pool.size()) +
                                    " training records of BS " + std::to_string(bs_id));
    std::vector<std::pair<double, std::size_t>> dist(pool.size());
    for (std::size_t i = 0; i < pool.size(); ++i)
        dist[i] = {(pool[i]->ue.position - ue.position).squaredNorm(), i};
    std::partial_sort(dist.begin(), dist.begin() + k, dist.end());
    std::vector<const CsiRecord *> nearest;
    for (int i = 0; i < k; ++i)
        nearest.push_back(pool[dist[static_cast<std::size_t>(i)].second]);

    const std::size_t rbs = nearest.front()->labels.size();
    std::vector<CsiReport> out(rbs);
    std::vector<int> vals;
    for (std::size_t rb = 0; rb < rbs; ++rb) {
        auto field = [&](auto get, auto keep) {
            vals.clear();
            for (const auto *r : nearest)
                if (keep(r->labels.at(rb)))
                    vals.push_back(get(r->labels.at(rb)));
            return vote(vals);
        };
        auto all = [](const CsiReport &) { return true; };
        auto &rep = out[rb];
        rep.ri = field([](const CsiReport &c) { return c.ri; }, all);
        rep.cqi1 = field([](const CsiReport &c) { return c.cqi1; }, all);
        rep.cqi2 = rep.ri == 1 ? rep.cqi1 : field([](const CsiReport &c) { return c.cqi2; }, all);
        const int ri = rep.ri;
        rep.pmi = field([](const CsiReport &c) { return c.pmi; }, [ri](const CsiReport &c) { return c.ri == ri; });
    }
    return out;
}

KnnPredictor::KnnPredictor(CsiDataset train, int k) : train_(std::move(train)), k_(k)
{
    if (k_ <= 0)
        throw ConfigError("k must be positive");
}

std::vector<CsiReport> KnnPredictor::predict(int bs_id, const Geolocation &ue) const
{
    return knn_predict(train_, bs_id, ue, k_);
}

LqtnConfig lqtn_config_for(const Scenario &s, const Codebook &cb, int embed_dim, int num_heads, int ff_dim,
                           std::uint64_t seed)
{
    LqtnConfig c;
    c.embed_dim = embed_dim;
    c.num_heads = num_heads;
    c.ff_dim = ff_dim;
    c.rb_count = s.bs_list.front().rb_count;
    for (const auto &b : s.bs_list)
        if (b.rb_count != c.rb_count)
            throw ConfigError("a shared LQTN needs every BS to have the same rb_count");
    c.max_rank = cb.max_rank();
    c.num_pmi = static_cast<int>(cb.size());
    double top = kUeHeight;
    for (const auto &b : s.bs_list)
        top = std::max(top, b.position.z());
    c.bounds_min = Vec3::Zero();
    c.bounds_max = Vec3(s.area.width, s.area.height, top);
    c.seed = seed;
    c.validate();
    return c;
}

CsiReport decode_report(const LqtnLogits &logits, int row, const Codebook &cb)
{
    CsiReport r;
    Eigen::Index idx = 0;
    logits.ri.row(row).maxCoeff(&idx);
    r.ri = static_cast<int>(idx) + 1;
    logits.cqi1.row(row).maxCoeff(&idx);
    r.cqi1 = static_cast<int>(idx);
    if (r.ri == 1) {
        r.cqi2 = r.cqi1;
    } else {
        logits.cqi2.row(row).maxCoeff(&idx);
        r.cqi2 = static_cast<int>(idx);
    }
    const int off = cb.rank_offset(r.ri);
    logits.pmi.row(row).segment(off, cb.rank_count(r.ri)).maxCoeff(&idx);
    r.pmi = off + static_cast<int>(idx);
    return r;
}

std::vector<LqtnSample> make_samples(const CsiDataset &ds, const Scenario &s, const LqtnModel &model,
                                     std::optional<int> rb)
{
    std::vector<LqtnSample> out;
    out.reserve(ds.records.size());
    for (const auto &r : ds.records) {
        LqtnSample smp;
        smp.tokens = model.features(s.bs(r.bs_id).position, r.ue.position);
        if (rb)
            smp.labels = {r.labels.at(static_cast<std::size_t>(*rb))};
        else
            smp.labels = r.labels;
        out.push_back(std::move(smp));
    }
    return out;
}

TrainResult train_lqtn(LqtnModel &model, const CsiDataset &train, const Scenario &s, const TrainParams &hp)
{
    const auto samples = make_samples(train, s, model);
    return lqtn_train(model, samples, hp);
}

LqtnPredictor::LqtnPredictor(LqtnModel model, Scenario s, Codebook cb)
    : model_(std::move(model)), scenario_(std::move(s)), cb_(std::move(cb))
{
    if (model_.config().num_pmi != static_cast<int>(cb_.size()) || model_.config().max_rank != cb_.max_rank())
        throw ConfigError("LQTN heads do not match the codebook");
}

std::vector<CsiReport> LqtnPredictor::predict(int bs_id, const Geolocation &ue) const
{
    std::lock_guard lock(mutex_);
    const auto logits = model_.forward(scenario_.bs(bs_id).position, ue.position);
    std::vector<CsiReport> out;
    for (int rb = 0; rb < model_.config().rb_count; ++rb)
        out.push_back(decode_report(logits, rb, cb_));
    return out;
}

IndependentPerRbPredictor::IndependentPerRbPredictor(const LqtnConfig &shared, Scenario s, Codebook cb)
    : scenario_(std::move(s)), cb_(std::move(cb))
{
    for (int rb = 0; rb < shared.rb_count; ++rb) {
        LqtnConfig c = shared;
        c.rb_count = 1;
        c.seed = mix_seed(shared.seed, static_cast<std::uint64_t>(rb));
        models_.emplace_back(c);
    }
}

std::vector<TrainResult> IndependentPerRbPredictor::train(const CsiDataset &train, const TrainParams &hp)
{
    std::vector<TrainResult> out;
    for (std::size_t rb = 0; rb < models_.size(); ++rb) {
        const auto samples = make_samples(train, scenario_, models_[rb], static_cast<int>(rb));
        TrainParams p = hp;
        p.seed = mix_seed(hp.seed, rb);
        out.push_back(lqtn_train(models_[rb], samples, p));
    }
    return out;
}

std::vector<CsiReport> IndependentPerRbPredictor::predict(int bs_id, const Geolocation &ue) const
{
    std::lock_guard lock(mutex_);
    std::vector<CsiReport> out;
    for (auto &m : models_)
        out.push_back(decode_report(m.forward(scenario_.bs(bs_id).position, ue.position), 0, cb_));
    return out;
}

std::size_t IndependentPerRbPredictor::parameter_count()
{
    std::size_t n = 0;
    for (auto &m : models_)
        n += m.parameter_count();
    return n;
}

void IndependentPerRbPredictor::save(const std::string &prefix)
{
    for (std::size_t rb = 0; rb < models_.size(); ++rb)
        save_checkpoint(models_[rb], prefix + std::to_string(rb), {{"rb", rb}});
}

MaeReport evaluate_mae(const CsiPredictor &p, const CsiDataset &test)
{
    if (test.records.empty())
        throw std::invalid_argument("cannot evaluate on an empty test set");
    auto fields = [](const CsiReport &r) { return std::array<int, 4>{r.ri, r.cqi1, r.cqi2, r.pmi}; };
    std::array<int, 4> lo, hi;
    lo.fill(INT32_MAX);
    hi.fill(INT32_MIN);
    for (const auto &rec : test.records)
        for (const auto &l : rec.labels) {
            const auto f = fields(l);
            for (std::size_t i = 0; i < 4; ++i) {
                lo[i] = std::min(lo[i], f[i]);
                hi[i] = std::max(hi[i], f[i]);
            }
        }
    MaeReport rep;
    std::array<double, 4> abs_err{}, hits{};
    for (const auto &rec : test.records) {
        const auto pred = p.predict(rec.bs_id, rec.ue);
        if (pred.size() != rec.labels.size())
            throw std::logic_error(p.name() + " returned " + std::to_string(pred.size()) + " reports for " +
                                   std::to_string(rec.labels.size()) + " RBs");
        for (std::size_t rb = 0; rb < pred.size(); ++rb) {
            const auto a = fields(pred[rb]);
            const auto b = fields(rec.labels[rb]);
            for (std::size_t i = 0; i < 4; ++i) {
                abs_err[i] += std::abs(a[i] - b[i]);
                hits[i] += a[i] == b[i] ? 1.0 : 0.0;
            }
            ++rep.count;
        }
    }
    const auto n = static_cast<double>(rep.count);
    for (std::size_t i = 0; i < 4; ++i) {
        rep.label_range[i] = hi[i] - lo[i];
        const double range = rep.label_range[i] > 0 ? rep.label_range[i] : 1.0;
        rep.normalized_mae[i] = abs_err[i] / n / range;
        rep.accuracy[i] = hits[i] / n;
    }
    rep.mean_normalized_mae =
        std::accumulate(rep.normalized_mae.begin(), rep.normalized_mae.end(), 0.0) / 4.0;
    return rep;
}

void to_json(nlohmann::json &j, const MaeReport &r)
{
    j = nlohmann::json::object();
    for (std::size_t i = 0; i < 4; ++i)
        j[MaeReport::kFields[i]] = {{"normalized_mae", r.normalized_mae[i]},
                                    {"accuracy", r.accuracy[i]},
                                    {"label_range", r.label_range[i]}};
    j["mean_normalized_mae"] = r.mean_normalized_mae;
    j["count"] = r.count;
}

} // namespace fdran
