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

#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "fdran/csi_map.hpp"
#include "fdran/errors.hpp"
#include "fdran/esm.hpp"
#include "fdran/link.hpp"
#include "fdran/lqtn.hpp"
#include "fdran/nn.hpp"
#include "gradcheck.hpp"

using namespace fdran;

namespace {

nn::Mat random_mat(Rng &rng, int r, int c)
{
    nn::Mat m(r, c);
    for (Eigen::Index i = 0; i < m.size(); ++i)
        m.data()[i] = rng.normal();
    return m;
}

std::vector<CsiReport> some_labels(int rb, int num_pmi)
{
    std::vector<CsiReport> out;
    for (int i = 0; i < rb; ++i)
        out.push_back({1 + i % 4, (3 * i + 2) % 16, (5 * i + 1) % 16, (7 * i) % num_pmi});
    return out;
}

} // namespace

TEST_CASE("attention weights are probability rows")
{
    Rng rng(1);
    nn::MultiHeadAttention mha("a", 8, 2);
    mha.init(rng);
    const auto xq = random_mat(rng, 5, 8);
    const auto xkv = random_mat(rng, 3, 8);
    mha.forward(xq, xkv);
    for (int h = 0; h < 2; ++h) {
        const auto &a = mha.attention(h);
        CHECK(a.rows() == 5);
        CHECK(a.cols() == 3);
        CHECK((a.array() >= 0.0).all());
        for (int r = 0; r < 5; ++r)
            CHECK(std::abs(a.row(r).sum() - 1.0) < 1e-12);
    }
}

TEST_CASE("single key attention returns the projected value")
{
    Rng rng(2);
    nn::MultiHeadAttention mha("a", 4, 2);
    mha.init(rng);
    const auto xq = random_mat(rng, 3, 4);
    const auto xkv = random_mat(rng, 1, 4);
    const auto y = mha.forward(xq, xkv);
    nn::Linear wv = mha.wv;
    nn::Linear wo = mha.wo;
    const nn::Mat expected = wo.forward(wv.forward(xkv));
    for (int r = 0; r < 3; ++r)
        CHECK((y.row(r) - expected.row(0)).norm() < 1e-12);
}

TEST_CASE("attention is invariant to permuting key/value rows")
{
    Rng rng(3);
    nn::MultiHeadAttention mha("a", 8, 4);
    mha.init(rng);
    const auto xq = random_mat(rng, 4, 8);
    const auto xkv = random_mat(rng, 5, 8);
    const auto y1 = mha.forward(xq, xkv);
    Eigen::PermutationMatrix<Eigen::Dynamic> perm(5);
    perm.indices() << 3, 0, 4, 1, 2;
    const nn::Mat shuffled = perm * xkv;
    const auto y2 = mha.forward(xq, shuffled);
    CHECK((y1 - y2).norm() < 1e-12);
}

TEST_CASE("layer gradients match finite differences")
{
    Rng rng(4);
    nn::LayerNorm ln("ln", 6);
    ln.gamma.value = random_mat(rng, 1, 6);
    ln.beta.value = random_mat(rng, 1, 6);
    const auto x = random_mat(rng, 3, 6);
    const auto w = random_mat(rng, 3, 6);
    auto f = [&](const nn::Mat &in) { return ln.forward(in).cwiseProduct(w).sum(); };
    f(x);
    const nn::Mat dx = ln.backward(w);
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        nn::Mat xp = x, xm = x;
        xp.data()[i] += 1e-6;
        xm.data()[i] -= 1e-6;
        CHECK(dx.data()[i] == doctest::Approx((f(xp) - f(xm)) / 2e-6).epsilon(1e-6));
    }

    nn::Gelu g;
    const auto y = g.forward(x);
    CHECK(y(0, 0) == doctest::Approx(0.5 * x(0, 0) * (1.0 + std::erf(x(0, 0) / std::sqrt(2.0)))).epsilon(1e-3));
}

TEST_CASE("cross entropy")
{
    Eigen::RowVectorXd logits = Eigen::RowVectorXd::Zero(5);
    CHECK(nn::cross_entropy(logits, 2) == doctest::Approx(std::log(5.0)));
    logits(2) = 100.0;
    CHECK(nn::cross_entropy(logits, 2) < 1e-30);
    Eigen::RowVectorXd grad(5);
    logits.setZero();
    nn::cross_entropy(logits, 1, grad);
    CHECK(grad.sum() == doctest::Approx(0.0).epsilon(1e-15));
    CHECK(grad(1) == doctest::Approx(0.2 - 1.0));
}

TEST_CASE("LQTN forward shapes and determinism")
{
    LqtnModel model(fdran::testing::tiny_config());
    const Vec3 bs(10, 20, 30), ue(100, 50, 1.5);
    const auto a = model.forward(bs, ue);
    const auto b = model.forward(bs, ue);
    CHECK(a.ri.rows() == 3);
    CHECK(a.ri.cols() == 4);
    CHECK(a.cqi1.cols() == 16);
    CHECK(a.cqi2.cols() == 16);
    CHECK(a.pmi.cols() == 12);
    CHECK((a.pmi - b.pmi).norm() == 0.0);
    CHECK_THROWS(model.forward(Vec3(std::nan(""), 0, 0), ue));
}

TEST_CASE("uniform logits give sum of log class counts")
{
    const auto cfg = fdran::testing::tiny_config();
    LqtnLogits l{nn::Mat::Zero(3, 4), nn::Mat::Zero(3, 16), nn::Mat::Zero(3, 16), nn::Mat::Zero(3, 12)};
    const double per_rb = std::log(4.0) + 2.0 * std::log(16.0) + std::log(12.0);
    CHECK(lqtn_loss(l, some_labels(3, cfg.num_pmi)) == doctest::Approx(3.0 * per_rb).epsilon(1e-12));
    CHECK_THROWS(lqtn_loss(l, some_labels(2, cfg.num_pmi)));
    auto bad = some_labels(3, cfg.num_pmi);
    bad[0].pmi = 12;
    CHECK_THROWS(lqtn_loss(l, bad));
}

TEST_CASE("zeroed cross-attention values remove the UE dependence")
{
    LqtnModel model(fdran::testing::tiny_config());
    for (int l = 0; l < LqtnConfig::kDecoderLayers; ++l) {
        model.cross_attention(l).wv.w.value.setZero();
        model.cross_attention(l).wv.b.value.setZero();
    }
    const Vec3 bs(10, 20, 30);
    const auto a = model.forward(bs, Vec3(100, 50, 1.5));
    const auto b = model.forward(bs, Vec3(300, 250, 1.5));
    CHECK((a.pmi - b.pmi).norm() == 0.0);
    CHECK((a.ri - b.ri).norm() == 0.0);
}

TEST_CASE("LQTN gradient check on the tiny model")
{
    LqtnModel model(fdran::testing::tiny_config());
    const auto tokens = model.features(Vec3(50, 60, 25), Vec3(210, 140, 1.5));
    for (const auto &e : fdran::testing::gradient_check(model, tokens, some_labels(3, 12))) {
        INFO(e.name);
        CHECK(e.ok(1e-4, fdran::testing::kVanishingGradient));
        if (e.name.find(".k.b") == std::string::npos)
            CHECK_FALSE(e.vanishing);
    }
}

TEST_CASE("parameter count and memory estimate")
{
    const auto cfg = fdran::testing::tiny_config();
    LqtnModel model(cfg);
    const std::size_t d = 8, f = 16, rb = 3;
    auto lin = [](std::size_t i, std::size_t o) { return i * o + o; };
    std::size_t n = lin(3, d) + lin(d, d) + 2 * d;              // input projection, token types
    n += 4 * lin(d, d) + 2 * d + lin(d, f) + lin(f, d) + 2 * d; // encoder
    n += rb * d;                                                // queries
    n += 2 * (8 * lin(d, d) + 6 * d + lin(d, f) + lin(f, d));   // decoder
    for (std::size_t c : {4u, 16u, 16u, 12u})
        n += lin(d, d) + lin(d, c);
    CHECK(model.parameter_count() == n);
    CHECK(analytic_parameter_count(cfg) == n);
    CHECK(model_memory_mb(1048576) == 4.0);
    CHECK(model_memory_mb(0) == 0.0);
    const auto full = LqtnConfig::full_scale(160);
    CHECK(full.embed_dim == 1024);
    CHECK(analytic_parameter_count(full) > 10'000'000);
}

TEST_CASE("training is deterministic and can memorize one sample")
{
    auto cfg = fdran::testing::tiny_config();
    cfg.embed_dim = 16;
    cfg.ff_dim = 32;
    std::vector<LqtnSample> one{{LqtnModel(cfg).features(Vec3(5, 5, 30), Vec3(90, 40, 1.5)), some_labels(3, 12)}};
    TrainParams hp;
    hp.epochs = 400;
    hp.batch_size = 1;
    hp.learning_rate = 0.01;
    hp.target_loss = 0.005;
    LqtnModel a(cfg), b(cfg);
    const auto ra = lqtn_train(a, one, hp);
    const auto rb = lqtn_train(b, one, hp);
    CHECK(ra.loss_trace == rb.loss_trace);
    CHECK(mean_loss(a, one) < 0.01);

    TrainParams sgd = hp;
    sgd.optimizer = "sgd";
    sgd.learning_rate = 0.05;
    sgd.epochs = 30;
    sgd.target_loss = 0.0;
    LqtnModel c(cfg);
    const auto rc = lqtn_train(c, one, sgd);
    CHECK(rc.loss_trace.back() < rc.initial_loss);

    CHECK_THROWS(lqtn_train(c, std::vector<LqtnSample>{}, hp));
}

TEST_CASE("checkpoint round trip")
{
    LqtnModel model(fdran::testing::tiny_config());
    const auto stem = (std::filesystem::temp_directory_path() / "fdran_unit_ckpt").string();
    save_checkpoint(model, stem);
    auto loaded = load_checkpoint(stem);
    const Vec3 bs(1, 2, 3), ue(40, 50, 1.5);
    CHECK((model.forward(bs, ue).pmi - loaded.forward(bs, ue).pmi).norm() == 0.0);
    CHECK(loaded.parameter_count() == model.parameter_count());
}

namespace {

CsiDataset three_points()
{
    CsiDataset ds;
    auto rec = [&](double x, CsiReport r) {
        CsiRecord c;
        c.bs_id = 0;
        c.ue.position = Vec3(x, 0.0, 1.5);
        c.labels = {r};
        ds.records.push_back(c);
    };
    rec(0.0, {2, 9, 7, 40});
    rec(1.0, {2, 9, 4, 41});
    rec(3.0, {1, 5, 5, 3});
    return ds;
}

} // namespace

TEST_CASE("k-nearest-neighbour prediction")
{
    const auto ds = three_points();
    Geolocation q;
    q.position = Vec3(1.0, 0.0, 1.5);
    CHECK(knn_predict(ds, 0, q, 1)[0] == CsiReport{2, 9, 4, 41});

    // query at x=0.9: distances 0.9, 0.1, 2.1 -> order 1, 0, 2
    q.position = Vec3(0.9, 0.0, 1.5);
    const auto r = knn_predict(ds, 0, q, 3)[0];
    CHECK(r.ri == 2);         // 2 votes of 3
    CHECK(r.cqi1 == 9);       // 2 votes of 3
    CHECK(r.cqi2 == 4);       // three-way tie, nearest record wins
    CHECK(r.pmi == 41);       // pmi votes among rank-2 neighbours tie, nearest wins
    CHECK_THROWS(knn_predict(ds, 0, q, 4));
    CHECK_THROWS(knn_predict(ds, 0, q, 0));
}

TEST_CASE("dataset JSON-lines round trip and split")
{
    auto ds = three_points();
    ds.records[2].split = "test";
    std::stringstream ss;
    write_dataset_jsonl(ds, ss);
    const auto back = read_dataset_jsonl(ss);
    REQUIRE(back.records.size() == 3);
    CHECK(back.records[1].labels[0] == ds.records[1].labels[0]);
    CHECK(back.split("test").records.size() == 1);
    CHECK(back.split("train").records.size() == 2);
}

namespace {

class FixedPredictor : public CsiPredictor
{
  public:
    explicit FixedPredictor(CsiReport r) : r_(r) {}
    std::vector<CsiReport> predict(int, const Geolocation &) const override { return {r_}; }
    std::string name() const override { return "fixed"; }

  private:
    CsiReport r_;
};

class LookupPredictor : public CsiPredictor
{
  public:
    explicit LookupPredictor(const CsiDataset &ds) : ds_(ds) {}
    std::vector<CsiReport> predict(int bs, const Geolocation &ue) const override
    {
        for (const auto &r : ds_.records)
            if (r.bs_id == bs && r.ue.position == ue.position)
                return r.labels;
        throw std::logic_error("unknown location");
    }
    std::string name() const override { return "lookup"; }

  private:
    const CsiDataset &ds_;
};

} // namespace

TEST_CASE("normalized MAE")
{
    const auto ds = three_points();
    const LookupPredictor exact(ds);
    const auto zero = evaluate_mae(exact, ds);
    for (double v : zero.normalized_mae)
        CHECK(v == 0.0);
    CHECK(zero.accuracy[0] == 1.0);

    // labels: ri {2,2,1}, cqi1 {9,9,5}, cqi2 {7,4,5}, pmi {40,41,3}
    const FixedPredictor constant({1, 5, 5, 3});
    const auto m = evaluate_mae(constant, ds);
    CHECK(m.normalized_mae[0] == doctest::Approx((1.0 + 1.0 + 0.0) / 3.0 / 1.0));
    CHECK(m.normalized_mae[1] == doctest::Approx((4.0 + 4.0 + 0.0) / 3.0 / 4.0));
    CHECK(m.normalized_mae[2] == doctest::Approx((2.0 + 1.0 + 0.0) / 3.0 / 3.0));
    CHECK(m.normalized_mae[3] == doctest::Approx((37.0 + 38.0 + 0.0) / 3.0 / 38.0));
    CHECK(m.accuracy[0] == doctest::Approx(1.0 / 3.0));
    CHECK(m.count == 3);
}

TEST_CASE("oracle predictor reproduces ground truth")
{
    const auto s = generate_scenario(ScenarioConfig{}, 7);
    const auto cbc = codebook_config_for(s, 0);
    const Codebook cb(cbc);
    const auto esm = default_esm_config();
    const OraclePredictor oracle(s, cbc, esm);
    const auto ues = sample_geolocations(s, 2, 5);
    for (const auto &ue : ues)
        CHECK(oracle.predict(2, ue) == compute_csi_reports(s, 2, ue, cb, esm));
}

TEST_CASE("decoded LQTN reports are valid for the codebook")
{
    const auto s = generate_scenario(ScenarioConfig{}, 7);
    const Codebook cb(codebook_config_for(s, 0));
    const auto cfg = lqtn_config_for(s, cb, 8, 2, 16, 3);
    LqtnPredictor p(LqtnModel(cfg), s, cb);
    for (const auto &ue : sample_geolocations(s, 5, 8)) {
        const auto reps = p.predict(1, ue);
        CHECK(reps.size() == 8);
        for (const auto &r : reps) {
            CHECK(r.ri >= 1);
            CHECK(r.ri <= cb.max_rank());
            CHECK(r.pmi >= cb.rank_offset(r.ri));
            CHECK(r.pmi < cb.rank_offset(r.ri) + cb.rank_count(r.ri));
            CHECK(r.cqi1 >= 0);
            CHECK(r.cqi1 < 16);
            if (r.ri == 1)
                CHECK(r.cqi2 == r.cqi1);
        }
    }
}
