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

#include "doctest.h"
#include "fdran/channel.hpp"
#include "fdran/codebook.hpp"
#include "fdran/errors.hpp"
#include "fdran/scenario.hpp"

using namespace fdran;

namespace {

// Open square with one BS in the corner and a single tall building in the middle.
Scenario box_scenario()
{
    ScenarioConfig cfg;
    cfg.area = {100.0, 100.0};
    cfg.num_bs = 1;
    cfg.bs_positions = {Vec3(5.0, 50.0, 10.0)};
    cfg.num_buildings = 0;
    cfg.num_scatterers = 0;
    Scenario s = generate_scenario(cfg, 1);
    Building b;
    b.min = Vec3(40.0, 40.0, 0.0);
    b.max = Vec3(60.0, 60.0, 40.0);
    s.buildings.push_back(b);
    return s;
}

} // namespace

TEST_CASE("scenario generation is deterministic per seed")
{
    const ScenarioConfig cfg;
    const auto a = generate_scenario(cfg, 7);
    const auto b = generate_scenario(cfg, 7);
    const auto c = generate_scenario(cfg, 8);
    REQUIRE(a.bs_list.size() == b.bs_list.size());
    for (std::size_t i = 0; i < a.bs_list.size(); ++i)
        CHECK(a.bs_list[i].position == b.bs_list[i].position);
    REQUIRE(a.scatterers.size() == b.scatterers.size());
    for (std::size_t i = 0; i < a.scatterers.size(); ++i)
        CHECK(a.scatterers[i].position == b.scatterers[i].position);
    bool differs = false;
    for (std::size_t i = 0; i < a.scatterers.size(); ++i)
        differs = differs || a.scatterers[i].position != c.scatterers[i].position;
    CHECK(differs);
    for (const auto &bs : a.bs_list)
        CHECK(a.area.contains(bs.position.x(), bs.position.y()));
    CHECK(a.noise_power > 0.0);
}

TEST_CASE("invalid scenario geometry is rejected")
{
    ScenarioConfig cfg;
    cfg.bs_positions = {Vec3(1000.0, 0.0, 30.0)};
    cfg.num_bs = 1;
    CHECK_THROWS_AS(generate_scenario(cfg, 1), ConfigError);
    ScenarioConfig bw;
    bw.bandwidth_hz = 0.0;
    CHECK_THROWS_AS(generate_scenario(bw, 1), ConfigError);
}

TEST_CASE("channel matrix is deterministic and shaped N_R x N_T")
{
    const auto s = generate_scenario(ScenarioConfig{}, 7);
    Geolocation ue;
    ue.position = Vec3(123.0, 77.0, kUeHeight);
    const auto h1 = channel_matrix(s, 0, ue, 3, 0);
    const auto h2 = channel_matrix(s, 0, ue, 3, 0);
    CHECK(h1.entries.rows() == s.num_rx_antennas);
    CHECK(h1.entries.cols() == s.bs_list[0].num_tx_antennas);
    CHECK((h1.entries - h2.entries).norm() == 0.0);
    CHECK(h1.entries.allFinite());
}

TEST_CASE("channel varies smoothly with a 1 mm displacement")
{
    const auto s = generate_scenario(ScenarioConfig{}, 7);
    Geolocation a;
    a.position = Vec3(200.0, 150.0, kUeHeight);
    Geolocation b = a;
    b.position.x() += 1e-3;
    for (int k = 0; k < 4; ++k) {
        const auto ha = channel_matrix(s, 1, a, k, 0).entries;
        const auto hb = channel_matrix(s, 1, b, k, 0).entries;
        // 1 mm is about 1/86 of a wavelength at 3.5 GHz
        CHECK((ha - hb).norm() / ha.norm() < 0.2);
    }
}

TEST_CASE("out-of-area geolocation raises")
{
    const auto s = generate_scenario(ScenarioConfig{}, 7);
    Geolocation ue;
    ue.position = Vec3(-5.0, 10.0, kUeHeight);
    CHECK_THROWS_AS(channel_matrix(s, 0, ue, 0, 0), OutOfAreaError);
}

TEST_CASE("building between BS and UE attenuates the direct ray")
{
    const auto s = box_scenario();
    Geolocation hidden;
    hidden.position = Vec3(90.0, 50.0, kUeHeight);
    Geolocation clear;
    clear.position = Vec3(90.0, 90.0, kUeHeight);
    CHECK(blockage(s, 0, hidden).los < 1.0);
    CHECK(blockage(s, 0, clear).los == 1.0);
    const double p_hidden = channel_matrix(s, 0, hidden, 0, 0).entries.squaredNorm();
    const double p_clear = channel_matrix(s, 0, clear, 0, 0).entries.squaredNorm();
    CHECK(p_hidden < 0.1 * p_clear);
}

TEST_CASE("segment/box intersection")
{
    Building b;
    b.min = Vec3(0, 0, 0);
    b.max = Vec3(1, 1, 1);
    CHECK(segment_intersects_box(Vec3(-1, 0.5, 0.5), Vec3(2, 0.5, 0.5), b));
    CHECK_FALSE(segment_intersects_box(Vec3(-1, 2, 0.5), Vec3(2, 2, 0.5), b));
    CHECK_FALSE(segment_intersects_box(Vec3(-1, 0.5, 0.5), Vec3(-0.5, 0.5, 0.5), b));
}

TEST_CASE("mobility advance stays in area")
{
    const Area area{100.0, 50.0};
    Geolocation g;
    g.position = Vec3(99.0, 25.0, kUeHeight);
    const auto moved = advance(g, area, 120.0, 1.0, 0.0);
    CHECK(area.contains(moved.position.x(), moved.position.y()));
    const auto still = advance(g, area, 0.0, 1.0, 0.0);
    CHECK((still.position - g.position).norm() == 0.0);
}

TEST_CASE("dft beam")
{
    const auto b0 = dft_beam(4, 0, 1);
    for (int m = 0; m < 4; ++m)
        CHECK(std::abs(b0(m) - cd(0.5, 0.0)) < 1e-15);
    const auto scalar = dft_beam(1, 3, 4);
    CHECK(std::abs(scalar(0) - cd(1.0, 0.0)) < 1e-15);
    for (int i = 0; i < 8; ++i) {
        const auto a = dft_beam(4, i, 2);
        const auto b = dft_beam(4, i + 2, 2);
        CHECK(std::abs(a.norm() - 1.0) < 1e-12);
        CHECK(std::abs(a.dot(b)) < 1e-12);
    }
}

TEST_CASE("type-I codebook enumeration")
{
    const CodebookConfig cfg; // N1=2, N2=1, O1=4, O2=1, 4 ports
    const Codebook cb(cfg);
    // i11 in 0..7, i12 = 0, i2 in 0..3
    CHECK(cb.rank_count(1) == 2 * 4 * 1 * 4);
    CHECK(cb.rank_offset(1) == 0);
    int total = 0;
    for (int r = 1; r <= cfg.max_rank; ++r)
        total += cb.rank_count(r);
    CHECK(static_cast<std::size_t>(total) == cb.size());

    PrecoderIndex prev{0, 0, 0, 0, 0};
    for (std::size_t f = 0; f < cb.size(); ++f) {
        const auto &p = cb[f];
        CHECK(p.flat_index == static_cast<int>(f));
        CHECK(cb.flat_index(p.index) == p.flat_index);
        CHECK(std::abs(p.matrix.norm() - 1.0) < 1e-12);
        CHECK(p.matrix.rows() == cfg.num_tx_antennas);
        CHECK(p.matrix.cols() == p.rank());
        // columns mutually orthogonal
        const CMatrix gram = p.matrix.adjoint() * p.matrix;
        for (int i = 0; i < p.rank(); ++i)
            for (int j = 0; j < p.rank(); ++j)
                if (i != j)
                    CHECK(std::abs(gram(i, j)) < 1e-12);
        // rank-major, then i11, i12, i13, i2
        const auto key = [](const PrecoderIndex &x) { return std::tuple(x.rank, x.i11, x.i12, x.i13, x.i2); };
        if (f > 0)
            CHECK(key(prev) < key(p.index));
        prev = p.index;
    }
    CHECK(precoder_by_pmi(cb, 1, 0).flat_index == 0);
    CHECK_THROWS(precoder_by_pmi(cb, 1, cb.rank_count(1)));
    CHECK_THROWS(precoder_by_pmi(cb, 1, -1));
}

TEST_CASE("codebook config inconsistent with N_T is rejected")
{
    CodebookConfig cfg;
    cfg.num_tx_antennas = 6;
    CHECK_THROWS_AS(Codebook{cfg}, ConfigError);
    CodebookConfig o;
    o.o1 = 0;
    CHECK_THROWS_AS(Codebook{o}, ConfigError);
}
