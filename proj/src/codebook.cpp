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

#include "fdran/codebook.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fdran/errors.hpp"

namespace fdran {

void CodebookConfig::validate() const
{
    if (n1 < 1 || n2 < 1)
        throw ConfigError("codebook N1, N2 must be positive");
    if (o1 < 1 || o2 < 1)
        throw ConfigError("codebook oversampling must be >= 1");
    if (num_tx_antennas != 2 * n1 * n2)
        throw ConfigError("codebook needs N_T = 2 * N1 * N2 (got N_T = " + std::to_string(num_tx_antennas) + ")");
    if (max_rank < 1 || max_rank > 4)
        throw ConfigError("codebook rank must be in 1..4");
    if (max_rank > std::min(num_tx_antennas, num_rx_antennas))
        throw ConfigError("codebook rank exceeds min(N_R, N_T)");
    if (max_rank >= 3 && n1 * n2 < 2)
        throw ConfigError("ranks 3 and 4 need an orthogonal companion beam (N1 * N2 >= 2)");
}

CVector dft_beam(int n, int index, int oversampling)
{
    if (n < 1 || oversampling < 1)
        throw std::invalid_argument("DFT beam length and oversampling must be positive");
    CVector v(n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    const long period = static_cast<long>(n) * oversampling;
    for (int m = 0; m < n; ++m) {
        // Reduce m*index modulo n*O first so the phase argument stays exact.
        long r = (static_cast<long>(m) * index) % period;
        if (r < 0)
            r += period;
        v(m) = std::polar(scale, 2.0 * std::numbers::pi * static_cast<double>(r) / static_cast<double>(period));
    }
    return v;
}

std::vector<std::pair<int, int>> companion_offsets(const CodebookConfig &cfg, int rank)
{
    std::vector<std::pair<int, int>> out;
    if (rank < 2)
        return {{0, 0}};
    for (int a = 0; a < cfg.n1; ++a)
        for (int b = 0; b < cfg.n2; ++b) {
            if (rank >= 3 && a == 0 && b == 0)
                continue;
            out.emplace_back(a * cfg.o1, b * cfg.o2);
        }
    return out;
}

namespace {

CVector beam2d(const CodebookConfig &c, int l, int m)
{
    CVector u1 = dft_beam(c.n1, l, c.o1);
    CVector u2 = dft_beam(c.n2, m, c.o2);
    CVector v(c.n1 * c.n2);
    for (int i = 0; i < c.n1; ++i)
        for (int k = 0; k < c.n2; ++k)
            v(i * c.n2 + k) = u1(i) * u2(k);
    return v;
}

CVector layer(const CVector &v, cd phase)
{
    CVector col(2 * v.size());
    col.head(v.size()) = v;
    col.tail(v.size()) = phase * v;
    return col;
}

CMatrix assemble(const CodebookConfig &c, int rank, int i11, int i12, const std::pair<int, int> &off, int i2)
{
    const cd phi = std::polar(1.0, std::numbers::pi * i2 / 2.0);
    const CVector v = beam2d(c, i11, i12);
    const CVector w = beam2d(c, (i11 + off.first) % (c.n1 * c.o1), (i12 + off.second) % (c.n2 * c.o2));
    CMatrix p(2 * v.size(), rank);
    switch (rank) {
    case 1:
        p.col(0) = layer(v, phi);
        break;
    case 2:
        p.col(0) = layer(v, phi);
        p.col(1) = layer(w, -phi);
        break;
    case 3:
        p.col(0) = layer(v, phi);
        p.col(1) = layer(w, phi);
        p.col(2) = layer(v, -phi);
        break;
    default:
        p.col(0) = layer(v, phi);
        p.col(1) = layer(w, phi);
        p.col(2) = layer(v, -phi);
        p.col(3) = layer(w, -phi);
        break;
    }
    return p / std::sqrt(2.0 * rank);
}

} // namespace

Codebook::Codebook(const CodebookConfig &cfg) : cfg_(cfg)
{
    cfg_.validate();
    for (int rank = 1; rank <= cfg_.max_rank; ++rank) {
        offsets_.push_back(static_cast<int>(precoders_.size()));
        const auto offs = companion_offsets(cfg_, rank);
        for (int i11 = 0; i11 < cfg_.n1 * cfg_.o1; ++i11)
            for (int i12 = 0; i12 < cfg_.n2 * cfg_.o2; ++i12)
                for (int i13 = 0; i13 < static_cast<int>(offs.size()); ++i13)
                    for (int i2 = 0; i2 < 4; ++i2) {
                        Precoder p;
                        p.matrix = assemble(cfg_, rank, i11, i12, offs[static_cast<std::size_t>(i13)], i2);
                        p.index = {rank, i11, i12, i13, i2};
                        p.flat_index = static_cast<int>(precoders_.size());
                        precoders_.push_back(std::move(p));
                    }
    }
    offsets_.push_back(static_cast<int>(precoders_.size()));
}

std::span<const Precoder> Codebook::of_rank(int rank) const
{
    return std::span<const Precoder>(precoders_).subspan(static_cast<std::size_t>(rank_offset(rank)),
                                                         static_cast<std::size_t>(rank_count(rank)));
}

int Codebook::rank_offset(int rank) const
{
    if (rank < 1 || rank > cfg_.max_rank)
        throw std::out_of_range("rank " + std::to_string(rank) + " not in codebook");
    return offsets_[static_cast<std::size_t>(rank - 1)];
}

int Codebook::rank_count(int rank) const
{
    return offsets_[static_cast<std::size_t>(rank)] - rank_offset(rank);
}

int Codebook::flat_index(const PrecoderIndex &idx) const
{
    const int n_beam2 = cfg_.n2 * cfg_.o2;
    const int n13 = static_cast<int>(companion_offsets(cfg_, idx.rank).size());
    if (idx.i11 < 0 || idx.i11 >= cfg_.n1 * cfg_.o1 || idx.i12 < 0 || idx.i12 >= n_beam2 || idx.i13 < 0 ||
        idx.i13 >= n13 || idx.i2 < 0 || idx.i2 > 3)
        throw std::out_of_range("precoder index outside the codebook");
    return rank_offset(idx.rank) + ((idx.i11 * n_beam2 + idx.i12) * n13 + idx.i13) * 4 + idx.i2;
}

Codebook build_codebook(const CodebookConfig &cfg) { return Codebook(cfg); }

const Precoder &precoder_by_pmi(const Codebook &cb, int rank, int pmi)
{
    const int lo = cb.rank_offset(rank);
    if (pmi < lo || pmi >= lo + cb.rank_count(rank))
        throw std::out_of_range("PMI " + std::to_string(pmi) + " is not a rank-" + std::to_string(rank) + " precoder");
    return cb[static_cast<std::size_t>(pmi)];
}

nlohmann::json codebook_to_json(const Codebook &cb)
{
    nlohmann::json j;
    j["config"] = cb.config();
    j["precoders"] = nlohmann::json::array();
    for (const auto &p : cb.all()) {
        nlohmann::json m = nlohmann::json::array();
        for (Eigen::Index r = 0; r < p.matrix.rows(); ++r) {
            nlohmann::json row = nlohmann::json::array();
            for (Eigen::Index c = 0; c < p.matrix.cols(); ++c)
                row.push_back({p.matrix(r, c).real(), p.matrix(r, c).imag()});
            m.push_back(row);
        }
        j["precoders"].push_back({{"flat_index", p.flat_index},
                                  {"rank", p.index.rank},
                                  {"i11", p.index.i11},
                                  {"i12", p.index.i12},
                                  {"i13", p.index.i13},
                                  {"i2", p.index.i2},
                                  {"matrix", m}});
    }
    return j;
}

void to_json(nlohmann::json &j, const CodebookConfig &c)
{
    j = {{"n1", c.n1},
         {"n2", c.n2},
         {"o1", c.o1},
         {"o2", c.o2},
         {"max_rank", c.max_rank},
         {"num_tx_antennas", c.num_tx_antennas},
         {"num_rx_antennas", c.num_rx_antennas}};
}

void from_json(const nlohmann::json &j, CodebookConfig &c)
{
    c = CodebookConfig{};
    c.n1 = j.value("n1", c.n1);
    c.n2 = j.value("n2", c.n2);
    c.o1 = j.value("o1", c.o1);
    c.o2 = j.value("o2", c.o2);
    c.max_rank = j.value("max_rank", c.max_rank);
    c.num_tx_antennas = j.value("num_tx_antennas", 2 * c.n1 * c.n2);
    c.num_rx_antennas = j.value("num_rx_antennas", c.num_rx_antennas);
}

} // namespace fdran
