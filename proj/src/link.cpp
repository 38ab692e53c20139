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

#include "fdran/link.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>

#include "fdran/errors.hpp"

namespace fdran {

namespace {

constexpr int kMaxFixed = 16;
using SmallMat = Eigen::Matrix<cd, Eigen::Dynamic, Eigen::Dynamic, Eigen::ColMajor, kMaxFixed, kMaxFixed>;

template <typename Mat>
bool zf_chain(const CMatrix &h, const CMatrix &w, Mat &f, Mat &g)
{
    const Mat a = h * w;
    const Mat gram = a.adjoint() * a;
    Eigen::LLT<Mat> llt(gram);
    if (llt.info() != Eigen::Success || !(llt.rcond() > kSingularRcond))
        return false;
    f = llt.solve(a.adjoint());
    g = f * a;
    return true;
}

template <typename Mat>
void layer_sinrs(const Mat &f, const Mat &g, double sigma2, std::vector<double> &out)
{
    const auto L = g.rows();
    out.resize(static_cast<std::size_t>(L));
    for (Eigen::Index l = 0; l < L; ++l) {
        const double signal = std::norm(g(l, l));
        const double interference = g.row(l).squaredNorm() - signal;
        const double noise = sigma2 * f.row(l).squaredNorm();
        out[static_cast<std::size_t>(l)] = signal / (std::max(interference, 0.0) + noise);
    }
}

bool fits_fixed(const CMatrix &h, const CMatrix &w)
{
    return h.rows() <= kMaxFixed && h.cols() <= kMaxFixed && w.cols() <= kMaxFixed;
}

void check_shapes(const CMatrix &h, const CMatrix &w)
{
    if (h.cols() != w.rows())
        throw std::invalid_argument("channel has " + std::to_string(h.cols()) + " transmit antennas but precoder has " +
                                    std::to_string(w.rows()) + " rows");
}

} // namespace

CMatrix zf_equalizer(const CMatrix &h, const CMatrix &w)
{
    check_shapes(h, w);
    CMatrix f, g;
    if (!zf_chain(h, w, f, g))
        throw SingularChannelError("effective channel H*W is rank deficient");
    return f;
}

EqualizationResult equalize(const CMatrix &h, const CMatrix &w, double sigma2)
{
    check_shapes(h, w);
    EqualizationResult r;
    if (!zf_chain(h, w, r.f_matrix, r.g_matrix))
        throw SingularChannelError("effective channel H*W is rank deficient");
    layer_sinrs(r.f_matrix, r.g_matrix, sigma2, r.per_layer_sinr);
    return r;
}

std::vector<double> post_eq_sinr(const CMatrix &h, const CMatrix &w, double sigma2)
{
    return equalize(h, w, sigma2).per_layer_sinr;
}

bool try_post_eq_sinr(const CMatrix &h, const CMatrix &w, double sigma2, std::vector<double> &out)
{
    if (fits_fixed(h, w)) {
        SmallMat f, g;
        if (!zf_chain(h, w, f, g))
            return false;
        layer_sinrs(f, g, sigma2, out);
        return true;
    }
    CMatrix f, g;
    if (!zf_chain(h, w, f, g))
        return false;
    layer_sinrs(f, g, sigma2, out);
    return true;
}

double mutual_info(std::span<const double> sinrs)
{
    double bits = 0.0;
    for (double s : sinrs)
        bits += std::log2(1.0 + s);
    return bits;
}

PmiRiSelection select_pmi_ri(std::span<const CMatrix> channels, const Codebook &cb, double sigma2)
{
    if (channels.empty())
        throw std::invalid_argument("PMI/RI selection needs at least one channel matrix");
    for (const auto &h : channels)
        check_shapes(h, cb[0].matrix);

    std::vector<double> sinr;
    int best = -1;
    double best_mi = 0.0;
    for (const auto &p : cb.all()) {
        double mi = 0.0;
        bool ok = true;
        for (const auto &h : channels) {
            if (!try_post_eq_sinr(h, p.matrix, sigma2, sinr)) {
                ok = false;
                break;
            }
            mi += mutual_info(sinr);
        }
        if (!ok)
            continue;
        if (best < 0 || mi - best_mi > kMiTieTolerance * std::abs(best_mi)) {
            best = p.flat_index;
            best_mi = mi;
        }
    }
    if (best < 0)
        throw NoValidPrecoderError("every precoder hypothesis is singular on this channel");

    PmiRiSelection out;
    out.pmi = best;
    out.ri = cb[static_cast<std::size_t>(best)].rank();
    out.mutual_info = best_mi;
    out.sinr_grid.reserve(channels.size());
    for (const auto &h : channels) {
        try_post_eq_sinr(h, cb[static_cast<std::size_t>(best)].matrix, sigma2, sinr);
        out.sinr_grid.push_back(sinr);
    }
    return out;
}

double codeword_effective_snr(const SinrGrid &grid, int first_layer, int num_layers, int cqi, const EsmConfig &cfg)
{
    std::vector<double> values;
    values.reserve(grid.size() * static_cast<std::size_t>(num_layers));
    for (const auto &re : grid)
        for (int l = first_layer; l < first_layer + num_layers; ++l)
            values.push_back(re.at(static_cast<std::size_t>(l)));
    return effective_snr(values, cqi, cfg);
}

int select_codeword_cqi(const SinrGrid &grid, int first_layer, int num_layers, const EsmConfig &cfg)
{
    for (int c = kNumCqi - 1; c >= 1; --c)
        if (codeword_effective_snr(grid, first_layer, num_layers, c, cfg) >= cfg.threshold_linear(c))
            return c;
    return 0;
}

std::pair<int, int> select_cqi(const SinrGrid &grid, int ri, const EsmConfig &cfg)
{
    const auto split = codeword_layers(ri);
    if (split.cw0 == 0)
        throw std::out_of_range("rank " + std::to_string(ri) + " has no codeword mapping");
    const int cqi1 = select_codeword_cqi(grid, 0, split.cw0, cfg);
    const int cqi2 = split.cw1 > 0 ? select_codeword_cqi(grid, split.cw0, split.cw1, cfg) : cqi1;
    return {cqi1, cqi2};
}

CsiReport compute_csi_report(const Scenario &s, int bs_id, const Geolocation &ue, int rb, const Codebook &cb,
                             const EsmConfig &cfg)
{
    const auto channels = rb_channels(s, bs_id, ue, rb);
    const auto sel = select_pmi_ri(channels, cb, s.noise_power);
    const auto [cqi1, cqi2] = select_cqi(sel.sinr_grid, sel.ri, cfg);
    return {sel.ri, cqi1, cqi2, sel.pmi};
}

std::vector<CsiReport> compute_csi_reports(const Scenario &s, int bs_id, const Geolocation &ue, const Codebook &cb,
                                           const EsmConfig &cfg)
{
    const int n = s.bs(bs_id).rb_count;
    std::vector<CsiReport> out;
    out.reserve(static_cast<std::size_t>(n));
    for (int rb = 0; rb < n; ++rb)
        out.push_back(compute_csi_report(s, bs_id, ue, rb, cb, cfg));
    return out;
}

CodebookConfig codebook_config_for(const Scenario &s, int bs_id, int o1, int o2, int max_rank)
{
    const auto &b = s.bs(bs_id);
    CodebookConfig c;
    c.n1 = b.n1;
    c.n2 = b.n2;
    c.o1 = o1;
    c.o2 = o2;
    c.num_tx_antennas = b.num_tx_antennas;
    c.num_rx_antennas = s.num_rx_antennas;
    int cap = std::min({max_rank, 4, b.num_tx_antennas, s.num_rx_antennas});
    if (b.n1 * b.n2 < 2)
        cap = std::min(cap, 2);
    c.max_rank = cap;
    return c;
}

} // namespace fdran
