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

#ifndef FDRAN_LINK_HPP
#define FDRAN_LINK_HPP

#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fdran/channel.hpp"
#include "fdran/codebook.hpp"
#include "fdran/csi.hpp"
#include "fdran/esm.hpp"
#include "fdran/scenario.hpp"

namespace fdran {

struct EqualizationResult
{
    CMatrix f_matrix; // L x N_R
    CMatrix g_matrix; // L x L, F H W
    std::vector<double> per_layer_sinr;
};

// Hypotheses whose Gram matrix (HW)^H HW has a reciprocal condition number
// below this are treated as rank deficient.
inline constexpr double kSingularRcond = 1e-12;

// Two mutual-information sums within this relative distance are a tie; the
// earlier (smaller rank, smaller flat PMI) hypothesis is kept.
inline constexpr double kMiTieTolerance = 1e-12;

// F = ((HW)^H HW)^-1 (HW)^H. Throws SingularChannelError if HW is rank deficient.
CMatrix zf_equalizer(const CMatrix &h, const CMatrix &w);
inline CMatrix zf_equalizer(const CMatrix &h, const Precoder &w) { return zf_equalizer(h, w.matrix); }

// Full ZF chain for one resource element.
EqualizationResult equalize(const CMatrix &h, const CMatrix &w, double sigma2);

// SINR_l = |G(l,l)|^2 / (sum_{i!=l} |G(l,i)|^2 + sigma2 * sum_i |F(l,i)|^2).
std::vector<double> post_eq_sinr(const CMatrix &h, const CMatrix &w, double sigma2);
inline std::vector<double> post_eq_sinr(const CMatrix &h, const Precoder &w, double sigma2)
{
    return post_eq_sinr(h, w.matrix, sigma2);
}

// Non-throwing variant used by the exhaustive search; false if singular.
bool try_post_eq_sinr(const CMatrix &h, const CMatrix &w, double sigma2, std::vector<double> &out);

// sum_l log2(1 + SINR_l).
double mutual_info(std::span<const double> sinrs);

// Per-RE layer SINRs of one hypothesis, index = RE.
using SinrGrid = std::vector<std::vector<double>>;

struct PmiRiSelection
{
    int ri = 0;
    int pmi = 0;
    double mutual_info = 0.0; // sum over the grid
    SinrGrid sinr_grid;
};

// Exhaustive search over the codebook for the precoder that maximizes the
// sum of post-equalization mutual information over the RB's resource elements.
PmiRiSelection select_pmi_ri(std::span<const CMatrix> channels, const Codebook &cb, double sigma2);

// Effective SNR of one codeword's layers, all REs pooled.
double codeword_effective_snr(const SinrGrid &grid, int first_layer, int num_layers, int cqi, const EsmConfig &cfg);

// Highest CQI whose threshold the codeword's effective SNR meets (0 if none).
int select_codeword_cqi(const SinrGrid &grid, int first_layer, int num_layers, const EsmConfig &cfg);

// (cqi1, cqi2); cqi2 mirrors cqi1 for ri = 1.
std::pair<int, int> select_cqi(const SinrGrid &grid, int ri, const EsmConfig &cfg);

// Ground-truth CSI label of one RB: channel grid -> PMI/RI search -> CQI.
CsiReport compute_csi_report(const Scenario &s, int bs_id, const Geolocation &ue, int rb, const Codebook &cb,
                             const EsmConfig &cfg);

// Labels for every RB of one BS.
std::vector<CsiReport> compute_csi_reports(const Scenario &s, int bs_id, const Geolocation &ue, const Codebook &cb,
                                           const EsmConfig &cfg);

// Codebook matching a BS panel with the scenario's UE antenna count.
CodebookConfig codebook_config_for(const Scenario &s, int bs_id, int o1 = 4, int o2 = 1, int max_rank = 4);

} // namespace fdran

#endif
