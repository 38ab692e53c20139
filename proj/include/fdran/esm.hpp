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

#ifndef FDRAN_ESM_HPP
#define FDRAN_ESM_HPP

#include <array>
#include <map>
#include <span>
#include <string_view>
#include <vector>

#include "fdran/bicm.hpp"
#include "fdran/csi.hpp"
#include "fdran/rate_model.hpp"
#include "json.hpp"

namespace fdran {

// Tabulated monotone capacity curve f(snr) and its inverse.
//
// Inside the table f is piecewise linear in dB. Each segment slope is raised
// to at least kMinSlope bits/dB so f stays strictly increasing where the
// true curve saturates in double precision. Below the table f is linear in
// linear SNR through the origin; above it f keeps the minimum slope.
class BicmCurve
{
  public:
    static constexpr double kMinSlope = 1e-3; // bits per dB

    BicmCurve() = default;
    BicmCurve(int order, std::vector<double> snr_db, std::vector<double> bits);

    // Parses "snr_db,bits" CSV with a header line.
    static BicmCurve from_csv(int order, std::string_view csv);

    int order() const { return order_; }
    double capacity(double snr) const;
    double inverse(double bits) const;

    const std::vector<double> &snr_db() const { return snr_db_; }
    const std::vector<double> &bits() const { return bits_; }

  private:
    int order_ = 0;
    std::vector<double> snr_db_;
    std::vector<double> bits_; // regularized, strictly increasing
};

struct EsmConfig
{
    std::array<double, kNumCqi> gamma_per_cqi{};
    std::map<int, BicmCurve> bicm_curves; // keyed by modulation order
    std::array<int, kNumCqi> cqi_modulation{};
    std::array<double, kNumCqi> cqi_snr_thresholds_db{}; // [0] is unused (CQI 0 is the floor)

    const BicmCurve &curve_for_cqi(int cqi) const;
    double threshold_linear(int cqi) const;
    void validate() const;
};

// Curves compiled from data/bicm_*.csv.
const std::map<int, BicmCurve> &standard_bicm_curves();

// Threshold of CQI c: SNR where the capacity of c's modulation reaches
// code_rate * order * margin.
std::array<double, kNumCqi> derive_cqi_thresholds(const std::map<int, BicmCurve> &curves, const McsTable &tbl,
                                                   double margin);

// gamma = 1 for every CQI, standard curves, thresholds at the given margin.
EsmConfig default_esm_config(const McsTable &tbl = McsTable::standard(), double margin = 1.0);

// gamma * f^-1( mean f(SINR / gamma) ) with f and gamma of the hypothesized CQI.
double effective_snr(std::span<const double> sinrs, int cqi, const EsmConfig &cfg);

void to_json(nlohmann::json &j, const EsmConfig &c);
// Reads gamma, thresholds and margin overrides on top of the standard curves.
EsmConfig esm_config_from_json(const nlohmann::json &j, const McsTable &tbl = McsTable::standard());

} // namespace fdran

#endif
