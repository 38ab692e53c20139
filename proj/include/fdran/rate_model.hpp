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

#ifndef FDRAN_RATE_MODEL_HPP
#define FDRAN_RATE_MODEL_HPP

#include <Eigen/Core>

#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "fdran/csi.hpp"
#include "fdran/scenario.hpp"

namespace fdran {

class CsiPredictor;

struct McsEntry
{
    int cqi = 0;
    int modulation_order = 0; // bits per symbol; 0 = no transmission
    double code_rate = 0.0;

    double efficiency() const { return modulation_order * code_rate; }
};

// 4-bit CQI table (64QAM). Row 0 is "out of range": no transmission.
class McsTable
{
  public:
    explicit McsTable(std::array<McsEntry, kNumCqi> rows);

    // Parses "cqi,modulation_order,code_rate" CSV with a header line.
    static McsTable from_csv(std::string_view csv);
    // The table compiled from data/mcs_table.csv.
    static const McsTable &standard();

    const McsEntry &operator[](int cqi) const;
    std::span<const McsEntry> rows() const { return rows_; }

  private:
    std::array<McsEntry, kNumCqi> rows_;
};

struct FrameConfig
{
    int symbols_per_subframe = 14;
    int res_per_symbol_per_rb = 12;
    int pdcch_symbols = 3;
    int dl_slots_per_frame = 10;
    int frames_per_second = 100;
    double subcarrier_spacing_hz = 15e3;

    int data_res_per_rb() const { return (symbols_per_subframe - pdcch_symbols) * res_per_symbol_per_rb; }
    double rb_bandwidth_hz() const { return res_per_symbol_per_rb * subcarrier_spacing_hz; }
    void validate() const;
};

struct Modulation
{
    int order = 0;
    double code_rate = 0.0;
};

Modulation cqi_to_mcs(const McsTable &tbl, int cqi);

// Rate of one codeword in Mbps: order * data REs * code rate * layers *
// slots * frames. The integer factors are multiplied first so the single
// floating-point product reproduces hand arithmetic exactly.
double codeword_rate_mbps(const McsTable &tbl, const FrameConfig &fc, int cqi, int layers);

// Peak PHY rate of one RB for a CSI report, in Mbps.
double max_phy_rate(const CsiReport &report, const McsTable &tbl, const FrameConfig &fc = {});

// Row w enumerates (bs, rb) pairs in bs_list order then RB order; column m is a UE.
struct RateMatrix
{
    Eigen::MatrixXd rates; // W x M, Mbps
    std::vector<std::pair<int, int>> rows; // (bs_id, rb)
};

std::vector<std::pair<int, int>> bs_rb_pairs(const Scenario &s);

RateMatrix rate_matrix(const CsiPredictor &predictor, const Scenario &s, std::span<const Geolocation> ues,
                       const McsTable &tbl = McsTable::standard(), const FrameConfig &fc = {});

} // namespace fdran

#endif
