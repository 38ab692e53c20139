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

#include "fdran/rate_model.hpp"

#include <sstream>
#include <string>

#include "fdran/csi_map.hpp"
#include "fdran/embedded_data.hpp"
#include "fdran/errors.hpp"

namespace fdran {

void to_json(nlohmann::json &j, const CsiReport &r)
{
    j = {{"ri", r.ri}, {"cqi1", r.cqi1}, {"cqi2", r.cqi2}, {"pmi", r.pmi}};
}

void from_json(const nlohmann::json &j, CsiReport &r)
{
    r.ri = j.at("ri").get<int>();
    r.cqi1 = j.at("cqi1").get<int>();
    r.cqi2 = j.at("cqi2").get<int>();
    r.pmi = j.at("pmi").get<int>();
}

McsTable::McsTable(std::array<McsEntry, kNumCqi> rows) : rows_(rows)
{
    for (int c = 0; c < kNumCqi; ++c) {
        const auto &e = rows_[static_cast<std::size_t>(c)];
        if (e.cqi != c)
            throw ConfigError("MCS table rows must be ordered by CQI 0..15");
        if (c == 0) {
            if (e.modulation_order != 0 || e.code_rate != 0.0)
                throw ConfigError("MCS table row 0 must be 'no transmission'");
            continue;
        }
        if (e.modulation_order < 1 || !(e.code_rate > 0.0 && e.code_rate < 1.0))
            throw ConfigError("MCS code rates must lie in (0, 1)");
        if (c > 1 && e.efficiency() < rows_[static_cast<std::size_t>(c - 1)].efficiency())
            throw ConfigError("MCS spectral efficiency must be nondecreasing in CQI");
    }
}

McsTable McsTable::from_csv(std::string_view csv)
{
    std::istringstream in{std::string(csv)};
    std::string line;
    std::getline(in, line); // header
    std::array<McsEntry, kNumCqi> rows{};
    int n = 0;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        if (n >= kNumCqi)
            throw ConfigError("MCS table has more than 16 rows");
        std::istringstream fields(line);
        std::string a, b, c;
        std::getline(fields, a, ',');
        std::getline(fields, b, ',');
        std::getline(fields, c, ',');
        rows[static_cast<std::size_t>(n++)] = {std::stoi(a), std::stoi(b), std::stod(c)};
    }
    if (n != kNumCqi)
        throw ConfigError("MCS table needs exactly 16 rows");
    return McsTable(rows);
}

const McsTable &McsTable::standard()
{
    static const McsTable table = from_csv(embedded_data("mcs_table.csv"));
    return table;
}

const McsEntry &McsTable::operator[](int cqi) const
{
    if (cqi < 0 || cqi >= kNumCqi)
        throw std::out_of_range("CQI " + std::to_string(cqi) + " outside 0..15");
    return rows_[static_cast<std::size_t>(cqi)];
}

void FrameConfig::validate() const
{
    if (symbols_per_subframe <= 0 || res_per_symbol_per_rb <= 0 || pdcch_symbols < 0 ||
        pdcch_symbols >= symbols_per_subframe || dl_slots_per_frame <= 0 || frames_per_second <= 0)
        throw ConfigError("frame configuration values must be positive");
}

Modulation cqi_to_mcs(const McsTable &tbl, int cqi)
{
    const auto &e = tbl[cqi];
    return {e.modulation_order, e.code_rate};
}

double codeword_rate_mbps(const McsTable &tbl, const FrameConfig &fc, int cqi, int layers)
{
    const auto &e = tbl[cqi];
    const long long integer_part = static_cast<long long>(e.modulation_order) * fc.data_res_per_rb() * layers *
                                   fc.dl_slots_per_frame * fc.frames_per_second;
    return static_cast<double>(integer_part) * e.code_rate / 1e6;
}

double max_phy_rate(const CsiReport &report, const McsTable &tbl, const FrameConfig &fc)
{
    const auto split = codeword_layers(report.ri);
    double rate = codeword_rate_mbps(tbl, fc, report.cqi1, split.cw0);
    if (split.cw1 > 0)
        rate += codeword_rate_mbps(tbl, fc, report.cqi2, split.cw1);
    return rate;
}

std::vector<std::pair<int, int>> bs_rb_pairs(const Scenario &s)
{
    std::vector<std::pair<int, int>> out;
    for (const auto &b : s.bs_list)
        for (int rb = 0; rb < b.rb_count; ++rb)
            out.emplace_back(b.id, rb);
    return out;
}

RateMatrix rate_matrix(const CsiPredictor &predictor, const Scenario &s, std::span<const Geolocation> ues,
                       const McsTable &tbl, const FrameConfig &fc)
{
    RateMatrix out;
    out.rows = bs_rb_pairs(s);
    out.rates = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(out.rows.size()), static_cast<Eigen::Index>(ues.size()));
    for (std::size_t m = 0; m < ues.size(); ++m) {
        Eigen::Index w = 0;
        for (const auto &b : s.bs_list) {
            const auto reports = predictor.predict(b.id, ues[m]);
            if (static_cast<int>(reports.size()) != b.rb_count)
                throw std::logic_error(predictor.name() + " returned " + std::to_string(reports.size()) +
                                       " reports for BS " + std::to_string(b.id));
            for (const auto &r : reports)
                out.rates(w++, static_cast<Eigen::Index>(m)) = max_phy_rate(r, tbl, fc);
        }
    }
    return out;
}

} // namespace fdran
