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

#include "fdran/esm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <string>

#include "fdran/embedded_data.hpp"
#include "fdran/errors.hpp"

namespace fdran {

namespace {

// Neumaier-compensated mean; keeps the ESM fixed point at machine precision.
double compensated_mean(const std::vector<double> &v)
{
    double sum = 0.0;
    double c = 0.0;
    for (double x : v) {
        const double t = sum + x;
        c += std::abs(sum) >= std::abs(x) ? (sum - t) + x : (x - t) + sum;
        sum = t;
    }
    return (sum + c) / static_cast<double>(v.size());
}

const char *curve_file(int order)
{
    switch (order) {
    case 2:
        return "bicm_qpsk.csv";
    case 4:
        return "bicm_16qam.csv";
    case 6:
        return "bicm_64qam.csv";
    case 8:
        return "bicm_256qam.csv";
    default:
        throw ConfigError("no BICM curve for modulation order " + std::to_string(order));
    }
}

} // namespace

BicmCurve::BicmCurve(int order, std::vector<double> snr_db, std::vector<double> bits)
    : order_(order), snr_db_(std::move(snr_db)), bits_(std::move(bits))
{
    if (snr_db_.size() < 2 || snr_db_.size() != bits_.size())
        throw ConfigError("BICM curve needs at least two (snr_db, bits) points");
    if (!(bits_.front() > 0.0))
        throw ConfigError("BICM curve must start at a positive capacity");
    double raw_prev = bits_.front();
    for (std::size_t i = 1; i < snr_db_.size(); ++i) {
        if (!(snr_db_[i] > snr_db_[i - 1]))
            throw ConfigError("BICM curve SNR grid must be strictly increasing");
        if (bits_[i] < raw_prev)
            throw ConfigError("BICM capacity curve must be nondecreasing");
        raw_prev = bits_[i];
        bits_[i] = std::max(bits_[i], bits_[i - 1] + kMinSlope * (snr_db_[i] - snr_db_[i - 1]));
    }
}

BicmCurve BicmCurve::from_csv(int order, std::string_view csv)
{
    std::istringstream in{std::string(csv)};
    std::string line;
    std::getline(in, line);
    std::vector<double> db, bits;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ConfigError("malformed BICM table line: " + line);
        db.push_back(std::stod(line.substr(0, comma)));
        bits.push_back(std::stod(line.substr(comma + 1)));
    }
    return BicmCurve(order, std::move(db), std::move(bits));
}

double BicmCurve::capacity(double snr) const
{
    if (!(snr > 0.0))
        throw std::invalid_argument("capacity curve needs a positive SNR");
    const double db = 10.0 * std::log10(snr);
    if (db <= snr_db_.front())
        return bits_.front() * snr / std::pow(10.0, snr_db_.front() / 10.0);
    if (db >= snr_db_.back())
        return bits_.back() + kMinSlope * (db - snr_db_.back());
    const auto it = std::upper_bound(snr_db_.begin(), snr_db_.end(), db);
    const auto i = static_cast<std::size_t>(it - snr_db_.begin()) - 1;
    const double frac = (db - snr_db_[i]) / (snr_db_[i + 1] - snr_db_[i]);
    return bits_[i] + frac * (bits_[i + 1] - bits_[i]);
}

double BicmCurve::inverse(double bits) const
{
    if (!(bits > 0.0))
        throw std::invalid_argument("capacity inverse needs positive bits");
    double db;
    if (bits <= bits_.front())
        return bits / bits_.front() * std::pow(10.0, snr_db_.front() / 10.0);
    if (bits >= bits_.back()) {
        db = snr_db_.back() + (bits - bits_.back()) / kMinSlope;
    } else {
        const auto it = std::upper_bound(bits_.begin(), bits_.end(), bits);
        const auto i = static_cast<std::size_t>(it - bits_.begin()) - 1;
        const double frac = (bits - bits_[i]) / (bits_[i + 1] - bits_[i]);
        db = snr_db_[i] + frac * (snr_db_[i + 1] - snr_db_[i]);
    }
    return std::pow(10.0, db / 10.0);
}

const BicmCurve &EsmConfig::curve_for_cqi(int cqi) const
{
    if (cqi < 0 || cqi >= kNumCqi)
        throw std::out_of_range("CQI " + std::to_string(cqi) + " outside 0..15");
    // CQI 0 carries no data; its hypothesis is evaluated on the QPSK curve.
    const int order = std::max(2, cqi_modulation[static_cast<std::size_t>(cqi)]);
    const auto it = bicm_curves.find(order);
    if (it == bicm_curves.end())
        throw ConfigError("no BICM curve for modulation order " + std::to_string(order));
    return it->second;
}

double EsmConfig::threshold_linear(int cqi) const
{
    if (cqi <= 0)
        return 0.0;
    return std::pow(10.0, cqi_snr_thresholds_db.at(static_cast<std::size_t>(cqi)) / 10.0);
}

void EsmConfig::validate() const
{
    for (double g : gamma_per_cqi)
        if (!(g > 0.0) || !std::isfinite(g))
            throw ConfigError("ESM calibration factors must be positive");
    for (int c = 2; c < kNumCqi; ++c)
        if (cqi_snr_thresholds_db[static_cast<std::size_t>(c)] < cqi_snr_thresholds_db[static_cast<std::size_t>(c - 1)])
            throw ConfigError("CQI thresholds must be nondecreasing");
    for (int c = 0; c < kNumCqi; ++c)
        (void)curve_for_cqi(c);
}

const std::map<int, BicmCurve> &standard_bicm_curves()
{
    static const std::map<int, BicmCurve> curves = [] {
        std::map<int, BicmCurve> m;
        for (int order : {2, 4, 6, 8})
            m.emplace(order, BicmCurve::from_csv(order, embedded_data(curve_file(order))));
        return m;
    }();
    return curves;
}

std::array<double, kNumCqi> derive_cqi_thresholds(const std::map<int, BicmCurve> &curves, const McsTable &tbl,
                                                   double margin)
{
    if (!(margin > 0.0))
        throw ConfigError("CQI threshold margin must be positive");
    std::array<double, kNumCqi> out{};
    out[0] = -std::numeric_limits<double>::infinity();
    for (int c = 1; c < kNumCqi; ++c) {
        const auto &e = tbl[c];
        const auto it = curves.find(e.modulation_order);
        if (it == curves.end())
            throw ConfigError("no BICM curve for modulation order " + std::to_string(e.modulation_order));
        out[static_cast<std::size_t>(c)] = 10.0 * std::log10(it->second.inverse(e.efficiency() * margin));
    }
    return out;
}

EsmConfig default_esm_config(const McsTable &tbl, double margin)
{
    EsmConfig cfg;
    cfg.gamma_per_cqi.fill(1.0);
    cfg.bicm_curves = standard_bicm_curves();
    for (int c = 0; c < kNumCqi; ++c)
        cfg.cqi_modulation[static_cast<std::size_t>(c)] = tbl[c].modulation_order;
    cfg.cqi_snr_thresholds_db = derive_cqi_thresholds(cfg.bicm_curves, tbl, margin);
    cfg.validate();
    return cfg;
}

double effective_snr(std::span<const double> sinrs, int cqi, const EsmConfig &cfg)
{
    if (sinrs.empty())
        throw std::invalid_argument("effective SNR of an empty SINR set");
    const auto &f = cfg.curve_for_cqi(cqi);
    const double gamma = cfg.gamma_per_cqi[static_cast<std::size_t>(cqi)];
    std::vector<double> mapped;
    mapped.reserve(sinrs.size());
    for (double s : sinrs)
        mapped.push_back(f.capacity(s / gamma));
    return gamma * f.inverse(compensated_mean(mapped));
}

void to_json(nlohmann::json &j, const EsmConfig &c)
{
    j = nlohmann::json::object();
    j["gamma_per_cqi"] = c.gamma_per_cqi;
    j["cqi_modulation"] = c.cqi_modulation;
    nlohmann::json thr = nlohmann::json::array();
    for (int i = 0; i < kNumCqi; ++i)
        thr.push_back(i == 0 ? nlohmann::json(nullptr) : nlohmann::json(c.cqi_snr_thresholds_db[static_cast<std::size_t>(i)]));
    j["cqi_snr_thresholds_db"] = thr;
    j["bicm_curve_orders"] = nlohmann::json::array();
    for (const auto &[order, _] : c.bicm_curves)
        j["bicm_curve_orders"].push_back(order);
}

EsmConfig esm_config_from_json(const nlohmann::json &j, const McsTable &tbl)
{
    EsmConfig cfg = default_esm_config(tbl, j.value("threshold_margin", 1.0));
    if (j.contains("gamma_per_cqi")) {
        const auto g = j.at("gamma_per_cqi").get<std::vector<double>>();
        if (g.size() != kNumCqi)
            throw ConfigError("gamma_per_cqi needs 16 entries");
        std::copy(g.begin(), g.end(), cfg.gamma_per_cqi.begin());
    }
    if (j.contains("cqi_snr_thresholds_db")) {
        const auto &t = j.at("cqi_snr_thresholds_db");
        if (t.size() != kNumCqi)
            throw ConfigError("cqi_snr_thresholds_db needs 16 entries");
        for (int i = 1; i < kNumCqi; ++i)
            cfg.cqi_snr_thresholds_db[static_cast<std::size_t>(i)] = t.at(static_cast<std::size_t>(i)).get<double>();
    }
    cfg.validate();
    return cfg;
}

} // namespace fdran
