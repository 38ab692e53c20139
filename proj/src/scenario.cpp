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

#include "fdran/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fdran/errors.hpp"
#include "fdran/random.hpp"

namespace fdran {

namespace {

constexpr double kBoltzmann = 1.380649e-23;
constexpr double kTemperature = 290.0;
constexpr int kSubcarriersPerRb = 12;

nlohmann::json vec3_json(const Vec3 &v) { return nlohmann::json::array({v.x(), v.y(), v.z()}); }

Vec3 vec3_from(const nlohmann::json &j)
{
    if (!j.is_array() || j.size() != 3)
        throw ConfigError("expected a 3-element position array");
    return {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
}

bool inside_any_footprint(const std::vector<Building> &bs, double x, double y)
{
    return std::any_of(bs.begin(), bs.end(), [&](const Building &b) { return b.footprint_contains(x, y); });
}

// Folds a coordinate into [0, len]; returns true when the number of wall
// reflections is odd (the velocity component flips).
bool fold(double &x, double len)
{
    const double period = 2.0 * len;
    double m = std::fmod(x, period);
    if (m < 0.0)
        m += period;
    const long bounces = static_cast<long>(std::floor(x / len));
    if (m > len)
        m = period - m;
    x = m;
    return (bounces % 2) != 0;
}

} // namespace

const BaseStation &Scenario::bs(int id) const
{
    for (const auto &b : bs_list)
        if (b.id == id)
            return b;
    throw std::out_of_range("unknown BS id " + std::to_string(id));
}

int Scenario::total_rbs() const
{
    int total = 0;
    for (const auto &b : bs_list)
        total += b.rb_count;
    return total;
}

void Scenario::validate() const
{
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw ConfigError("scenario area must have positive dimensions");
    if (bs_list.empty())
        throw ConfigError("scenario needs at least one BS");
    for (const auto &b : bs_list) {
        if (!area.contains(b.position.x(), b.position.y()))
            throw ConfigError("BS " + std::to_string(b.id) + " lies outside the area");
        if (b.rb_count <= 0)
            throw ConfigError("BS rb_count must be positive");
        if (!(b.bandwidth_hz > 0.0))
            throw ConfigError("BS bandwidth must be positive");
        if (b.n1 < 1 || b.n2 < 1 || b.num_tx_antennas != 2 * b.n1 * b.n2)
            throw ConfigError("BS antenna count must equal 2 * N1 * N2");
    }
    if (!(noise_power > 0.0))
        throw ConfigError("noise power must be positive");
    if (!(carrier_frequency > 0.0))
        throw ConfigError("carrier frequency must be positive");
    if (subcarriers_per_rb < 1 || symbols_per_slot < 1 || num_rx_antennas < 1)
        throw ConfigError("K, T and N_R must be positive");
}

ScenarioConfig ScenarioConfig::full_scale_layout()
{
    ScenarioConfig c;
    c.num_bs = 5;
    c.num_buildings = 9;
    c.rb_count = 100;
    c.bandwidth_hz = 20e6;
    c.n1 = 3;
    c.n2 = 1;
    return c;
}

void ScenarioConfig::validate() const
{
    if (!(area.width > 0.0) || !(area.height > 0.0))
        throw ConfigError("area must have positive dimensions");
    if (num_bs < 1 && bs_positions.empty())
        throw ConfigError("at least one BS is required");
    for (const auto &p : bs_positions)
        if (!area.contains(p.x(), p.y()))
            throw ConfigError("BS position outside the area");
    if (!(bandwidth_hz > 0.0))
        throw ConfigError("bandwidth must be positive");
    if (rb_count < 1)
        throw ConfigError("rb_count must be positive");
    if (n1 < 1 || n2 < 1)
        throw ConfigError("antenna panel dimensions must be positive");
    if (num_buildings < 0 || num_scatterers < 0)
        throw ConfigError("building and scatterer counts must be nonnegative");
    if (building_min_size <= 0.0 || building_max_size < building_min_size)
        throw ConfigError("invalid building size range");
    if (building_min_height <= 0.0 || building_max_height < building_min_height)
        throw ConfigError("invalid building height range");
    if (subcarriers_per_rb < 1 || symbols_per_slot < 1 || num_rx_antennas < 1)
        throw ConfigError("K, T and N_R must be positive");
    if (!(carrier_frequency > 0.0))
        throw ConfigError("carrier frequency must be positive");
}

double thermal_noise_power(double bandwidth_hz, int rb_count, double noise_figure_db)
{
    const double spacing = bandwidth_hz / (kSubcarriersPerRb * rb_count);
    return kBoltzmann * kTemperature * spacing * std::pow(10.0, noise_figure_db / 10.0);
}

Scenario generate_scenario(const ScenarioConfig &c, std::uint64_t seed)
{
    c.validate();
    Rng rng(mix_seed(seed, 1));
    Scenario s;
    s.area = c.area;
    s.seed = seed;
    s.carrier_frequency = c.carrier_frequency;
    s.subcarriers_per_rb = c.subcarriers_per_rb;
    s.symbols_per_slot = c.symbols_per_slot;
    s.num_rx_antennas = c.num_rx_antennas;
    s.penetration_loss_db = c.penetration_loss_db;
    s.noise_power = thermal_noise_power(c.bandwidth_hz, c.rb_count, c.noise_figure_db);

    // Buildings: non-overlapping boxes, rejection sampled.
    for (int i = 0, attempts = 0; i < c.num_buildings && attempts < 1000 * (c.num_buildings + 1); ++attempts) {
        const double w = rng.uniform(c.building_min_size, c.building_max_size);
        const double d = rng.uniform(c.building_min_size, c.building_max_size);
        const double h = rng.uniform(c.building_min_height, c.building_max_height);
        const double x0 = rng.uniform(0.0, std::max(c.area.width - w, 0.0));
        const double y0 = rng.uniform(0.0, std::max(c.area.height - d, 0.0));
        Building b{{x0, y0, 0.0}, {x0 + w, y0 + d, h}};
        const bool overlaps = std::any_of(s.buildings.begin(), s.buildings.end(), [&](const Building &o) {
            return b.min.x() < o.max.x() + 5.0 && o.min.x() < b.max.x() + 5.0 && b.min.y() < o.max.y() + 5.0 &&
                   o.min.y() < b.max.y() + 5.0;
        });
        if (overlaps)
            continue;
        s.buildings.push_back(b);
        ++i;
    }

    const Vec3 centre{c.area.width / 2.0, c.area.height / 2.0, 0.0};
    const int num_bs = c.bs_positions.empty() ? c.num_bs : static_cast<int>(c.bs_positions.size());
    for (int i = 0; i < num_bs; ++i) {
        BaseStation b;
        b.id = i;
        if (!c.bs_positions.empty()) {
            b.position = c.bs_positions[static_cast<std::size_t>(i)];
        } else {
            do {
                b.position = {rng.uniform(0.1, 0.9) * c.area.width, rng.uniform(0.1, 0.9) * c.area.height,
                              c.bs_height};
            } while (std::any_of(s.buildings.begin(), s.buildings.end(),
                                 [&](const Building &o) { return o.contains(b.position); }));
        }
        b.n1 = c.n1;
        b.n2 = c.n2;
        b.num_tx_antennas = 2 * c.n1 * c.n2;
        b.tx_power_dbm = c.tx_power_dbm;
        b.bandwidth_hz = c.bandwidth_hz;
        b.rb_count = c.rb_count;
        const Vec3 to_centre = centre - b.position;
        b.boresight_rad = to_centre.head<2>().norm() > 1e-9 ? std::atan2(to_centre.y(), to_centre.x()) : 0.0;
        s.bs_list.push_back(b);
    }

    for (int i = 0; i < c.num_scatterers; ++i) {
        Scatterer sc;
        do {
            sc.position = {rng.uniform(0.0, c.area.width), rng.uniform(0.0, c.area.height),
                           rng.uniform(c.scatterer_min_height, c.scatterer_max_height)};
        } while (inside_any_footprint(s.buildings, sc.position.x(), sc.position.y()));
        sc.reflection = rng.uniform(c.scatterer_min_reflection, c.scatterer_max_reflection);
        sc.phase_rad = rng.uniform(0.0, 2.0 * std::numbers::pi);
        s.scatterers.push_back(sc);
    }

    s.validate();
    return s;
}

std::vector<Geolocation> sample_geolocations(const Scenario &s, std::size_t n, std::uint64_t seed)
{
    Rng rng(mix_seed(seed, 2));
    std::vector<Geolocation> out;
    out.reserve(n);
    while (out.size() < n) {
        const double x = rng.uniform(0.0, s.area.width);
        const double y = rng.uniform(0.0, s.area.height);
        if (inside_any_footprint(s.buildings, x, y))
            continue;
        out.push_back({{x, y, kUeHeight}, Vec3::Zero()});
    }
    return out;
}

Geolocation advance(const Geolocation &ue, const Area &area, double speed_kmh, double delta_t_s, double heading_rad)
{
    const double v = speed_kmh / 3.6;
    Vec3 vel{v * std::cos(heading_rad), v * std::sin(heading_rad), 0.0};
    Geolocation out = ue;
    double x = ue.position.x() + vel.x() * delta_t_s;
    double y = ue.position.y() + vel.y() * delta_t_s;
    if (fold(x, area.width))
        vel.x() = -vel.x();
    if (fold(y, area.height))
        vel.y() = -vel.y();
    out.position = {x, y, ue.position.z()};
    out.velocity = vel;
    return out;
}

void to_json(nlohmann::json &j, const Scenario &s)
{
    j = nlohmann::json::object();
    j["area"] = {{"width", s.area.width}, {"height", s.area.height}};
    j["bs_list"] = nlohmann::json::array();
    for (const auto &b : s.bs_list)
        j["bs_list"].push_back({{"id", b.id},
                                {"position", vec3_json(b.position)},
                                {"num_tx_antennas", b.num_tx_antennas},
                                {"antenna_panel", {b.n1, b.n2}},
                                {"tx_power_dbm", b.tx_power_dbm},
                                {"bandwidth_hz", b.bandwidth_hz},
                                {"rb_count", b.rb_count},
                                {"boresight_rad", b.boresight_rad}});
    j["buildings"] = nlohmann::json::array();
    for (const auto &b : s.buildings)
        j["buildings"].push_back({{"min", vec3_json(b.min)}, {"max", vec3_json(b.max)}});
    j["scatterers"] = nlohmann::json::array();
    for (const auto &sc : s.scatterers)
        j["scatterers"].push_back(
            {{"position", vec3_json(sc.position)}, {"reflection", sc.reflection}, {"phase_rad", sc.phase_rad}});
    j["noise_power"] = s.noise_power;
    j["carrier_frequency"] = s.carrier_frequency;
    j["subcarriers_per_rb"] = s.subcarriers_per_rb;
    j["symbols_per_slot"] = s.symbols_per_slot;
    j["num_rx_antennas"] = s.num_rx_antennas;
    j["penetration_loss_db"] = s.penetration_loss_db;
    j["seed"] = s.seed;
}

void from_json(const nlohmann::json &j, Scenario &s)
{
    s = Scenario{};
    s.area.width = j.at("area").at("width").get<double>();
    s.area.height = j.at("area").at("height").get<double>();
    for (const auto &jb : j.at("bs_list")) {
        BaseStation b;
        b.id = jb.at("id").get<int>();
        b.position = vec3_from(jb.at("position"));
        b.num_tx_antennas = jb.at("num_tx_antennas").get<int>();
        b.n1 = jb.at("antenna_panel").at(0).get<int>();
        b.n2 = jb.at("antenna_panel").at(1).get<int>();
        b.tx_power_dbm = jb.at("tx_power_dbm").get<double>();
        b.bandwidth_hz = jb.at("bandwidth_hz").get<double>();
        b.rb_count = jb.at("rb_count").get<int>();
        b.boresight_rad = jb.value("boresight_rad", 0.0);
        s.bs_list.push_back(b);
    }
    for (const auto &jb : j.at("buildings"))
        s.buildings.push_back({vec3_from(jb.at("min")), vec3_from(jb.at("max"))});
    for (const auto &js : j.at("scatterers"))
        s.scatterers.push_back(
            {vec3_from(js.at("position")), js.at("reflection").get<double>(), js.at("phase_rad").get<double>()});
    s.noise_power = j.at("noise_power").get<double>();
    s.carrier_frequency = j.at("carrier_frequency").get<double>();
    s.subcarriers_per_rb = j.at("subcarriers_per_rb").get<int>();
    s.symbols_per_slot = j.at("symbols_per_slot").get<int>();
    s.num_rx_antennas = j.value("num_rx_antennas", 4);
    s.penetration_loss_db = j.value("penetration_loss_db", 20.0);
    s.seed = j.at("seed").get<std::uint64_t>();
    s.validate();
}

void to_json(nlohmann::json &j, const ScenarioConfig &c)
{
    j = nlohmann::json::object();
    j["area"] = {{"width", c.area.width}, {"height", c.area.height}};
    j["num_bs"] = c.num_bs;
    j["bs_positions"] = nlohmann::json::array();
    for (const auto &p : c.bs_positions)
        j["bs_positions"].push_back(vec3_json(p));
    j["bs_height"] = c.bs_height;
    j["antenna_panel"] = {c.n1, c.n2};
    j["tx_power_dbm"] = c.tx_power_dbm;
    j["bandwidth_hz"] = c.bandwidth_hz;
    j["rb_count"] = c.rb_count;
    j["num_buildings"] = c.num_buildings;
    j["building_size"] = {c.building_min_size, c.building_max_size};
    j["building_height"] = {c.building_min_height, c.building_max_height};
    j["num_scatterers"] = c.num_scatterers;
    j["scatterer_height"] = {c.scatterer_min_height, c.scatterer_max_height};
    j["scatterer_reflection"] = {c.scatterer_min_reflection, c.scatterer_max_reflection};
    j["carrier_frequency"] = c.carrier_frequency;
    j["subcarriers_per_rb"] = c.subcarriers_per_rb;
    j["symbols_per_slot"] = c.symbols_per_slot;
    j["num_rx_antennas"] = c.num_rx_antennas;
    j["noise_figure_db"] = c.noise_figure_db;
    j["penetration_loss_db"] = c.penetration_loss_db;
}

void from_json(const nlohmann::json &j, ScenarioConfig &c)
{
    c = ScenarioConfig{};
    if (j.contains("area")) {
        c.area.width = j.at("area").at("width").get<double>();
        c.area.height = j.at("area").at("height").get<double>();
    }
    c.num_bs = j.value("num_bs", c.num_bs);
    if (j.contains("bs_positions"))
        for (const auto &p : j.at("bs_positions"))
            c.bs_positions.push_back(vec3_from(p));
    c.bs_height = j.value("bs_height", c.bs_height);
    if (j.contains("antenna_panel")) {
        c.n1 = j.at("antenna_panel").at(0).get<int>();
        c.n2 = j.at("antenna_panel").at(1).get<int>();
    }
    c.tx_power_dbm = j.value("tx_power_dbm", c.tx_power_dbm);
    c.bandwidth_hz = j.value("bandwidth_hz", c.bandwidth_hz);
    c.rb_count = j.value("rb_count", c.rb_count);
    c.num_buildings = j.value("num_buildings", c.num_buildings);
    if (j.contains("building_size")) {
        c.building_min_size = j.at("building_size").at(0).get<double>();
        c.building_max_size = j.at("building_size").at(1).get<double>();
    }
    if (j.contains("building_height")) {
        c.building_min_height = j.at("building_height").at(0).get<double>();
        c.building_max_height = j.at("building_height").at(1).get<double>();
    }
    c.num_scatterers = j.value("num_scatterers", c.num_scatterers);
    if (j.contains("scatterer_height")) {
        c.scatterer_min_height = j.at("scatterer_height").at(0).get<double>();
        c.scatterer_max_height = j.at("scatterer_height").at(1).get<double>();
    }
    if (j.contains("scatterer_reflection")) {
        c.scatterer_min_reflection = j.at("scatterer_reflection").at(0).get<double>();
        c.scatterer_max_reflection = j.at("scatterer_reflection").at(1).get<double>();
    }
    c.carrier_frequency = j.value("carrier_frequency", c.carrier_frequency);
    c.subcarriers_per_rb = j.value("subcarriers_per_rb", c.subcarriers_per_rb);
    c.symbols_per_slot = j.value("symbols_per_slot", c.symbols_per_slot);
    c.num_rx_antennas = j.value("num_rx_antennas", c.num_rx_antennas);
    c.noise_figure_db = j.value("noise_figure_db", c.noise_figure_db);
    c.penetration_loss_db = j.value("penetration_loss_db", c.penetration_loss_db);
}

void to_json(nlohmann::json &j, const Geolocation &g)
{
    j = {{"x", g.position.x()}, {"y", g.position.y()}, {"z", g.position.z()}};
    if (!g.velocity.isZero())
        j["velocity"] = vec3_json(g.velocity);
}

void from_json(const nlohmann::json &j, Geolocation &g)
{
    g.position = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()};
    g.velocity = j.contains("velocity") ? vec3_from(j.at("velocity")) : Vec3::Zero();
}

} // namespace fdran
