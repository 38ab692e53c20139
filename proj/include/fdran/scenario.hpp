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

#ifndef FDRAN_SCENARIO_HPP
#define FDRAN_SCENARIO_HPP

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "json.hpp"

namespace fdran {

using Vec3 = Eigen::Vector3d;

inline constexpr double kSpeedOfLight = 299792458.0;

// Rectangle [0, width] x [0, height] in meters.
struct Area
{
    double width = 0.0;
    double height = 0.0;

    bool contains(double x, double y) const { return x >= 0.0 && x <= width && y >= 0.0 && y <= height; }
};

struct BaseStation
{
    int id = 0;
    Vec3 position = Vec3::Zero();
    int num_tx_antennas = 4; // 2 * n1 * n2 ports, two co-phased panel halves
    int n1 = 2;              // horizontal beams per half
    int n2 = 1;              // vertical beams per half
    double tx_power_dbm = 10.0;
    double bandwidth_hz = 20e6;
    int rb_count = 8;
    double boresight_rad = 0.0; // azimuth of the panel normal
};

// Axis-aligned box; the footprint is [min.x, max.x] x [min.y, max.y].
struct Building
{
    Vec3 min = Vec3::Zero();
    Vec3 max = Vec3::Zero();

    bool footprint_contains(double x, double y) const
    {
        return x >= min.x() && x <= max.x() && y >= min.y() && y <= max.y();
    }
    bool contains(const Vec3 &p) const
    {
        return (p.array() >= min.array()).all() && (p.array() <= max.array()).all();
    }
};

// Single-bounce point scatterer. Amplitude and phase are fixed per seed.
struct Scatterer
{
    Vec3 position = Vec3::Zero();
    double reflection = 0.5;
    double phase_rad = 0.0;
};

struct Geolocation
{
    Vec3 position = Vec3::Zero();
    Vec3 velocity = Vec3::Zero(); // m/s
};

struct Scenario
{
    Area area;
    std::vector<BaseStation> bs_list;
    std::vector<Building> buildings;
    std::vector<Scatterer> scatterers;
    double noise_power = 0.0;         // sigma_n^2 per subcarrier, W
    double carrier_frequency = 3.5e9; // Hz
    int subcarriers_per_rb = 4;       // K, sampled subcarriers per RB
    int symbols_per_slot = 1;         // T, sampled symbols per RB
    int num_rx_antennas = 4;
    double penetration_loss_db = 20.0;
    std::uint64_t seed = 0;

    const BaseStation &bs(int id) const;
    double wavelength() const { return kSpeedOfLight / carrier_frequency; }
    int total_rbs() const;
    void validate() const;
};

// Parameters for generate_scenario. Sizes are meters, powers dBm.
struct ScenarioConfig
{
    Area area{400.0, 300.0};
    int num_bs = 3;
    std::vector<Vec3> bs_positions; // explicit placement; empty = seeded placement
    double bs_height = 30.0;
    int n1 = 2;
    int n2 = 1;
    double tx_power_dbm = 10.0;
    double bandwidth_hz = 20e6;
    int rb_count = 8;
    int num_buildings = 6;
    double building_min_size = 25.0;
    double building_max_size = 60.0;
    double building_min_height = 10.0;
    double building_max_height = 25.0;
    int num_scatterers = 24;
    double scatterer_min_height = 2.0;
    double scatterer_max_height = 15.0;
    double scatterer_min_reflection = 0.2;
    double scatterer_max_reflection = 0.6;
    double carrier_frequency = 3.5e9;
    int subcarriers_per_rb = 4;
    int symbols_per_slot = 1;
    int num_rx_antennas = 4;
    double noise_figure_db = 9.0;
    double penetration_loss_db = 20.0;

    // Five rooftop BSs, nine buildings, 100 RBs per BS over 400 m x 300 m.
    static ScenarioConfig full_scale_layout();
    void validate() const;
};

Scenario generate_scenario(const ScenarioConfig &config, std::uint64_t seed);

// Thermal noise per physical subcarrier for the given BS bandwidth.
double thermal_noise_power(double bandwidth_hz, int rb_count, double noise_figure_db);

// Uniform over the area minus building footprints, at pedestrian height.
std::vector<Geolocation> sample_geolocations(const Scenario &s, std::size_t n, std::uint64_t seed);

inline constexpr double kUeHeight = 1.5;

// Constant-velocity straight-line motion with specular reflection at the area
// boundary. The returned velocity reflects the direction after bouncing.
Geolocation advance(const Geolocation &ue, const Area &area, double speed_kmh, double delta_t_s, double heading_rad);

void to_json(nlohmann::json &j, const Scenario &s);
void from_json(const nlohmann::json &j, Scenario &s);
void to_json(nlohmann::json &j, const ScenarioConfig &c);
void from_json(const nlohmann::json &j, ScenarioConfig &c);
void to_json(nlohmann::json &j, const Geolocation &g);
void from_json(const nlohmann::json &j, Geolocation &g);

} // namespace fdran

#endif
