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

#include "fdran/channel.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "fdran/errors.hpp"

namespace fdran {

namespace {

constexpr double kPi = std::numbers::pi;

struct Ray
{
    cd gain;      // complex amplitude, power scaling and blockage included
    double delay; // seconds
    CVector a_tx;
    CVector a_rx;
};

void require_inside(const Scenario &s, const Geolocation &ue)
{
    if (!s.area.contains(ue.position.x(), ue.position.y()) || !std::isfinite(ue.position.z()))
        throw OutOfAreaError("geolocation (" + std::to_string(ue.position.x()) + ", " +
                             std::to_string(ue.position.y()) + ") is outside the scenario area");
}

bool path_blocked(const Scenario &s, const Vec3 &a, const Vec3 &b)
{
    for (const auto &box : s.buildings)
        if (segment_intersects_box(a, b, box))
            return true;
    return false;
}

double amplitude_loss(const Scenario &s) { return std::pow(10.0, -s.penetration_loss_db / 20.0); }

std::vector<Ray> trace(const Scenario &s, const BaseStation &bs, const Vec3 &ue_pos, const RayAttenuation &att)
{
    const double lambda = s.wavelength();
    const double ptx_w = std::pow(10.0, (bs.tx_power_dbm - 30.0) / 10.0);
    // Transmit power is spread evenly across the physical subcarriers.
    const double per_re = std::sqrt(ptx_w / (12.0 * bs.rb_count));
    std::vector<Ray> rays;
    rays.reserve(1 + s.scatterers.size());

    const Vec3 los = ue_pos - bs.position;
    const double d = std::max(los.norm(), 1.0);
    rays.push_back({cd(per_re * att.los * lambda / (4.0 * kPi * d), 0.0), d / kSpeedOfLight,
                    bs_steering(bs, los.normalized()), ue_steering(s.num_rx_antennas, -los.normalized())});

    for (std::size_t i = 0; i < s.scatterers.size(); ++i) {
        const auto &sc = s.scatterers[i];
        const Vec3 leg1 = sc.position - bs.position;
        const Vec3 leg2 = ue_pos - sc.position;
        const double len = std::max(leg1.norm() + leg2.norm(), 1.0);
        const double amp = per_re * att.scatter[i] * sc.reflection * lambda / (4.0 * kPi * len);
        rays.push_back({std::polar(amp, sc.phase_rad), len / kSpeedOfLight, bs_steering(bs, leg1.normalized()),
                        ue_steering(s.num_rx_antennas, -leg2.normalized())});
    }
    return rays;
}

CMatrix combine(const std::vector<Ray> &rays, double freq, int n_r, int n_t)
{
    CMatrix h = CMatrix::Zero(n_r, n_t);
    for (const auto &r : rays) {
        const cd g = r.gain * std::polar(1.0, -2.0 * kPi * freq * r.delay);
        h.noalias() += (g * r.a_rx) * r.a_tx.adjoint();
    }
    return h;
}

// Position at symbol t. Motion within one slot never leaves the area in
// practice; if it would, the slot is evaluated at the reported position.
Geolocation located_at(const Scenario &s, const Geolocation &ue, int t)
{
    Geolocation at = ue;
    at.position = ue.position + ue.velocity * (t * kSymbolDuration);
    if (!s.area.contains(at.position.x(), at.position.y()))
        at.position = ue.position;
    return at;
}

} // namespace

bool segment_intersects_box(const Vec3 &p0, const Vec3 &p1, const Building &box)
{
    double t_min = 0.0;
    double t_max = 1.0;
    const Vec3 d = p1 - p0;
    for (int axis = 0; axis < 3; ++axis) {
        if (std::abs(d[axis]) < 1e-12) {
            if (p0[axis] < box.min[axis] || p0[axis] > box.max[axis])
                return false;
            continue;
        }
        double t0 = (box.min[axis] - p0[axis]) / d[axis];
        double t1 = (box.max[axis] - p0[axis]) / d[axis];
        if (t0 > t1)
            std::swap(t0, t1);
        t_min = std::max(t_min, t0);
        t_max = std::min(t_max, t1);
        if (t_min > t_max)
            return false;
    }
    return true;
}

RayAttenuation blockage(const Scenario &s, int bs_id, const Geolocation &ue)
{
    require_inside(s, ue);
    const auto &bs = s.bs(bs_id);
    const double loss = amplitude_loss(s);
    RayAttenuation att;
    att.los = path_blocked(s, bs.position, ue.position) ? loss : 1.0;
    att.scatter.reserve(s.scatterers.size());
    for (const auto &sc : s.scatterers) {
        const bool blocked = path_blocked(s, bs.position, sc.position) || path_blocked(s, sc.position, ue.position);
        att.scatter.push_back(blocked ? loss : 1.0);
    }
    return att;
}

double subcarrier_frequency(const Scenario &s, const BaseStation &bs, int k)
{
    const int n = s.subcarriers_per_rb * bs.rb_count;
    if (k < 0 || k >= n)
        throw std::out_of_range("subcarrier index " + std::to_string(k) + " outside [0, " + std::to_string(n) + ")");
    const double spacing = bs.bandwidth_hz / n;
    return s.carrier_frequency + (k + 0.5 - n / 2.0) * spacing;
}

CVector bs_steering(const BaseStation &bs, const Vec3 &u)
{
    const Vec3 e_h{-std::sin(bs.boresight_rad), std::cos(bs.boresight_rad), 0.0};
    const double uh = e_h.dot(u);
    const double uv = u.z();
    CVector a(bs.num_tx_antennas);
    // Port p = g*N1*N2 + n1*N2 + n2 sits at column g*N1 + n1, row n2 of a
    // half-wavelength grid, so the two halves differ by a pure phase.
    for (int g = 0; g < 2; ++g)
        for (int i1 = 0; i1 < bs.n1; ++i1)
            for (int i2 = 0; i2 < bs.n2; ++i2) {
                const int col = g * bs.n1 + i1;
                a(g * bs.n1 * bs.n2 + i1 * bs.n2 + i2) = std::polar(1.0, kPi * (col * uh + i2 * uv));
            }
    return a;
}

CVector ue_steering(int num_rx, const Vec3 &u)
{
    CVector a(num_rx);
    for (int n = 0; n < num_rx; ++n)
        a(n) = std::polar(1.0, kPi * n * u.x());
    return a;
}

ChannelMatrix channel_matrix(const Scenario &s, int bs_id, const Geolocation &ue, int k, int t)
{
    require_inside(s, ue);
    const auto &bs = s.bs(bs_id);
    const double f = subcarrier_frequency(s, bs, k);
    const Geolocation at = located_at(s, ue, t);
    const auto rays = trace(s, bs, at.position, blockage(s, bs_id, at));
    return {combine(rays, f, s.num_rx_antennas, bs.num_tx_antennas), k, t};
}

std::vector<CMatrix> rb_channels(const Scenario &s, int bs_id, const Geolocation &ue, int rb)
{
    require_inside(s, ue);
    const auto &bs = s.bs(bs_id);
    if (rb < 0 || rb >= bs.rb_count)
        throw std::out_of_range("RB index " + std::to_string(rb) + " out of range");
    const int K = s.subcarriers_per_rb;
    const int T = s.symbols_per_slot;
    std::vector<CMatrix> out(static_cast<std::size_t>(K * T));
    for (int t = 0; t < T; ++t) {
        const Geolocation at = located_at(s, ue, t);
        const auto rays = trace(s, bs, at.position, blockage(s, bs_id, at));
        for (int k = 0; k < K; ++k) {
            const double f = subcarrier_frequency(s, bs, rb * K + k);
            out[static_cast<std::size_t>(k * T + t)] = combine(rays, f, s.num_rx_antennas, bs.num_tx_antennas);
        }
    }
    return out;
}

} // namespace fdran
