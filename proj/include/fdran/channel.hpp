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

#ifndef FDRAN_CHANNEL_HPP
#define FDRAN_CHANNEL_HPP

#include <Eigen/Core>

#include <complex>
#include <vector>

#include "fdran/scenario.hpp"

namespace fdran {

using cd = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

// H_{k,t}: N_R x N_T for one subcarrier and one symbol.
struct ChannelMatrix
{
    CMatrix entries;
    int subcarrier = 0;
    int time = 0;
};

// Amplitude factors in (0, 1]; 1 means the ray is unobstructed.
struct RayAttenuation
{
    double los = 1.0;
    std::vector<double> scatter;
};

// Segment [p0, p1] against a closed axis-aligned box.
bool segment_intersects_box(const Vec3 &p0, const Vec3 &p1, const Building &box);

RayAttenuation blockage(const Scenario &s, int bs_id, const Geolocation &ue);

// Frequency of sampled subcarrier k of a BS band (k in [0, K*rb_count)).
double subcarrier_frequency(const Scenario &s, const BaseStation &bs, int k);

// Seconds per sampled symbol index (14 symbols per 1 ms subframe).
inline constexpr double kSymbolDuration = 1e-3 / 14.0;

// Transmit steering vector of a BS panel toward unit direction u.
CVector bs_steering(const BaseStation &bs, const Vec3 &u);

// Receive steering vector of the UE's uniform linear array (x axis).
CVector ue_steering(int num_rx, const Vec3 &u);

// Sum over the LoS ray and every single-bounce scatterer ray:
//   H = sum_r g_r a_rx(r) a_tx(r)^H exp(-j 2 pi f_k tau_r)
// The UE position at symbol t is position + velocity * t * kSymbolDuration.
ChannelMatrix channel_matrix(const Scenario &s, int bs_id, const Geolocation &ue, int k, int t);

// All K*T channel matrices of one RB, subcarrier-major (index = k_local*T + t).
std::vector<CMatrix> rb_channels(const Scenario &s, int bs_id, const Geolocation &ue, int rb);

} // namespace fdran

#endif
