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

#ifndef FDRAN_ALLOCATOR_HPP
#define FDRAN_ALLOCATOR_HPP

#include <Eigen/Core>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "fdran/rate_model.hpp"
#include "json.hpp"

namespace fdran {

struct AllocProblem
{
    Eigen::MatrixXd rates; // W x M, Mbps; row w is a BS-RB pair, column m a UE
    int quota = 1;         // Q, minimum RBs per UE
    std::vector<std::pair<int, int>> row_labels; // (bs_id, rb) per row, optional
    std::vector<int> ue_ids;                     // per column, optional

    int num_rbs() const { return static_cast<int>(rates.rows()); }
    int num_ues() const { return static_cast<int>(rates.cols()); }
    // Throws InfeasibleProblemError when W < Q*M, ConfigError on malformed rates.
    void validate() const;
};

AllocProblem make_problem(const RateMatrix &rm, int quota);

struct Matching
{
    std::vector<int> owner; // owner[w] = UE index

    std::vector<std::vector<int>> by_ue(int num_ues) const;
    std::vector<int> loads(int num_ues) const;
    friend bool operator==(const Matching &, const Matching &) = default;
};

bool is_feasible(const Matching &m, const AllocProblem &p);
double sum_rate(const Matching &m, const AllocProblem &p);
std::vector<double> per_ue_throughput(const Matching &m, const AllocProblem &p);
std::vector<double> assigned_rates(const Matching &m, const AllocProblem &p);

Matching init_matching(const AllocProblem &p);

struct MamaResult
{
    Matching matching;
    double init_sum_rate = 0.0;
    std::vector<double> trace; // sum rate after each accepted exchange
    int accepted = 0;
    int sweeps = 0; // full passes, including the final one without changes
    std::uint64_t pair_evaluations = 0;
};

MamaResult m3_mama(const AllocProblem &p);

// Exchange-phase pass starting from an arbitrary feasible matching.
MamaResult exchange_phase(const AllocProblem &p, Matching start);

struct StabilityResult
{
    bool stable = true;
    // (ue, rb) pair that would both gain from being matched when unstable.
    std::optional<std::pair<int, int>> witness;
};

StabilityResult is_pairwise_stable(const Matching &m, const AllocProblem &p);

Matching round_robin(const AllocProblem &p);
Matching best_cqi(const AllocProblem &p);

struct BruteForceResult
{
    Matching matching;
    std::uint64_t enumerated = 0;
    std::uint64_t feasible = 0;
};

inline constexpr double kBruteForceLimit = 1e7;

BruteForceResult brute_force_optimal(const AllocProblem &p);

double jain_index(std::span<const double> throughputs);
double spectral_efficiency(double sum_rate_mbps, double bandwidth_mhz);
// Sorted (rate, cumulative fraction) points, one per RB.
std::vector<std::pair<double, double>> per_rb_cdf(const Matching &m, const AllocProblem &p);

void write_rates_csv(const Eigen::MatrixXd &rates, std::ostream &out);
Eigen::MatrixXd read_rates_csv(std::istream &in);

void to_json(nlohmann::json &j, const AllocProblem &p);
void from_json(const nlohmann::json &j, AllocProblem &p);
void to_json(nlohmann::json &j, const Matching &m);
void from_json(const nlohmann::json &j, Matching &m);

} // namespace fdran

#endif
