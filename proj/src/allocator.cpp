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

#include "fdran/allocator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>
#include <string>

#include "fdran/errors.hpp"

namespace fdran {

namespace {

constexpr int kMaxSweeps = 100000;

// Improvements below this fraction of the largest rate count as ties.
double improvement_tolerance(const AllocProblem &p)
{
    const double top = p.rates.size() > 0 ? p.rates.maxCoeff() : 0.0;
    return 1e-12 * std::max(top, 0.0);
}

struct ExchangeState
{
    const AllocProblem &p;
    std::vector<int> &owner;
    std::vector<int> load;
    double tol;

    ExchangeState(const AllocProblem &prob, std::vector<int> &own)
        : p(prob), owner(own), load(Matching{own}.loads(prob.num_ues())), tol(improvement_tolerance(prob))
    {
    }

    double r(int w, int m) const { return p.rates(w, m); }

    double swap_gain(int i, int j) const
    {
        const int oi = owner[static_cast<std::size_t>(i)];
        const int oj = owner[static_cast<std::size_t>(j)];
        return r(i, oj) + r(j, oi) - r(i, oi) - r(j, oj);
    }

    // Gain of handing RB w to UE m; nullopt when the donor would fall below quota.
    std::optional<double> move_gain(int w, int m) const
    {
        const int o = owner[static_cast<std::size_t>(w)];
        if (load[static_cast<std::size_t>(o)] - 1 < p.quota)
            return std::nullopt;
        return r(w, m) - r(w, o);
    }

    void move(int w, int m)
    {
        --load[static_cast<std::size_t>(owner[static_cast<std::size_t>(w)])];
        ++load[static_cast<std::size_t>(m)];
        owner[static_cast<std::size_t>(w)] = m;
    }
};

void require_shape(const Matching &m, const AllocProblem &p)
{
    if (static_cast<int>(m.owner.size()) != p.num_rbs())
        throw std::invalid_argument("matching covers " + std::to_string(m.owner.size()) + " RBs, problem has " +
                                    std::to_string(p.num_rbs()));
    for (int o : m.owner)
        if (o < 0 || o >= p.num_ues())
            throw std::invalid_argument("matching assigns an RB to unknown UE " + std::to_string(o));
}

} // namespace

void AllocProblem::validate() const
{
    if (num_ues() < 1)
        throw ConfigError("allocation problem needs at least one UE");
    if (quota < 1)
        throw ConfigError("quota Q must be at least 1");
    if (!rates.allFinite() || (rates.size() > 0 && rates.minCoeff() < 0.0))
        throw ConfigError("rates must be finite and nonnegative");
    if (!row_labels.empty() && static_cast<int>(row_labels.size()) != num_rbs())
        throw ConfigError("row label count does not match the rate matrix");
    if (!ue_ids.empty() && static_cast<int>(ue_ids.size()) != num_ues())
        throw ConfigError("UE id count does not match the rate matrix");
    if (static_cast<long>(num_rbs()) < static_cast<long>(quota) * num_ues())
        throw InfeasibleProblemError("infeasible: W = " + std::to_string(num_rbs()) + " < Q*M = " +
                                     std::to_string(quota) + "*" + std::to_string(num_ues()));
}

AllocProblem make_problem(const RateMatrix &rm, int quota)
{
    AllocProblem p;
    p.rates = rm.rates;
    p.quota = quota;
    p.row_labels = rm.rows;
    p.ue_ids.resize(static_cast<std::size_t>(rm.rates.cols()));
    std::iota(p.ue_ids.begin(), p.ue_ids.end(), 0);
    return p;
}

std::vector<std::vector<int>> Matching::by_ue(int num_ues) const
{
    std::vector<std::vector<int>> out(static_cast<std::size_t>(num_ues));
    for (std::size_t w = 0; w < owner.size(); ++w)
        out.at(static_cast<std::size_t>(owner[w])).push_back(static_cast<int>(w));
    return out;
}

std::vector<int> Matching::loads(int num_ues) const
{
    std::vector<int> out(static_cast<std::size_t>(num_ues), 0);
    for (int o : owner)
        ++out.at(static_cast<std::size_t>(o));
    return out;
}

bool is_feasible(const Matching &m, const AllocProblem &p)
{
    if (static_cast<int>(m.owner.size()) != p.num_rbs())
        return false;
    for (int o : m.owner)
        if (o < 0 || o >= p.num_ues())
            return false;
    const auto load = m.loads(p.num_ues());
    return std::all_of(load.begin(), load.end(), [&](int l) { return l >= p.quota; });
}

double sum_rate(const Matching &m, const AllocProblem &p)
{
    require_shape(m, p);
    double s = 0.0;
    for (int w = 0; w < p.num_rbs(); ++w)
        s += p.rates(w, m.owner[static_cast<std::size_t>(w)]);
    return s;
}

std::vector<double> per_ue_throughput(const Matching &m, const AllocProblem &p)
{
    require_shape(m, p);
    std::vector<double> t(static_cast<std::size_t>(p.num_ues()), 0.0);
    for (int w = 0; w < p.num_rbs(); ++w)
        t[static_cast<std::size_t>(m.owner[static_cast<std::size_t>(w)])] +=
            p.rates(w, m.owner[static_cast<std::size_t>(w)]);
    return t;
}

std::vector<double> assigned_rates(const Matching &m, const AllocProblem &p)
{
    require_shape(m, p);
    std::vector<double> r(static_cast<std::size_t>(p.num_rbs()));
    for (int w = 0; w < p.num_rbs(); ++w)
        r[static_cast<std::size_t>(w)] = p.rates(w, m.owner[static_cast<std::size_t>(w)]);
    return r;
}

Matching init_matching(const AllocProblem &p)
{
    p.validate();
    const int W = p.num_rbs();
    const int M = p.num_ues();
    std::vector<std::vector<int>> prefs(static_cast<std::size_t>(M));
    for (int m = 0; m < M; ++m) {
        auto &pl = prefs[static_cast<std::size_t>(m)];
        pl.resize(static_cast<std::size_t>(W));
        std::iota(pl.begin(), pl.end(), 0);
        std::stable_sort(pl.begin(), pl.end(), [&](int a, int b) { return p.rates(a, m) > p.rates(b, m); });
    }
    Matching out;
    out.owner.assign(static_cast<std::size_t>(W), -1);
    std::vector<int> load(static_cast<std::size_t>(M), 0);
    std::vector<int> best_proposer(static_cast<std::size_t>(W));
    for (;;) {
        std::fill(best_proposer.begin(), best_proposer.end(), -1);
        bool any = false;
        for (int m = 0; m < M; ++m) {
            int want = p.quota - load[static_cast<std::size_t>(m)];
            for (int w : prefs[static_cast<std::size_t>(m)]) {
                if (want <= 0)
                    break;
                if (out.owner[static_cast<std::size_t>(w)] >= 0)
                    continue;
                auto &b = best_proposer[static_cast<std::size_t>(w)];
                // UEs propose in index order, so a strict comparison keeps the smallest index on ties.
                if (b < 0 || p.rates(w, m) > p.rates(w, b))
                    b = m;
                --want;
                any = true;
            }
        }
        if (!any)
            break;
        for (int w = 0; w < W; ++w) {
            const int b = best_proposer[static_cast<std::size_t>(w)];
            if (b >= 0) {
                out.owner[static_cast<std::size_t>(w)] = b;
                ++load[static_cast<std::size_t>(b)];
            }
        }
    }
    for (int w = 0; w < W; ++w) {
        if (out.owner[static_cast<std::size_t>(w)] >= 0)
            continue;
        Eigen::Index best = 0;
        p.rates.row(w).maxCoeff(&best);
        out.owner[static_cast<std::size_t>(w)] = static_cast<int>(best);
    }
    return out;
}

MamaResult exchange_phase(const AllocProblem &p, Matching start)
{
    p.validate();
    if (!is_feasible(start, p))
        throw std::invalid_argument("exchange phase needs a feasible starting matching");
    MamaResult res;
    res.matching = std::move(start);
    res.init_sum_rate = sum_rate(res.matching, p);
    ExchangeState st(p, res.matching.owner);
    const int W = p.num_rbs();
    double current = res.init_sum_rate;
    for (bool changed = true; changed;) {
        changed = false;
        if (++res.sweeps > kMaxSweeps)
            throw std::logic_error("exchange phase exceeded the sweep guard");
        for (int i = 0; i < W; ++i) {
            for (int j = i + 1; j < W; ++j) {
                const int oi = st.owner[static_cast<std::size_t>(i)];
                const int oj = st.owner[static_cast<std::size_t>(j)];
                if (oi == oj)
                    continue;
                ++res.pair_evaluations;
                const double t1 = st.swap_gain(i, j);
                const double t2 = st.move_gain(i, oj).value_or(0.0); // j's UE takes i
                const double t3 = st.move_gain(j, oi).value_or(0.0); // i's UE takes j
                double best = st.tol;
                int pick = 0;
                if (t1 > best) {
                    best = t1;
                    pick = 1;
                }
                if (t2 > best) {
                    best = t2;
                    pick = 2;
                }
                if (t3 > best) {
                    best = t3;
                    pick = 3;
                }
                if (pick == 0)
                    continue;
                if (pick == 1) {
                    st.owner[static_cast<std::size_t>(i)] = oj;
                    st.owner[static_cast<std::size_t>(j)] = oi;
                } else if (pick == 2) {
                    st.move(i, oj);
                } else {
                    st.move(j, oi);
                }
                current += best;
                res.trace.push_back(current);
                ++res.accepted;
                changed = true;
            }
        }
    }
    return res;
}

MamaResult m3_mama(const AllocProblem &p) { return exchange_phase(p, init_matching(p)); }

StabilityResult is_pairwise_stable(const Matching &m, const AllocProblem &p)
{
    p.validate();
    if (!is_feasible(m, p))
        throw std::invalid_argument("stability is defined for feasible matchings only");
    auto owner = m.owner;
    const ExchangeState st(p, owner);
    const auto held = m.by_ue(p.num_ues());
    for (int w = 0; w < p.num_rbs(); ++w) {
        for (int ue = 0; ue < p.num_ues(); ++ue) {
            if (ue == owner[static_cast<std::size_t>(w)])
                continue;
            if (const auto g = st.move_gain(w, ue); g && *g > st.tol)
                return {false, std::pair{ue, w}};
            for (int j : held[static_cast<std::size_t>(ue)])
                if (st.swap_gain(w, j) > st.tol)
                    return {false, std::pair{ue, w}};
        }
    }
    return {};
}

Matching round_robin(const AllocProblem &p)
{
    p.validate();
    Matching out;
    out.owner.resize(static_cast<std::size_t>(p.num_rbs()));
    for (int w = 0; w < p.num_rbs(); ++w)
        out.owner[static_cast<std::size_t>(w)] = w % p.num_ues();
    return out;
}

Matching best_cqi(const AllocProblem &p)
{
    p.validate();
    Matching out;
    out.owner.resize(static_cast<std::size_t>(p.num_rbs()));
    for (int w = 0; w < p.num_rbs(); ++w) {
        Eigen::Index best = 0;
        p.rates.row(w).maxCoeff(&best);
        out.owner[static_cast<std::size_t>(w)] = static_cast<int>(best);
    }
    auto load = out.loads(p.num_ues());
    for (int m = 0; m < p.num_ues(); ++m) {
        while (load[static_cast<std::size_t>(m)] < p.quota) {
            int pick = -1;
            double pick_loss = 0.0;
            for (int w = 0; w < p.num_rbs(); ++w) {
                const int o = out.owner[static_cast<std::size_t>(w)];
                if (o == m || load[static_cast<std::size_t>(o)] <= p.quota)
                    continue;
                const double loss = p.rates(w, o) - p.rates(w, m);
                if (pick < 0 || loss < pick_loss) {
                    pick = w;
                    pick_loss = loss;
                }
            }
            if (pick < 0)
                throw std::logic_error("best-CQI repair found no donor RB");
            --load[static_cast<std::size_t>(out.owner[static_cast<std::size_t>(pick)])];
            ++load[static_cast<std::size_t>(m)];
            out.owner[static_cast<std::size_t>(pick)] = m;
        }
    }
    return out;
}

BruteForceResult brute_force_optimal(const AllocProblem &p)
{
    p.validate();
    const int W = p.num_rbs();
    const int M = p.num_ues();
    if (std::pow(static_cast<double>(M), W) > kBruteForceLimit)
        throw std::invalid_argument("brute force needs M^W <= 1e7, got " + std::to_string(M) + "^" +
                                    std::to_string(W));
    BruteForceResult res;
    std::vector<int> owner(static_cast<std::size_t>(W), 0);
    std::vector<int> load(static_cast<std::size_t>(M), 0);
    load[0] = W;
    double best = -1.0;
    // Odometer with the last RB as the fastest digit: lexicographic order, first optimum kept.
    for (;;) {
        ++res.enumerated;
        if (std::all_of(load.begin(), load.end(), [&](int l) { return l >= p.quota; })) {
            ++res.feasible;
            double s = 0.0;
            for (int w = 0; w < W; ++w)
                s += p.rates(w, owner[static_cast<std::size_t>(w)]);
            if (s > best) {
                best = s;
                res.matching.owner = owner;
            }
        }
        int w = W - 1;
        while (w >= 0 && owner[static_cast<std::size_t>(w)] == M - 1) {
            --load[static_cast<std::size_t>(M - 1)];
            ++load[0];
            owner[static_cast<std::size_t>(w)] = 0;
            --w;
        }
        if (w < 0)
            break;
        --load[static_cast<std::size_t>(owner[static_cast<std::size_t>(w)])];
        ++owner[static_cast<std::size_t>(w)];
        ++load[static_cast<std::size_t>(owner[static_cast<std::size_t>(w)])];
    }
    return res;
}

double jain_index(std::span<const double> throughputs)
{
    if (throughputs.empty())
        throw std::invalid_argument("Jain index of an empty throughput list");
    double s = 0.0, s2 = 0.0;
    for (double x : throughputs) {
        s += x;
        s2 += x * x;
    }
    if (s2 == 0.0)
        return 1.0; // all equal
    return s * s / (static_cast<double>(throughputs.size()) * s2);
}

double spectral_efficiency(double sum_rate_mbps, double bandwidth_mhz)
{
    if (!(bandwidth_mhz > 0.0))
        throw std::invalid_argument("bandwidth must be positive");
    return sum_rate_mbps / bandwidth_mhz;
}

std::vector<std::pair<double, double>> per_rb_cdf(const Matching &m, const AllocProblem &p)
{
    auto r = assigned_rates(m, p);
    std::sort(r.begin(), r.end());
    std::vector<std::pair<double, double>> out;
    out.reserve(r.size());
    for (std::size_t i = 0; i < r.size(); ++i)
        out.emplace_back(r[i], static_cast<double>(i + 1) / static_cast<double>(r.size()));
    return out;
}

void write_rates_csv(const Eigen::MatrixXd &rates, std::ostream &out)
{
    out << "rb";
    for (Eigen::Index m = 0; m < rates.cols(); ++m)
        out << ",ue" << m;
    out << '\n';
    char buf[32];
    for (Eigen::Index w = 0; w < rates.rows(); ++w) {
        out << w;
        for (Eigen::Index m = 0; m < rates.cols(); ++m) {
            std::snprintf(buf, sizeof buf, "%.17g", rates(w, m));
            out << ',' << buf;
        }
        out << '\n';
    }
}

Eigen::MatrixXd read_rates_csv(std::istream &in)
{
    std::string line;
    if (!std::getline(in, line))
        throw ConfigError("rate CSV is empty");
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        std::istringstream ls(line);
        std::string cell;
        std::getline(ls, cell, ','); // row index
        std::vector<double> row;
        while (std::getline(ls, cell, ',')) {
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception &) {
                throw ConfigError("rate CSV: bad number \"" + cell + "\"");
            }
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ConfigError("rate CSV rows have different lengths");
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd r(static_cast<Eigen::Index>(rows.size()),
                      rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t w = 0; w < rows.size(); ++w)
        for (std::size_t m = 0; m < rows[w].size(); ++m)
            r(static_cast<Eigen::Index>(w), static_cast<Eigen::Index>(m)) = rows[w][m];
    return r;
}

void to_json(nlohmann::json &j, const AllocProblem &p)
{
    nlohmann::json rates = nlohmann::json::array();
    for (Eigen::Index w = 0; w < p.rates.rows(); ++w) {
        nlohmann::json row = nlohmann::json::array();
        for (Eigen::Index m = 0; m < p.rates.cols(); ++m)
            row.push_back(p.rates(w, m));
        rates.push_back(row);
    }
    j = {{"rates", rates}, {"quota", p.quota}, {"row_labels", p.row_labels}, {"ue_ids", p.ue_ids}};
}

void from_json(const nlohmann::json &j, AllocProblem &p)
{
    const auto &rates = j.at("rates");
    const auto W = static_cast<Eigen::Index>(rates.size());
    const Eigen::Index M = W > 0 ? static_cast<Eigen::Index>(rates[0].size()) : 0;
    p.rates.resize(W, M);
    for (Eigen::Index w = 0; w < W; ++w) {
        if (static_cast<Eigen::Index>(rates[static_cast<std::size_t>(w)].size()) != M)
            throw ConfigError("rate matrix rows have different lengths");
        for (Eigen::Index m = 0; m < M; ++m)
            p.rates(w, m) = rates[static_cast<std::size_t>(w)][static_cast<std::size_t>(m)].get<double>();
    }
    p.quota = j.value("quota", 1);
    p.row_labels = j.value("row_labels", std::vector<std::pair<int, int>>{});
    p.ue_ids = j.value("ue_ids", std::vector<int>{});
}

void to_json(nlohmann::json &j, const Matching &m) { j = {{"owner", m.owner}}; }

void from_json(const nlohmann::json &j, Matching &m) { m.owner = j.at("owner").get<std::vector<int>>(); }

} // namespace fdran
