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

#include "fdran/bicm.hpp"

#include <Eigen/Core>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace fdran {

namespace {

struct GaussHermite
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

// Golub-Welsch: nodes are eigenvalues of the Hermite Jacobi matrix.
GaussHermite gauss_hermite(int n)
{
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(n, n);
    for (int k = 1; k < n; ++k)
        J(k, k - 1) = J(k - 1, k) = std::sqrt(k / 2.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(J);
    GaussHermite gh;
    for (int i = 0; i < n; ++i) {
        gh.nodes.push_back(es.eigenvalues()(i));
        const double v0 = es.eigenvectors()(0, i);
        gh.weights.push_back(std::sqrt(std::numbers::pi) * v0 * v0);
    }
    return gh;
}

double log_sum_exp(std::span<const double> v)
{
    const double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v)
        s += std::exp(x - m);
    return m + std::log(s);
}

// BICM capacity of Gray-labelled unit-energy PAM, y = a + n, n ~ N(0, 1/snr).
double bicm_pam(int bits, double snr, const GaussHermite &gh)
{
    const int levels = 1 << bits;
    const double scale = std::sqrt(3.0 / (levels * levels - 1.0));
    std::vector<double> amp(static_cast<std::size_t>(levels));
    std::vector<int> label(static_cast<std::size_t>(levels));
    for (int i = 0; i < levels; ++i) {
        amp[static_cast<std::size_t>(i)] = (2.0 * i - (levels - 1)) * scale;
        label[static_cast<std::size_t>(i)] = i ^ (i >> 1);
    }
    const double sigma = std::sqrt(1.0 / snr);
    std::vector<double> ll(static_cast<std::size_t>(levels));
    std::vector<double> same;
    double loss = 0.0; // expected sum over bits of log2(sum_all / sum_same)
    for (int i = 0; i < levels; ++i)
        for (std::size_t q = 0; q < gh.nodes.size(); ++q) {
            const double y = amp[static_cast<std::size_t>(i)] + std::sqrt(2.0) * sigma * gh.nodes[q];
            for (int j = 0; j < levels; ++j) {
                const double d = y - amp[static_cast<std::size_t>(j)];
                ll[static_cast<std::size_t>(j)] = -d * d / (2.0 * sigma * sigma);
            }
            const double all = log_sum_exp(ll);
            double term = 0.0;
            for (int b = 0; b < bits; ++b) {
                same.clear();
                const int bit = (label[static_cast<std::size_t>(i)] >> b) & 1;
                for (int j = 0; j < levels; ++j)
                    if (((label[static_cast<std::size_t>(j)] >> b) & 1) == bit)
                        same.push_back(ll[static_cast<std::size_t>(j)]);
                term += all - log_sum_exp(same);
            }
            loss += gh.weights[q] / std::sqrt(std::numbers::pi) * term / std::numbers::ln2;
        }
    return std::max(0.0, bits - loss / levels);
}

} // namespace

double bicm_capacity(int order, double snr, int quadrature_points)
{
    if (order < 2 || order % 2 != 0)
        throw std::invalid_argument("square QAM needs an even modulation order >= 2");
    if (!(snr > 0.0))
        throw std::invalid_argument("SNR must be positive");
    static thread_local int cached_n = 0;
    static thread_local GaussHermite gh;
    if (cached_n != quadrature_points) {
        gh = gauss_hermite(quadrature_points);
        cached_n = quadrature_points;
    }
    return 2.0 * bicm_pam(order / 2, snr, gh);
}

} // namespace fdran
