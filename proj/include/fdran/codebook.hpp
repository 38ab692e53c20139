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

#ifndef FDRAN_CODEBOOK_HPP
#define FDRAN_CODEBOOK_HPP

#include <span>
#include <vector>

#include "fdran/channel.hpp"
#include "json.hpp"

namespace fdran {

struct CodebookConfig
{
    int n1 = 2;
    int n2 = 1;
    int o1 = 4;
    int o2 = 1;
    int max_rank = 4;
    int num_tx_antennas = 4; // must equal 2 * n1 * n2
    int num_rx_antennas = 4;

    void validate() const;
};

struct PrecoderIndex
{
    int rank = 1;
    int i11 = 0;
    int i12 = 0;
    int i13 = 0;
    int i2 = 0;

    friend bool operator==(const PrecoderIndex &, const PrecoderIndex &) = default;
};

struct Precoder
{
    CMatrix matrix; // N_T x rank, unit Frobenius norm
    PrecoderIndex index;
    int flat_index = 0;

    int rank() const { return index.rank; }
};

// Oversampled DFT beam: element m = exp(j 2 pi m index / (n O)) / sqrt(n).
CVector dft_beam(int n, int index, int oversampling);

// Companion beam offsets (in oversampled index units) selectable by i13.
// Rank 2 includes the zero offset; ranks 3 and 4 need an orthogonal beam.
std::vector<std::pair<int, int>> companion_offsets(const CodebookConfig &cfg, int rank);

// Type-I single-panel codebook with one beam per layer group.
//
// Ports form two halves of N1*N2 each. A layer is [v; +-phi v] where v is the
// 2-D DFT beam (i11, i12) or its i13 companion, and phi = exp(j pi i2 / 2).
//   rank 1: [v; phi v]
//   rank 2: [v, v'; phi v, -phi v']
//   rank 3: [v, v', v; phi v, phi v', -phi v]
//   rank 4: [v, v', v, v'; phi v, phi v', -phi v, -phi v']
// Precoders are ordered rank-major, then i11, i12, i13, i2, and the flat
// index is the position in that order.
class Codebook
{
  public:
    explicit Codebook(const CodebookConfig &cfg);

    const CodebookConfig &config() const { return cfg_; }
    std::size_t size() const { return precoders_.size(); }
    const Precoder &operator[](std::size_t flat) const { return precoders_.at(flat); }
    std::span<const Precoder> all() const { return precoders_; }

    // Precoders of one rank, a contiguous range of the flat order.
    std::span<const Precoder> of_rank(int rank) const;
    int rank_offset(int rank) const;
    int rank_count(int rank) const;
    int max_rank() const { return cfg_.max_rank; }

    int flat_index(const PrecoderIndex &idx) const;

  private:
    CodebookConfig cfg_;
    std::vector<Precoder> precoders_;
    std::vector<int> offsets_; // offsets_[r-1] = first flat index of rank r; back() = size
};

Codebook build_codebook(const CodebookConfig &cfg);

// Lookup by flat PMI; the index must fall inside the given rank's range.
const Precoder &precoder_by_pmi(const Codebook &cb, int rank, int pmi);

nlohmann::json codebook_to_json(const Codebook &cb);

void to_json(nlohmann::json &j, const CodebookConfig &c);
void from_json(const nlohmann::json &j, CodebookConfig &c);

} // namespace fdran

#endif
