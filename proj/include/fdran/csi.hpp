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

#ifndef FDRAN_CSI_HPP
#define FDRAN_CSI_HPP

#include <string>

#include "json.hpp"

namespace fdran {

inline constexpr int kNumCqi = 16;

// One RB's channel state: rank, one CQI per codeword, flat codebook PMI.
// cqi2 mirrors cqi1 when ri == 1.
struct CsiReport
{
    int ri = 1;
    int cqi1 = 0;
    int cqi2 = 0;
    int pmi = 0;

    friend bool operator==(const CsiReport &, const CsiReport &) = default;
};

// Layers carried by codeword 0 and codeword 1 for a given rank.
struct CodewordLayers
{
    int cw0 = 1;
    int cw1 = 0;
};

// ri=1 -> 1+0, ri=2 -> 1+1, ri=3 -> 1+2, ri=4 -> 2+2.
constexpr CodewordLayers codeword_layers(int ri)
{
    switch (ri) {
    case 1:
        return {1, 0};
    case 2:
        return {1, 1};
    case 3:
        return {1, 2};
    case 4:
        return {2, 2};
    default:
        return {0, 0};
    }
}

void to_json(nlohmann::json &j, const CsiReport &r);
void from_json(const nlohmann::json &j, CsiReport &r);

} // namespace fdran

#endif
