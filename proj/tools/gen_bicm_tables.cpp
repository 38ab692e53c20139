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

// Writes the BICM capacity tables shipped in data/.
//
//   gen_bicm_tables <output-dir>
//
// One CSV per modulation order with columns snr_db,bits on a 0.25 dB grid
// from -20 dB to 40 dB.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>

#include "fdran/bicm.hpp"

int main(int argc, char **argv)
{
    if (argc != 2) {
        std::fprintf(stderr, "usage: %s <output-dir>\n", argv[0]);
        return 2;
    }
    const std::filesystem::path dir = argv[1];
    const std::pair<int, const char *> files[] = {
        {2, "bicm_qpsk.csv"}, {4, "bicm_16qam.csv"}, {6, "bicm_64qam.csv"}, {8, "bicm_256qam.csv"}};
    for (const auto &[order, name] : files) {
        const std::string path = (dir / name).string();
        std::FILE *out = std::fopen(path.c_str(), "w");
        if (!out) {
            std::fprintf(stderr, "cannot write %s\n", path.c_str());
            return 1;
        }
        std::fprintf(out, "snr_db,bits\n");
        for (int i = 0; i <= 240; ++i) {
            const double db = -20.0 + 0.25 * i;
            std::fprintf(out, "%.2f,%.15f\n", db, fdran::bicm_capacity(order, std::pow(10.0, db / 10.0), 200));
        }
        std::fclose(out);
    }
    return 0;
}
