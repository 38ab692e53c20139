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

#ifndef FDRAN_BICM_HPP
#define FDRAN_BICM_HPP

namespace fdran {

// BICM capacity (bits per complex symbol) of Gray-labelled square QAM with
// 2^order points on AWGN at linear Es/N0 `snr`. Computed per real dimension
// as PAM by Gauss-Hermite quadrature.
double bicm_capacity(int order, double snr, int quadrature_points = 80);

} // namespace fdran

#endif
