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

#ifndef FDRAN_ERRORS_HPP
#define FDRAN_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace fdran {

// Configuration or geometry that violates a documented invariant.
class ConfigError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

// A geolocation outside the scenario area.
class OutOfAreaError : public std::domain_error
{
  public:
    using std::domain_error::domain_error;
};

// H*W does not have full column rank, so the ZF filter does not exist.
class SingularChannelError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// Every precoder hypothesis of an exhaustive search was singular.
class NoValidPrecoderError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

// W < Q*M: no assignment can give every UE its quota.
class InfeasibleProblemError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

} // namespace fdran

#endif
