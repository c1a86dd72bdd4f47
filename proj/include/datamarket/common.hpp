// Copyright 2026 The datamarket Authors
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <stdexcept>
#include <string>

namespace datamarket {

using Money = double;

// Absolute tolerance for all equality/inequality checks on money amounts.
inline constexpr double kMoneyTol = 1e-9;

// Largest exact-enumeration budget for the envy-free pricing solver.
inline constexpr unsigned long long kDefaultEnumerationCap = 5'000'000;

inline constexpr const char* kToolVersion = "0.1.0";

// Invalid or inconsistent user-supplied configuration. The message names
// the offending field.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// An exact solve was requested on an instance larger than the configured
// enumeration budget.
class SizeCapError : public std::runtime_error {
 public:
  explicit SizeCapError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace datamarket
