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

#include <cstdint>
#include <string>
#include <vector>

#include "datamarket/common.hpp"
#include "datamarket/valuation.hpp"

#include "json.hpp"

namespace datamarket {

enum class Objective { kWelfare, kProfit };

std::string to_string(Objective o);

struct MuGridSpec {
  double lo_in_sigma = -5.0;
  double hi_in_sigma = 5.0;
  int points = 21;

  std::vector<double> build(double sigma2) const;
};

// Overrides for the deviation families swept by the equilibrium check.
struct DeviationGridSpec {
  std::vector<double> fractions = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
  std::vector<double> shifts_in_sigma = {0.1, 0.5, 1.0};
  std::vector<double> scales = {0.0, 0.5, 2.0};
  std::vector<int> count_deltas = {-2, -1, 1, 2};
  int cap_per_contributor = 1000;
};

// Everything a command run depends on. The seed and grids fully determine
// all stochastic outputs.
struct RunConfig {
  int schema_version = 1;
  std::string name = "unnamed";
  MarketConfig market;
  Objective objective = Objective::kWelfare;
  std::uint64_t seed = 1;
  int reps = 100000;        // Monte Carlo replications
  int rounds = 10000;       // settlement rounds for batch runs
  double mu = 0.0;          // data-generating mean used by simulations
  MuGridSpec mu_grid;
  DeviationGridSpec deviation_grid;
  double epsilon = 0.0;     // pricing-curve approximation budget (0 = exact)
  std::uint64_t enumeration_cap = kDefaultEnumerationCap;
  std::string output = "reports";       // report directory (CLI --out wins)
  // Off the compliant path the settlement books do not balance; the flag
  // records who is understood to absorb the residual. It never changes the
  // price or payment formulas.
  bool broker_absorbs_residual = false;

  std::string config_hash;              // canonical-JSON hash, set on load
  std::vector<std::string> warnings;    // normalization notes, set on load

  nlohmann::json to_json() const;       // canonical form (hash input)
};

// Parses and validates a config document. Unsorted costs are sorted with a
// warning; schema violations throw ConfigError naming the field.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config(const std::string& path);

}  // namespace datamarket
