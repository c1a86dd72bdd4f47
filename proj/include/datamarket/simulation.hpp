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
#include <optional>
#include <string>
#include <vector>

#include "datamarket/mechanism.hpp"
#include "datamarket/strategy.hpp"

#include "json.hpp"

namespace datamarket {

struct UtilityEstimate {
  Money mean = 0.0;
  double std_err = 0.0;
  double mu = 0.0;
  std::optional<Money> closed_form;
};

// Exact expected utility of a contributor playing `strategy` against a
// well-behaved opponent, at true mean mu. Available whenever the submitted
// mean is Gaussian or degenerate (every built-in rule); the discrepancy
// penalty then reduces to squared bias plus the two mean variances.
std::optional<Money> utility_closed_form(const MechanismInputs& inputs,
                                         const MarketConfig& market,
                                         int contributor,
                                         const Strategy& strategy, double mu,
                                         double d_tamper = 1.0);

// Monte Carlo estimate of the same quantity: sample both collectors' data,
// apply the strategy, settle the round, subtract collection cost.
// Bit-reproducible for a fixed seed; the parallel and serial variants agree
// exactly (per-replication streams, fixed-order reduction).
UtilityEstimate simulate_utility(const MechanismInputs& inputs,
                                 const MarketConfig& market, int contributor,
                                 const Strategy& strategy, double mu, int reps,
                                 std::uint64_t seed, double d_tamper = 1.0);
UtilityEstimate simulate_utility_serial(const MechanismInputs& inputs,
                                        const MarketConfig& market,
                                        int contributor,
                                        const Strategy& strategy, double mu,
                                        int reps, std::uint64_t seed,
                                        double d_tamper = 1.0);

// Smallest utility over the mean grid (closed form preferred, Monte Carlo
// fallback). Strategies whose utility does not depend on the mean collapse
// to a single evaluation.
struct WorstCase {
  Money utility = 0.0;
  double mu = 0.0;
  double std_err = 0.0;    // 0 for closed-form evaluations
  bool closed_form = true;
};
WorstCase worst_case_utility(const MechanismInputs& inputs,
                             const MarketConfig& market, int contributor,
                             const Strategy& strategy,
                             const std::vector<double>& mu_grid, int reps,
                             std::uint64_t seed, double d_tamper = 1.0);

// Deviation families evaluated by the equilibrium sweep.
struct DeviationGrid {
  std::vector<double> mu_grid;          // worst-case evaluation points
  std::vector<double> fractions = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25};
  std::vector<double> shifts = {0.1, 0.5, 1.0};  // mean units; +/- applied
  std::vector<double> scales = {0.0, 0.5, 2.0};
  std::vector<int> count_deltas = {-2, -1, 1, 2};
  int cap_per_contributor = 1000;
  int reps = 0;  // Monte Carlo fallback replications (0 = closed form only)

  static DeviationGrid Defaults(double sigma2);
};

std::vector<Strategy> build_deviations(const DeviationGrid& grid,
                                       int requested);

struct DeviationRow {
  int contributor = 0;
  std::string strategy;
  Money worst_case = 0.0;
  double worst_mu = 0.0;
  Money truthful = 0.0;
  Money margin = 0.0;     // truthful - worst_case
  double std_err = 0.0;
  bool closed_form = true;
  bool pass = false;
};

struct ConcavityCheck {
  int contributor = 0;
  int argmax = 0;          // utility-maximizing collection amount
  int requested = 0;
  bool pass = false;
  std::vector<Money> utilities;  // index k = collection amount k + 1
};

struct DeviationReport {
  std::vector<DeviationRow> rows;
  std::vector<Money> truthful_utility;  // collectors only
  std::vector<ConcavityCheck> concavity;
  bool all_pass = true;
  // The sweep certifies the parametric deviation families above, not the
  // full space of reporting rules; the report states that scope.
  std::string scope_note;

  nlohmann::json to_json() const;
};

// Evaluates every deviation for both collectors against the truthful
// utility, worst case over the mean grid. A deviation passes when its
// margin is >= -1e-9 (closed form) or >= -3 combined standard errors
// (Monte Carlo). Also checks that the closed-form utility of an exact-count
// mean-tracking reporter is maximized at the requested collection amount.
DeviationReport icc_sweep(const MechanismInputs& inputs,
                          const MarketConfig& market,
                          const DeviationGrid& grid, std::uint64_t seed,
                          double d_tamper = 1.0);
DeviationReport icc_sweep_serial(const MechanismInputs& inputs,
                                 const MarketConfig& market,
                                 const DeviationGrid& grid, std::uint64_t seed,
                                 double d_tamper = 1.0);

// Exact welfare under well-behaved play: buyers get i.i.d. data, so their
// values are the clean-data values and no simulation is needed.
Money welfare_at_truthful(const MechanismInputs& inputs,
                          const MarketConfig& market);

// Exact expected profit under well-behaved play: expected prices equal the
// posted expected prices.
Money profit_at_truthful(const MechanismInputs& inputs,
                         const MarketConfig& market);

// Stream seed owned by batch round r; recorded in round traces.
std::uint64_t truthful_round_seed(std::uint64_t master, int round);

// Batch of seeded truthful rounds at true mean mu (for reports and the
// budget/price checks). Outcomes are indexed by round; parallel and serial
// variants agree exactly.
std::vector<RoundOutcome> run_truthful_rounds(const MechanismInputs& inputs,
                                              const MarketConfig& market,
                                              double mu, int rounds,
                                              std::uint64_t seed,
                                              double d_tamper = 1.0);
std::vector<RoundOutcome> run_truthful_rounds_serial(
    const MechanismInputs& inputs, const MarketConfig& market, double mu,
    int rounds, std::uint64_t seed, double d_tamper = 1.0);

}  // namespace datamarket
