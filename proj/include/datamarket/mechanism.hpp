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
#include <vector>

#include "datamarket/baseline.hpp"
#include "datamarket/common.hpp"
#include "datamarket/pricing.hpp"
#include "datamarket/valuation.hpp"

#include "json.hpp"

namespace datamarket {

using Dataset = std::vector<double>;

// Targets the broker commits to before the round: the objective value to
// hit, the total collection amount, and per-buyer dataset sizes and
// expected prices. Budget balance holds exactly iff the expected prices
// sum to target_value + c1 * total_points; both instantiations below
// satisfy that identity by construction.
struct MechanismInputs {
  Money target_value = 0.0;           // welfare or profit target
  int total_points = 2;               // total data to collect (>= 2)
  std::vector<int> sale_count;        // dataset size per buyer
  std::vector<Money> expected_price;  // expected price per buyer

  int n_buyers() const { return static_cast<int>(sale_count.size()); }

  // Requested amounts for the two collectors.
  int requested(int contributor) const; // 0-based; total-1, 1, then zeros

  // Throws ConfigError if sale counts exceed total_points or the budget
  // identity fails against c1.
  void validate(double c1, double tol = kMoneyTol) const;

  nlohmann::json to_json() const;
};

// Welfare instantiation: sell everything to everyone at the clean-data
// value. Requires n_opt >= 2 (a lone collector cannot be audited).
MechanismInputs welfare_inputs(const MarketConfig& market,
                               const WelfareBaseline& baseline);

// Profit instantiation from a pricing-curve search result; requires
// n_plus >= 2.
MechanismInputs profit_inputs(const MarketConfig& market,
                              const ProfitSearchResult& search);

struct Requests {
  std::vector<int> requested;  // per contributor
};

// Collection instructions: contributor 0 gets total-1, contributor 1 gets
// 1, everyone else 0. Throws ConfigError with fewer than two contributors.
Requests make_requests(const MechanismInputs& inputs, int n_contributors);

// Sample mean, with the empty-dataset convention mean(()) = 0 used when
// evaluating the discrepancy on degenerate submissions.
double mean_or_zero(const Dataset& points);

// Audit penalty coefficient d_i = c_i * requested_i^2 / sigma2 for the two
// collectors (0-based i in {0, 1}). d_tamper is a debug-only multiplier
// used as a negative control to demonstrate broken incentives.
double penalty_coeff(int contributor, const MechanismInputs& inputs,
                     const MarketConfig& market, double d_tamper = 1.0);

// Price charged to buyer j given the submitted datasets. Per-collector
// base terms are gated on exact compliance with the requested count; the
// discrepancy penalty is not, so realized prices may be negative.
Money buyer_price(int buyer, const MechanismInputs& inputs,
                  const std::vector<Dataset>& submissions,
                  const MarketConfig& market, double d_tamper = 1.0);

// Payment to a contributor. Only the two collectors are ever paid; the
// compliance-gated base covers collection cost plus the expected penalty,
// and the same discrepancy penalty is subtracted ungated.
Money contributor_payment(int contributor, const MechanismInputs& inputs,
                          const std::vector<Dataset>& submissions,
                          const MarketConfig& market, double d_tamper = 1.0);

struct AllocationResult {
  std::vector<Dataset> buyer_data;
  bool short_allocation = false;  // pool smaller than some sale count
};

// Uniform random subsets (without replacement, independent across buyers)
// of the pooled submissions. A pool smaller than a buyer's sale count is
// handed over whole and flagged. Seeded and reproducible.
AllocationResult allocate(const std::vector<Dataset>& submissions,
                          const MechanismInputs& inputs, std::uint64_t seed);

struct RoundOutcome {
  std::vector<Dataset> buyer_data;
  std::vector<Money> price;        // per buyer
  std::vector<Money> payment;      // per contributor
  double discrepancy = 0.0;        // mean(X_1) - mean(X_2)
  std::vector<bool> compliant;     // exact-count indicator per contributor
  Money bb_residual = 0.0;         // sum(payments) - sum(prices)
  bool degenerate = false;         // a collector submitted no points
  bool short_allocation = false;

  nlohmann::json to_json() const;
};

// One full clearing: allocation, prices, payments, and bookkeeping. The
// residual is recorded, never corrected; off the compliant path it is
// generally nonzero and the flags say why.
RoundOutcome run_round(const MechanismInputs& inputs,
                       const std::vector<Dataset>& submissions,
                       const MarketConfig& market, std::uint64_t seed,
                       double d_tamper = 1.0);

}  // namespace datamarket
