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

#include "datamarket/common.hpp"
#include "datamarket/valuation.hpp"

#include "json.hpp"

namespace datamarket {

// v_iid(0..N) for one buyer; entry 0 must be 0 and entries non-decreasing.
using ValueTable = std::vector<Money>;

// Posted quantity-price curve: q[m] is the price of an m-point dataset.
// q[0] == 0. Curves built by scheme_to_curve are non-decreasing; arbitrary
// curves are accepted as input but can be flagged via non_decreasing().
struct PricingCurve {
  std::vector<Money> q;

  int max_quantity() const { return static_cast<int>(q.size()) - 1; }
  bool non_decreasing(double tol = kMoneyTol) const;

  nlohmann::json to_json() const;
};

// Per-buyer (quantity, price) assignment.
struct EnvyFreeScheme {
  std::vector<int> alloc;     // dataset size per buyer
  std::vector<Money> price;   // price per buyer

  Money revenue() const;
  nlohmann::json to_json() const;
};

// No buyer pays more than her value for her own allocation.
bool scheme_is_individually_rational(const std::vector<ValueTable>& buyers,
                                     const EnvyFreeScheme& s,
                                     double tol = kMoneyTol);
// No buyer prefers another buyer's (quantity, price) pair.
bool scheme_is_envy_free(const std::vector<ValueTable>& buyers,
                         const EnvyFreeScheme& s, double tol = kMoneyTol);

// Quantity a utility-maximizing buyer picks from the curve: the largest
// m attaining max_m (v(m) - q(m)). Utility at the result is >= 0 because
// m = 0 costs nothing. Ties within kMoneyTol go to the larger dataset.
int purchase(const ValueTable& table, const PricingCurve& curve);

// Total revenue when every buyer purchases from the curve.
Money curve_revenue(const std::vector<ValueTable>& buyers,
                    const PricingCurve& curve);

// Step curve equivalent to an envy-free scheme: sort buyers by allocation
// and charge q(m) = price of the cheapest buyer whose allocation covers m.
// Guarantees curve_revenue >= scheme revenue. Throws std::invalid_argument
// if the scheme is not individually rational and envy-free.
PricingCurve scheme_to_curve(const std::vector<ValueTable>& buyers,
                             const EnvyFreeScheme& scheme, int n_total);

// Componentwise-maximal prices satisfying individual rationality
// (p_j <= v_j(m_j)) and envy-freeness (p_j - p_k <= v_j(m_j) - v_j(m_k))
// for the fixed allocation. Solved as single-source shortest paths on the
// difference-constraint graph; a negative cycle means the allocation
// admits no envy-free prices and nullopt is returned. The componentwise
// maximum also maximizes the price sum.
std::optional<std::vector<Money>> optimal_ef_prices(
    const std::vector<ValueTable>& buyers, const std::vector<int>& alloc);

struct RevOptResult {
  EnvyFreeScheme scheme;
  Money revenue = 0.0;
};

// Exact revenue-optimal envy-free scheme for at most n_total points:
// enumerates every allocation vector in {0..n_total}^#buyers and prices
// each with optimal_ef_prices. Throws SizeCapError when the enumeration
// exceeds the cap; plug an approximate solver behind poi_solve for larger
// instances. Parallel and serial variants return bit-identical results.
RevOptResult rev_opt(const std::vector<ValueTable>& buyers, int n_total,
                     std::uint64_t enumeration_cap = kDefaultEnumerationCap);
RevOptResult rev_opt_serial(const std::vector<ValueTable>& buyers,
                            int n_total,
                            std::uint64_t enumeration_cap =
                                kDefaultEnumerationCap);

// Pricing-curve solver interface. The built-in implementation is exact
// (epsilon = 0): rev_opt followed by scheme_to_curve. The contract for a
// replacement is curve revenue >= optimal revenue - #buyers * O(epsilon).
PricingCurve poi_solve(const std::vector<ValueTable>& buyers, int n_total,
                       double epsilon = 0.0,
                       std::uint64_t enumeration_cap = kDefaultEnumerationCap);

struct ProfitSearchResult {
  int n_plus = 1;                  // profit-maximizing collection amount
  std::vector<int> alloc;          // dataset size per buyer at n_plus
  std::vector<Money> price;        // price per buyer at n_plus
  Money profit = 0.0;              // sum(price) - c1 * n_plus
  std::vector<Money> revenue_by_n; // index k = revenue at N = k + 1
  std::vector<Money> profit_by_n;
  bool unprofitable = false;       // best profit <= 0

  nlohmann::json to_json() const;
};

// Sweeps N in [1, n_sweep]: solve the curve, let each buyer purchase,
// book revenue minus c1 * N. Ties break toward the smallest N. Buyer
// tables must extend to n_sweep.
ProfitSearchResult profit_search_tables(
    const std::vector<ValueTable>& buyers, double c1, int n_sweep,
    double epsilon = 0.0,
    std::uint64_t enumeration_cap = kDefaultEnumerationCap);

// Market-level wrapper: builds v_iid tables up to ceil(#buyers / c1).
ProfitSearchResult profit_search(const MarketConfig& market,
                                 double epsilon = 0.0,
                                 std::uint64_t enumeration_cap =
                                     kDefaultEnumerationCap);

}  // namespace datamarket
