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

#include "datamarket/baseline.hpp"

#include <cmath>

namespace datamarket {

int baseline_search_bound(int n_buyers, double c1) {
  if (!(c1 > 0.0)) throw ConfigError("baseline: cost c1 must be > 0");
  const double bound = std::ceil(static_cast<double>(n_buyers) / c1);
  return std::max(1, static_cast<int>(bound));
}

WelfareBaseline welfare_opt_tables(
    const std::vector<std::vector<double>>& tables, double c1, bool parallel) {
  if (!(c1 > 0.0)) throw ConfigError("baseline: cost c1 must be > 0");
  const int n_max = static_cast<int>(tables.front().size()) - 1;
  WelfareBaseline result;
  result.table.assign(static_cast<std::size_t>(n_max), 0.0);

  auto welfare_at = [&](int n) {
    double total = 0.0;
    for (const auto& t : tables) total += t[static_cast<std::size_t>(n)];
    return total - c1 * static_cast<double>(n);
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int n = 1; n <= n_max; ++n)
      result.table[static_cast<std::size_t>(n - 1)] = welfare_at(n);
  } else {
    for (int n = 1; n <= n_max; ++n)
      result.table[static_cast<std::size_t>(n - 1)] = welfare_at(n);
  }

  // Smallest maximizing N; exact comparisons keep the scan order-free.
  int best_n = 1;
  double best = result.table[0];
  for (int n = 2; n <= n_max; ++n) {
    const double w = result.table[static_cast<std::size_t>(n - 1)];
    if (w > best) {
      best = w;
      best_n = n;
    }
  }
  result.n_opt = best_n;
  result.opt = best;
  result.boundary_warning = (best_n == n_max);
  return result;
}

namespace {

WelfareBaseline welfare_opt_impl(const MarketConfig& market, bool parallel) {
  market.validate();
  const int n_max = baseline_search_bound(market.n_buyers(), market.costs[0]);
  const auto tables = market.value_tables(n_max);
  return welfare_opt_tables(tables, market.costs[0], parallel);
}

}  // namespace

WelfareBaseline welfare_opt(const MarketConfig& market) {
  return welfare_opt_impl(market, true);
}

WelfareBaseline welfare_opt_serial(const MarketConfig& market) {
  return welfare_opt_impl(market, false);
}

Money welfare_upper_bound(const WelfareBaseline& baseline, double c1,
                          double c2) {
  if (c2 < c1)
    throw std::invalid_argument("welfare_upper_bound: needs c2 >= c1");
  return baseline.opt - (c2 - c1);
}

}  // namespace datamarket
