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

#include "datamarket/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "datamarket/baseline.hpp"

namespace datamarket {
namespace {

void check_tables(const std::vector<ValueTable>& buyers, int n_total) {
  if (buyers.empty())
    throw std::invalid_argument("pricing: need at least one buyer table");
  for (const auto& t : buyers) {
    if (static_cast<int>(t.size()) < n_total + 1)
      throw std::invalid_argument("pricing: value table shorter than curve");
    if (std::abs(t[0]) > kMoneyTol)
      throw std::invalid_argument("pricing: value table must start at 0");
  }
}

}  // namespace

bool PricingCurve::non_decreasing(double tol) const {
  for (std::size_t m = 1; m < q.size(); ++m)
    if (q[m] < q[m - 1] - tol) return false;
  return true;
}

nlohmann::json PricingCurve::to_json() const {
  return {{"N", max_quantity()}, {"q", q}};
}

Money EnvyFreeScheme::revenue() const {
  return std::accumulate(price.begin(), price.end(), Money{0});
}

nlohmann::json EnvyFreeScheme::to_json() const {
  return {{"alloc", alloc}, {"price", price}};
}

bool scheme_is_individually_rational(const std::vector<ValueTable>& buyers,
                                     const EnvyFreeScheme& s, double tol) {
  for (std::size_t j = 0; j < buyers.size(); ++j) {
    const double value = buyers[j][static_cast<std::size_t>(s.alloc[j])];
    if (value - s.price[j] < -tol) return false;
  }
  return true;
}

bool scheme_is_envy_free(const std::vector<ValueTable>& buyers,
                         const EnvyFreeScheme& s, double tol) {
  const std::size_t n = buyers.size();
  for (std::size_t j = 0; j < n; ++j) {
    const auto& table = buyers[j];
    const double own = table[static_cast<std::size_t>(s.alloc[j])] - s.price[j];
    for (std::size_t k = 0; k < n; ++k) {
      const double other =
          table[static_cast<std::size_t>(s.alloc[k])] - s.price[k];
      if (own < other - tol) return false;
    }
  }
  return true;
}

int purchase(const ValueTable& table, const PricingCurve& curve) {
  const int n = curve.max_quantity();
  if (static_cast<int>(table.size()) != n + 1)
    throw std::invalid_argument("purchase: table length must equal curve N + 1");
  double best = table[0] - curve.q[0];
  for (int m = 1; m <= n; ++m)
    best = std::max(best, table[static_cast<std::size_t>(m)] -
                              curve.q[static_cast<std::size_t>(m)]);
  // Largest quantity attaining the maximum; ties within tolerance included
  // so that step curves sell the full step.
  int pick = 0;
  for (int m = 0; m <= n; ++m) {
    const double u = table[static_cast<std::size_t>(m)] -
                     curve.q[static_cast<std::size_t>(m)];
    if (u >= best - kMoneyTol) pick = m;
  }
  return pick;
}

Money curve_revenue(const std::vector<ValueTable>& buyers,
                    const PricingCurve& curve) {
  Money total = 0.0;
  for (const auto& table : buyers)
    total += curve.q[static_cast<std::size_t>(purchase(table, curve))];
  return total;
}

PricingCurve scheme_to_curve(const std::vector<ValueTable>& buyers,
                             const EnvyFreeScheme& scheme, int n_total) {
  check_tables(buyers, n_total);
  if (scheme.alloc.size() != buyers.size() ||
      scheme.price.size() != buyers.size())
    throw std::invalid_argument("scheme_to_curve: scheme/buyer size mismatch");
  for (int m : scheme.alloc)
    if (m < 0 || m > n_total)
      throw std::invalid_argument("scheme_to_curve: allocation out of range");
  if (!scheme_is_individually_rational(buyers, scheme) ||
      !scheme_is_envy_free(buyers, scheme))
    throw std::invalid_argument(
        "scheme_to_curve: input scheme is not envy-free individually rational");

  std::vector<std::size_t> order(buyers.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (scheme.alloc[a] != scheme.alloc[b])
      return scheme.alloc[a] < scheme.alloc[b];
    return scheme.price[a] < scheme.price[b];
  });

  // q(m) = price of the first buyer (in allocation order) whose allocation
  // reaches m, extended at the last price; at most one step per buyer.
  // Negative prices (possible for buyers allocated nothing) clamp to the
  // q(0) = 0 anchor: the affected buyer then pays at least her old price,
  // so the revenue guarantee survives and the curve stays monotone.
  PricingCurve curve;
  curve.q.assign(static_cast<std::size_t>(n_total) + 1, 0.0);
  std::size_t k = 0;
  for (int m = 1; m <= n_total; ++m) {
    while (k + 1 < order.size() && scheme.alloc[order[k]] < m) ++k;
    curve.q[static_cast<std::size_t>(m)] =
        std::max(Money{0}, scheme.price[order[k]]);
  }
  return curve;
}

std::optional<std::vector<Money>> optimal_ef_prices(
    const std::vector<ValueTable>& buyers, const std::vector<int>& alloc) {
  const std::size_t n = buyers.size();
  if (alloc.size() != n)
    throw std::invalid_argument("optimal_ef_prices: one allocation per buyer");

  // Shortest paths from a virtual source: source -> j carries the rationality
  // cap v_j(m_j); k -> j carries the no-envy slack v_j(m_j) - v_j(m_k).
  // Bellman-Ford; a relaxation still available after n rounds means a
  // negative cycle, i.e. the allocation admits no envy-free prices.
  std::vector<Money> dist(n);
  for (std::size_t j = 0; j < n; ++j)
    dist[j] = buyers[j][static_cast<std::size_t>(alloc[j])];

  auto edge = [&](std::size_t k, std::size_t j) {
    return buyers[j][static_cast<std::size_t>(alloc[j])] -
           buyers[j][static_cast<std::size_t>(alloc[k])];
  };

  for (std::size_t round = 0; round < n; ++round) {
    bool changed = false;
    for (std::size_t k = 0; k < n; ++k) {
      for (std::size_t j = 0; j < n; ++j) {
        if (j == k) continue;
        const Money cand = dist[k] + edge(k, j);
        if (cand < dist[j] - 1e-15) {
          dist[j] = cand;
          changed = true;
        }
      }
    }
    if (!changed) return dist;
  }
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j < n; ++j)
      if (j != k && dist[k] + edge(k, j) < dist[j] - kMoneyTol)
        return std::nullopt;
  return dist;
}

namespace {

struct EnumBest {
  Money revenue = -1.0;
  std::uint64_t index = 0;
  std::vector<Money> price;

  // Total order on (revenue desc, enumeration index asc); exact comparisons
  // make the parallel reduction schedule-independent.
  bool beats(const EnumBest& other) const {
    if (revenue != other.revenue) return revenue > other.revenue;
    return index < other.index;
  }
};

void decode_alloc(std::uint64_t index, int base, std::vector<int>& alloc) {
  for (std::size_t j = 0; j < alloc.size(); ++j) {
    alloc[j] = static_cast<int>(index % static_cast<std::uint64_t>(base));
    index /= static_cast<std::uint64_t>(base);
  }
}

RevOptResult rev_opt_impl(const std::vector<ValueTable>& buyers, int n_total,
                          std::uint64_t cap, bool parallel) {
  if (n_total < 0)
    throw std::invalid_argument("rev_opt: n_total must be >= 0");
  check_tables(buyers, n_total);

  const std::size_t n_buyers = buyers.size();
  const int base = n_total + 1;
  std::uint64_t count = 1;
  for (std::size_t j = 0; j < n_buyers; ++j) {
    count *= static_cast<std::uint64_t>(base);
    if (count > cap)
      throw SizeCapError(
          "rev_opt: allocation enumeration exceeds the configured cap; use an "
          "approximate pricing-curve solver for instances of this size");
  }

  auto evaluate = [&](std::uint64_t index, std::vector<int>& alloc,
                      EnumBest& best) {
    decode_alloc(index, base, alloc);
    auto prices = optimal_ef_prices(buyers, alloc);
    if (!prices) return;
    const Money revenue =
        std::accumulate(prices->begin(), prices->end(), Money{0});
    EnumBest cand{revenue, index, std::move(*prices)};
    if (cand.beats(best)) best = std::move(cand);
  };

  EnumBest best;
  if (parallel) {
#pragma omp parallel
    {
      EnumBest local;
      std::vector<int> alloc(n_buyers);
#pragma omp for schedule(static)
      for (std::int64_t index = 0; index < static_cast<std::int64_t>(count);
           ++index)
        evaluate(static_cast<std::uint64_t>(index), alloc, local);
#pragma omp critical(rev_opt_reduce)
      {
        if (local.revenue >= 0.0 && local.beats(best)) best = std::move(local);
      }
    }
  } else {
    std::vector<int> alloc(n_buyers);
    for (std::uint64_t index = 0; index < count; ++index)
      evaluate(index, alloc, best);
  }

  // The all-zero allocation is always feasible, so a winner exists.
  RevOptResult result;
  result.scheme.alloc.resize(n_buyers);
  decode_alloc(best.index, base, result.scheme.alloc);
  result.scheme.price = std::move(best.price);
  result.revenue = best.revenue;
  return result;
}

}  // namespace

RevOptResult rev_opt(const std::vector<ValueTable>& buyers, int n_total,
                     std::uint64_t enumeration_cap) {
  return rev_opt_impl(buyers, n_total, enumeration_cap, true);
}

RevOptResult rev_opt_serial(const std::vector<ValueTable>& buyers, int n_total,
                            std::uint64_t enumeration_cap) {
  return rev_opt_impl(buyers, n_total, enumeration_cap, false);
}

PricingCurve poi_solve(const std::vector<ValueTable>& buyers, int n_total,
                       double epsilon, std::uint64_t enumeration_cap) {
  if (epsilon < 0.0)
    throw std::invalid_argument("poi_solve: epsilon must be >= 0");
  // Exact solver: epsilon is accepted for interface compatibility with
  // approximate implementations and ignored.
  const auto best = rev_opt(buyers, n_total, enumeration_cap);
  return scheme_to_curve(buyers, best.scheme, n_total);
}

nlohmann::json ProfitSearchResult::to_json() const {
  return {{"n_plus", n_plus},       {"alloc", alloc},
          {"price", price},         {"profit", profit},
          {"revenue_by_n", revenue_by_n}, {"profit_by_n", profit_by_n},
          {"unprofitable", unprofitable}};
}

ProfitSearchResult profit_search_tables(const std::vector<ValueTable>& buyers,
                                        double c1, int n_sweep, double epsilon,
                                        std::uint64_t enumeration_cap) {
  if (!(c1 > 0.0)) throw ConfigError("profit_search: cost c1 must be > 0");
  if (n_sweep < 1)
    throw std::invalid_argument("profit_search: n_sweep must be >= 1");
  check_tables(buyers, n_sweep);

  ProfitSearchResult result;
  result.revenue_by_n.reserve(static_cast<std::size_t>(n_sweep));
  result.profit_by_n.reserve(static_cast<std::size_t>(n_sweep));

  Money best_profit = 0.0;
  bool have_best = false;
  for (int n = 1; n <= n_sweep; ++n) {
    std::vector<ValueTable> prefix;
    prefix.reserve(buyers.size());
    for (const auto& t : buyers)
      prefix.emplace_back(t.begin(), t.begin() + n + 1);
    const PricingCurve curve = poi_solve(prefix, n, epsilon, enumeration_cap);

    std::vector<int> alloc(buyers.size());
    std::vector<Money> price(buyers.size());
    Money revenue = 0.0;
    for (std::size_t j = 0; j < buyers.size(); ++j) {
      alloc[j] = purchase(prefix[j], curve);
      price[j] = curve.q[static_cast<std::size_t>(alloc[j])];
      revenue += price[j];
    }
    const Money profit = revenue - c1 * static_cast<double>(n);
    result.revenue_by_n.push_back(revenue);
    result.profit_by_n.push_back(profit);

    // Strictly-better keeps the smallest maximizing N.
    if (!have_best || profit > best_profit + kMoneyTol) {
      have_best = true;
      best_profit = profit;
      result.n_plus = n;
      result.alloc = std::move(alloc);
      result.price = std::move(price);
      result.profit = profit;
    }
  }
  result.unprofitable = (result.profit <= kMoneyTol);
  return result;
}

ProfitSearchResult profit_search(const MarketConfig& market, double epsilon,
                                 std::uint64_t enumeration_cap) {
  market.validate();
  const int n_sweep = baseline_search_bound(market.n_buyers(), market.costs[0]);
  const auto tables = market.value_tables(n_sweep);
  return profit_search_tables(tables, market.costs[0], n_sweep, epsilon,
                              enumeration_cap);
}

}  // namespace datamarket
