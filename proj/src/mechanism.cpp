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

#include "datamarket/mechanism.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "datamarket/rng.hpp"

namespace datamarket {

int MechanismInputs::requested(int contributor) const {
  if (contributor == 0) return total_points - 1;
  if (contributor == 1) return 1;
  return 0;
}

void MechanismInputs::validate(double c1, double tol) const {
  if (total_points < 2)
    throw ConfigError(
        "mechanism: total_points must be >= 2 (a lone collector cannot be "
        "audited)");
  if (sale_count.size() != expected_price.size())
    throw ConfigError("mechanism: sale_count/expected_price size mismatch");
  if (sale_count.empty()) throw ConfigError("mechanism: no buyers");
  for (int m : sale_count)
    if (m < 0 || m > total_points)
      throw ConfigError("mechanism: sale_count outside [0, total_points]");
  const Money price_sum =
      std::accumulate(expected_price.begin(), expected_price.end(), Money{0});
  const Money required = target_value + c1 * static_cast<double>(total_points);
  if (std::abs(price_sum - required) > tol)
    throw ConfigError(
        "mechanism: expected prices break the budget identity "
        "sum(expected_price) = target_value + c1 * total_points");
}

MechanismInputs welfare_inputs(const MarketConfig& market,
                               const WelfareBaseline& baseline) {
  market.validate();
  if (baseline.n_opt < 2)
    throw ConfigError(
        "welfare_inputs: baseline collection amount is < 2; the mechanism "
        "needs two collectors");
  MechanismInputs inputs;
  inputs.target_value = baseline.opt;
  inputs.total_points = baseline.n_opt;
  inputs.sale_count.assign(market.buyers.size(), baseline.n_opt);
  inputs.expected_price.reserve(market.buyers.size());
  for (const auto& buyer : market.buyers)
    inputs.expected_price.push_back(iid_value(
        buyer.valuation, baseline.n_opt, market.sigma2, market.quadrature));
  inputs.validate(market.costs[0]);
  return inputs;
}

MechanismInputs profit_inputs(const MarketConfig& market,
                              const ProfitSearchResult& search) {
  market.validate();
  if (search.n_plus < 2)
    throw ConfigError(
        "profit_inputs: profit-optimal collection amount is < 2; the "
        "mechanism needs two collectors");
  MechanismInputs inputs;
  inputs.target_value = search.profit;
  inputs.total_points = search.n_plus;
  inputs.sale_count = search.alloc;
  inputs.expected_price = search.price;
  inputs.validate(market.costs[0]);
  return inputs;
}

nlohmann::json MechanismInputs::to_json() const {
  return {{"target_value", target_value},
          {"total_points", total_points},
          {"sale_count", sale_count},
          {"expected_price", expected_price}};
}

Requests make_requests(const MechanismInputs& inputs, int n_contributors) {
  if (n_contributors < 2)
    throw ConfigError("make_requests: need at least two contributors");
  if (inputs.total_points < 2)
    throw ConfigError("make_requests: total_points must be >= 2");
  Requests r;
  r.requested.assign(static_cast<std::size_t>(n_contributors), 0);
  r.requested[0] = inputs.total_points - 1;
  r.requested[1] = 1;
  return r;
}

double mean_or_zero(const Dataset& points) {
  if (points.empty()) return 0.0;
  return std::accumulate(points.begin(), points.end(), 0.0) /
         static_cast<double>(points.size());
}

double penalty_coeff(int contributor, const MechanismInputs& inputs,
                     const MarketConfig& market, double d_tamper) {
  const double requested = inputs.requested(contributor);
  return d_tamper * market.costs[static_cast<std::size_t>(contributor)] *
         requested * requested / market.sigma2;
}

namespace {

struct SettlementTerms {
  double requested[2];
  double opposite[2];  // amount the other collector should hold
  double d[2];
  bool compliant[2];
  double discrepancy;  // mean(X_1) - mean(X_2), empty means as 0
  bool degenerate;
};

SettlementTerms settlement_terms(const MechanismInputs& inputs,
                                 const std::vector<Dataset>& submissions,
                                 const MarketConfig& market, double d_tamper) {
  if (submissions.size() < 2)
    throw std::invalid_argument("mechanism: need submissions for both collectors");
  SettlementTerms t{};
  for (int i = 0; i < 2; ++i) {
    t.requested[i] = inputs.requested(i);
    t.opposite[i] = static_cast<double>(inputs.total_points) - t.requested[i];
    t.d[i] = penalty_coeff(i, inputs, market, d_tamper);
    t.compliant[i] =
        static_cast<int>(submissions[static_cast<std::size_t>(i)].size()) ==
        inputs.requested(i);
  }
  t.degenerate = submissions[0].empty() || submissions[1].empty();
  t.discrepancy = mean_or_zero(submissions[0]) - mean_or_zero(submissions[1]);
  return t;
}

}  // namespace

Money buyer_price(int buyer, const MechanismInputs& inputs,
                  const std::vector<Dataset>& submissions,
                  const MarketConfig& market, double d_tamper) {
  const auto t = settlement_terms(inputs, submissions, market, d_tamper);
  const double n_buyers = market.n_buyers();
  const double total = inputs.total_points;
  const Money posted = inputs.expected_price[static_cast<std::size_t>(buyer)];
  const double sq = t.discrepancy * t.discrepancy;
  Money price = 0.0;
  for (int i = 0; i < 2; ++i) {
    if (t.compliant[i]) {
      price += posted * t.requested[i] / total +
               t.d[i] * market.sigma2 / (n_buyers * t.opposite[i]) +
               t.d[i] * market.sigma2 / (n_buyers * t.requested[i]);
    }
    price -= t.d[i] / n_buyers * sq;  // penalty applies regardless
  }
  return price;
}

Money contributor_payment(int contributor, const MechanismInputs& inputs,
                          const std::vector<Dataset>& submissions,
                          const MarketConfig& market, double d_tamper) {
  if (contributor >= 2) return 0.0;  // only the two collectors are paid
  const auto t = settlement_terms(inputs, submissions, market, d_tamper);
  const int i = contributor;
  const double total = inputs.total_points;
  const double c1 = market.costs[0];
  const double c2 = market.costs[1];
  const double ci = market.costs[static_cast<std::size_t>(i)];
  Money pay = 0.0;
  if (t.compliant[i]) {
    pay += (inputs.target_value + c1 - c2) * t.requested[i] / total +
           ci * t.requested[i] + t.d[i] * market.sigma2 / t.opposite[i] +
           t.d[i] * market.sigma2 / t.requested[i];
  }
  pay -= t.d[i] * t.discrepancy * t.discrepancy;
  return pay;
}

AllocationResult allocate(const std::vector<Dataset>& submissions,
                          const MechanismInputs& inputs, std::uint64_t seed) {
  Dataset pool;
  for (const auto& s : submissions) pool.insert(pool.end(), s.begin(), s.end());

  AllocationResult result;
  result.buyer_data.resize(inputs.sale_count.size());
  for (std::size_t j = 0; j < inputs.sale_count.size(); ++j) {
    const auto want = static_cast<std::size_t>(inputs.sale_count[j]);
    if (pool.size() <= want) {
      result.buyer_data[j] = pool;
      if (pool.size() < want) result.short_allocation = true;
      continue;
    }
    // Partial Fisher-Yates over an index view; independent stream per buyer.
    Rng rng(derive_seed(seed, 0x616c6c6fULL, j));
    std::vector<std::size_t> idx(pool.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    for (std::size_t k = 0; k < want; ++k) {
      const std::size_t pick = k + rng.below(idx.size() - k);
      std::swap(idx[k], idx[pick]);
      result.buyer_data[j].push_back(pool[idx[k]]);
    }
  }
  return result;
}

nlohmann::json RoundOutcome::to_json() const {
  std::vector<int> compliant_int(compliant.begin(), compliant.end());
  return {{"price", price},
          {"payment", payment},
          {"discrepancy", discrepancy},
          {"compliant", compliant_int},
          {"bb_residual", bb_residual},
          {"degenerate", degenerate},
          {"short_allocation", short_allocation}};
}

RoundOutcome run_round(const MechanismInputs& inputs,
                       const std::vector<Dataset>& submissions,
                       const MarketConfig& market, std::uint64_t seed,
                       double d_tamper) {
  const auto t = settlement_terms(inputs, submissions, market, d_tamper);

  RoundOutcome out;
  auto alloc = allocate(submissions, inputs, seed);
  out.buyer_data = std::move(alloc.buyer_data);
  out.short_allocation = alloc.short_allocation;
  out.degenerate = t.degenerate;
  out.discrepancy = t.discrepancy;
  out.compliant.assign(submissions.size(), false);
  for (std::size_t i = 0; i < submissions.size(); ++i)
    out.compliant[i] =
        static_cast<int>(submissions[i].size()) ==
        (i < 2 ? inputs.requested(static_cast<int>(i)) : 0);

  out.price.resize(inputs.sale_count.size());
  for (std::size_t j = 0; j < inputs.sale_count.size(); ++j)
    out.price[j] = buyer_price(static_cast<int>(j), inputs, submissions,
                               market, d_tamper);
  out.payment.resize(submissions.size());
  for (std::size_t i = 0; i < submissions.size(); ++i)
    out.payment[i] = contributor_payment(static_cast<int>(i), inputs,
                                         submissions, market, d_tamper);

  const Money paid =
      std::accumulate(out.payment.begin(), out.payment.end(), Money{0});
  const Money charged =
      std::accumulate(out.price.begin(), out.price.end(), Money{0});
  out.bb_residual = paid - charged;
  return out;
}

}  // namespace datamarket
