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
//
// End-to-end acceptance suite. Each criterion prints one pass/fail line;
// the exit status is the number of failures. Tolerances are pinned here,
// not configurable.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "datamarket/commands.hpp"
#include "datamarket/report.hpp"
#include "datamarket/simulation.hpp"
#include "test_oracles.hpp"

using namespace datamarket;
namespace fs = std::filesystem;

namespace {

constexpr std::uint64_t kSeed = 20260810;

MarketConfig canonical_market() {
  MarketConfig market;
  market.buyers = {Buyer{0, ErrorValuation::ExpQuadratic(1.0)},
                   Buyer{1, ErrorValuation::ExpQuadratic(1.0)}};
  market.costs = {0.1, 0.2, 0.5};
  market.sigma2 = 1.0;
  return market;
}

MarketConfig lowcost_market() {
  auto market = canonical_market();
  market.costs = {0.02, 0.04, 0.1};
  return market;
}

RunConfig canonical_config() {
  RunConfig config;
  config.name = "acceptance";
  config.market = canonical_market();
  config.seed = kSeed;
  config.reps = 20000;
  config.rounds = 4000;
  config.config_hash = hash_hex(fnv1a64("acceptance"));
  return config;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Criterion {
  std::string title;
  double time_limit_s;  // 0 = no stated limit
  std::function<bool(std::string&)> body;
};

bool close(double a, double b, double tol) { return std::abs(a - b) <= tol; }

// 1. Baseline optimum against an independent exhaustive oracle.
bool criterion_baseline(std::string& detail) {
  const auto market = canonical_market();
  const auto baseline = welfare_opt(market);

  double oracle_best = -1e300;
  int oracle_n = 0;
  for (int n = 1; n <= 20; ++n) {
    const double w = 2.0 * std::sqrt(n / (n + 1.0)) - 0.1 * n;
    if (w > oracle_best) {
      oracle_best = w;
      oracle_n = n;
    }
  }
  detail = "n_opt=" + std::to_string(baseline.n_opt) +
           " opt=" + format_double(baseline.opt);
  return baseline.n_opt == 2 && oracle_n == 2 &&
         close(baseline.opt, oracle_best, 1e-6);
}

// 2. Budget balance on every realization with adversarial submitted means.
bool criterion_budget_balance(std::string& detail) {
  const auto market = canonical_market();
  const auto inputs = welfare_inputs(market, welfare_opt(market));
  Rng rng(derive_seed(kSeed, 0xbb));
  double worst = 0.0;
  const int rounds = 10000;
  for (int r = 0; r < rounds; ++r) {
    std::vector<Dataset> subs(3);
    for (int i = 0; i < 2; ++i) {
      Dataset d(static_cast<std::size_t>(inputs.requested(i)));
      for (auto& x : d) x = rng.normal(0.0, 1.0);
      const double shift = rng.uniform(-10.0, 10.0) - mean_or_zero(d);
      for (auto& x : d) x += shift;
      subs[static_cast<std::size_t>(i)] = std::move(d);
    }
    const auto outcome =
        run_round(inputs, subs, market, derive_seed(kSeed, 0xbbbb, r));
    worst = std::max(worst, std::abs(outcome.bb_residual));
    if (worst >= 1e-9) break;
  }
  detail = "max|residual|=" + format_double(worst) + " over " +
           std::to_string(rounds) + " rounds";
  return worst < 1e-9;
}

// 3. Contributors break even: Monte Carlo against the closed form.
bool criterion_irc(std::string& detail) {
  const auto market = canonical_market();
  const auto inputs = welfare_inputs(market, welfare_opt(market));
  std::ostringstream note;
  bool pass = true;
  for (int i = 0; i < 2; ++i) {
    const Money target = (inputs.target_value + market.costs[0] -
                          market.costs[1]) *
                         inputs.requested(i) / inputs.total_points;
    const auto est =
        simulate_utility(inputs, market, i, Strategy::WellBehaved(), 0.0,
                         100000, derive_seed(kSeed, 0x1c, i));
    pass &= close(est.mean, target, 3.0 * est.std_err);
    pass &= target >= 0.0 && est.mean >= -3.0 * est.std_err;
    note << "u" << (i + 1) << "=" << format_double(est.mean) << "±"
         << format_double(est.std_err) << " ";
  }
  detail = note.str() + "target1=" + format_double(
                            (inputs.target_value - 0.1) / 2.0);
  return pass;
}

// 4. Buyers pay the posted expected price and keep nonnegative utility.
bool criterion_irb(std::string& detail) {
  const auto market = canonical_market();
  const auto inputs = welfare_inputs(market, welfare_opt(market));
  const auto outcomes = run_truthful_rounds(inputs, market, 0.0, 20000,
                                            derive_seed(kSeed, 0x1b));
  bool pass = true;
  std::ostringstream note;
  for (int j = 0; j < inputs.n_buyers(); ++j) {
    double sum = 0.0, sumsq = 0.0;
    for (const auto& o : outcomes) {
      const double p = o.price[static_cast<std::size_t>(j)];
      sum += p;
      sumsq += p * p;
    }
    const double n = static_cast<double>(outcomes.size());
    const double mean = sum / n;
    const double se = std::sqrt((sumsq - sum * sum / n) / (n - 1.0) / n);
    const Money posted = inputs.expected_price[static_cast<std::size_t>(j)];
    const Money value = iid_value(
        market.buyers[static_cast<std::size_t>(j)].valuation,
        inputs.sale_count[static_cast<std::size_t>(j)], market.sigma2);
    pass &= close(mean, posted, 3.0 * se);
    pass &= value - mean >= -3.0 * se;
    note << "E[p" << (j + 1) << "]=" << format_double(mean) << "±"
         << format_double(se) << " ";
  }
  detail = note.str();
  return pass;
}

// 5. Exact welfare identity at the well-behaved profile.
bool criterion_welfare_equality(std::string& detail) {
  const auto market = canonical_market();
  const auto baseline = welfare_opt(market);
  const auto inputs = welfare_inputs(market, baseline);
  const Money achieved = welfare_at_truthful(inputs, market);
  const Money bound =
      welfare_upper_bound(baseline, market.costs[0], market.costs[1]);
  detail = "welfare=" + format_double(achieved) +
           " bound=" + format_double(bound);
  return close(achieved, bound, 1e-9) && achieved <= bound + 1e-9;
}

// 6. Equilibrium certification plus the tampered negative control.
bool criterion_icc(std::string& detail) {
  const auto market = canonical_market();
  const auto inputs = welfare_inputs(market, welfare_opt(market));
  const auto grid = DeviationGrid::Defaults(market.sigma2);
  const auto report = icc_sweep(inputs, market, grid, kSeed);

  int per_contributor[2] = {0, 0};
  Money min_margin = 1e300;
  bool closed = true;
  for (const auto& row : report.rows) {
    per_contributor[row.contributor] += 1;
    min_margin = std::min(min_margin, row.margin);
    closed &= row.closed_form;
  }
  bool pass = report.all_pass && closed && grid.mu_grid.size() == 21 &&
              per_contributor[0] >= 200 && per_contributor[1] >= 200 &&
              min_margin >= -1e-9;
  for (const auto& check : report.concavity)
    pass &= check.pass && check.argmax == check.requested;

  // Negative control needs a market where under-collection is expressible
  // in whole points (the canonical request of one point is not divisible).
  const auto low = lowcost_market();
  const auto low_inputs = welfare_inputs(low, welfare_opt(low));
  const auto low_grid = DeviationGrid::Defaults(low.sigma2);
  const auto honest = icc_sweep(low_inputs, low, low_grid, kSeed);
  const auto tampered = icc_sweep(low_inputs, low, low_grid, kSeed, 0.5);
  int tampered_failures = 0;
  for (const auto& row : tampered.rows)
    tampered_failures += row.pass ? 0 : 1;
  pass &= honest.all_pass;
  pass &= tampered_failures >= 1 && !tampered.all_pass;

  detail = std::to_string(per_contributor[0]) + "+" +
           std::to_string(per_contributor[1]) +
           " deviations, min_margin=" + format_double(min_margin) +
           ", tampered_failures=" + std::to_string(tampered_failures);
  return pass;
}

// 7. Exact envy-free solver against the independent saturation oracle.
bool criterion_solver_exactness(std::string& detail) {
  Rng rng(derive_seed(kSeed, 0x50));
  double worst_gap = 0.0;
  int curve_checks = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int n_buyers = 1 + static_cast<int>(rng.below(4));
    const int n = 1 + static_cast<int>(rng.below(6));
    std::vector<ValueTable> buyers;
    for (int j = 0; j < n_buyers; ++j)
      buyers.push_back(testing::random_monotone_table(rng, n));
    const auto got = rev_opt(buyers, n);
    const double want = testing::brute_force_revenue(buyers, n);
    worst_gap = std::max(worst_gap, std::abs(got.revenue - want));
    if (worst_gap > 1e-9) break;
    if (!scheme_is_individually_rational(buyers, got.scheme) ||
        !scheme_is_envy_free(buyers, got.scheme)) {
      detail = "solver emitted an infeasible scheme";
      return false;
    }
    const auto curve = scheme_to_curve(buyers, got.scheme, n);
    if (curve_revenue(buyers, curve) < got.scheme.revenue() - 1e-9) {
      detail = "curve lost revenue against its source scheme";
      return false;
    }
    ++curve_checks;
  }
  detail = "100 instances, worst revenue gap=" + format_double(worst_gap) +
           ", curve checks=" + std::to_string(curve_checks);
  return worst_gap <= 1e-9 && curve_checks == 100;
}

// 8. Profit pipeline on the two-buyer pricing instance.
bool criterion_profit_pipeline(std::string& detail) {
  std::vector<ValueTable> buyers{{0.0, 0.4, 0.6}, {0.0, 0.9, 1.0}};
  for (auto& t : buyers) t.resize(21, t.back());
  const auto search = profit_search_tables(buyers, 0.1, 20);

  MarketConfig market = canonical_market();  // costs 0.1 / 0.2 drive payments
  const auto inputs = profit_inputs(market, search);
  const Money profit_truthful = profit_at_truthful(inputs, market);

  bool efb = true;
  for (std::size_t j = 0; j < buyers.size(); ++j)
    for (std::size_t k = 0; k < buyers.size(); ++k) {
      const double own =
          buyers[j][static_cast<std::size_t>(search.alloc[j])] -
          search.price[j];
      const double other =
          buyers[j][static_cast<std::size_t>(search.alloc[k])] -
          search.price[k];
      efb &= own >= other - 1e-9;
    }

  detail = "n_plus=" + std::to_string(search.n_plus) +
           " profit=" + format_double(search.profit) +
           " truthful=" + format_double(profit_truthful);
  return search.n_plus == 2 && close(search.profit, 1.0, 1e-9) &&
         close(profit_truthful, search.profit - (0.2 - 0.1), 1e-9) && efb;
}

// 9. Clean-data valuations: closed forms vs Monte Carlo and quadrature.
bool criterion_valuations(std::string& detail) {
  const auto expq = ErrorValuation::ExpQuadratic(1.0);
  const auto thr = ErrorValuation::Threshold(0.8);
  double worst_quad = 0.0, worst_mc_sigmas = 0.0;
  int label = 0;
  for (const auto& v : {expq, thr}) {
    for (int m = 1; m <= 10; ++m) {
      const double closed = iid_value(v, m, 1.0);
      const double quad = iid_value_quadrature(v, m, 1.0);
      worst_quad = std::max(worst_quad, std::abs(closed - quad));
      const auto mc = testing::mc_iid_value(v, m, 1.0, 1000000,
                                            derive_seed(kSeed, 0x90, label++));
      worst_mc_sigmas =
          std::max(worst_mc_sigmas, std::abs(closed - mc.mean) / mc.se);
    }
  }
  detail = "max|closed-quad|=" + format_double(worst_quad) +
           " max MC gap=" + format_double(worst_mc_sigmas) + " sigmas";
  return worst_quad < 1e-6 && worst_mc_sigmas <= 3.0;
}

// 10. Byte-identical reports for identical config and seed.
bool criterion_determinism(std::string& detail) {
  auto config = canonical_config();
  config.reps = 5000;
  config.rounds = 1000;
  const fs::path base = fs::temp_directory_path() / "datamarket_acceptance";
  fs::remove_all(base);
  std::ostringstream sink;

  const std::vector<
      std::pair<std::string, std::function<int(const std::string&)>>>
      commands = {
          {"baseline",
           [&](const std::string& d) { return cmd_baseline(config, d, sink); }},
          {"price",
           [&](const std::string& d) {
             auto c = config;
             c.objective = Objective::kProfit;
             return cmd_price(c, d, sink);
           }},
          {"run", [&](const std::string& d) { return cmd_run(config, d, sink); }},
          {"verify",
           [&](const std::string& d) { return cmd_verify(config, d, sink); }},
          {"sweep",
           [&](const std::string& d) { return cmd_sweep(config, d, sink); }},
      };

  int files_compared = 0;
  for (const auto& [name, run] : commands) {
    const fs::path dir_a = base / (name + "_a");
    const fs::path dir_b = base / (name + "_b");
    fs::create_directories(dir_a);
    fs::create_directories(dir_b);
    if (run(dir_a.string()) != run(dir_b.string())) {
      detail = name + ": exit status differed between runs";
      return false;
    }
    for (const auto& entry : fs::directory_iterator(dir_a)) {
      const auto other = dir_b / entry.path().filename();
      if (!fs::exists(other) ||
          slurp(entry.path()) != slurp(other)) {
        detail = name + ": " + entry.path().filename().string() + " differs";
        return false;
      }
      ++files_compared;
    }
  }
  fs::remove_all(base);
  detail = std::to_string(files_compared) + " report files byte-identical";
  // Two JSON+CSV pairs per reporting command plus the verify log: nine files.
  return files_compared >= 9;
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {"baseline optimum matches the exhaustive oracle", 1.0,
       criterion_baseline},
      {"budget balance holds on every adversarial round", 5.0,
       criterion_budget_balance},
      {"contributors break even at the well-behaved profile", 30.0,
       criterion_irc},
      {"buyers pay the posted expected prices", 0.0, criterion_irb},
      {"truthful welfare equals the equilibrium ceiling", 0.0,
       criterion_welfare_equality},
      {"deviation sweep certifies the equilibrium (with negative control)",
       120.0, criterion_icc},
      {"envy-free solver is exact on random instances", 60.0,
       criterion_solver_exactness},
      {"profit pipeline reproduces the pricing instance", 0.0,
       criterion_profit_pipeline},
      {"clean-data valuations match their oracles", 0.0, criterion_valuations},
      {"identical config and seed give byte-identical reports", 0.0,
       criterion_determinism},
  };

  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const auto& criterion = criteria[k];
    std::string detail;
    const auto start = std::chrono::steady_clock::now();
    bool pass = false;
    try {
      pass = criterion.body(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (criterion.time_limit_s > 0.0 && elapsed > criterion.time_limit_s) {
      pass = false;
      detail += " [exceeded " + format_double(criterion.time_limit_s) + "s]";
    }
    failures += pass ? 0 : 1;
    std::printf("[%s] criterion %zu: %s — %s (%.2fs)\n",
                pass ? "PASS" : "FAIL", k + 1, criterion.title.c_str(),
                detail.c_str(), elapsed);
  }
  if (failures == 0) std::printf("acceptance: all %zu criteria passed\n",
                                 criteria.size());
  else
    std::printf("acceptance: %d criteria FAILED\n", failures);
  return failures;
}
