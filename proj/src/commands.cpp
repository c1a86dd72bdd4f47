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

#include "datamarket/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <ostream>
#include <sstream>

#include "datamarket/baseline.hpp"
#include "datamarket/mechanism.hpp"
#include "datamarket/pricing.hpp"
#include "datamarket/report.hpp"
#include "datamarket/rng.hpp"
#include "datamarket/simulation.hpp"

namespace datamarket {
namespace {

namespace fs = std::filesystem;

struct Check {
  std::string name;       // named after the operation it certifies
  bool pass = false;
  double value = 0.0;
  double target = 0.0;
  double tolerance = 0.0;
  std::string details;
};

void print_check(std::ostream& log, const Check& c) {
  log << (c.pass ? "[PASS] " : "[FAIL] ") << c.name << ": value="
      << format_double(c.value) << " target=" << format_double(c.target)
      << " tol=" << format_double(c.tolerance);
  if (!c.details.empty()) log << " (" << c.details << ")";
  log << "\n";
}

nlohmann::json checks_to_json(const std::vector<Check>& checks) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& c : checks)
    arr.push_back({{"name", c.name},
                   {"pass", c.pass},
                   {"value", c.value},
                   {"target", c.target},
                   {"tolerance", c.tolerance},
                   {"details", c.details}});
  return arr;
}

// Builds the mechanism inputs for the configured objective.
MechanismInputs make_inputs(const RunConfig& config) {
  if (config.objective == Objective::kWelfare) {
    const auto baseline = welfare_opt(config.market);
    return welfare_inputs(config.market, baseline);
  }
  const auto search =
      profit_search(config.market, config.epsilon, config.enumeration_cap);
  return profit_inputs(config.market, search);
}

// A dataset of `size` points whose sample mean is exactly `target` (up to
// rounding): fresh noise recentered onto the target.
Dataset dataset_with_mean(int size, double target, double sigma2, Rng& rng) {
  Dataset data(static_cast<std::size_t>(size));
  const double sd = std::sqrt(sigma2);
  for (auto& x : data) x = rng.normal(0.0, sd);
  const double shift = target - mean_or_zero(data);
  for (auto& x : data) x += shift;
  return data;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe r;
  if (xs.empty()) return r;
  double sum = 0.0;
  for (double x : xs) sum += x;
  r.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - r.mean) * (x - r.mean);
    r.se = std::sqrt(ss / (static_cast<double>(xs.size()) - 1.0) /
                     static_cast<double>(xs.size()));
  }
  return r;
}

void note_warnings(const RunConfig& config, std::ostream& log) {
  for (const auto& w : config.warnings) log << "[WARN] " << w << "\n";
}

}  // namespace

int cmd_baseline(const RunConfig& config, const std::string& out_dir,
                 std::ostream& log) {
  note_warnings(config, log);
  const auto baseline = welfare_opt(config.market);
  const Money bound = welfare_upper_bound(baseline, config.market.costs[0],
                                          config.market.costs[1]);
  if (baseline.boundary_warning)
    log << "[WARN] welfare_opt: maximizer sits on the search boundary\n";

  nlohmann::json body = report_header(config, "baseline");
  body["welfare_opt"] = {{"n_opt", baseline.n_opt},
                         {"opt", baseline.opt},
                         {"boundary_warning", baseline.boundary_warning}};
  body["welfare_upper_bound"] = bound;
  write_json_report(fs::path(out_dir) / "baseline.json", body);

  std::ostringstream csv;
  csv << "N,welfare\n";
  for (std::size_t k = 0; k < baseline.table.size(); ++k)
    csv << (k + 1) << "," << format_double(baseline.table[k]) << "\n";
  write_text_atomic(fs::path(out_dir) / "baseline_table.csv", csv.str());

  log << "baseline: n_opt=" << baseline.n_opt
      << " opt=" << format_double(baseline.opt)
      << " upper_bound=" << format_double(bound) << "\n";
  return 0;
}

int cmd_price(const RunConfig& config, const std::string& out_dir,
              std::ostream& log) {
  note_warnings(config, log);
  const auto search =
      profit_search(config.market, config.epsilon, config.enumeration_cap);
  const int n_sweep = static_cast<int>(search.revenue_by_n.size());
  const auto tables = config.market.value_tables(n_sweep);
  std::vector<ValueTable> prefix;
  for (const auto& t : tables)
    prefix.emplace_back(t.begin(), t.begin() + search.n_plus + 1);
  const auto curve = poi_solve(prefix, search.n_plus, config.epsilon,
                               config.enumeration_cap);

  if (search.unprofitable)
    log << "[WARN] profit_search: no collection amount is profitable\n";

  nlohmann::json body = report_header(config, "price");
  body["profit_search"] = search.to_json();
  body["poi_solve"] = curve.to_json();
  body["scheme"] = EnvyFreeScheme{search.alloc, search.price}.to_json();
  write_json_report(fs::path(out_dir) / "price.json", body);

  std::ostringstream csv;
  csv << "N,revenue,profit\n";
  for (std::size_t k = 0; k < search.revenue_by_n.size(); ++k)
    csv << (k + 1) << "," << format_double(search.revenue_by_n[k]) << ","
        << format_double(search.profit_by_n[k]) << "\n";
  write_text_atomic(fs::path(out_dir) / "price_profile.csv", csv.str());

  log << "price: n_plus=" << search.n_plus
      << " profit=" << format_double(search.profit)
      << (search.unprofitable ? " (unprofitable)" : "") << "\n";
  return 0;
}

int cmd_run(const RunConfig& config, const std::string& out_dir,
            std::ostream& log) {
  note_warnings(config, log);
  const auto inputs = make_inputs(config);
  const auto outcomes = run_truthful_rounds(inputs, config.market, config.mu,
                                            config.rounds, config.seed);

  std::ostringstream csv;
  csv << "round,seed,delta";
  for (int j = 0; j < inputs.n_buyers(); ++j) csv << ",price_" << (j + 1);
  for (int i = 0; i < config.market.n_contributors(); ++i)
    csv << ",payment_" << (i + 1);
  csv << ",residual,compliant_1,compliant_2,degenerate,short\n";

  double max_residual = 0.0;
  std::vector<std::vector<double>> price_samples(
      static_cast<std::size_t>(inputs.n_buyers()));
  std::vector<std::vector<double>> payment_samples(2);
  for (std::size_t r = 0; r < outcomes.size(); ++r) {
    const auto& o = outcomes[r];
    csv << r << ","
        << truthful_round_seed(config.seed, static_cast<int>(r)) << ","
        << format_double(o.discrepancy);
    for (std::size_t j = 0; j < o.price.size(); ++j) {
      csv << "," << format_double(o.price[j]);
      price_samples[j].push_back(o.price[j]);
    }
    for (std::size_t i = 0; i < o.payment.size(); ++i) {
      csv << "," << format_double(o.payment[i]);
      if (i < 2) payment_samples[i].push_back(o.payment[i]);
    }
    csv << "," << format_double(o.bb_residual) << "," << o.compliant[0] << ","
        << o.compliant[1] << "," << o.degenerate << "," << o.short_allocation
        << "\n";
    max_residual = std::max(max_residual, std::abs(o.bb_residual));
  }
  write_text_atomic(fs::path(out_dir) / "rounds.csv", csv.str());

  nlohmann::json body = report_header(config, "run");
  body["rounds"] = config.rounds;
  body["mu"] = config.mu;
  body["mechanism_inputs"] = inputs.to_json();
  body["max_abs_bb_residual"] = max_residual;
  body["broker_absorbs_residual"] = config.broker_absorbs_residual;
  nlohmann::json prices = nlohmann::json::array();
  for (std::size_t j = 0; j < price_samples.size(); ++j) {
    const auto stats = mean_se(price_samples[j]);
    prices.push_back({{"buyer", j + 1},
                      {"mean", stats.mean},
                      {"std_err", stats.se},
                      {"expected_price", inputs.expected_price[j]}});
  }
  body["buyer_price"] = prices;
  nlohmann::json payments = nlohmann::json::array();
  for (std::size_t i = 0; i < payment_samples.size(); ++i) {
    const auto stats = mean_se(payment_samples[i]);
    payments.push_back(
        {{"contributor", i + 1}, {"mean", stats.mean}, {"std_err", stats.se}});
  }
  body["contributor_payment"] = payments;
  write_json_report(fs::path(out_dir) / "run_summary.json", body);

  log << "run: rounds=" << config.rounds
      << " max|bb_residual|=" << format_double(max_residual) << "\n";
  return 0;
}

int cmd_verify(const RunConfig& config, const std::string& out_dir,
               std::ostream& log, double d_tamper) {
  note_warnings(config, log);
  const auto inputs = make_inputs(config);
  const auto& market = config.market;
  const double c1 = market.costs[0];
  const double c2 = market.costs[1];
  std::vector<Check> checks;

  {  // Posted prices must fund the target plus collection costs exactly.
    const Money price_sum = std::accumulate(
        inputs.expected_price.begin(), inputs.expected_price.end(), Money{0});
    const Money required = inputs.target_value + c1 * inputs.total_points;
    Check c{"mechanism_inputs.consistency"};
    c.value = price_sum;
    c.target = required;
    c.tolerance = kMoneyTol;
    c.pass = std::abs(price_sum - required) <= c.tolerance;
    checks.push_back(c);
  }

  {  // Penalty coefficients put the utility peak at the requested amount.
    bool pass = true;
    double worst = 0.0;
    for (int i = 0; i < 2; ++i) {
      const double d = penalty_coeff(i, inputs, market, d_tamper);
      const double implied = std::sqrt(market.sigma2) *
                             std::sqrt(d / market.costs[static_cast<std::size_t>(i)]);
      const double gap = std::abs(implied - inputs.requested(i));
      worst = std::max(worst, gap);
      pass &= gap <= 1e-9;
    }
    Check c{"penalty_coeff.identity"};
    c.value = worst;
    c.target = 0.0;
    c.tolerance = 1e-9;
    c.pass = pass;
    if (d_tamper != 1.0) c.details = "d_tamper active";
    checks.push_back(c);
  }

  {  // Budget balance, every realization, adversarial submitted means.
    Rng rng(derive_seed(config.seed, 0x62626262ULL));
    double max_residual = 0.0;
    for (int r = 0; r < config.rounds; ++r) {
      std::vector<Dataset> submissions(
          static_cast<std::size_t>(market.n_contributors()));
      for (int i = 0; i < 2; ++i)
        submissions[static_cast<std::size_t>(i)] = dataset_with_mean(
            inputs.requested(i), rng.uniform(-10.0, 10.0), market.sigma2, rng);
      const auto outcome =
          run_round(inputs, submissions, market,
                    derive_seed(config.seed, 0x62627278ULL, r), d_tamper);
      max_residual = std::max(max_residual, std::abs(outcome.bb_residual));
    }
    Check c{"run_round.budget_balance"};
    c.value = max_residual;
    c.target = 0.0;
    c.tolerance = kMoneyTol;
    c.pass = max_residual <= c.tolerance;
    c.details = std::to_string(config.rounds) + " adversarial rounds";
    checks.push_back(c);
  }

  for (int i = 0; i < 2; ++i) {  // Contributors break even in expectation.
    const Money closed = (inputs.target_value + c1 - c2) *
                         inputs.requested(i) / inputs.total_points;
    const auto est = simulate_utility(
        inputs, market, i, Strategy::WellBehaved(), config.mu, config.reps,
        derive_seed(config.seed, 0x69726300ULL, i), d_tamper);
    Check c{"simulate_utility.irc_contributor_" + std::to_string(i + 1)};
    c.value = est.mean;
    c.target = closed;
    c.tolerance = 3.0 * est.std_err;
    c.pass = std::abs(est.mean - closed) <= c.tolerance && closed >= 0.0 &&
             est.mean >= -c.tolerance;
    c.details = "std_err=" + format_double(est.std_err);
    checks.push_back(c);
  }

  {  // Buyers pay the posted expected price on average, never above value.
    const auto outcomes = run_truthful_rounds(
        inputs, market, config.mu, config.rounds,
        derive_seed(config.seed, 0x69726200ULL), d_tamper);
    for (int j = 0; j < inputs.n_buyers(); ++j) {
      std::vector<double> prices;
      prices.reserve(outcomes.size());
      for (const auto& o : outcomes)
        prices.push_back(o.price[static_cast<std::size_t>(j)]);
      const auto stats = mean_se(prices);
      Check c{"buyer_price.irb_buyer_" + std::to_string(j + 1)};
      c.value = stats.mean;
      c.target = inputs.expected_price[static_cast<std::size_t>(j)];
      c.tolerance = 3.0 * stats.se;
      const int sold = inputs.sale_count[static_cast<std::size_t>(j)];
      const Money value =
          sold >= 1 ? iid_value(market.buyers[static_cast<std::size_t>(j)]
                                    .valuation,
                                sold, market.sigma2, market.quadrature)
                    : 0.0;
      const Money utility = value - stats.mean;
      c.pass = std::abs(stats.mean - c.target) <= c.tolerance &&
               utility >= -c.tolerance;
      c.details = "buyer_utility=" + format_double(utility);
      checks.push_back(c);
    }
  }

  if (config.objective == Objective::kWelfare) {
    const auto baseline = welfare_opt(market);
    const Money bound = welfare_upper_bound(baseline, c1, c2);
    const Money achieved = welfare_at_truthful(inputs, market);
    Check c{"welfare_at_truthful.matches_upper_bound"};
    c.value = achieved;
    c.target = bound;
    c.tolerance = kMoneyTol;
    c.pass = std::abs(achieved - bound) <= c.tolerance &&
             achieved <= bound + c.tolerance;
    checks.push_back(c);
  } else {
    const Money achieved = profit_at_truthful(inputs, market);
    const Money bound = inputs.target_value - (c2 - c1);
    Check c{"profit_at_truthful.matches_bound"};
    c.value = achieved;
    c.target = bound;
    c.tolerance = kMoneyTol;
    c.pass = std::abs(achieved - bound) <= c.tolerance;
    checks.push_back(c);

    // No buyer prefers another buyer's (quantity, price) pair.
    const int n_max = *std::max_element(inputs.sale_count.begin(),
                                        inputs.sale_count.end());
    const auto tables = market.value_tables(std::max(1, n_max));
    bool envy_free = true;
    double worst_gap = 0.0;
    for (std::size_t j = 0; j < tables.size(); ++j)
      for (std::size_t k = 0; k < tables.size(); ++k) {
        const double own =
            tables[j][static_cast<std::size_t>(inputs.sale_count[j])] -
            inputs.expected_price[j];
        const double other =
            tables[j][static_cast<std::size_t>(inputs.sale_count[k])] -
            inputs.expected_price[k];
        worst_gap = std::min(worst_gap, own - other);
        envy_free &= own >= other - kMoneyTol;
      }
    Check e{"expected_price.envy_free"};
    e.value = worst_gap;
    e.target = 0.0;
    e.tolerance = kMoneyTol;
    e.pass = envy_free;
    checks.push_back(e);
  }

  bool all_pass = true;
  for (const auto& c : checks) {
    print_check(log, c);
    all_pass &= c.pass;
  }

  nlohmann::json body = report_header(config, "verify");
  body["d_tamper"] = d_tamper;
  body["mechanism_inputs"] = inputs.to_json();
  body["checks"] = checks_to_json(checks);
  body["all_pass"] = all_pass;
  write_json_report(fs::path(out_dir) / "verify.json", body);

  log << (all_pass ? "verify: all checks passed\n"
                   : "verify: at least one check FAILED\n");
  return all_pass ? 0 : 1;
}

int cmd_sweep(const RunConfig& config, const std::string& out_dir,
              std::ostream& log, double d_tamper) {
  note_warnings(config, log);
  const auto inputs = make_inputs(config);
  const double sd = std::sqrt(config.market.sigma2);
  DeviationGrid grid;
  grid.mu_grid = config.mu_grid.build(config.market.sigma2);
  grid.fractions = config.deviation_grid.fractions;
  grid.shifts.clear();
  for (double b : config.deviation_grid.shifts_in_sigma)
    grid.shifts.push_back(b * sd);
  grid.scales = config.deviation_grid.scales;
  grid.count_deltas = config.deviation_grid.count_deltas;
  grid.cap_per_contributor = config.deviation_grid.cap_per_contributor;
  grid.reps = config.reps;
  const auto report =
      icc_sweep(inputs, config.market, grid, config.seed, d_tamper);

  std::ostringstream csv;
  csv << "contributor,strategy,worst_case,worst_mu,truthful,margin,std_err,"
         "closed_form,pass\n";
  for (const auto& row : report.rows)
    csv << (row.contributor + 1) << "," << row.strategy << ","
        << format_double(row.worst_case) << "," << format_double(row.worst_mu)
        << "," << format_double(row.truthful) << ","
        << format_double(row.margin) << "," << format_double(row.std_err)
        << "," << row.closed_form << "," << row.pass << "\n";
  write_text_atomic(fs::path(out_dir) / "sweep.csv", csv.str());

  nlohmann::json body = report_header(config, "sweep");
  body["d_tamper"] = d_tamper;
  body["mu_grid"] = grid.mu_grid;
  body["icc_sweep"] = report.to_json();
  write_json_report(fs::path(out_dir) / "sweep.json", body);

  int failures = 0;
  Money min_margin = report.rows.empty() ? 0.0 : report.rows.front().margin;
  for (const auto& row : report.rows) {
    failures += row.pass ? 0 : 1;
    min_margin = std::min(min_margin, row.margin);
  }
  log << "sweep: " << report.rows.size() << " deviations, "
      << report.rows.size() / 2 << " per contributor, min_margin="
      << format_double(min_margin) << ", failures=" << failures << "\n";
  for (const auto& check : report.concavity)
    log << (check.pass ? "[PASS] " : "[FAIL] ")
        << "icc_sweep.concavity_contributor_" << (check.contributor + 1)
        << ": argmax=" << check.argmax << " requested=" << check.requested
        << "\n";
  log << (report.all_pass ? "sweep: equilibrium certified on the deviation grid\n"
                          : "sweep: at least one profitable deviation FOUND\n");
  return report.all_pass ? 0 : 1;
}

}  // namespace datamarket
