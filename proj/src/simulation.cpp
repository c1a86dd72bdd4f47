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

#include "datamarket/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace datamarket {
namespace {

constexpr std::uint64_t kRepStream = 0x7265706cULL;    // replication draws
constexpr std::uint64_t kRoundStream = 0x726f756eULL;  // batch rounds
constexpr std::uint64_t kAllocStream = 0x616c6c6fULL;  // allocation draws

double contributor_cost(const MarketConfig& market, int contributor) {
  return market.costs[static_cast<std::size_t>(contributor)];
}

// Compliance-gated base of the payment formula.
double payment_base(const MechanismInputs& inputs, const MarketConfig& market,
                    int contributor, double d) {
  const double total = inputs.total_points;
  const double requested = inputs.requested(contributor);
  const double opposite = total - requested;
  return (inputs.target_value + market.costs[0] - market.costs[1]) *
             requested / total +
         contributor_cost(market, contributor) * requested +
         d * market.sigma2 / opposite + d * market.sigma2 / requested;
}

}  // namespace

std::optional<Money> utility_closed_form(const MechanismInputs& inputs,
                                         const MarketConfig& market,
                                         int contributor,
                                         const Strategy& strategy, double mu,
                                         double d_tamper) {
  if (contributor >= 2) {
    // Nothing requested, nothing paid; only collection cost can accrue.
    const int n = strategy.collect.collected(0);
    return -contributor_cost(market, contributor) * n;
  }
  const int requested = inputs.requested(contributor);
  const auto law = submitted_mean_law(strategy, requested, market.sigma2);
  const int collected = strategy.collect.collected(requested);
  const double d = penalty_coeff(contributor, inputs, market, d_tamper);
  const double opposite_var =
      market.sigma2 / static_cast<double>(inputs.total_points - requested);

  // Expected squared discrepancy against a well-behaved opponent:
  // (E[submitted mean] - mu)^2 + Var[submitted mean] + Var[opponent mean].
  const double mean_gap = law.tracks_mu ? law.bias : law.bias - mu;
  const double expected_penalty =
      mean_gap * mean_gap + law.variance + opposite_var;

  Money utility = -d * expected_penalty -
                  contributor_cost(market, contributor) * collected;
  if (law.count == requested)
    utility += payment_base(inputs, market, contributor, d);
  return utility;
}

namespace {

Money one_replication(const MechanismInputs& inputs, const MarketConfig& market,
                      int contributor, const Strategy& strategy, double mu,
                      std::uint64_t rep_seed, double d_tamper) {
  Rng rng(rep_seed);
  const double sd = std::sqrt(market.sigma2);
  const int opponent = contributor == 0 ? 1 : 0;

  Dataset collected(static_cast<std::size_t>(
      strategy.collect.collected(inputs.requested(contributor))));
  for (auto& x : collected) x = rng.normal(mu, sd);

  Dataset opponent_data(
      static_cast<std::size_t>(inputs.requested(opponent)));
  for (auto& x : opponent_data) x = rng.normal(mu, sd);

  std::vector<Dataset> submissions(2);
  submissions[static_cast<std::size_t>(contributor)] =
      strategy.report.apply(collected, market.sigma2, rng);
  submissions[static_cast<std::size_t>(opponent)] = std::move(opponent_data);

  const Money pay =
      contributor_payment(contributor, inputs, submissions, market, d_tamper);
  return pay - contributor_cost(market, contributor) *
                   static_cast<double>(collected.size());
}

UtilityEstimate simulate_utility_impl(const MechanismInputs& inputs,
                                      const MarketConfig& market,
                                      int contributor,
                                      const Strategy& strategy, double mu,
                                      int reps, std::uint64_t seed,
                                      double d_tamper, bool parallel) {
  if (reps < 1)
    throw std::invalid_argument("simulate_utility: reps must be >= 1");
  if (contributor < 0 || contributor >= 2)
    throw std::invalid_argument("simulate_utility: contributor must be 0 or 1");

  std::vector<Money> samples(static_cast<std::size_t>(reps));
  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < reps; ++r)
      samples[static_cast<std::size_t>(r)] =
          one_replication(inputs, market, contributor, strategy, mu,
                          derive_seed(seed, kRepStream, r), d_tamper);
  } else {
    for (int r = 0; r < reps; ++r)
      samples[static_cast<std::size_t>(r)] =
          one_replication(inputs, market, contributor, strategy, mu,
                          derive_seed(seed, kRepStream, r), d_tamper);
  }

  // Fixed-order reduction keeps parallel and serial results bit-identical.
  double sum = 0.0;
  for (double x : samples) sum += x;
  const double mean = sum / reps;
  double ss = 0.0;
  for (double x : samples) ss += (x - mean) * (x - mean);

  UtilityEstimate est;
  est.mean = mean;
  est.std_err = reps > 1 ? std::sqrt(ss / (reps - 1.0) / reps) : 0.0;
  est.mu = mu;
  est.closed_form =
      utility_closed_form(inputs, market, contributor, strategy, mu, d_tamper);
  return est;
}

}  // namespace

UtilityEstimate simulate_utility(const MechanismInputs& inputs,
                                 const MarketConfig& market, int contributor,
                                 const Strategy& strategy, double mu, int reps,
                                 std::uint64_t seed, double d_tamper) {
  return simulate_utility_impl(inputs, market, contributor, strategy, mu, reps,
                               seed, d_tamper, true);
}

UtilityEstimate simulate_utility_serial(const MechanismInputs& inputs,
                                        const MarketConfig& market,
                                        int contributor,
                                        const Strategy& strategy, double mu,
                                        int reps, std::uint64_t seed,
                                        double d_tamper) {
  return simulate_utility_impl(inputs, market, contributor, strategy, mu, reps,
                               seed, d_tamper, false);
}

WorstCase worst_case_utility(const MechanismInputs& inputs,
                             const MarketConfig& market, int contributor,
                             const Strategy& strategy,
                             const std::vector<double>& mu_grid, int reps,
                             std::uint64_t seed, double d_tamper) {
  if (mu_grid.empty())
    throw std::invalid_argument("worst_case_utility: empty mean grid");

  const auto law = submitted_mean_law(
      strategy, inputs.requested(contributor), market.sigma2);
  WorstCase worst;
  const auto first = utility_closed_form(inputs, market, contributor, strategy,
                                         mu_grid.front(), d_tamper);
  if (first.has_value()) {
    worst.utility = *first;
    worst.mu = mu_grid.front();
    worst.closed_form = true;
    if (contributor < 2 && !mu_independent(law)) {
      for (std::size_t g = 1; g < mu_grid.size(); ++g) {
        const Money u = *utility_closed_form(inputs, market, contributor,
                                             strategy, mu_grid[g], d_tamper);
        if (u < worst.utility) {
          worst.utility = u;
          worst.mu = mu_grid[g];
        }
      }
    }
    return worst;
  }

  if (reps < 1)
    throw std::invalid_argument(
        "worst_case_utility: no closed form for this strategy; Monte Carlo "
        "fallback needs reps >= 1");
  bool have = false;
  for (std::size_t g = 0; g < mu_grid.size(); ++g) {
    const auto est = simulate_utility(
        inputs, market, contributor, strategy, mu_grid[g], reps,
        derive_seed(seed, 0x77637573ULL, g), d_tamper);
    if (!have || est.mean < worst.utility) {
      have = true;
      worst.utility = est.mean;
      worst.mu = mu_grid[g];
      worst.std_err = est.std_err;
      worst.closed_form = false;
    }
  }
  return worst;
}

DeviationGrid DeviationGrid::Defaults(double sigma2) {
  DeviationGrid grid;
  const double sd = std::sqrt(sigma2);
  grid.mu_grid.clear();
  const int points = 21;
  for (int g = 0; g < points; ++g)
    grid.mu_grid.push_back(-5.0 * sd +
                           10.0 * sd * static_cast<double>(g) / (points - 1));
  grid.shifts = {0.1 * sd, 0.5 * sd, 1.0 * sd};
  return grid;
}

std::vector<Strategy> build_deviations(const DeviationGrid& grid,
                                       int requested) {
  std::vector<Strategy> out;
  auto add = [&](CollectRule c, ReportRule r) {
    if (static_cast<int>(out.size()) >= grid.cap_per_contributor) return;
    out.push_back(Strategy{c, r});
  };
  std::vector<int> alt_counts;  // requested plus the misreport offsets
  for (int delta : grid.count_deltas)
    if (requested + delta >= 0) alt_counts.push_back(requested + delta);

  // Collection deviations with honest reporting (count gives them away).
  for (double rho : grid.fractions)
    add(CollectRule::Fraction(rho), ReportRule::Identity());
  // Exact-count mean-tracking reporters hiding over/under-collection.
  for (double rho : grid.fractions)
    add(CollectRule::Fraction(rho), ReportRule::RepeatSampleMean(requested));
  for (double rho : grid.fractions)
    add(CollectRule::Fraction(rho),
        ReportRule::ReplaceWithMeanCopies(requested));
  // Count misreports around the request.
  for (int count : alt_counts)
    add(CollectRule::Identity(), ReportRule::RepeatSampleMean(count));
  for (double rho : grid.fractions)
    for (int count : alt_counts)
      add(CollectRule::Fraction(rho), ReportRule::TruncateTo(count));
  // Biased and rescaled reports.
  for (double rho : grid.fractions)
    for (double b : grid.shifts) {
      add(CollectRule::Fraction(rho), ReportRule::ShiftMean(b));
      add(CollectRule::Fraction(rho), ReportRule::ShiftMean(-b));
    }
  for (double rho : grid.fractions)
    for (double s : grid.scales)
      add(CollectRule::Fraction(rho), ReportRule::ScaleAroundMean(s));
  // Fabrication at every grid mean, with and without paying for collection.
  for (double rho : {0.0, 1.0})
    for (double mu0 : grid.mu_grid) {
      add(CollectRule::Fraction(rho),
          ReportRule::FabricateNormal(mu0, requested));
      for (int count : alt_counts)
        add(CollectRule::Fraction(rho), ReportRule::FabricateNormal(mu0, count));
    }
  return out;
}

namespace {

DeviationReport icc_sweep_impl(const MechanismInputs& inputs,
                               const MarketConfig& market,
                               const DeviationGrid& grid, std::uint64_t seed,
                               double d_tamper, bool parallel) {
  DeviationReport report;
  report.scope_note =
      "certifies the parametric deviation families in the sweep grid against "
      "the well-behaved profile; it does not search the full space of "
      "reporting rules";

  std::vector<std::pair<int, Strategy>> tasks;
  for (int contributor = 0; contributor < 2; ++contributor) {
    const Money truthful = *utility_closed_form(
        inputs, market, contributor, Strategy::WellBehaved(),
        grid.mu_grid.front(), d_tamper);
    report.truthful_utility.push_back(truthful);
    for (const auto& s : build_deviations(grid, inputs.requested(contributor)))
      tasks.emplace_back(contributor, s);
  }

  report.rows.resize(tasks.size());
  auto evaluate = [&](std::size_t t) {
    const auto& [contributor, strategy] = tasks[t];
    const Money truthful =
        report.truthful_utility[static_cast<std::size_t>(contributor)];
    const auto worst =
        worst_case_utility(inputs, market, contributor, strategy, grid.mu_grid,
                           grid.reps, derive_seed(seed, 0x64657669ULL, t),
                           d_tamper);
    DeviationRow row;
    row.contributor = contributor;
    row.strategy = strategy.label();
    row.worst_case = worst.utility;
    row.worst_mu = worst.mu;
    row.truthful = truthful;
    row.margin = truthful - worst.utility;
    row.std_err = worst.std_err;
    row.closed_form = worst.closed_form;
    row.pass = worst.closed_form ? row.margin >= -kMoneyTol
                                 : row.margin >= -3.0 * worst.std_err;
    report.rows[t] = std::move(row);
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t t = 0; t < static_cast<std::int64_t>(tasks.size()); ++t)
      evaluate(static_cast<std::size_t>(t));
  } else {
    for (std::size_t t = 0; t < tasks.size(); ++t) evaluate(t);
  }

  // Exact-count mean-tracking utility must peak at the requested amount.
  for (int contributor = 0; contributor < 2; ++contributor) {
    const int requested = inputs.requested(contributor);
    ConcavityCheck check;
    check.contributor = contributor;
    check.requested = requested;
    int best_n = 1;
    Money best = 0.0;
    for (int n = 1; n <= 2 * requested; ++n) {
      Strategy s{CollectRule::Fixed(n), ReportRule::RepeatSampleMean(requested)};
      const Money u = *utility_closed_form(inputs, market, contributor, s,
                                           grid.mu_grid.front(), d_tamper);
      check.utilities.push_back(u);
      if (n == 1 || u > best) {
        best = u;
        best_n = n;
      }
    }
    check.argmax = best_n;
    check.pass = (best_n == requested);
    report.concavity.push_back(std::move(check));
  }

  report.all_pass = true;
  for (const auto& row : report.rows) report.all_pass &= row.pass;
  for (const auto& check : report.concavity) report.all_pass &= check.pass;
  return report;
}

}  // namespace

DeviationReport icc_sweep(const MechanismInputs& inputs,
                          const MarketConfig& market, const DeviationGrid& grid,
                          std::uint64_t seed, double d_tamper) {
  return icc_sweep_impl(inputs, market, grid, seed, d_tamper, true);
}

DeviationReport icc_sweep_serial(const MechanismInputs& inputs,
                                 const MarketConfig& market,
                                 const DeviationGrid& grid, std::uint64_t seed,
                                 double d_tamper) {
  return icc_sweep_impl(inputs, market, grid, seed, d_tamper, false);
}

nlohmann::json DeviationReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& row : rows) {
    rows_json.push_back({{"contributor", row.contributor + 1},
                         {"strategy", row.strategy},
                         {"worst_case", row.worst_case},
                         {"worst_mu", row.worst_mu},
                         {"truthful", row.truthful},
                         {"margin", row.margin},
                         {"std_err", row.std_err},
                         {"closed_form", row.closed_form},
                         {"pass", row.pass}});
  }
  nlohmann::json concavity_json = nlohmann::json::array();
  for (const auto& check : concavity) {
    concavity_json.push_back({{"contributor", check.contributor + 1},
                              {"requested", check.requested},
                              {"argmax", check.argmax},
                              {"utilities", check.utilities},
                              {"pass", check.pass}});
  }
  return {{"scope", scope_note},
          {"truthful_utility", truthful_utility},
          {"deviations", rows_json},
          {"concavity", concavity_json},
          {"all_pass", all_pass}};
}

Money welfare_at_truthful(const MechanismInputs& inputs,
                          const MarketConfig& market) {
  Money total = 0.0;
  for (std::size_t j = 0; j < market.buyers.size(); ++j) {
    const int m = inputs.sale_count[j];
    if (m >= 1)
      total += iid_value(market.buyers[j].valuation, m, market.sigma2,
                         market.quadrature);
  }
  return total - market.costs[0] * (inputs.total_points - 1) - market.costs[1];
}

Money profit_at_truthful(const MechanismInputs& inputs,
                         const MarketConfig& market) {
  const Money revenue = std::accumulate(inputs.expected_price.begin(),
                                        inputs.expected_price.end(), Money{0});
  return revenue - market.costs[0] * (inputs.total_points - 1) -
         market.costs[1];
}

std::uint64_t truthful_round_seed(std::uint64_t master, int round) {
  return derive_seed(master, kRoundStream, static_cast<std::uint64_t>(round));
}

namespace {

std::vector<RoundOutcome> run_truthful_rounds_impl(
    const MechanismInputs& inputs, const MarketConfig& market, double mu,
    int rounds, std::uint64_t seed, double d_tamper, bool parallel) {
  if (rounds < 1)
    throw std::invalid_argument("run_truthful_rounds: rounds must be >= 1");
  const double sd = std::sqrt(market.sigma2);
  const int n_contributors = market.n_contributors();

  std::vector<RoundOutcome> out(static_cast<std::size_t>(rounds));
  auto one_round = [&](int r) {
    Rng rng(truthful_round_seed(seed, r));
    std::vector<Dataset> submissions(
        static_cast<std::size_t>(n_contributors));
    for (int i = 0; i < 2; ++i) {
      submissions[static_cast<std::size_t>(i)].resize(
          static_cast<std::size_t>(inputs.requested(i)));
      for (auto& x : submissions[static_cast<std::size_t>(i)])
        x = rng.normal(mu, sd);
    }
    out[static_cast<std::size_t>(r)] =
        run_round(inputs, submissions, market,
                  derive_seed(seed, kAllocStream, r), d_tamper);
  };

  if (parallel) {
#pragma omp parallel for schedule(static)
    for (int r = 0; r < rounds; ++r) one_round(r);
  } else {
    for (int r = 0; r < rounds; ++r) one_round(r);
  }
  return out;
}

}  // namespace

std::vector<RoundOutcome> run_truthful_rounds(const MechanismInputs& inputs,
                                              const MarketConfig& market,
                                              double mu, int rounds,
                                              std::uint64_t seed,
                                              double d_tamper) {
  return run_truthful_rounds_impl(inputs, market, mu, rounds, seed, d_tamper,
                                  true);
}

std::vector<RoundOutcome> run_truthful_rounds_serial(
    const MechanismInputs& inputs, const MarketConfig& market, double mu,
    int rounds, std::uint64_t seed, double d_tamper) {
  return run_truthful_rounds_impl(inputs, market, mu, rounds, seed, d_tamper,
                                  false);
}

}  // namespace datamarket
