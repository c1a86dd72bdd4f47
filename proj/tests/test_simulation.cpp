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

#include <cmath>

#include "doctest.h"

#include "datamarket/baseline.hpp"
#include "datamarket/simulation.hpp"

using namespace datamarket;

namespace {

MarketConfig canonical_market() {
  MarketConfig market;
  market.buyers = {Buyer{0, ErrorValuation::ExpQuadratic(1.0)},
                   Buyer{1, ErrorValuation::ExpQuadratic(1.0)}};
  market.costs = {0.1, 0.2, 0.5};
  market.sigma2 = 1.0;
  return market;
}

// Low-cost variant where contributor 1 is asked for five points, so the
// collection amount actually has room to move.
MarketConfig lowcost_market() {
  auto market = canonical_market();
  market.costs = {0.02, 0.04, 0.1};
  return market;
}

MechanismInputs inputs_for(const MarketConfig& market) {
  return welfare_inputs(market, welfare_opt(market));
}

}  // namespace

TEST_CASE("strategy rules transform datasets as labeled") {
  Rng rng(1);
  const Dataset data{1.0, 2.0, 3.0};

  CHECK(ReportRule::Identity().apply(data, 1.0, rng) == data);
  CHECK(ReportRule::ShiftMean(0.5).apply(data, 1.0, rng) ==
        Dataset{1.5, 2.5, 3.5});
  CHECK(ReportRule::RepeatSampleMean(2).apply(data, 1.0, rng) ==
        Dataset{2.0, 2.0});
  CHECK(ReportRule::TruncateTo(2).apply(data, 1.0, rng) == Dataset{1.0, 2.0});
  CHECK(ReportRule::TruncateTo(9).apply(data, 1.0, rng) == data);

  const auto scaled = ReportRule::ScaleAroundMean(2.0).apply(data, 1.0, rng);
  CHECK(mean_or_zero(scaled) == doctest::Approx(2.0));
  CHECK(scaled[0] == doctest::Approx(0.0));

  const auto padded = ReportRule::ReplaceWithMeanCopies(5).apply(data, 1.0, rng);
  CHECK(padded.size() == 5);
  CHECK(mean_or_zero(padded) == doctest::Approx(2.0));
  const auto collapsed =
      ReportRule::ReplaceWithMeanCopies(2).apply(data, 1.0, rng);
  CHECK(collapsed == Dataset{2.0, 2.0});

  const auto fabricated = ReportRule::FabricateNormal(3.0, 4).apply({}, 1.0, rng);
  CHECK(fabricated.size() == 4);

  CHECK(CollectRule::Fraction(0.75).collected(5) == 4);  // rounds half up
  CHECK(CollectRule::Fraction(0.0).collected(5) == 0);
  CHECK(CollectRule::Fixed(3).collected(7) == 3);
}

TEST_CASE("submitted mean law matches empirical behavior") {
  const double sigma2 = 1.0;
  Strategy s;
  s.report = ReportRule::RepeatSampleMean(4);
  const auto law = submitted_mean_law(s, 4, sigma2);
  CHECK(law.tracks_mu);
  CHECK(law.count == 4);
  CHECK(law.variance == doctest::Approx(sigma2 / 4));

  s.collect = CollectRule::Fraction(0.5);  // collects 2 of 4
  const auto law2 = submitted_mean_law(s, 4, sigma2);
  CHECK(law2.variance == doctest::Approx(sigma2 / 2));
  CHECK(law2.count == 4);

  s.collect = CollectRule::Fixed(0);
  const auto law3 = submitted_mean_law(s, 4, sigma2);
  CHECK_FALSE(law3.tracks_mu);  // submits copies of zero
  CHECK(law3.variance == 0.0);
  CHECK(law3.count == 4);

  Strategy fab;
  fab.collect = CollectRule::Fixed(0);
  fab.report = ReportRule::FabricateNormal(1.5, 4);
  const auto law4 = submitted_mean_law(fab, 4, sigma2);
  CHECK_FALSE(law4.tracks_mu);
  CHECK(law4.bias == doctest::Approx(1.5));
  CHECK(law4.variance == doctest::Approx(sigma2 / 4));
}

TEST_CASE("truthful utility closed form is mean-independent") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const double expected = (inputs.target_value + 0.1 - 0.2) / 2;
  for (double mu : {-4.0, 0.0, 2.5}) {
    const auto u = utility_closed_form(inputs, market, 0,
                                       Strategy::WellBehaved(), mu);
    REQUIRE(u.has_value());
    CHECK(*u == doctest::Approx(expected).epsilon(1e-12));
    CHECK(*u == doctest::Approx(0.66650).epsilon(1e-4));
  }
  // Non-collectors gain nothing and pay only their own collection cost.
  CHECK(*utility_closed_form(inputs, market, 2, Strategy::WellBehaved(), 0.0) ==
        0.0);
}

TEST_CASE("fabrication closed form beats truthful only near its guess") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const double truthful =
      *utility_closed_form(inputs, market, 0, Strategy::WellBehaved(), 0.0);
  Strategy fab;
  fab.collect = CollectRule::Fixed(0);
  fab.report = ReportRule::FabricateNormal(0.0, inputs.requested(0));
  const double d = penalty_coeff(0, inputs, market);
  const double c_saved = market.costs[0] * inputs.requested(0);
  for (double mu : {0.0, 1.0, -3.0, 5.0}) {
    const double u = *utility_closed_form(inputs, market, 0, fab, mu);
    CHECK(u == doctest::Approx(truthful + c_saved - d * mu * mu).epsilon(1e-9));
  }
}

TEST_CASE("mean shift costs exactly d times the squared bias") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const double truthful =
      *utility_closed_form(inputs, market, 1, Strategy::WellBehaved(), 0.7);
  Strategy shifted;
  shifted.report = ReportRule::ShiftMean(0.4);
  const double d = penalty_coeff(1, inputs, market);
  CHECK(*utility_closed_form(inputs, market, 1, shifted, 0.7) ==
        doctest::Approx(truthful - d * 0.16).epsilon(1e-9));
}

TEST_CASE("Monte Carlo utility agrees with the closed form") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);

  SUBCASE("well-behaved play") {
    const auto est = simulate_utility(inputs, market, 0,
                                      Strategy::WellBehaved(), 0.0, 100000, 17);
    REQUIRE(est.closed_form.has_value());
    CHECK(std::abs(est.mean - *est.closed_form) <= 3 * est.std_err);
    CHECK(*est.closed_form == doctest::Approx(0.66650).epsilon(1e-4));
  }
  SUBCASE("under-reporting with the indicator off") {
    Strategy trunc;
    trunc.report = ReportRule::TruncateTo(inputs.requested(1) - 1);
    const auto est =
        simulate_utility(inputs, market, 1, trunc, 1.2, 100000, 18);
    REQUIRE(est.closed_form.has_value());
    CHECK(std::abs(est.mean - *est.closed_form) <= 3 * est.std_err);
  }
  SUBCASE("fabrication at a wrong guess") {
    Strategy fab;
    fab.collect = CollectRule::Fixed(0);
    fab.report = ReportRule::FabricateNormal(-2.0, inputs.requested(0));
    const auto est = simulate_utility(inputs, market, 0, fab, 1.0, 100000, 19);
    REQUIRE(est.closed_form.has_value());
    CHECK(std::abs(est.mean - *est.closed_form) <= 3 * est.std_err);
  }
  SUBCASE("repeated seeds give bitwise identical estimates") {
    const auto a =
        simulate_utility(inputs, market, 0, Strategy::WellBehaved(), 0.3, 5000, 7);
    const auto b =
        simulate_utility(inputs, market, 0, Strategy::WellBehaved(), 0.3, 5000, 7);
    CHECK(a.mean == b.mean);
    CHECK(a.std_err == b.std_err);
  }
}

TEST_CASE("closed forms calibrate against simulation for every report family") {
  // The sweep's verdicts ride on these closed forms, so every family gets a
  // data-path calibration at 4 standard errors.
  const auto market = lowcost_market();
  const auto inputs = inputs_for(market);
  const int requested = inputs.requested(0);

  const std::vector<Strategy> strategies = {
      {CollectRule::Identity(), ReportRule::Identity()},
      {CollectRule::Fraction(0.5), ReportRule::Identity()},
      {CollectRule::Fixed(0), ReportRule::Identity()},
      {CollectRule::Identity(), ReportRule::ShiftMean(0.6)},
      {CollectRule::Fraction(0.75), ReportRule::ShiftMean(-0.3)},
      {CollectRule::Identity(), ReportRule::ScaleAroundMean(0.0)},
      {CollectRule::Identity(), ReportRule::ScaleAroundMean(2.0)},
      {CollectRule::Fraction(0.5), ReportRule::RepeatSampleMean(requested)},
      {CollectRule::Fixed(0), ReportRule::RepeatSampleMean(requested)},
      {CollectRule::Identity(), ReportRule::RepeatSampleMean(requested + 2)},
      {CollectRule::Fraction(0.75),
       ReportRule::ReplaceWithMeanCopies(requested)},
      {CollectRule::Identity(), ReportRule::TruncateTo(requested - 2)},
      {CollectRule::Fraction(0.5), ReportRule::TruncateTo(requested)},
      {CollectRule::Fixed(0), ReportRule::FabricateNormal(1.0, requested)},
      {CollectRule::Identity(), ReportRule::FabricateNormal(-2.0, requested)},
      {CollectRule::Fixed(0), ReportRule::FabricateNormal(0.5, requested + 1)},
  };

  std::uint64_t seed = 9100;
  for (const auto& strategy : strategies) {
    CAPTURE(strategy.label());
    for (int contributor : {0, 1}) {
      for (double mu : {0.0, 1.4}) {
        const auto est = simulate_utility(inputs, market, contributor,
                                          strategy, mu, 40000, seed++);
        REQUIRE(est.closed_form.has_value());
        CHECK(std::abs(est.mean - *est.closed_form) <=
              4.0 * std::max(est.std_err, 1e-12));
      }
    }
  }
}

TEST_CASE("worst case collapses the grid for mean-independent strategies") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const std::vector<double> grid{-5, -2, 0, 2, 5};

  const auto truthful = worst_case_utility(inputs, market, 0,
                                           Strategy::WellBehaved(), grid, 0, 1);
  CHECK(truthful.closed_form);
  CHECK(truthful.utility == doctest::Approx(0.66650).epsilon(1e-4));
  CHECK(truthful.mu == grid.front());

  Strategy fab;
  fab.collect = CollectRule::Fixed(0);
  fab.report = ReportRule::FabricateNormal(0.0, inputs.requested(0));
  const auto worst =
      worst_case_utility(inputs, market, 0, fab, grid, 0, 1);
  CHECK(std::abs(worst.mu) == doctest::Approx(5.0));
  CHECK(worst.utility < truthful.utility);

  const auto single = worst_case_utility(inputs, market, 0, fab, {1.0}, 0, 1);
  CHECK(single.utility ==
        doctest::Approx(*utility_closed_form(inputs, market, 0, fab, 1.0)));
}

TEST_CASE("default sweep certifies the canonical scenario") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const auto grid = DeviationGrid::Defaults(market.sigma2);
  const auto report = icc_sweep(inputs, market, grid, 99);

  CHECK(report.all_pass);
  CHECK(report.rows.size() >= 400);  // >= 200 per contributor
  for (const auto& row : report.rows) {
    CHECK(row.margin >= -kMoneyTol);
    CHECK(row.closed_form);
  }
  REQUIRE(report.concavity.size() == 2);
  for (const auto& check : report.concavity) {
    CHECK(check.pass);
    CHECK(check.argmax == check.requested);
  }
  CHECK(report.truthful_utility[0] == doctest::Approx(0.66650).epsilon(1e-4));
}

TEST_CASE("halving the penalty coefficient breaks the equilibrium") {
  const auto market = lowcost_market();
  const auto inputs = inputs_for(market);
  REQUIRE(inputs.requested(0) >= 2);  // room for integer under-collection

  const auto grid = DeviationGrid::Defaults(market.sigma2);
  const auto honest = icc_sweep(inputs, market, grid, 5);
  CHECK(honest.all_pass);

  const auto tampered = icc_sweep(inputs, market, grid, 5, 0.5);
  CHECK_FALSE(tampered.all_pass);
  int failures = 0;
  for (const auto& row : tampered.rows) failures += row.pass ? 0 : 1;
  CHECK(failures >= 1);
  // Under-collection hidden behind an exact-count report is the winner.
  bool undercollect_fail = false;
  for (const auto& row : tampered.rows)
    if (!row.pass && row.strategy.find("repeat_mean") != std::string::npos)
      undercollect_fail = true;
  CHECK(undercollect_fail);
  CHECK_FALSE(tampered.concavity[0].pass);
}

TEST_CASE("dominance structure of the reporting game") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const auto grid = DeviationGrid::Defaults(market.sigma2);

  SUBCASE("exact-count same-mean counterpart dominates pointwise") {
    Rng rng(808);
    for (int trial = 0; trial < 200; ++trial) {
      const int i = static_cast<int>(rng.below(2));
      const int requested = inputs.requested(i);
      // Arbitrary misreport: wrong count, arbitrary mean.
      Dataset report(static_cast<std::size_t>(rng.below(4)));
      for (auto& x : report) x = rng.normal(0.5, 2.0);
      Dataset opponent{rng.normal(0.0, 1.0)};
      std::vector<Dataset> subs(2);
      subs[static_cast<std::size_t>(i)] = report;
      subs[static_cast<std::size_t>(1 - i)] = opponent;
      const Money original = contributor_payment(i, inputs, subs, market);
      // Counterpart: exactly the requested count, identical sample mean.
      subs[static_cast<std::size_t>(i)] = Dataset(
          static_cast<std::size_t>(requested), mean_or_zero(report));
      const Money counterpart = contributor_payment(i, inputs, subs, market);
      CHECK(counterpart >= original - 1e-12);
    }
  }

  SUBCASE("tracking the collected mean minimizes the worst-case penalty") {
    for (int i = 0; i < 2; ++i) {
      const int requested = inputs.requested(i);
      const double opp_var = market.sigma2 / (inputs.total_points - requested);
      for (int n = 1; n <= requested + 2; ++n) {
        Strategy track{CollectRule::Fixed(n),
                       ReportRule::RepeatSampleMean(requested)};
        const auto track_law = submitted_mean_law(track, requested, market.sigma2);
        const double track_penalty =
            track_law.variance + track_law.bias * track_law.bias + opp_var;
        for (double bias : {0.2, 1.0, -0.7}) {
          Strategy biased{CollectRule::Fixed(n), ReportRule::ShiftMean(bias)};
          const auto law = submitted_mean_law(biased, requested, market.sigma2);
          if (law.count != requested) continue;
          const double penalty = law.variance + law.bias * law.bias + opp_var;
          CHECK(penalty >= track_penalty - 1e-12);
        }
      }
    }
  }
}

TEST_CASE("welfare and profit at truthful play hit the exact identities") {
  const auto market = canonical_market();
  const auto baseline = welfare_opt(market);
  const auto inputs = welfare_inputs(market, baseline);

  const Money welfare = welfare_at_truthful(inputs, market);
  CHECK(welfare == doctest::Approx(2 * 0.81649658092772603 - 0.1 - 0.2)
                       .epsilon(1e-12));
  CHECK(welfare ==
        doctest::Approx(welfare_upper_bound(baseline, 0.1, 0.2)).epsilon(1e-12));
  CHECK(welfare <= welfare_upper_bound(baseline, 0.1, 0.2) + kMoneyTol);

  // Equal costs close the gap entirely.
  auto equal_cost = market;
  equal_cost.costs = {0.1, 0.1, 0.5};
  const auto eq_baseline = welfare_opt(equal_cost);
  const auto eq_inputs = welfare_inputs(equal_cost, eq_baseline);
  CHECK(welfare_at_truthful(eq_inputs, equal_cost) ==
        doctest::Approx(eq_baseline.opt).epsilon(1e-12));
}

TEST_CASE("profit at truthful play matches the posted prices") {
  const auto market = canonical_market();
  ProfitSearchResult search;
  search.n_plus = 2;
  search.alloc = {2, 2};
  search.price = {0.6, 0.6};
  search.profit = 1.0;
  const auto inputs = profit_inputs(market, search);
  CHECK(profit_at_truthful(inputs, market) ==
        doctest::Approx(0.9).epsilon(1e-12));

  // Monte Carlo profit over settled rounds agrees with the identity.
  const auto outcomes = run_truthful_rounds(inputs, market, 0.4, 20000, 22);
  double sum = 0.0, sumsq = 0.0;
  for (const auto& o : outcomes) {
    double revenue = 0.0;
    for (Money p : o.price) revenue += p;
    const double profit = revenue - 0.1 * 1 - 0.2 * 1;
    sum += profit;
    sumsq += profit * profit;
  }
  const double mean = sum / outcomes.size();
  const double se = std::sqrt((sumsq - sum * sum / outcomes.size()) /
                              (outcomes.size() - 1.0) / outcomes.size());
  CHECK(std::abs(mean - 0.9) <= 3 * se);
}

TEST_CASE("no equilibrium-compatible profile beats the welfare ceiling") {
  // The ceiling binds at equilibria, not at arbitrary deviation profiles:
  // dropping the second collector's point can raise welfare when that
  // point's marginal value is below c2, but doing so costs the deviator
  // her payment. Profiles are therefore filtered by profitability.
  for (const auto& market : {canonical_market(), lowcost_market()}) {
    const auto baseline = welfare_opt(market);
    const auto inputs = welfare_inputs(market, baseline);
    const Money bound =
        welfare_upper_bound(baseline, market.costs[0], market.costs[1]);

    CHECK(welfare_at_truthful(inputs, market) <= bound + kMoneyTol);

    for (int i = 0; i < 2; ++i) {
      const int requested = inputs.requested(i);
      const int opponent_holds = inputs.total_points - requested;
      const Money truthful = *utility_closed_form(
          inputs, market, i, Strategy::WellBehaved(), 0.0);
      for (double rho : {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 2.0}) {
        Strategy dev{CollectRule::Fraction(rho), ReportRule::Identity()};
        const Money deviant_utility =
            *utility_closed_form(inputs, market, i, dev, 0.0);
        if (deviant_utility < truthful - kMoneyTol) continue;

        const int n = dev.collect.collected(requested);
        const int pool = n + opponent_holds;
        Money value = 0.0;
        for (const auto& buyer : market.buyers) {
          const int got = std::min(pool, inputs.total_points);
          if (got >= 1) value += iid_value(buyer.valuation, got, market.sigma2);
        }
        const Money cost =
            market.costs[static_cast<std::size_t>(i)] * n +
            market.costs[static_cast<std::size_t>(1 - i)] * opponent_holds;
        CHECK(value - cost <= bound + kMoneyTol);
      }
    }
  }
}

TEST_CASE("truthful rounds expected prices match the posted ones") {
  const auto market = canonical_market();
  const auto inputs = inputs_for(market);
  const auto outcomes = run_truthful_rounds(inputs, market, -1.3, 20000, 31);
  for (int j = 0; j < inputs.n_buyers(); ++j) {
    double sum = 0.0, sumsq = 0.0;
    for (const auto& o : outcomes) {
      sum += o.price[static_cast<std::size_t>(j)];
      sumsq += o.price[static_cast<std::size_t>(j)] *
               o.price[static_cast<std::size_t>(j)];
    }
    const double mean = sum / outcomes.size();
    const double se = std::sqrt((sumsq - sum * sum / outcomes.size()) /
                                (outcomes.size() - 1.0) / outcomes.size());
    CHECK(std::abs(mean - inputs.expected_price[static_cast<std::size_t>(j)]) <=
          3 * se);
  }
}
