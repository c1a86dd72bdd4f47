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
// Timing comparison of the OpenMP kernels against their serial references.
// Results must match bitwise; only the wall time may differ.

#include <chrono>
#include <cstdio>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "datamarket/simulation.hpp"
#include "datamarket/rng.hpp"

using namespace datamarket;

namespace {

double now_s() {
  return std::chrono::duration<double>(
             std::chrono::steady_clock::now().time_since_epoch())
      .count();
}

template <typename F>
double timed(F&& f) {
  const double t0 = now_s();
  f();
  return now_s() - t0;
}

void report(const char* name, double serial_s, double parallel_s, bool match) {
  std::printf("%-24s serial %8.3fs   openmp %8.3fs   speedup %5.2fx   %s\n",
              name, serial_s, parallel_s,
              parallel_s > 0 ? serial_s / parallel_s : 0.0,
              match ? "results match" : "RESULTS DIFFER");
}

}  // namespace

int main() {
#ifdef _OPENMP
  std::printf("openmp enabled, max threads = %d\n", omp_get_max_threads());
#else
  std::printf("openmp disabled; both columns run serially\n");
#endif

  // Envy-free enumeration: 13^4 = 28561 allocation vectors per solve.
  {
    Rng rng(1);
    std::vector<ValueTable> buyers;
    for (int j = 0; j < 4; ++j) {
      std::vector<double> vals(12);
      for (auto& v : vals) v = rng.uniform01();
      std::sort(vals.begin(), vals.end());
      ValueTable t{0.0};
      t.insert(t.end(), vals.begin(), vals.end());
      buyers.push_back(std::move(t));
    }
    RevOptResult a, b;
    const double ts = timed([&] {
      for (int rep = 0; rep < 40; ++rep) a = rev_opt_serial(buyers, 12);
    });
    const double tp = timed([&] {
      for (int rep = 0; rep < 40; ++rep) b = rev_opt(buyers, 12);
    });
    report("rev_opt", ts, tp,
           a.revenue == b.revenue && a.scheme.alloc == b.scheme.alloc);
  }

  MarketConfig market;
  market.buyers = {Buyer{0, ErrorValuation::ExpQuadratic(1.0)},
                   Buyer{1, ErrorValuation::ExpQuadratic(1.0)}};
  market.costs = {0.02, 0.04, 0.1};
  market.sigma2 = 1.0;
  const auto inputs = welfare_inputs(market, welfare_opt(market));

  // Monte Carlo utility estimation.
  {
    Strategy deviant;
    deviant.collect = CollectRule::Fraction(0.5);
    deviant.report = ReportRule::RepeatSampleMean(inputs.requested(0));
    UtilityEstimate a, b;
    const double ts = timed([&] {
      a = simulate_utility_serial(inputs, market, 0, deviant, 0.3, 2000000, 7);
    });
    const double tp = timed([&] {
      b = simulate_utility(inputs, market, 0, deviant, 0.3, 2000000, 7);
    });
    report("simulate_utility", ts, tp,
           a.mean == b.mean && a.std_err == b.std_err);
  }

  // Deviation sweep (closed-form path, wide grid).
  {
    auto grid = DeviationGrid::Defaults(market.sigma2);
    grid.mu_grid.clear();
    for (int g = 0; g < 2001; ++g)
      grid.mu_grid.push_back(-5.0 + 10.0 * g / 2000.0);
    DeviationReport a, b;
    const double ts = timed([&] {
      for (int rep = 0; rep < 20; ++rep)
        a = icc_sweep_serial(inputs, market, grid, 3);
    });
    const double tp = timed([&] {
      for (int rep = 0; rep < 20; ++rep) a = icc_sweep(inputs, market, grid, 3);
    });
    b = icc_sweep(inputs, market, grid, 3);
    bool match = a.rows.size() == b.rows.size();
    for (std::size_t t = 0; match && t < a.rows.size(); ++t)
      match = a.rows[t].margin == b.rows[t].margin;
    report("icc_sweep", ts, tp, match);
  }

  // Settlement round batches.
  {
    std::vector<RoundOutcome> a, b;
    const double ts = timed([&] {
      a = run_truthful_rounds_serial(inputs, market, 0.0, 200000, 11);
    });
    const double tp = timed([&] {
      b = run_truthful_rounds(inputs, market, 0.0, 200000, 11);
    });
    bool match = a.size() == b.size();
    for (std::size_t r = 0; match && r < a.size(); ++r)
      match = a[r].bb_residual == b[r].bb_residual &&
              a[r].price == b[r].price;
    report("run_truthful_rounds", ts, tp, match);
  }
  return 0;
}
