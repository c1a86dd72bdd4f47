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

#include <vector>

#include "datamarket/common.hpp"
#include "datamarket/valuation.hpp"

namespace datamarket {

// Welfare-optimal plan when contributors are assumed compliant: collect
// n_opt points at the cheapest cost and hand every point to every buyer.
struct WelfareBaseline {
  int n_opt = 1;                 // maximizing total collection amount
  Money opt = 0.0;               // sum_j v_iid_j(n_opt) - c_1 * n_opt
  std::vector<Money> table;      // table[k] = welfare at N = k + 1
  bool boundary_warning = false; // maximizer sat on the search boundary
};

// Upper end of the exhaustive search over N: ceil(n_buyers / c1). Buyer
// values are capped at 1 each, so welfare is negative past this point.
int baseline_search_bound(int n_buyers, double c1);

// Exhaustive search over N in [1, baseline_search_bound]. Ties break
// toward the smallest N. The OpenMP variant and the serial reference
// return bit-identical results.
WelfareBaseline welfare_opt(const MarketConfig& market);
WelfareBaseline welfare_opt_serial(const MarketConfig& market);

// Search over precomputed per-buyer value tables (tables[j][m] = v_iid_j(m),
// m = 0..N). Exposed for direct testing of the sweep itself.
WelfareBaseline welfare_opt_tables(
    const std::vector<std::vector<double>>& tables, double c1, bool parallel);

// OPT - (c2 - c1): the ceiling no equilibrium welfare may exceed.
Money welfare_upper_bound(const WelfareBaseline& baseline, double c1,
                          double c2);

}  // namespace datamarket
