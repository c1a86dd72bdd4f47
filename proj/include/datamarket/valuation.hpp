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

#include <utility>
#include <vector>

#include "datamarket/common.hpp"

#include "json.hpp"

namespace datamarket {

enum class ValuationFamily {
  kExpQuadratic,    // exp(-e^2 / (2 a^2))
  kThreshold,       // 1 if e <= t else 0
  kPiecewiseLinear, // linear between (error, value) knots, clamped beyond
  kTabulated,       // values on a uniform error grid, clamped beyond
};

// A buyer's value as a function of the absolute estimation error. Values
// lie in [0, 1] and are non-increasing in the error. Immutable once built.
class ErrorValuation {
 public:
  static ErrorValuation ExpQuadratic(double a);
  static ErrorValuation Threshold(double t);
  // Knots are (error, value) pairs with strictly increasing errors starting
  // at error 0; values non-increasing in [0, 1].
  static ErrorValuation PiecewiseLinear(
      std::vector<std::pair<double, double>> knots);
  // values[k] is the value at error k * e_step; clamped beyond the grid.
  static ErrorValuation Tabulated(double e_step, std::vector<double> values);

  ValuationFamily family() const { return family_; }

  // Value at error e >= 0.
  double operator()(double e) const;

  // Whether the value of m clean samples has an analytic expression.
  bool has_closed_form() const;

  // Errors at which the function has a kink or jump, ascending. Empty for
  // smooth families. Past the last breakpoint the function is constant.
  const std::vector<double>& breakpoints() const { return breakpoints_; }
  double tail_value() const { return tail_value_; }

  nlohmann::json to_json() const;
  static ErrorValuation from_json(const nlohmann::json& j);

  double scale() const { return a_; }        // ExpQuadratic only
  double threshold() const { return t_; }    // Threshold only

 private:
  ErrorValuation() = default;

  ValuationFamily family_ = ValuationFamily::kExpQuadratic;
  double a_ = 1.0;
  double t_ = 1.0;
  std::vector<std::pair<double, double>> knots_;  // piecewise linear
  double e_step_ = 1.0;                           // tabulated
  std::vector<double> values_;                    // tabulated
  std::vector<double> breakpoints_;
  double tail_value_ = 0.0;
};

// v(e) for error e; throws std::domain_error for e < 0.
double error_value(const ErrorValuation& v, double e);

struct QuadratureConfig {
  int gauss_hermite_nodes = 64;  // smooth integrands
  int gauss_legendre_nodes = 64; // per segment between breakpoints
};

// Expected value of m i.i.d. samples: E[v(|X|)] with X ~ Normal(0, sigma2/m).
// Closed form where available, numeric integration otherwise. The result
// does not depend on the true mean because the sample-mean error law does
// not. Throws std::domain_error for m < 1.
double iid_value(const ErrorValuation& v, int m, double sigma2,
                 const QuadratureConfig& quad = {});

// Forces the numeric route even when a closed form exists. Smooth families
// integrate with Gauss-Hermite; families with kinks or jumps integrate
// per-segment with Gauss-Legendre plus an analytic Gaussian tail, since a
// global Hermite rule cannot reach tight tolerances across a discontinuity.
double iid_value_quadrature(const ErrorValuation& v, int m, double sigma2,
                            const QuadratureConfig& quad = {});

// [v_iid(0), v_iid(1), ..., v_iid(n_max)] with the no-data entry pinned to
// zero (the "buy nothing" anchor).
std::vector<double> iid_value_table(const ErrorValuation& v, int n_max,
                                    double sigma2,
                                    const QuadratureConfig& quad = {});

struct Buyer {
  int id = 0;
  ErrorValuation valuation;
};

// Market instance: buyers, per-point collection costs sorted ascending,
// and the (known) sample variance.
struct MarketConfig {
  std::vector<Buyer> buyers;
  std::vector<double> costs;  // c_1 <= c_2 <= ...; at least two entries
  double sigma2 = 1.0;
  QuadratureConfig quadrature;

  int n_buyers() const { return static_cast<int>(buyers.size()); }
  int n_contributors() const { return static_cast<int>(costs.size()); }

  // Throws ConfigError naming the offending field.
  void validate() const;

  // Per-buyer tables of v_iid(0..n_max).
  std::vector<std::vector<double>> value_tables(int n_max) const;
};

}  // namespace datamarket
