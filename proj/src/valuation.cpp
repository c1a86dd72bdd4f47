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

#include "datamarket/valuation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "datamarket/quadrature.hpp"

namespace datamarket {
namespace {

constexpr double kSqrt2 = 1.41421356237309504880168872420969808;
constexpr double kInvSqrtPi = 0.564189583547756286948079451560772586;

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

// Gaussian(0, s^2) density and P(|X| > b).
double gauss_pdf(double x, double s) {
  return std::exp(-0.5 * (x / s) * (x / s)) /
         (s * 2.50662827463100050241576528481104525);
}
double two_sided_tail(double b, double s) {
  return std::erfc(b / (s * kSqrt2));
}

}  // namespace

ErrorValuation ErrorValuation::ExpQuadratic(double a) {
  if (!(a > 0.0)) throw ConfigError("exp_quadratic: field 'a' must be > 0");
  ErrorValuation v;
  v.family_ = ValuationFamily::kExpQuadratic;
  v.a_ = a;
  v.tail_value_ = 0.0;
  return v;
}

ErrorValuation ErrorValuation::Threshold(double t) {
  if (!(t > 0.0)) throw ConfigError("threshold: field 't' must be > 0");
  ErrorValuation v;
  v.family_ = ValuationFamily::kThreshold;
  v.t_ = t;
  v.breakpoints_ = {t};
  v.tail_value_ = 0.0;
  return v;
}

ErrorValuation ErrorValuation::PiecewiseLinear(
    std::vector<std::pair<double, double>> knots) {
  if (knots.size() < 2)
    throw ConfigError("piecewise_linear: field 'knots' needs >= 2 entries");
  if (knots.front().first != 0.0)
    throw ConfigError("piecewise_linear: first knot must sit at error 0");
  for (std::size_t k = 0; k < knots.size(); ++k) {
    if (knots[k].second < 0.0 || knots[k].second > 1.0)
      throw ConfigError("piecewise_linear: knot values must lie in [0, 1]");
    if (k > 0) {
      if (knots[k].first <= knots[k - 1].first)
        throw ConfigError("piecewise_linear: knot errors must increase");
      if (knots[k].second > knots[k - 1].second + 1e-12)
        throw ConfigError("piecewise_linear: knot values must not increase");
    }
  }
  ErrorValuation v;
  v.family_ = ValuationFamily::kPiecewiseLinear;
  v.knots_ = std::move(knots);
  for (std::size_t k = 1; k < v.knots_.size(); ++k)
    v.breakpoints_.push_back(v.knots_[k].first);
  v.tail_value_ = v.knots_.back().second;
  return v;
}

ErrorValuation ErrorValuation::Tabulated(double e_step,
                                         std::vector<double> values) {
  if (!(e_step > 0.0)) throw ConfigError("tabulated: field 'e_step' must be > 0");
  if (values.size() < 2)
    throw ConfigError("tabulated: field 'values' needs >= 2 entries");
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < 0.0 || values[k] > 1.0)
      throw ConfigError("tabulated: values must lie in [0, 1]");
    if (k > 0 && values[k] > values[k - 1] + 1e-12)
      throw ConfigError("tabulated: values must not increase");
  }
  ErrorValuation v;
  v.family_ = ValuationFamily::kTabulated;
  v.e_step_ = e_step;
  v.values_ = std::move(values);
  for (std::size_t k = 1; k < v.values_.size(); ++k)
    v.breakpoints_.push_back(e_step * static_cast<double>(k));
  v.tail_value_ = v.values_.back();
  return v;
}

double ErrorValuation::operator()(double e) const {
  switch (family_) {
    case ValuationFamily::kExpQuadratic:
      return std::exp(-e * e / (2.0 * a_ * a_));
    case ValuationFamily::kThreshold:
      return e <= t_ ? 1.0 : 0.0;
    case ValuationFamily::kPiecewiseLinear: {
      if (e >= knots_.back().first) return knots_.back().second;
      auto hi = std::upper_bound(
          knots_.begin(), knots_.end(), e,
          [](double x, const auto& knot) { return x < knot.first; });
      const auto lo = hi - 1;
      const double span = hi->first - lo->first;
      const double w = (e - lo->first) / span;
      return lo->second + w * (hi->second - lo->second);
    }
    case ValuationFamily::kTabulated: {
      const double pos = e / e_step_;
      const auto last = static_cast<double>(values_.size() - 1);
      if (pos >= last) return values_.back();
      const auto k = static_cast<std::size_t>(pos);
      const double w = pos - static_cast<double>(k);
      return values_[k] + w * (values_[k + 1] - values_[k]);
    }
  }
  return 0.0;
}

bool ErrorValuation::has_closed_form() const {
  return family_ == ValuationFamily::kExpQuadratic ||
         family_ == ValuationFamily::kThreshold;
}

nlohmann::json ErrorValuation::to_json() const {
  switch (family_) {
    case ValuationFamily::kExpQuadratic:
      return {{"family", "exp_quadratic"}, {"a", a_}};
    case ValuationFamily::kThreshold:
      return {{"family", "threshold"}, {"t", t_}};
    case ValuationFamily::kPiecewiseLinear: {
      nlohmann::json knots = nlohmann::json::array();
      for (const auto& [e, val] : knots_) knots.push_back({e, val});
      return {{"family", "piecewise_linear"}, {"knots", knots}};
    }
    case ValuationFamily::kTabulated:
      return {{"family", "tabulated"}, {"e_step", e_step_}, {"values", values_}};
  }
  return {};
}

ErrorValuation ErrorValuation::from_json(const nlohmann::json& j) {
  if (!j.contains("family"))
    throw ConfigError("valuation: missing field 'family'");
  const std::string family = j.at("family").get<std::string>();
  if (family == "exp_quadratic") {
    if (!j.contains("a")) throw ConfigError("exp_quadratic: missing field 'a'");
    return ExpQuadratic(j.at("a").get<double>());
  }
  if (family == "threshold") {
    if (!j.contains("t")) throw ConfigError("threshold: missing field 't'");
    return Threshold(j.at("t").get<double>());
  }
  if (family == "piecewise_linear") {
    if (!j.contains("knots"))
      throw ConfigError("piecewise_linear: missing field 'knots'");
    std::vector<std::pair<double, double>> knots;
    for (const auto& k : j.at("knots"))
      knots.emplace_back(k.at(0).get<double>(), k.at(1).get<double>());
    return PiecewiseLinear(std::move(knots));
  }
  if (family == "tabulated") {
    if (!j.contains("e_step") || !j.contains("values"))
      throw ConfigError("tabulated: missing field 'e_step' or 'values'");
    return Tabulated(j.at("e_step").get<double>(),
                     j.at("values").get<std::vector<double>>());
  }
  throw ConfigError("valuation: unknown family '" + family + "'");
}

double error_value(const ErrorValuation& v, double e) {
  if (e < 0.0) throw std::domain_error("error_value: error must be >= 0");
  return v(e);
}

namespace {

double closed_form_iid(const ErrorValuation& v, double s2) {
  const double s = std::sqrt(s2);
  switch (v.family()) {
    case ValuationFamily::kExpQuadratic: {
      const double a = v.scale();
      return 1.0 / std::sqrt(1.0 + s2 / (a * a));
    }
    case ValuationFamily::kThreshold:
      return std::erf(v.threshold() / (s * kSqrt2));
    default:
      throw std::logic_error("closed_form_iid: family has no closed form");
  }
}

// E[v(|X|)], X ~ Normal(0, s^2), by numeric integration. Smooth valuations
// use Gauss-Hermite; valuations with breakpoints are integrated segment by
// segment (the function is constant past the last breakpoint, which leaves
// an analytic Gaussian tail).
double quadrature_iid(const ErrorValuation& v, double s2,
                      const QuadratureConfig& quad) {
  const double s = std::sqrt(s2);
  const auto& breaks = v.breakpoints();
  if (breaks.empty()) {
    const auto& gh = gauss_hermite(quad.gauss_hermite_nodes);
    double sum = 0.0;
    for (std::size_t k = 0; k < gh.nodes.size(); ++k)
      sum += gh.weights[k] * v(std::abs(kSqrt2 * s * gh.nodes[k]));
    return clamp01(sum * kInvSqrtPi);
  }
  const auto& gl = gauss_legendre(quad.gauss_legendre_nodes);
  const auto integrand = [&](double e) { return v(e) * gauss_pdf(e, s); };
  double total = 0.0;
  double lo = 0.0;
  for (double b : breaks) {
    total += integrate_segment(integrand, lo, b, gl);
    lo = b;
  }
  total *= 2.0;  // error is |X|
  total += v.tail_value() * two_sided_tail(breaks.back(), s);
  return clamp01(total);
}

}  // namespace

double iid_value(const ErrorValuation& v, int m, double sigma2,
                 const QuadratureConfig& quad) {
  if (m < 1) throw std::domain_error("iid_value: sample count must be >= 1");
  if (!(sigma2 > 0.0)) throw std::domain_error("iid_value: sigma2 must be > 0");
  const double s2 = sigma2 / static_cast<double>(m);
  if (v.has_closed_form()) return closed_form_iid(v, s2);
  return quadrature_iid(v, s2, quad);
}

double iid_value_quadrature(const ErrorValuation& v, int m, double sigma2,
                            const QuadratureConfig& quad) {
  if (m < 1) throw std::domain_error("iid_value: sample count must be >= 1");
  if (!(sigma2 > 0.0)) throw std::domain_error("iid_value: sigma2 must be > 0");
  return quadrature_iid(v, sigma2 / static_cast<double>(m), quad);
}

std::vector<double> iid_value_table(const ErrorValuation& v, int n_max,
                                    double sigma2,
                                    const QuadratureConfig& quad) {
  if (n_max < 0)
    throw std::domain_error("iid_value_table: n_max must be >= 0");
  std::vector<double> table(static_cast<std::size_t>(n_max) + 1, 0.0);
  for (int m = 1; m <= n_max; ++m) {
    table[static_cast<std::size_t>(m)] = iid_value(v, m, sigma2, quad);
    // More clean data never hurts; everything downstream assumes it.
    if (table[static_cast<std::size_t>(m)] <
        table[static_cast<std::size_t>(m - 1)] - 1e-9)
      throw std::domain_error(
          "iid_value_table: valuation is not non-decreasing in the sample "
          "count");
  }
  return table;
}

void MarketConfig::validate() const {
  if (buyers.empty()) throw ConfigError("market: field 'buyers' is empty");
  if (costs.size() < 2)
    throw ConfigError("market: field 'costs' needs >= 2 contributors");
  for (double c : costs)
    if (!(c > 0.0)) throw ConfigError("market: field 'costs' must be > 0");
  if (!std::is_sorted(costs.begin(), costs.end()))
    throw ConfigError("market: field 'costs' must be sorted non-decreasing");
  if (!(sigma2 > 0.0)) throw ConfigError("market: field 'sigma2' must be > 0");
  if (quadrature.gauss_hermite_nodes < 1 || quadrature.gauss_legendre_nodes < 1)
    throw ConfigError("market: field 'quadrature_nodes' must be >= 1");
}

std::vector<std::vector<double>> MarketConfig::value_tables(int n_max) const {
  std::vector<std::vector<double>> tables;
  tables.reserve(buyers.size());
  for (const auto& b : buyers)
    tables.push_back(iid_value_table(b.valuation, n_max, sigma2, quadrature));
  return tables;
}

}  // namespace datamarket
