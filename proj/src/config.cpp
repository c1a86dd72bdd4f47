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

#include "datamarket/config.hpp"

#include <algorithm>
#include <fstream>

#include "datamarket/report.hpp"

namespace datamarket {

std::string to_string(Objective o) {
  return o == Objective::kWelfare ? "welfare" : "profit";
}

std::vector<double> MuGridSpec::build(double sigma2) const {
  if (points < 1) throw ConfigError("mu_grid: field 'points' must be >= 1");
  const double sd = std::sqrt(sigma2);
  std::vector<double> grid;
  grid.reserve(static_cast<std::size_t>(points));
  if (points == 1) {
    grid.push_back(0.5 * (lo_in_sigma + hi_in_sigma) * sd);
    return grid;
  }
  for (int g = 0; g < points; ++g)
    grid.push_back(sd * (lo_in_sigma + (hi_in_sigma - lo_in_sigma) *
                                           static_cast<double>(g) /
                                           (points - 1)));
  return grid;
}

nlohmann::json RunConfig::to_json() const {
  nlohmann::json buyers = nlohmann::json::array();
  for (const auto& b : market.buyers) buyers.push_back(b.valuation.to_json());
  return {{"schema_version", schema_version},
          {"name", name},
          {"market",
           {{"sigma2", market.sigma2},
            {"costs", market.costs},
            {"buyers", buyers}}},
          {"objective", to_string(objective)},
          {"seed", seed},
          {"reps", reps},
          {"rounds", rounds},
          {"mu", mu},
          {"mu_grid",
           {{"lo_in_sigma", mu_grid.lo_in_sigma},
            {"hi_in_sigma", mu_grid.hi_in_sigma},
            {"points", mu_grid.points}}},
          {"deviation_grid",
           {{"fractions", deviation_grid.fractions},
            {"shifts_in_sigma", deviation_grid.shifts_in_sigma},
            {"scales", deviation_grid.scales},
            {"count_deltas", deviation_grid.count_deltas},
            {"cap_per_contributor", deviation_grid.cap_per_contributor}}},
          {"epsilon", epsilon},
          {"enumeration_cap", enumeration_cap},
          {"output", output},
          {"broker_absorbs_residual", broker_absorbs_residual},
          {"quadrature_nodes",
           {{"gauss_hermite", market.quadrature.gauss_hermite_nodes},
            {"gauss_legendre", market.quadrature.gauss_legendre_nodes}}}};
}

namespace {

template <typename T>
T field_or(const nlohmann::json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw ConfigError(std::string("config: field '") + key +
                      "' has the wrong type");
  }
}

}  // namespace

RunConfig parse_config(const nlohmann::json& doc) {
  RunConfig config;
  config.schema_version = field_or<int>(doc, "schema_version", 1);
  if (config.schema_version != 1)
    throw ConfigError("config: unsupported 'schema_version'");
  config.name = field_or<std::string>(doc, "name", "unnamed");

  if (!doc.contains("market")) throw ConfigError("config: missing 'market'");
  const auto& m = doc.at("market");
  if (!m.contains("sigma2")) throw ConfigError("market: missing 'sigma2'");
  config.market.sigma2 = m.at("sigma2").get<double>();
  if (!(config.market.sigma2 > 0.0))
    throw ConfigError("market: field 'sigma2' must be > 0");
  if (!m.contains("costs")) throw ConfigError("market: missing 'costs'");
  config.market.costs = m.at("costs").get<std::vector<double>>();
  if (!std::is_sorted(config.market.costs.begin(),
                      config.market.costs.end())) {
    std::sort(config.market.costs.begin(), config.market.costs.end());
    config.warnings.push_back(
        "market: field 'costs' was not sorted; sorted ascending");
  }
  if (!m.contains("buyers")) throw ConfigError("market: missing 'buyers'");
  int id = 0;
  for (const auto& b : m.at("buyers"))
    config.market.buyers.push_back(Buyer{id++, ErrorValuation::from_json(b)});

  if (doc.contains("quadrature_nodes")) {
    const auto& q = doc.at("quadrature_nodes");
    config.market.quadrature.gauss_hermite_nodes =
        field_or<int>(q, "gauss_hermite", 64);
    config.market.quadrature.gauss_legendre_nodes =
        field_or<int>(q, "gauss_legendre", 64);
  }

  const std::string objective =
      field_or<std::string>(doc, "objective", "welfare");
  if (objective == "welfare") {
    config.objective = Objective::kWelfare;
  } else if (objective == "profit") {
    config.objective = Objective::kProfit;
  } else {
    throw ConfigError("config: field 'objective' must be welfare or profit");
  }

  config.seed = field_or<std::uint64_t>(doc, "seed", 1);
  config.reps = field_or<int>(doc, "reps", 100000);
  if (config.reps < 1) throw ConfigError("config: field 'reps' must be >= 1");
  config.rounds = field_or<int>(doc, "rounds", 10000);
  if (config.rounds < 1)
    throw ConfigError("config: field 'rounds' must be >= 1");
  config.mu = field_or<double>(doc, "mu", 0.0);
  if (doc.contains("mu_grid")) {
    const auto& g = doc.at("mu_grid");
    config.mu_grid.lo_in_sigma = field_or<double>(g, "lo_in_sigma", -5.0);
    config.mu_grid.hi_in_sigma = field_or<double>(g, "hi_in_sigma", 5.0);
    config.mu_grid.points = field_or<int>(g, "points", 21);
    if (config.mu_grid.points < 1)
      throw ConfigError("mu_grid: field 'points' must be >= 1");
  }
  if (doc.contains("deviation_grid")) {
    const auto& g = doc.at("deviation_grid");
    auto& grid = config.deviation_grid;
    grid.fractions =
        field_or<std::vector<double>>(g, "fractions", grid.fractions);
    grid.shifts_in_sigma = field_or<std::vector<double>>(g, "shifts_in_sigma",
                                                         grid.shifts_in_sigma);
    grid.scales = field_or<std::vector<double>>(g, "scales", grid.scales);
    grid.count_deltas =
        field_or<std::vector<int>>(g, "count_deltas", grid.count_deltas);
    grid.cap_per_contributor =
        field_or<int>(g, "cap_per_contributor", grid.cap_per_contributor);
    if (grid.cap_per_contributor < 1)
      throw ConfigError(
          "deviation_grid: field 'cap_per_contributor' must be >= 1");
  }
  config.epsilon = field_or<double>(doc, "epsilon", 0.0);
  if (config.epsilon < 0.0)
    throw ConfigError("config: field 'epsilon' must be >= 0");
  config.enumeration_cap = field_or<std::uint64_t>(doc, "enumeration_cap",
                                                   kDefaultEnumerationCap);
  config.output = field_or<std::string>(doc, "output", "reports");
  config.broker_absorbs_residual =
      field_or<bool>(doc, "broker_absorbs_residual", false);

  config.market.validate();
  config.config_hash = hash_hex(fnv1a64(config.to_json().dump()));
  return config;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open '" + path + "'");
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config: '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config(doc);
}

}  // namespace datamarket
