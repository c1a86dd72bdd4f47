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

#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"

#include "datamarket/commands.hpp"
#include "datamarket/common.hpp"

namespace {

struct CommonOptions {
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<std::uint64_t> seed;
  std::optional<int> reps;
  std::optional<std::string> objective;
};

void add_common(CLI::App* cmd, CommonOptions* opts) {
  cmd->add_option("--config", opts->config_path, "market config JSON")
      ->required();
  cmd->add_option("--out", opts->out_dir,
                  "report output directory (default: config 'output')");
  cmd->add_option("--seed", opts->seed, "master seed override");
  cmd->add_option("--reps", opts->reps, "Monte Carlo replication override");
  cmd->add_option("--objective", opts->objective,
                  "objective override (welfare|profit)")
      ->check(CLI::IsMember({"welfare", "profit"}));
}

datamarket::RunConfig load(const CommonOptions& opts) {
  auto config = datamarket::load_config(opts.config_path);
  if (opts.seed) config.seed = *opts.seed;
  if (opts.reps) config.reps = *opts.reps;
  if (opts.objective)
    config.objective = *opts.objective == "welfare"
                           ? datamarket::Objective::kWelfare
                           : datamarket::Objective::kProfit;
  return config;
}

std::string out_dir(const CommonOptions& opts,
                    const datamarket::RunConfig& config) {
  return opts.out_dir ? *opts.out_dir : config.output;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"broker-mediated data market: baselines, pricing, settlement, "
               "and equilibrium verification"};
  app.require_subcommand(1);

  CommonOptions baseline_opts, price_opts, run_opts, verify_opts, sweep_opts;
  double verify_tamper = 1.0;
  double sweep_tamper = 1.0;

  auto* baseline =
      app.add_subcommand("baseline", "welfare-optimal collection plan");
  add_common(baseline, &baseline_opts);
  auto* price =
      app.add_subcommand("price", "profit-optimal envy-free pricing");
  add_common(price, &price_opts);
  auto* run = app.add_subcommand("run", "batch of truthful settlement rounds");
  add_common(run, &run_opts);
  auto* verify = app.add_subcommand(
      "verify", "budget/rationality/efficiency checks (nonzero exit on failure)");
  add_common(verify, &verify_opts);
  verify->add_option("--debug-tamper-d", verify_tamper,
                     "negative control: scale the audit penalty coefficients");
  auto* sweep = app.add_subcommand(
      "sweep", "deviation sweep certifying the well-behaved equilibrium");
  add_common(sweep, &sweep_opts);
  sweep->add_option("--debug-tamper-d", sweep_tamper,
                    "negative control: scale the audit penalty coefficients");

  CLI11_PARSE(app, argc, argv);

  try {
    if (baseline->parsed()) {
      const auto config = load(baseline_opts);
      return datamarket::cmd_baseline(config, out_dir(baseline_opts, config),
                                      std::cout);
    }
    if (price->parsed()) {
      const auto config = load(price_opts);
      return datamarket::cmd_price(config, out_dir(price_opts, config),
                                   std::cout);
    }
    if (run->parsed()) {
      const auto config = load(run_opts);
      return datamarket::cmd_run(config, out_dir(run_opts, config), std::cout);
    }
    if (verify->parsed()) {
      const auto config = load(verify_opts);
      return datamarket::cmd_verify(config, out_dir(verify_opts, config),
                                    std::cout, verify_tamper);
    }
    if (sweep->parsed()) {
      const auto config = load(sweep_opts);
      return datamarket::cmd_sweep(config, out_dir(sweep_opts, config),
                                   std::cout, sweep_tamper);
    }
  } catch (const datamarket::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
