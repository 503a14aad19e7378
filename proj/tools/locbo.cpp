// Copyright 2026 The locbo Authors.
//
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

// locbo: generate datasets, tune, retrain, evaluate and report.
//
// Exit codes: 0 success, 2 configuration error, 3 runtime failure.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "locbo/errors.hpp"
#include "locbo/experiment.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

struct CommonOptions {
  std::string config;
  std::string preset;
  std::optional<std::uint64_t> seed;
  std::optional<int> workers;
  std::optional<double> budget_s;
  std::optional<std::size_t> max_trials;
  std::string out;
  std::string clock;
  std::vector<std::string> methods;
  std::optional<int> final_epochs;
};

void add_experiment_options(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--config", o.config, "Experiment YAML file")->check(CLI::ExistingFile);
  cmd->add_option("--preset", o.preset, "Built-in experiment preset")
      ->check(CLI::IsMember({"localisation-wifi", "localisation-uwb"}));
}

// Only the config source; tuning overrides do not apply.
CommonOptions config_only(const CommonOptions& o) {
  CommonOptions c;
  c.config = o.config;
  c.preset = o.preset;
  return c;
}

locbo::ExperimentConfig resolve(const CommonOptions& o) {
  locbo::ExperimentConfig cfg;
  if (!o.config.empty()) {
    cfg = locbo::load_experiment(o.config);
  } else if (!o.preset.empty()) {
    cfg = locbo::ExperimentConfig::preset(o.preset);
  }
  if (o.seed) cfg.seeds = {*o.seed};
  if (o.workers) cfg.tuner.workers = *o.workers;
  if (o.budget_s) cfg.tuner.budget_s = *o.budget_s;
  if (o.max_trials) cfg.tuner.max_trials = *o.max_trials;
  if (!o.out.empty()) cfg.output = o.out;
  if (o.clock == "wall") cfg.tuner.clock = locbo::ClockMode::wall;
  if (o.clock == "epochs") cfg.tuner.clock = locbo::ClockMode::epochs;
  if (!o.methods.empty()) cfg.methods = o.methods;
  if (o.final_epochs) cfg.final_epochs = *o.final_epochs;
  cfg.validate();
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-fidelity Bayesian optimisation for localisation networks"};
  app.require_subcommand(1);

  CommonOptions gen_opts;
  auto* gen = app.add_subcommand("generate", "Write a synthetic dataset and its scenario manifest");
  add_experiment_options(gen, gen_opts);
  gen->add_option("--seed", gen_opts.seed, "Scenario seed");
  std::optional<std::size_t> samples;
  gen->add_option("--samples", samples, "Number of samples");
  gen->add_option("--out", gen_opts.out, "Output directory")->required();

  CommonOptions tune_opts;
  auto* tune = app.add_subcommand("tune", "Run the BO and/or RS arms over every seed");
  add_experiment_options(tune, tune_opts);
  tune->add_option("--seed", tune_opts.seed, "Run a single seed");
  tune->add_option("--workers", tune_opts.workers, "Concurrent trials");
  tune->add_option("--budget-s", tune_opts.budget_s, "Tuning budget in seconds");
  tune->add_option("--max-trials", tune_opts.max_trials, "Cap on trials per run (0 = none)");
  tune->add_option("--out", tune_opts.out, "Output directory");
  tune->add_option("--clock", tune_opts.clock, "wall, or epochs for reproducible serial runs")
      ->check(CLI::IsMember({"wall", "epochs"}));
  tune->add_option("--methods", tune_opts.methods, "Subset of: bo rs");
  tune->add_option("--final-epochs", tune_opts.final_epochs, "Final training epochs (0 = skip)");

  CommonOptions train_opts;
  std::string best_config;
  int epochs = 200;
  std::uint64_t train_seed = 1;
  auto* trn = app.add_subcommand("train", "Retrain a chosen configuration");
  add_experiment_options(trn, train_opts);
  trn->add_option("--best-config", best_config, "best_config YAML written by tune")
      ->required()
      ->check(CLI::ExistingFile);
  trn->add_option("--epochs", epochs, "Training epochs");
  trn->add_option("--seed", train_seed, "Training seed");
  trn->add_option("--out", train_opts.out, "Output file stem, e.g. runs/x/retrain")->required();

  std::string model, pipeline, data;
  auto* ev = app.add_subcommand("eval", "Localisation error of a saved model on a CSV dataset");
  ev->add_option("--model", model)->required()->check(CLI::ExistingFile);
  ev->add_option("--pipeline", pipeline)->required()->check(CLI::ExistingFile);
  ev->add_option("--data", data)->required()->check(CLI::ExistingFile);

  std::string run_dir;
  auto* rep = app.add_subcommand("report", "Summarise a run directory");
  rep->add_option("run_dir", run_dir, "Directory written by tune");
  rep->add_option("--out", run_dir, "Same as the positional argument");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (*gen) {
      locbo::ExperimentConfig cfg = resolve(config_only(gen_opts));
      if (!cfg.synthetic) throw locbo::ConfigError("dataset", "generate needs a synthetic scenario");
      if (gen_opts.seed) cfg.synthetic->seed = *gen_opts.seed;
      if (samples) cfg.synthetic->samples = *samples;
      const fs::path csv = locbo::cmd_generate(cfg, gen_opts.out);
      std::cout << "wrote " << csv.string() << "\n";
    } else if (*tune) {
      const locbo::ExperimentConfig cfg = resolve(tune_opts);
      const auto runs = locbo::cmd_tune(cfg, &std::cout);
      int failures = 0;
      for (const auto& r : runs) failures += r.error.empty() ? 0 : 1;
      if (cfg.final_epochs > 0 && failures < static_cast<int>(runs.size())) {
        const auto report = locbo::cmd_report(cfg.output);
        std::cout << "\n" << report.table();
      }
      if (failures > 0) {
        std::cerr << failures << " of " << runs.size() << " runs failed\n";
        return kExitRuntime;
      }
    } else if (*trn) {
      const locbo::ExperimentConfig cfg =
          resolve(config_only(train_opts));
      const auto row = locbo::cmd_train(cfg, best_config, epochs, train_seed, train_opts.out);
      std::cout << locbo::final_row_csv(row);
    } else if (*ev) {
      std::cout << "mean_localisation_error_m " << locbo::cmd_eval(model, pipeline, data) << "\n";
    } else if (*rep) {
      if (run_dir.empty()) throw locbo::ConfigError("run_dir", "give a run directory");
      std::cout << locbo::cmd_report(run_dir).table();
    }
  } catch (const locbo::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return 0;
}
