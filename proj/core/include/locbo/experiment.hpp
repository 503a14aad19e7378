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

#pragma once

// Experiment configuration (YAML), the result files written per method and
// seed, and the five top-level commands behind the `locbo` tool.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "locbo/data.hpp"
#include "locbo/objective.hpp"
#include "locbo/search_space.hpp"
#include "locbo/tuner.hpp"

namespace locbo {

struct ExperimentConfig {
  std::string name = "experiment";
  // Exactly one source: a synthetic scenario or a CSV file.
  std::optional<ScenarioConfig> synthetic = ScenarioConfig{};
  std::optional<std::filesystem::path> csv;
  SplitRatios split;
  std::uint64_t split_seed = 7;

  std::string space_preset = "localisation-wifi";  // empty when the space is inline
  SearchSpace space = SearchSpace::preset("localisation-wifi");

  TunerSettings tuner;  // tuner.seed is replaced by each entry of `seeds`
  std::vector<std::uint64_t> seeds{1};
  std::vector<std::string> methods{"bo", "rs"};
  int final_epochs = 200;
  std::filesystem::path output = "runs";

  // Throws ConfigError naming the offending field.
  void validate() const;

  // "localisation-wifi": 200 s budget, 10 seeds, 7 wifi features, PCA in the space.
  // "localisation-uwb": 1000 s budget, 10 seeds, all 12 features, no PCA.
  static ExperimentConfig preset(std::string_view name);
};

// A top-level `preset:` key selects the starting point; every other key
// overrides it. Unknown keys are rejected. Relative CSV paths resolve
// against `base_dir`.
ExperimentConfig parse_experiment(std::string_view yaml,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_experiment(const std::filesystem::path& path);
std::string experiment_to_yaml(const ExperimentConfig& cfg);

std::string space_to_yaml(const SearchSpace& space);
SearchSpace space_from_yaml(std::string_view yaml);

std::string config_to_yaml(const SearchSpace& space, const HyperConfig& config,
                           std::optional<double> validation_error_m = std::nullopt);
HyperConfig config_from_yaml(const SearchSpace& space, std::string_view yaml);

std::string scenario_to_yaml(const ScenarioConfig& scenario);

// Generated or loaded dataset, split with the configured ratios and seed.
LocalisationDataset load_dataset(const ExperimentConfig& cfg);

// File stem for one arm of a sweep, e.g. "bo_seed3".
std::string run_stem(std::string_view method, std::uint64_t seed);

struct FinalRow {
  std::string method;
  std::uint64_t seed = 0;
  double train_m = 0.0;
  double val_m = 0.0;
  std::optional<double> test_m;
};

std::string final_row_csv(const FinalRow& row);
std::vector<FinalRow> read_final_csv(const std::filesystem::path& path);

// Writes <out>/dataset.csv and <out>/scenario.yaml; returns the CSV path.
std::filesystem::path cmd_generate(const ExperimentConfig& cfg, const std::filesystem::path& out);

struct TuneRun {
  std::string method;
  std::uint64_t seed = 0;
  std::optional<TuningResult> result;
  std::optional<FinalRow> final;
  std::string error;  // non-empty when the run aborted
};

// Runs every method x seed, writing <stem>_trials.csv, <stem>_curve.csv,
// <stem>_best_config.yaml and, when final_epochs > 0, <stem>_final.csv,
// <stem>_model.txt and <stem>_pipeline.txt into cfg.output. A failing run
// is reported in its TuneRun and does not abort the sweep.
std::vector<TuneRun> cmd_tune(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// Retrains `best_config` on the experiment's dataset and writes
// <out_stem>_model.txt, _pipeline.txt and _final.csv.
FinalRow cmd_train(const ExperimentConfig& cfg, const std::filesystem::path& best_config,
                   int epochs, std::uint64_t seed, const std::filesystem::path& out_stem,
                   std::string_view method = "train");

// Mean localisation error of a saved model + pipeline over every row of a CSV dataset.
double cmd_eval(const std::filesystem::path& model, const std::filesystem::path& pipeline,
                const std::filesystem::path& dataset);

struct MethodSummary {
  std::string method;
  std::size_t runs = 0;
  double train_mean_m = 0.0;
  double val_mean_m = 0.0;
  std::optional<double> test_mean_m;
};

struct ComparisonReport {
  std::vector<FinalRow> rows;           // sorted by method, then seed
  std::vector<MethodSummary> summaries; // one per method, same order
  // 100 * (RS - BO) / RS on mean test error; empty unless both arms exist.
  std::optional<double> reduction_pct;

  std::string table() const;
  std::string csv() const;
};

ComparisonReport build_report(std::vector<FinalRow> rows);

// Collects every *_final.csv in `run_dir`, writes report.txt and report.csv there.
ComparisonReport cmd_report(const std::filesystem::path& run_dir);

}  // namespace locbo
