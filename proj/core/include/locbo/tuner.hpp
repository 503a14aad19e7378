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

// Budgeted asynchronous tuning loop: random initial trials, then GP + EI
// proposals with constant-liar imputation for in-flight trials, plus the
// random-search baseline that shares the same scheduling and fidelity
// control.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "locbo/acquisition.hpp"
#include "locbo/fidelity.hpp"
#include "locbo/gp.hpp"
#include "locbo/search_space.hpp"

namespace locbo {

struct TrialRequest {
  std::size_t index = 0;
  HyperConfig config;
  int epoch_budget = 0;
  std::uint64_t seed = 0;
};

// Returns true when the evaluator should stop after the epoch just reported.
using StopPoll = std::function<bool(std::span<const double> epoch_errors)>;

struct Evaluation {
  std::vector<double> epoch_errors;  // metres, one per executed epoch
  bool failed = false;
  std::string message;
};

// Must be safe to run concurrently on distinct requests.
using Objective = std::function<Evaluation(const TrialRequest&, const StopPoll&)>;

enum class ClockMode {
  wall,    // steady clock seconds
  epochs,  // virtual: each executed epoch advances time by epoch_seconds (serial only)
};

struct TunerSettings {
  double budget_s = 200.0;
  std::size_t max_trials = 0;  // 0 = no cap
  int workers = 1;
  int init_trials = 5;
  std::uint64_t seed = 0;
  FidelitySettings fidelity;
  bool median_stopping = true;
  int gp_restarts = 5;
  ProposalOptions proposal;
  ClockMode clock = ClockMode::wall;
  double epoch_seconds = 0.01;

  void validate() const;
};

struct CurvePoint {
  double elapsed_s = 0.0;
  double best_error_m = 0.0;
};

struct TuningResult {
  std::string method;
  HyperConfig best_config;
  double best_validation_error_m = 0.0;
  std::size_t best_trial = 0;
  std::vector<TrialRecord> history;  // in completion order
  std::vector<CurvePoint> curve;
  // For each trial (by index) the completed trials its stop rule compared against.
  std::vector<std::vector<std::size_t>> stop_references;
};

TuningResult run_bo(const SearchSpace& space, const Objective& objective,
                    const TunerSettings& settings);
TuningResult run_random_search(const SearchSpace& space, const Objective& objective,
                               const TunerSettings& settings);

// Running minimum of the objective at each completion time. Timestamps are
// made strictly increasing.
std::vector<CurvePoint> extract_curve(std::span<const TrialRecord> history);

// Objective recorded for a failed trial: twice the worst non-failed
// objective so far, at least 10 m.
double failure_penalty(std::span<const TrialRecord> history);

inline constexpr double kMinFailurePenalty = 10.0;

std::string trials_csv(const SearchSpace& space, std::span<const TrialRecord> history);
void write_trials_csv(const SearchSpace& space, std::span<const TrialRecord> history,
                      const std::filesystem::path& path);
std::vector<TrialRecord> read_trials_csv(const SearchSpace& space, const std::filesystem::path& path);

std::string curve_csv(std::span<const CurvePoint> curve);
void write_curve_csv(std::span<const CurvePoint> curve, const std::filesystem::path& path);

}  // namespace locbo
