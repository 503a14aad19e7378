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

// Epoch-budget scheduling and the median stopping rule.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "locbo/search_space.hpp"

namespace locbo {

enum class TrialStatus { running, stopped_early, completed, failed };

std::string_view to_string(TrialStatus s);
TrialStatus trial_status_from_string(std::string_view s);

struct TrialRecord {
  std::size_t index = 0;
  HyperConfig config;
  std::uint64_t seed = 0;
  TrialStatus status = TrialStatus::running;
  std::vector<double> epoch_errors;  // validation localisation error per epoch, metres
  int epoch_budget = 0;              // cap handed to the evaluator
  int final_epochs = 0;              // r: epochs actually executed
  double wall_time_s = 0.0;
  double finished_at_s = 0.0;        // elapsed since tuning start
  double objective = 0.0;            // best epoch error, or the failure penalty
  std::string message;
};

struct FidelitySettings {
  int min_epochs = 10;
  int max_epochs = 50;
  int warmup_trials = 4;  // trials run at min_epochs before switching to max_epochs
  int grace_epochs = 5;

  void validate() const;
};

enum class StopDecision { keep_going, stop };

// Stops when epoch >= grace_epochs and the current trial's best error so far
// is strictly greater than the median, over completed trials, of their
// running-average error up to `epoch`. A completed trial shorter than
// `epoch` contributes the average over all of its epochs.
StopDecision median_stop_decision(const TrialRecord& current,
                                  std::span<const TrialRecord> completed, int epoch,
                                  int grace_epochs);

// Epoch cap for the next trial given everything observed so far.
int fidelity_for_trial(std::span<const TrialRecord> history, const FidelitySettings& settings);

// Encoded fidelity coordinate epochs / max_epochs, clamped into (0, 1].
double fidelity_coordinate(int epochs, int max_epochs);

}  // namespace locbo
