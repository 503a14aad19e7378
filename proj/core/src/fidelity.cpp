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

#include "locbo/fidelity.hpp"

#include <algorithm>
#include <numeric>

#include "locbo/errors.hpp"

namespace locbo {

std::string_view to_string(TrialStatus s) {
  switch (s) {
    case TrialStatus::running: return "running";
    case TrialStatus::stopped_early: return "stopped_early";
    case TrialStatus::completed: return "completed";
    case TrialStatus::failed: return "failed";
  }
  return "unknown";
}

TrialStatus trial_status_from_string(std::string_view s) {
  if (s == "running") return TrialStatus::running;
  if (s == "stopped_early") return TrialStatus::stopped_early;
  if (s == "completed") return TrialStatus::completed;
  if (s == "failed") return TrialStatus::failed;
  throw InvalidInput("unknown trial status '" + std::string(s) + "'");
}

void FidelitySettings::validate() const {
  if (min_epochs < 1) throw ConfigError("fidelity.min_epochs", "must be >= 1");
  if (max_epochs < min_epochs) throw ConfigError("fidelity.max_epochs", "must be >= min_epochs");
  if (warmup_trials < 0) throw ConfigError("fidelity.warmup_trials", "must be >= 0");
  if (grace_epochs < 1) throw ConfigError("fidelity.grace_epochs", "must be >= 1");
}

StopDecision median_stop_decision(const TrialRecord& current,
                                  std::span<const TrialRecord> completed, int epoch,
                                  int grace_epochs) {
  if (epoch < 1 || current.epoch_errors.size() < static_cast<std::size_t>(epoch))
    return StopDecision::keep_going;
  if (epoch < grace_epochs || completed.empty()) return StopDecision::keep_going;

  std::vector<double> averages;
  averages.reserve(completed.size());
  for (const TrialRecord& t : completed) {
    const std::size_t m = std::min(t.epoch_errors.size(), static_cast<std::size_t>(epoch));
    if (m == 0) continue;
    const double sum = std::accumulate(t.epoch_errors.begin(),
                                       t.epoch_errors.begin() + static_cast<std::ptrdiff_t>(m), 0.0);
    averages.push_back(sum / static_cast<double>(m));
  }
  if (averages.empty()) return StopDecision::keep_going;

  std::sort(averages.begin(), averages.end());
  const std::size_t h = averages.size() / 2;
  const double median =
      averages.size() % 2 == 1 ? averages[h] : 0.5 * (averages[h - 1] + averages[h]);
  const double best = *std::min_element(
      current.epoch_errors.begin(), current.epoch_errors.begin() + static_cast<std::ptrdiff_t>(epoch));
  return best > median ? StopDecision::stop : StopDecision::keep_going;
}

int fidelity_for_trial(std::span<const TrialRecord> history, const FidelitySettings& settings) {
  return history.size() < static_cast<std::size_t>(settings.warmup_trials) ? settings.min_epochs
                                                                           : settings.max_epochs;
}

double fidelity_coordinate(int epochs, int max_epochs) {
  if (max_epochs < 1) throw InvalidInput("fidelity_coordinate: max_epochs must be >= 1");
  return std::clamp(static_cast<double>(std::max(epochs, 1)) / max_epochs, 0.0, 1.0);
}

}  // namespace locbo
