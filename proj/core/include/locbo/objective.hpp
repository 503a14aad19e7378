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

// Bridges hyperparameter configurations to the localisation network: fits
// the feature pipeline on the training rows, trains with the tuner's stop
// poll, and reports per-epoch validation errors.

#include <cstdint>
#include <memory>

#include "locbo/data.hpp"
#include "locbo/features.hpp"
#include "locbo/mlp.hpp"
#include "locbo/search_space.hpp"
#include "locbo/tuner.hpp"

namespace locbo {

// Feature pipeline for `config`: its `scaling` choice, and PCA down to
// `pca_count` components when the space has that parameter.
FeaturePipeline fit_pipeline(const LocalisationDataset& data, const HyperConfig& config);

// Same rows, labels and split; features replaced by pipeline output.
LocalisationDataset transform_dataset(const LocalisationDataset& data,
                                      const FeaturePipeline& pipeline);

TrainConfig train_config(const HyperConfig& config, int epochs, std::uint64_t seed);

struct FinalModel {
  FeaturePipeline pipeline;
  TrainOutcome outcome;
};

// Full training run (no early stopping) for a chosen configuration.
FinalModel train_final(const LocalisationDataset& data, const HyperConfig& config, int epochs,
                       std::uint64_t seed);

class LocalisationObjective {
 public:
  // `data` must carry a split with non-empty train and validation parts.
  explicit LocalisationObjective(LocalisationDataset data);

  Evaluation operator()(const TrialRequest& request, const StopPoll& poll) const;

  const LocalisationDataset& data() const noexcept { return *data_; }

 private:
  std::shared_ptr<const LocalisationDataset> data_;
};

}  // namespace locbo
