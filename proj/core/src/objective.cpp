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

#include "locbo/objective.hpp"

#include <algorithm>
#include <exception>
#include <optional>

#include "locbo/errors.hpp"

namespace locbo {

FeaturePipeline fit_pipeline(const LocalisationDataset& data, const HyperConfig& config) {
  const ScalingMethod method = config.contains("scaling")
                                   ? scaling_from_string(config.choice("scaling"))
                                   : ScalingMethod::none;
  std::optional<Index> components;
  if (config.contains("pca_count")) {
    const auto m = static_cast<Index>(config.integer("pca_count"));
    if (m < 1) throw InvalidInput("pca_count must be >= 1");
    components = std::min(m, data.feature_count());
  }
  return FeaturePipeline::fit(data.feature_rows(data.split.train), method, components);
}

LocalisationDataset transform_dataset(const LocalisationDataset& data,
                                      const FeaturePipeline& pipeline) {
  LocalisationDataset out;
  out.features = pipeline.transform(data.features);
  out.labels = data.labels;
  out.split = data.split;
  out.feature_names.reserve(static_cast<std::size_t>(out.features.cols()));
  const bool projected = pipeline.pca().has_value();
  for (Index j = 0; j < out.features.cols(); ++j)
    out.feature_names.push_back(projected ? "pc" + std::to_string(j + 1)
                                          : data.feature_names[static_cast<std::size_t>(j)]);
  return out;
}

TrainConfig train_config(const HyperConfig& config, int epochs, std::uint64_t seed) {
  TrainConfig cfg;
  cfg.units1 = static_cast<Index>(config.integer("units1"));
  cfg.units2 = static_cast<Index>(config.integer("units2"));
  cfg.dropout1 = config.real("dropout1");
  cfg.dropout2 = config.real("dropout2");
  cfg.learning_rate = config.real("learning_rate");
  cfg.batch_size = static_cast<Index>(config.integer("batch_size"));
  cfg.epochs = epochs;
  cfg.seed = seed;
  return cfg;
}

FinalModel train_final(const LocalisationDataset& data, const HyperConfig& config, int epochs,
                       std::uint64_t seed) {
  FinalModel out;
  out.pipeline = fit_pipeline(data, config);
  out.outcome = train(transform_dataset(data, out.pipeline), train_config(config, epochs, seed));
  return out;
}

LocalisationObjective::LocalisationObjective(LocalisationDataset data)
    : data_(std::make_shared<const LocalisationDataset>(std::move(data))) {
  data_->validate();
  if (data_->split.train.empty() || data_->split.val.empty())
    throw InvalidInput("objective needs non-empty train and validation splits");
}

Evaluation LocalisationObjective::operator()(const TrialRequest& request,
                                             const StopPoll& poll) const {
  Evaluation ev;
  try {
    const FeaturePipeline pipeline = fit_pipeline(*data_, request.config);
    const LocalisationDataset transformed = transform_dataset(*data_, pipeline);
    TrainOutcome outcome = train(transformed, train_config(request.config, request.epoch_budget,
                                                          request.seed),
                                 poll);
    ev.epoch_errors = std::move(outcome.epoch_val_errors);
    if (outcome.status == TrainStatus::diverged) {
      ev.failed = true;
      ev.message = outcome.message.empty() ? "training diverged" : outcome.message;
    }
  } catch (const std::exception& e) {
    ev.failed = true;
    ev.message = e.what();
  }
  return ev;
}

}  // namespace locbo
