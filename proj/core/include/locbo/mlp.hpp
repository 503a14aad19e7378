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

// Fully connected regression network (rectifier hidden layers, linear
// output) trained with plain mini-batch SGD on mean squared error, plus the
// mean Euclidean localisation error used for reporting.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "locbo/data.hpp"
#include "locbo/rng.hpp"

namespace locbo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

class MlpModel {
 public:
  MlpModel() = default;
  // All parameters zero. `layer_sizes` = {inputs, hidden..., outputs}.
  explicit MlpModel(std::vector<Index> layer_sizes, std::vector<double> dropout = {});

  // Uniform(+-sqrt(6 / (fan_in + fan_out))) weights, zero biases.
  static MlpModel initialise(std::vector<Index> layer_sizes, std::vector<double> dropout,
                             std::uint64_t seed);

  const std::vector<Index>& layer_sizes() const noexcept { return sizes_; }
  Index layer_count() const noexcept { return static_cast<Index>(weights_.size()); }
  Index input_dim() const noexcept { return sizes_.empty() ? 0 : sizes_.front(); }
  Index output_dim() const noexcept { return sizes_.empty() ? 0 : sizes_.back(); }

  // weights(l) maps layer l activations to layer l+1: shape sizes[l] x sizes[l+1].
  MatrixXd& weights(Index l) { return weights_[static_cast<std::size_t>(l)]; }
  const MatrixXd& weights(Index l) const { return weights_[static_cast<std::size_t>(l)]; }
  VectorXd& biases(Index l) { return biases_[static_cast<std::size_t>(l)]; }
  const VectorXd& biases(Index l) const { return biases_[static_cast<std::size_t>(l)]; }

  // Dropout rate applied after each hidden layer's activation (training only).
  const std::vector<double>& dropout() const noexcept { return dropout_; }
  std::uint64_t seed() const noexcept { return seed_; }
  void set_seed(std::uint64_t s) noexcept { seed_ = s; }

  // Flat view: layer by layer, weights row-major then biases.
  Index parameter_count() const;
  double parameter(Index flat) const;
  void set_parameter(Index flat, double value);

  bool all_finite() const;
  bool operator==(const MlpModel& other) const;

 private:
  double* locate(Index flat);
  std::vector<Index> sizes_;
  std::vector<MatrixXd> weights_;
  std::vector<VectorXd> biases_;
  std::vector<double> dropout_;
  std::uint64_t seed_ = 0;
};

struct MlpGradients {
  std::vector<MatrixXd> weights;
  std::vector<VectorXd> biases;
};

// Deterministic forward pass (dropout disabled); one output row per input row.
MatrixXd predict_positions(const MlpModel& model, const MatrixXd& features);

// Mean over rows and output columns of the squared error.
double mse_loss(const MlpModel& model, const MatrixXd& x, const MatrixXd& y);

// Loss and analytic gradients without dropout.
double loss_and_gradients(const MlpModel& model, const MatrixXd& x, const MatrixXd& y,
                          MlpGradients& grads);

// (1/N) sum_i ||truth_i - pred_i||_2 over 2-D rows.
double localisation_error(const MatrixXd& pred, const MatrixXd& truth);

// Max over sampled parameters of |g_analytic - g_fd| / max(|g_analytic|, |g_fd|, 1e-5),
// with central differences of step 1e-5. At least 200 parameters (or all, if
// fewer) are checked; sampling uses `seed`.
double gradient_check(const MlpModel& model, const MatrixXd& x, const MatrixXd& y,
                      int samples = 256, std::uint64_t seed = 0);

// One pass over (x, y) in shuffled mini-batches with inverted dropout.
// Returns the mean mini-batch loss; non-finite when training diverged.
double sgd_epoch(MlpModel& model, const MatrixXd& x, const MatrixXd& y, double learning_rate,
                 Index batch_size, Rng& rng);

struct TrainConfig {
  Index units1 = 64;
  Index units2 = 64;
  double dropout1 = 0.0;
  double dropout2 = 0.0;
  double learning_rate = 0.01;
  Index batch_size = 32;
  int epochs = 50;
  std::uint64_t seed = 0;

  void validate() const;
};

enum class TrainStatus { completed, stopped, diverged };

struct TrainOutcome {
  MlpModel model;
  std::vector<double> epoch_val_errors;  // metres
  double train_error_m = 0.0;
  double val_error_m = 0.0;
  std::optional<double> test_error_m;    // when the dataset has a test split
  TrainStatus status = TrainStatus::completed;
  std::string message;
};

// Called after every epoch with all validation errors so far; return true
// to stop training.
using EpochHook = std::function<bool(std::span<const double>)>;

// Trains on data.split.train, reports validation error after each epoch.
// Throws InvalidInput when the train or validation split is empty.
TrainOutcome train(const LocalisationDataset& data, const TrainConfig& cfg,
                   const EpochHook& stop_poll = {});

// Flat text format: header with layer sizes, dropout and seed, then one
// parameter per line in the flat order. Round-trips exactly.
std::string serialize_model(const MlpModel& model);
MlpModel parse_model(std::string_view text);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace locbo
