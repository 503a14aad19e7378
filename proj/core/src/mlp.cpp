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

#include "locbo/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "locbo/errors.hpp"
#include "locbo/text_io.hpp"

namespace locbo {
namespace {

constexpr std::uint64_t kStreamInit = 11;
constexpr std::uint64_t kStreamShuffle = 12;

struct ForwardCache {
  std::vector<MatrixXd> inputs;  // input to layer l (post activation and dropout)
  std::vector<MatrixXd> pre;     // pre-activation of layer l
  std::vector<MatrixXd> masks;   // scaled keep masks for hidden layers (empty when unused)
};

// Forward pass; dropout masks are drawn only when `rng` is non-null.
MatrixXd forward(const MlpModel& model, const MatrixXd& x, Rng* rng, ForwardCache* cache) {
  if (x.cols() != model.input_dim()) throw InvalidInput("MLP: feature dimension mismatch");
  const Index layers = model.layer_count();
  MatrixXd a = x;
  if (cache) {
    cache->inputs.assign(static_cast<std::size_t>(layers), {});
    cache->pre.assign(static_cast<std::size_t>(layers), {});
    cache->masks.assign(static_cast<std::size_t>(layers), {});
  }
  for (Index l = 0; l < layers; ++l) {
    MatrixXd z = a * model.weights(l);
    z.rowwise() += model.biases(l).transpose();
    if (cache) {
      cache->inputs[static_cast<std::size_t>(l)] = std::move(a);
      cache->pre[static_cast<std::size_t>(l)] = z;
    }
    if (l + 1 == layers) return z;
    a = z.cwiseMax(0.0);
    const double p = static_cast<std::size_t>(l) < model.dropout().size()
                         ? model.dropout()[static_cast<std::size_t>(l)]
                         : 0.0;
    if (rng != nullptr && p > 0.0) {
      const double keep_scale = 1.0 / (1.0 - p);
      MatrixXd mask(a.rows(), a.cols());
      for (Index j = 0; j < mask.cols(); ++j)
        for (Index i = 0; i < mask.rows(); ++i) mask(i, j) = uniform01(*rng) >= p ? keep_scale : 0.0;
      a.array() *= mask.array();
      if (cache) cache->masks[static_cast<std::size_t>(l)] = std::move(mask);
    }
  }
  return a;
}

// Backpropagates d(loss)/d(output) through a cached forward pass.
void backward(const MlpModel& model, const ForwardCache& cache, MatrixXd grad_out,
              MlpGradients& grads) {
  const Index layers = model.layer_count();
  grads.weights.resize(static_cast<std::size_t>(layers));
  grads.biases.resize(static_cast<std::size_t>(layers));
  MatrixXd dz = std::move(grad_out);
  for (Index l = layers - 1; l >= 0; --l) {
    const auto ul = static_cast<std::size_t>(l);
    grads.weights[ul].noalias() = cache.inputs[ul].transpose() * dz;
    grads.biases[ul] = dz.colwise().sum().transpose();
    if (l == 0) break;
    MatrixXd da = dz * model.weights(l).transpose();
    const auto prev = static_cast<std::size_t>(l - 1);
    da.array() *= (cache.pre[prev].array() > 0.0).cast<double>();
    if (cache.masks[prev].size() > 0) da.array() *= cache.masks[prev].array();
    dz = std::move(da);
  }
}

double mse_and_grad(const MatrixXd& pred, const MatrixXd& y, MatrixXd* grad) {
  const MatrixXd diff = pred - y;
  const double denom = static_cast<double>(diff.size());
  if (grad) *grad = (2.0 / denom) * diff;
  return diff.squaredNorm() / denom;
}

}  // namespace

MlpModel::MlpModel(std::vector<Index> layer_sizes, std::vector<double> dropout)
    : sizes_(std::move(layer_sizes)), dropout_(std::move(dropout)) {
  if (sizes_.size() < 2) throw InvalidInput("MlpModel: need at least input and output sizes");
  for (Index s : sizes_)
    if (s < 1) throw InvalidInput("MlpModel: layer sizes must be positive");
  if (dropout_.size() > sizes_.size() - 2) throw InvalidInput("MlpModel: more dropout rates than hidden layers");
  for (double p : dropout_)
    if (!(p >= 0.0 && p < 1.0)) throw InvalidInput("MlpModel: dropout must be in [0, 1)");
  dropout_.resize(sizes_.size() - 2, 0.0);
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    weights_.push_back(MatrixXd::Zero(sizes_[l], sizes_[l + 1]));
    biases_.push_back(VectorXd::Zero(sizes_[l + 1]));
  }
}

MlpModel MlpModel::initialise(std::vector<Index> layer_sizes, std::vector<double> dropout,
                              std::uint64_t seed) {
  MlpModel m(std::move(layer_sizes), std::move(dropout));
  m.seed_ = seed;
  Rng rng(derive_seed(seed, {kStreamInit}));
  for (std::size_t l = 0; l < m.weights_.size(); ++l) {
    MatrixXd& w = m.weights_[l];
    const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
    for (Index i = 0; i < w.rows(); ++i)
      for (Index j = 0; j < w.cols(); ++j) w(i, j) = limit * (2.0 * uniform01(rng) - 1.0);
  }
  return m;
}

Index MlpModel::parameter_count() const {
  Index n = 0;
  for (std::size_t l = 0; l < weights_.size(); ++l) n += weights_[l].size() + biases_[l].size();
  return n;
}

double* MlpModel::locate(Index flat) {
  if (flat < 0) throw InvalidInput("MlpModel: parameter index out of range");
  for (std::size_t l = 0; l < weights_.size(); ++l) {
    MatrixXd& w = weights_[l];
    if (flat < w.size()) return &w(flat / w.cols(), flat % w.cols());
    flat -= w.size();
    if (flat < biases_[l].size()) return &biases_[l](flat);
    flat -= biases_[l].size();
  }
  throw InvalidInput("MlpModel: parameter index out of range");
}

double MlpModel::parameter(Index flat) const { return *const_cast<MlpModel*>(this)->locate(flat); }

void MlpModel::set_parameter(Index flat, double value) { *locate(flat) = value; }

bool MlpModel::all_finite() const {
  for (std::size_t l = 0; l < weights_.size(); ++l)
    if (!weights_[l].allFinite() || !biases_[l].allFinite()) return false;
  return true;
}

bool MlpModel::operator==(const MlpModel& o) const {
  if (sizes_ != o.sizes_ || dropout_ != o.dropout_ || seed_ != o.seed_) return false;
  for (std::size_t l = 0; l < weights_.size(); ++l)
    if (weights_[l] != o.weights_[l] || biases_[l] != o.biases_[l]) return false;
  return true;
}

MatrixXd predict_positions(const MlpModel& model, const MatrixXd& features) {
  return forward(model, features, nullptr, nullptr);
}

double mse_loss(const MlpModel& model, const MatrixXd& x, const MatrixXd& y) {
  return mse_and_grad(predict_positions(model, x), y, nullptr);
}

double loss_and_gradients(const MlpModel& model, const MatrixXd& x, const MatrixXd& y,
                          MlpGradients& grads) {
  if (x.rows() == 0 || x.rows() != y.rows()) throw InvalidInput("loss_and_gradients: bad batch");
  ForwardCache cache;
  const MatrixXd pred = forward(model, x, nullptr, &cache);
  MatrixXd grad_out;
  const double loss = mse_and_grad(pred, y, &grad_out);
  backward(model, cache, std::move(grad_out), grads);
  return loss;
}

double localisation_error(const MatrixXd& pred, const MatrixXd& truth) {
  if (pred.rows() != truth.rows() || pred.cols() != truth.cols())
    throw InvalidInput("localisation_error: shape mismatch");
  if (pred.rows() == 0) throw InvalidInput("localisation_error: no samples");
  return (pred - truth).rowwise().norm().mean();
}

double gradient_check(const MlpModel& model, const MatrixXd& x, const MatrixXd& y, int samples,
                      std::uint64_t seed) {
  MlpGradients grads;
  loss_and_gradients(model, x, y, grads);
  VectorXd analytic(model.parameter_count());
  {
    Index at = 0;
    for (std::size_t l = 0; l < grads.weights.size(); ++l) {
      const MatrixXd& g = grads.weights[l];
      for (Index i = 0; i < g.rows(); ++i)
        for (Index j = 0; j < g.cols(); ++j) analytic(at++) = g(i, j);
      for (Index i = 0; i < grads.biases[l].size(); ++i) analytic(at++) = grads.biases[l](i);
    }
  }

  std::vector<Index> idx(static_cast<std::size_t>(model.parameter_count()));
  std::iota(idx.begin(), idx.end(), Index{0});
  const auto want = static_cast<std::size_t>(std::max(samples, 200));
  if (idx.size() > want) {
    Rng rng(seed);
    std::shuffle(idx.begin(), idx.end(), rng);
    idx.resize(want);
    std::sort(idx.begin(), idx.end());
  }

  constexpr double h = 1e-5;
  MlpModel probe = model;
  double worst = 0.0;
  for (Index k : idx) {
    const double orig = probe.parameter(k);
    probe.set_parameter(k, orig + h);
    const double up = mse_loss(probe, x, y);
    probe.set_parameter(k, orig - h);
    const double down = mse_loss(probe, x, y);
    probe.set_parameter(k, orig);
    const double numeric = (up - down) / (2.0 * h);
    const double a = analytic(k);
    const double denom = std::max({std::abs(a), std::abs(numeric), 1e-5});
    worst = std::max(worst, std::abs(a - numeric) / denom);
  }
  return worst;
}

double sgd_epoch(MlpModel& model, const MatrixXd& x, const MatrixXd& y, double learning_rate,
                 Index batch_size, Rng& rng) {
  const Index n = x.rows();
  if (n == 0) throw InvalidInput("sgd_epoch: empty training set");
  if (batch_size < 1) throw InvalidInput("sgd_epoch: batch size must be >= 1");
  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::shuffle(order.begin(), order.end(), rng);

  MlpGradients grads;
  ForwardCache cache;
  MatrixXd bx, by, grad_out;
  double total = 0.0;
  Index batches = 0;
  for (Index start = 0; start < n; start += batch_size) {
    const Index b = std::min(batch_size, n - start);
    bx.resize(b, x.cols());
    by.resize(b, y.cols());
    for (Index i = 0; i < b; ++i) {
      const Index r = order[static_cast<std::size_t>(start + i)];
      bx.row(i) = x.row(r);
      by.row(i) = y.row(r);
    }
    const MatrixXd pred = forward(model, bx, &rng, &cache);
    const double loss = mse_and_grad(pred, by, &grad_out);
    if (!std::isfinite(loss)) return loss;
    backward(model, cache, std::move(grad_out), grads);
    for (Index l = 0; l < model.layer_count(); ++l) {
      model.weights(l).noalias() -= learning_rate * grads.weights[static_cast<std::size_t>(l)];
      model.biases(l).noalias() -= learning_rate * grads.biases[static_cast<std::size_t>(l)];
    }
    total += loss;
    ++batches;
  }
  return total / static_cast<double>(batches);
}

void TrainConfig::validate() const {
  if (units1 < 1 || units2 < 1) throw InvalidInput("TrainConfig: units must be >= 1");
  if (!(dropout1 >= 0.0 && dropout1 < 1.0) || !(dropout2 >= 0.0 && dropout2 < 1.0))
    throw InvalidInput("TrainConfig: dropout must be in [0, 1)");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
    throw InvalidInput("TrainConfig: learning rate must be finite and >= 0");
  if (batch_size < 1) throw InvalidInput("TrainConfig: batch size must be >= 1");
  if (epochs < 1) throw InvalidInput("TrainConfig: epochs must be >= 1");
}

TrainOutcome train(const LocalisationDataset& data, const TrainConfig& cfg,
                   const EpochHook& stop_poll) {
  cfg.validate();
  data.validate();
  if (data.split.train.empty()) throw InvalidInput("train: empty training split");
  if (data.split.val.empty()) throw InvalidInput("train: empty validation split");

  const MatrixXd x_train = data.feature_rows(data.split.train);
  const MatrixXd y_train = data.label_rows(data.split.train);
  const MatrixXd x_val = data.feature_rows(data.split.val);
  const MatrixXd y_val = data.label_rows(data.split.val);

  TrainOutcome out;
  out.model = MlpModel::initialise({data.feature_count(), cfg.units1, cfg.units2, 2},
                                   {cfg.dropout1, cfg.dropout2}, cfg.seed);
  Rng rng(derive_seed(cfg.seed, {kStreamShuffle}));
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const double loss = sgd_epoch(out.model, x_train, y_train, cfg.learning_rate, cfg.batch_size, rng);
    const double val = std::isfinite(loss) && out.model.all_finite()
                           ? localisation_error(predict_positions(out.model, x_val), y_val)
                           : std::numeric_limits<double>::quiet_NaN();
    if (!std::isfinite(val)) {
      out.status = TrainStatus::diverged;
      out.message = "non-finite loss at epoch " + std::to_string(epoch) +
                    " (learning rate " + format_double(cfg.learning_rate) + ")";
      break;
    }
    out.epoch_val_errors.push_back(val);
    if (stop_poll && epoch < cfg.epochs && stop_poll(out.epoch_val_errors)) {
      out.status = TrainStatus::stopped;
      break;
    }
  }

  if (out.status == TrainStatus::diverged) {
    const double inf = std::numeric_limits<double>::infinity();
    out.train_error_m = out.val_error_m = inf;
    return out;
  }
  out.train_error_m = localisation_error(predict_positions(out.model, x_train), y_train);
  out.val_error_m = localisation_error(predict_positions(out.model, x_val), y_val);
  if (!data.split.test.empty()) {
    out.test_error_m = localisation_error(predict_positions(out.model, data.feature_rows(data.split.test)),
                                          data.label_rows(data.split.test));
  }
  return out;
}

std::string serialize_model(const MlpModel& model) {
  std::ostringstream out;
  out << "locbo-mlp 1\n";
  out << "layers " << model.layer_sizes().size();
  for (Index s : model.layer_sizes()) out << ' ' << s;
  out << "\ndropout " << model.dropout().size();
  for (double p : model.dropout()) out << ' ' << format_double(p);
  out << "\nseed " << model.seed() << '\n';
  out << "params " << model.parameter_count() << '\n';
  for (Index k = 0; k < model.parameter_count(); ++k) out << format_double(model.parameter(k)) << '\n';
  return out.str();
}

MlpModel parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string word;
  int version = 0;
  if (!(in >> word >> version) || word != "locbo-mlp" || version != 1)
    throw InvalidInput("model file: bad header");
  std::size_t count = 0;
  if (!(in >> word >> count) || word != "layers") throw InvalidInput("model file: missing layers");
  std::vector<Index> sizes(count);
  for (Index& s : sizes)
    if (!(in >> s)) throw InvalidInput("model file: truncated layer sizes");
  if (!(in >> word >> count) || word != "dropout") throw InvalidInput("model file: missing dropout");
  std::vector<double> dropout(count);
  for (double& p : dropout) {
    if (!(in >> word)) throw InvalidInput("model file: truncated dropout");
    p = parse_double(word, "dropout");
  }
  std::uint64_t seed = 0;
  if (!(in >> word >> seed) || word != "seed") throw InvalidInput("model file: missing seed");
  Index params = 0;
  if (!(in >> word >> params) || word != "params") throw InvalidInput("model file: missing params");
  MlpModel model(std::move(sizes), std::move(dropout));
  model.set_seed(seed);
  if (params != model.parameter_count()) throw InvalidInput("model file: parameter count mismatch");
  for (Index k = 0; k < params; ++k) {
    if (!(in >> word)) throw InvalidInput("model file: truncated parameters");
    model.set_parameter(k, parse_double(word, "parameter"));
  }
  return model;
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  write_file(path, serialize_model(model));
}

MlpModel load_model(const std::filesystem::path& path) { return parse_model(read_file(path)); }

}  // namespace locbo
