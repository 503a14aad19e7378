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

// Exact Gaussian-process regression over points in the unit hypercube with
// an ARD squared-exponential kernel and a constant mean.

#include <cstdint>

#include <Eigen/Core>

namespace locbo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

struct GpDataset {
  MatrixXd inputs;   // n x d, every coordinate in [0, 1]
  VectorXd outputs;  // n

  GpDataset() = default;
  GpDataset(MatrixXd x, VectorXd y);
  static GpDataset empty(Index dim) { return GpDataset(MatrixXd(0, dim), VectorXd(0)); }

  Index size() const noexcept { return inputs.rows(); }
  Index dim() const noexcept { return inputs.cols(); }

  // Throws InvalidInput when shapes disagree or values are non-finite or
  // inputs leave [0, 1].
  void validate() const;
};

struct KernelParams {
  VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 1e-6;

  // Fallback used for empty / single-point datasets.
  static KernelParams defaults(Index dim);
  void validate() const;
};

// Box constraints for maximum-likelihood fitting.
struct KernelBounds {
  double lengthscale_min = 1e-3;
  double lengthscale_max = 10.0;
  double signal_min = 1e-4;
  double signal_max = 1e2;
  double noise_min = 1e-8;
  double noise_max = 1.0;
};

// k(a, b) = s * exp(-0.5 * sum_j ((a_j - b_j) / l_j)^2)
double kernel_eval(const Eigen::Ref<const VectorXd>& a, const Eigen::Ref<const VectorXd>& b,
                   const KernelParams& params);

// Gram matrix k(X, X) (no noise, no jitter).
MatrixXd kernel_matrix(const MatrixXd& x, const KernelParams& params);

// k(X, q) for every row of X.
VectorXd kernel_vector(const MatrixXd& x, const Eigen::Ref<const VectorXd>& query,
                       const KernelParams& params);

// Diagonal jitter schedule: jitter_start * signal_variance, escalating x10
// while the Cholesky factorization fails, up to jitter_max * signal_variance.
inline constexpr double kJitterStart = 1e-10;
inline constexpr double kJitterMax = 1e-4;

struct Prediction {
  double mean = 0.0;
  double variance = 0.0;
};

class GpModel {
 public:
  GpModel() = default;

  // Prior-only model over `dim` inputs.
  static GpModel empty(Index dim, KernelParams params, double mean_constant = 0.0);

  // Factorizes K + (noise + jitter) I. The mean constant is the empirical
  // mean of the outputs (0 for an empty dataset).
  static GpModel build(GpDataset data, KernelParams params);
  static GpModel build(GpDataset data, KernelParams params, double mean_constant);

  Prediction predict(const Eigen::Ref<const VectorXd>& query) const;

  const GpDataset& dataset() const noexcept { return data_; }
  const KernelParams& params() const noexcept { return params_; }
  double mean_constant() const noexcept { return mean_; }
  const MatrixXd& chol() const noexcept { return chol_; }
  const VectorXd& alpha() const noexcept { return alpha_; }
  // Absolute diagonal jitter added on top of the noise variance.
  double jitter() const noexcept { return jitter_; }
  Index size() const noexcept { return data_.size(); }
  Index dim() const noexcept { return data_.dim(); }
  // True when fit_mle could not run (n < 2) and fell back to defaults.
  bool used_default_params() const noexcept { return default_params_; }

 private:
  friend GpModel augment(const GpModel&, const Eigen::Ref<const VectorXd>&, double);
  friend GpModel fit_mle(const GpDataset&, int, std::uint64_t, const KernelBounds&);

  void factorize();
  void solve_alpha();

  GpDataset data_;
  KernelParams params_;
  double mean_ = 0.0;
  MatrixXd chol_;
  VectorXd alpha_;
  double jitter_ = 0.0;
  bool default_params_ = false;
};

// log p(y | X, theta, mu) for the exact GP. Throws NumericalError carrying
// the last jitter tried when K + sigma^2 I cannot be factorized.
double log_marginal_likelihood(const GpDataset& data, const KernelParams& params,
                               double mean_constant);

// Multi-start Nelder-Mead in log parameter space. Restart 0 starts from a
// data-informed default; the others are drawn from `seed`.
GpModel fit_mle(const GpDataset& data, int restarts, std::uint64_t seed,
                const KernelBounds& bounds = {});

// Appends one observation, keeping the kernel parameters. The Cholesky
// factor is extended by one row; the mean constant is reset to the new
// empirical mean. Throws InvalidInput (model untouched) on non-finite values.
GpModel augment(const GpModel& model, const Eigen::Ref<const VectorXd>& input, double output);

// Refit schedule used by the tuner: every augment while n <= 50, then every
// fifth.
bool should_refit(Index n_after_augment, int augments_since_refit);

}  // namespace locbo
