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

#include "locbo/gp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "locbo/errors.hpp"
#include "locbo/rng.hpp"

namespace locbo {
namespace {

// In-place lower Cholesky. Returns false on a non-positive pivot.
bool cholesky_lower(MatrixXd& a) {
  const Index n = a.rows();
  for (Index j = 0; j < n; ++j) {
    double d = a(j, j);
    for (Index k = 0; k < j; ++k) d -= a(j, k) * a(j, k);
    if (!(d > 0.0) || !std::isfinite(d)) return false;
    const double ljj = std::sqrt(d);
    a(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (Index k = 0; k < j; ++k) s -= a(i, k) * a(j, k);
      a(i, j) = s / ljj;
    }
  }
  a.triangularView<Eigen::StrictlyUpper>().setZero();
  return true;
}

struct Factor {
  MatrixXd chol;
  double jitter = 0.0;
};

// Factorizes `noisy_gram` + jitter I with the escalating jitter schedule.
Factor factor_with_jitter(const MatrixXd& noisy_gram, double signal_variance) {
  const double start = kJitterStart * signal_variance;
  const double limit = kJitterMax * signal_variance * (1.0 + 1e-9);
  double jitter = start;
  for (;;) {
    MatrixXd a = noisy_gram;
    a.diagonal().array() += jitter;
    if (cholesky_lower(a)) return {std::move(a), jitter};
    if (jitter * 10.0 > limit) break;
    jitter *= 10.0;
  }
  throw NumericalError("Cholesky factorization failed at jitter " + std::to_string(jitter),
                       jitter);
}

MatrixXd noisy_gram(const MatrixXd& x, const KernelParams& p) {
  MatrixXd k = kernel_matrix(x, p);
  k.diagonal().array() += p.noise_variance;
  return k;
}

bool all_finite(const Eigen::Ref<const VectorXd>& v) { return v.allFinite(); }

// Minimizes f over R^n with the Nelder-Mead simplex method. Returns the best
// vertex; the starting point is part of the initial simplex so the result is
// never worse than f(x0).
template <typename F>
VectorXd nelder_mead(F&& f, VectorXd x0, double step, int max_evals, double* best_value) {
  const Index n = x0.size();
  std::vector<VectorXd> simplex(n + 1, x0);
  std::vector<double> values(n + 1);
  for (Index i = 0; i < n; ++i) simplex[i + 1](i) += step;
  int evals = 0;
  auto eval = [&](const VectorXd& x) {
    ++evals;
    const double v = f(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::max();
  };
  for (Index i = 0; i <= n; ++i) values[i] = eval(simplex[i]);

  std::vector<Index> order(n + 1);
  while (evals < max_evals) {
    for (Index i = 0; i <= n; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(),
                     [&](Index a, Index b) { return values[a] < values[b]; });
    const Index best = order.front();
    const Index worst = order.back();
    const Index second = order[n - 1];

    double size = 0.0;
    for (Index i = 0; i <= n; ++i)
      size = std::max(size, (simplex[i] - simplex[best]).lpNorm<Eigen::Infinity>());
    if (std::abs(values[worst] - values[best]) < 1e-9 && size < 1e-6) break;

    VectorXd centroid = VectorXd::Zero(n);
    for (Index i = 0; i <= n; ++i)
      if (i != worst) centroid += simplex[i];
    centroid /= static_cast<double>(n);

    const VectorXd reflected = centroid + (centroid - simplex[worst]);
    const double fr = eval(reflected);
    if (fr < values[best]) {
      const VectorXd expanded = centroid + 2.0 * (centroid - simplex[worst]);
      const double fe = eval(expanded);
      if (fe < fr) {
        simplex[worst] = expanded;
        values[worst] = fe;
      } else {
        simplex[worst] = reflected;
        values[worst] = fr;
      }
      continue;
    }
    if (fr < values[second]) {
      simplex[worst] = reflected;
      values[worst] = fr;
      continue;
    }
    const bool outside = fr < values[worst];
    const VectorXd contracted = outside ? VectorXd(centroid + 0.5 * (reflected - centroid))
                                        : VectorXd(centroid + 0.5 * (simplex[worst] - centroid));
    const double fc = eval(contracted);
    if (fc < (outside ? fr : values[worst])) {
      simplex[worst] = contracted;
      values[worst] = fc;
      continue;
    }
    for (Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      simplex[i] = simplex[best] + 0.5 * (simplex[i] - simplex[best]);
      values[i] = eval(simplex[i]);
    }
  }
  const auto it = std::min_element(values.begin(), values.end());
  *best_value = *it;
  return simplex[static_cast<std::size_t>(it - values.begin())];
}

struct LogBox {
  VectorXd lo, hi;
};

LogBox log_box(Index dim, const KernelBounds& b) {
  LogBox box{VectorXd(dim + 2), VectorXd(dim + 2)};
  box.lo.head(dim).setConstant(std::log(b.lengthscale_min));
  box.hi.head(dim).setConstant(std::log(b.lengthscale_max));
  box.lo(dim) = std::log(b.signal_min);
  box.hi(dim) = std::log(b.signal_max);
  box.lo(dim + 1) = std::log(b.noise_min);
  box.hi(dim + 1) = std::log(b.noise_max);
  return box;
}

KernelParams from_log(const VectorXd& theta, const LogBox& box) {
  const Index dim = theta.size() - 2;
  const VectorXd t = theta.cwiseMax(box.lo).cwiseMin(box.hi);
  KernelParams p;
  p.lengthscales = t.head(dim).array().exp();
  p.signal_variance = std::exp(t(dim));
  p.noise_variance = std::exp(t(dim + 1));
  return p;
}

double empirical_mean(const VectorXd& y) { return y.size() == 0 ? 0.0 : y.mean(); }

}  // namespace

GpDataset::GpDataset(MatrixXd x, VectorXd y) : inputs(std::move(x)), outputs(std::move(y)) {}

void GpDataset::validate() const {
  if (inputs.rows() != outputs.size())
    throw InvalidInput("GpDataset: input rows do not match output length");
  if (!inputs.allFinite() || !outputs.allFinite())
    throw InvalidInput("GpDataset: non-finite value");
  if (inputs.size() > 0 && (inputs.minCoeff() < 0.0 || inputs.maxCoeff() > 1.0))
    throw InvalidInput("GpDataset: input coordinate outside [0, 1]");
}

KernelParams KernelParams::defaults(Index dim) {
  KernelParams p;
  p.lengthscales = VectorXd::Constant(dim, 0.5);
  p.signal_variance = 1.0;
  p.noise_variance = 1e-4;
  return p;
}

void KernelParams::validate() const {
  if (!lengthscales.allFinite() || (lengthscales.array() <= 0.0).any())
    throw InvalidInput("KernelParams: lengthscales must be positive and finite");
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance))
    throw InvalidInput("KernelParams: signal_variance must be positive and finite");
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance))
    throw InvalidInput("KernelParams: noise_variance must be non-negative and finite");
}

double kernel_eval(const Eigen::Ref<const VectorXd>& a, const Eigen::Ref<const VectorXd>& b,
                   const KernelParams& params) {
  if (a.size() != params.lengthscales.size() || b.size() != params.lengthscales.size())
    throw InvalidInput("kernel_eval: dimension mismatch");
  const double r2 = ((a - b).array() / params.lengthscales.array()).square().sum();
  return params.signal_variance * std::exp(-0.5 * r2);
}

MatrixXd kernel_matrix(const MatrixXd& x, const KernelParams& params) {
  if (x.cols() != params.lengthscales.size())
    throw InvalidInput("kernel_matrix: dimension mismatch");
  const Index n = x.rows();
  const MatrixXd scaled = x.array().rowwise() / params.lengthscales.transpose().array();
  MatrixXd k(n, n);
  for (Index i = 0; i < n; ++i) {
    k(i, i) = params.signal_variance;
    for (Index j = 0; j < i; ++j) {
      const double r2 = (scaled.row(i) - scaled.row(j)).squaredNorm();
      k(i, j) = k(j, i) = params.signal_variance * std::exp(-0.5 * r2);
    }
  }
  return k;
}

VectorXd kernel_vector(const MatrixXd& x, const Eigen::Ref<const VectorXd>& query,
                       const KernelParams& params) {
  if (x.cols() != query.size() || query.size() != params.lengthscales.size())
    throw InvalidInput("kernel_vector: dimension mismatch");
  const Eigen::ArrayXd inv_l = params.lengthscales.array().inverse();
  VectorXd k(x.rows());
  for (Index i = 0; i < x.rows(); ++i) {
    const double r2 = ((x.row(i).transpose() - query).array() * inv_l).square().sum();
    k(i) = params.signal_variance * std::exp(-0.5 * r2);
  }
  return k;
}

GpModel GpModel::empty(Index dim, KernelParams params, double mean_constant) {
  return build(GpDataset::empty(dim), std::move(params), mean_constant);
}

GpModel GpModel::build(GpDataset data, KernelParams params) {
  const double mu = empirical_mean(data.outputs);
  return build(std::move(data), std::move(params), mu);
}

GpModel GpModel::build(GpDataset data, KernelParams params, double mean_constant) {
  data.validate();
  params.validate();
  if (params.lengthscales.size() != data.dim())
    throw InvalidInput("GpModel: lengthscale count does not match input dimension");
  GpModel m;
  m.data_ = std::move(data);
  m.params_ = std::move(params);
  m.mean_ = mean_constant;
  m.factorize();
  m.solve_alpha();
  return m;
}

void GpModel::factorize() {
  if (data_.size() == 0) {
    chol_.resize(0, 0);
    jitter_ = 0.0;
    return;
  }
  Factor f = factor_with_jitter(noisy_gram(data_.inputs, params_), params_.signal_variance);
  chol_ = std::move(f.chol);
  jitter_ = f.jitter;
}

void GpModel::solve_alpha() {
  if (data_.size() == 0) {
    alpha_.resize(0);
    return;
  }
  const VectorXd r = data_.outputs.array() - mean_;
  const VectorXd z = chol_.triangularView<Eigen::Lower>().solve(r);
  alpha_ = chol_.transpose().triangularView<Eigen::Upper>().solve(z);
}

Prediction GpModel::predict(const Eigen::Ref<const VectorXd>& query) const {
  if (query.size() != dim()) throw InvalidInput("predict: query dimension mismatch");
  if (!all_finite(query)) throw InvalidInput("predict: non-finite query");
  const double prior = params_.signal_variance;
  if (size() == 0) return {mean_, prior};
  const VectorXd ks = kernel_vector(data_.inputs, query, params_);
  const VectorXd v = chol_.triangularView<Eigen::Lower>().solve(ks);
  return {mean_ + ks.dot(alpha_), std::max(0.0, prior - v.squaredNorm())};
}

double log_marginal_likelihood(const GpDataset& data, const KernelParams& params,
                               double mean_constant) {
  if (data.size() < 1) throw InvalidInput("log_marginal_likelihood: empty dataset");
  params.validate();
  if (params.lengthscales.size() != data.dim())
    throw InvalidInput("log_marginal_likelihood: dimension mismatch");
  const Factor f = factor_with_jitter(noisy_gram(data.inputs, params), params.signal_variance);
  const auto lower = f.chol.triangularView<Eigen::Lower>();
  const VectorXd r = data.outputs.array() - mean_constant;
  const VectorXd z = lower.solve(r);
  const double n = static_cast<double>(data.size());
  return -0.5 * z.squaredNorm() - f.chol.diagonal().array().log().sum() -
         0.5 * n * std::log(2.0 * std::numbers::pi);
}

GpModel fit_mle(const GpDataset& data, int restarts, std::uint64_t seed,
                const KernelBounds& bounds) {
  data.validate();
  const Index dim = data.dim();
  if (data.size() < 2) {
    GpModel m = GpModel::build(data, KernelParams::defaults(dim));
    m.default_params_ = true;
    return m;
  }
  const double mu = empirical_mean(data.outputs);
  const double var = std::max((data.outputs.array() - mu).square().mean(), 1e-6);
  const LogBox box = log_box(dim, bounds);

  auto negative_lml = [&](const VectorXd& theta) {
    try {
      return -log_marginal_likelihood(data, from_log(theta, box), mu);
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  Rng rng(derive_seed(seed, {kStreamGpFit}));
  auto log_uniform = [&](double lo, double hi) {
    return std::log(lo) + uniform01(rng) * (std::log(hi) - std::log(lo));
  };
  auto clamp = [](double v, double lo, double hi) { return std::clamp(v, lo, hi); };

  const int max_evals = 200 + 40 * static_cast<int>(dim + 2);
  VectorXd best_theta;
  double best_value = std::numeric_limits<double>::infinity();
  for (int r = 0; r < std::max(restarts, 1); ++r) {
    VectorXd theta(dim + 2);
    if (r == 0) {
      theta.head(dim).setConstant(std::log(0.5));
      theta(dim) = std::log(clamp(var, bounds.signal_min, bounds.signal_max));
      theta(dim + 1) = std::log(clamp(1e-2 * var, bounds.noise_min, bounds.noise_max));
    } else {
      const double ls_lo = std::max(bounds.lengthscale_min, 0.05);
      const double ls_hi = std::min(bounds.lengthscale_max, 5.0);
      for (Index j = 0; j < dim; ++j) theta(j) = log_uniform(ls_lo, ls_hi);
      theta(dim) = log_uniform(clamp(var / 10.0, bounds.signal_min, bounds.signal_max),
                               clamp(var * 10.0, bounds.signal_min, bounds.signal_max));
      theta(dim + 1) = log_uniform(bounds.noise_min, clamp(var, bounds.noise_min, bounds.noise_max));
    }
    theta = theta.cwiseMax(box.lo).cwiseMin(box.hi);
    double value = 0.0;
    VectorXd found = nelder_mead(negative_lml, theta, 0.5, max_evals, &value);
    // Simplices collapse early in this many dimensions; restart from the
    // converged point until it stops improving.
    for (int polish = 0; polish < 4; ++polish) {
      double again = 0.0;
      VectorXd moved = nelder_mead(negative_lml, found, 0.5, max_evals, &again);
      if (!(again < value - 1e-6)) break;
      value = again;
      found = std::move(moved);
    }
    if (value < best_value || best_theta.size() == 0) {
      best_value = value;
      best_theta = found.cwiseMax(box.lo).cwiseMin(box.hi);
    }
  }
  if (!std::isfinite(best_value)) {
    GpModel m = GpModel::build(data, KernelParams::defaults(dim));
    m.default_params_ = true;
    return m;
  }
  return GpModel::build(data, from_log(best_theta, box), mu);
}

GpModel augment(const GpModel& model, const Eigen::Ref<const VectorXd>& input, double output) {
  if (input.size() != model.dim()) throw InvalidInput("augment: input dimension mismatch");
  if (!all_finite(input) || !std::isfinite(output))
    throw InvalidInput("augment: non-finite observation rejected");
  if (input.minCoeff() < 0.0 || input.maxCoeff() > 1.0)
    throw InvalidInput("augment: input coordinate outside [0, 1]");

  GpModel next;
  const Index n = model.size();
  next.params_ = model.params_;
  next.data_.inputs.resize(n + 1, model.dim());
  next.data_.inputs.topRows(n) = model.data_.inputs;
  next.data_.inputs.row(n) = input.transpose();
  next.data_.outputs.resize(n + 1);
  next.data_.outputs.head(n) = model.data_.outputs;
  next.data_.outputs(n) = output;
  next.mean_ = empirical_mean(next.data_.outputs);

  bool extended = false;
  if (n > 0) {
    const VectorXd k = kernel_vector(model.data_.inputs, input, model.params_);
    const VectorXd l = model.chol_.triangularView<Eigen::Lower>().solve(k);
    const double d = model.params_.signal_variance + model.params_.noise_variance +
                     model.jitter_ - l.squaredNorm();
    if (d > 0.0 && std::isfinite(d)) {
      next.chol_ = MatrixXd::Zero(n + 1, n + 1);
      next.chol_.topLeftCorner(n, n) = model.chol_;
      next.chol_.block(n, 0, 1, n) = l.transpose();
      next.chol_(n, n) = std::sqrt(d);
      next.jitter_ = model.jitter_;
      extended = true;
    }
  }
  if (!extended) next.factorize();
  next.solve_alpha();
  return next;
}

bool should_refit(Index n_after_augment, int augments_since_refit) {
  return n_after_augment <= 50 || augments_since_refit >= 5;
}

}  // namespace locbo
