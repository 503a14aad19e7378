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

// Independent reference implementations used to check the library. They
// favour the most direct formulation over speed: explicit inverses and
// determinants, Monte-Carlo expectations, scalar loops.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "locbo/gp.hpp"
#include "locbo/mlp.hpp"

namespace locbo::oracle {

inline Eigen::MatrixXd noisy_gram(const Eigen::MatrixXd& x, const KernelParams& p) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd k(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      double r2 = 0.0;
      for (Eigen::Index d = 0; d < x.cols(); ++d) {
        const double t = (x(i, d) - x(j, d)) / p.lengthscales(d);
        r2 += t * t;
      }
      k(i, j) = p.signal_variance * std::exp(-0.5 * r2);
    }
    k(i, i) += p.noise_variance;
  }
  return k;
}

inline Eigen::VectorXd cross_cov(const Eigen::MatrixXd& x, const Eigen::VectorXd& q,
                                 const KernelParams& p) {
  Eigen::VectorXd k(x.rows());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    double r2 = 0.0;
    for (Eigen::Index d = 0; d < x.cols(); ++d) {
      const double t = (x(i, d) - q(d)) / p.lengthscales(d);
      r2 += t * t;
    }
    k(i) = p.signal_variance * std::exp(-0.5 * r2);
  }
  return k;
}

// Posterior via the explicit inverse of K + (noise + jitter) I.
inline std::pair<double, double> dense_predict(const Eigen::MatrixXd& x, const Eigen::VectorXd& y,
                                               const KernelParams& p, double mean,
                                               const Eigen::VectorXd& q, double jitter = 0.0) {
  Eigen::MatrixXd k = noisy_gram(x, p);
  k.diagonal().array() += jitter;
  const Eigen::MatrixXd inv = k.fullPivLu().inverse();
  const Eigen::VectorXd ks = cross_cov(x, q, p);
  const Eigen::VectorXd r = y.array() - mean;
  return {mean + ks.dot(inv * r), p.signal_variance - ks.dot(inv * ks)};
}

inline double dense_lml(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const KernelParams& p,
                        double mean, double jitter = 0.0) {
  Eigen::MatrixXd k = noisy_gram(x, p);
  k.diagonal().array() += jitter;
  const auto lu = k.fullPivLu();
  const Eigen::VectorXd r = y.array() - mean;
  const double n = static_cast<double>(y.size());
  return -0.5 * r.dot(lu.inverse() * r) - 0.5 * std::log(lu.determinant()) -
         0.5 * n * std::log(2.0 * M_PI);
}

struct McEstimate {
  double mean;
  double standard_error;
};

// E[max(f - incumbent, 0)], f ~ N(mu, sd^2), by plain Monte Carlo.
inline McEstimate mc_expected_improvement(double mu, double sd, double incumbent,
                                          std::size_t samples, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> z;
  double sum = 0.0, sum2 = 0.0;
  for (std::size_t i = 0; i < samples; ++i) {
    const double v = std::max(mu + sd * z(rng) - incumbent, 0.0);
    sum += v;
    sum2 += v * v;
  }
  const double n = static_cast<double>(samples);
  const double m = sum / n;
  const double var = std::max(0.0, sum2 / n - m * m);
  return {m, std::sqrt(var / n)};
}

// Per-neuron forward pass without dropout.
inline Eigen::MatrixXd forward_loops(const MlpModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), model.output_dim());
  for (Eigen::Index row = 0; row < x.rows(); ++row) {
    std::vector<double> a(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j) a[j] = x(row, j);
    for (Eigen::Index l = 0; l < model.layer_count(); ++l) {
      const Eigen::MatrixXd& w = model.weights(l);
      std::vector<double> next(static_cast<std::size_t>(w.cols()));
      for (Eigen::Index o = 0; o < w.cols(); ++o) {
        double s = model.biases(l)(o);
        for (Eigen::Index i = 0; i < w.rows(); ++i) s += a[static_cast<std::size_t>(i)] * w(i, o);
        const bool hidden = l + 1 < model.layer_count();
        next[static_cast<std::size_t>(o)] = hidden ? std::max(0.0, s) : s;
      }
      a = std::move(next);
    }
    for (Eigen::Index o = 0; o < model.output_dim(); ++o) out(row, o) = a[static_cast<std::size_t>(o)];
  }
  return out;
}

inline double localisation_error_loops(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
  double s = 0.0;
  for (Eigen::Index i = 0; i < pred.rows(); ++i) {
    const double dx = pred(i, 0) - truth(i, 0);
    const double dy = pred(i, 1) - truth(i, 1);
    s += std::sqrt(dx * dx + dy * dy);
  }
  return s / static_cast<double>(pred.rows());
}

// Linearised least-squares position fix from ranges to known anchors:
// subtracting the first anchor's circle equation from the others.
inline Eigen::Vector2d trilaterate(const std::vector<Eigen::Vector2d>& anchors,
                                   const std::vector<double>& ranges) {
  const std::size_t m = anchors.size();
  Eigen::MatrixXd a(static_cast<Eigen::Index>(m - 1), 2);
  Eigen::VectorXd b(static_cast<Eigen::Index>(m - 1));
  for (std::size_t i = 1; i < m; ++i) {
    const auto r = static_cast<Eigen::Index>(i - 1);
    a(r, 0) = 2.0 * (anchors[i].x() - anchors[0].x());
    a(r, 1) = 2.0 * (anchors[i].y() - anchors[0].y());
    b(r) = ranges[0] * ranges[0] - ranges[i] * ranges[i] + anchors[i].squaredNorm() -
           anchors[0].squaredNorm();
  }
  return a.colPivHouseholderQr().solve(b);
}

inline std::vector<double> prefix_min(const std::vector<double>& v) {
  std::vector<double> out;
  double m = std::numeric_limits<double>::infinity();
  for (double x : v) out.push_back(m = std::min(m, x));
  return out;
}

// Real roots of the characteristic polynomial det(A - lambda I) of a
// symmetric matrix, found by bisection on Sturm-free sign changes of the
// determinant over a fine grid between Gershgorin bounds, then refined.
// Only used for small (<= 6) matrices with well-separated eigenvalues.
inline std::vector<double> charpoly_eigenvalues(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double radius = a.row(i).cwiseAbs().sum() - std::abs(a(i, i));
    lo = std::min(lo, a(i, i) - radius);
    hi = std::max(hi, a(i, i) + radius);
  }
  lo -= 1e-6;
  hi += 1e-6;
  auto det = [&](double lambda) {
    Eigen::MatrixXd m = a;
    m.diagonal().array() -= lambda;
    return m.fullPivLu().determinant();
  };
  std::vector<double> roots;
  const int grid = 20000;
  double prev_x = lo, prev_f = det(lo);
  for (int k = 1; k <= grid; ++k) {
    const double x = lo + (hi - lo) * k / grid;
    const double f = det(x);
    if (f == 0.0) {
      roots.push_back(x);
    } else if ((prev_f < 0.0) != (f < 0.0)) {
      double l = prev_x, h = x, fl = prev_f;
      for (int it = 0; it < 200 && h - l > 1e-15 * std::max(1.0, std::abs(h)); ++it) {
        const double mid = 0.5 * (l + h);
        const double fm = det(mid);
        if ((fm < 0.0) == (fl < 0.0)) {
          l = mid;
          fl = fm;
        } else {
          h = mid;
        }
      }
      roots.push_back(0.5 * (l + h));
    }
    prev_x = x;
    prev_f = f;
  }
  std::sort(roots.rbegin(), roots.rend());
  return roots;
}

}  // namespace locbo::oracle
