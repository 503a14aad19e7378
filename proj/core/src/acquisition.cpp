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

#include "locbo/acquisition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <utility>
#include <vector>

#include "locbo/errors.hpp"

namespace locbo {

double normal_pdf(double z) {
  return std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
}

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double expected_improvement(const EiQuery& q) {
  const double delta = q.mean - q.incumbent;
  if (!(q.sd > 0.0)) return std::max(delta, 0.0);
  const double z = delta / q.sd;
  return std::max(0.0, delta * normal_cdf(z) + q.sd * normal_pdf(z));
}

VectorXd expected_improvement_batch(const GpModel& model, const MatrixXd& candidates,
                                    double incumbent) {
  VectorXd ei(candidates.rows());
  for (Index i = 0; i < candidates.rows(); ++i) {
    const Prediction p = model.predict(candidates.row(i).transpose());
    ei(i) = expected_improvement({p.mean, std::sqrt(p.variance), incumbent});
  }
  return ei;
}

HyperConfig propose_next(const GpModel& model, const SearchSpace& space,
                         std::span<const VectorXd> pending, std::optional<double> fidelity,
                         std::uint64_t seed, const ProposalOptions& options) {
  if (space.empty()) throw InvalidInput("propose_next: empty search space");
  const auto x_dim = static_cast<Index>(space.encoded_dim());
  const Index model_dim = x_dim + (fidelity ? 1 : 0);
  if (model.dim() != model_dim)
    throw InvalidInput("propose_next: model dimension does not match the space");

  Rng rng(seed);
  if (model.size() == 0) return sample_random(space, rng);

  const double incumbent = model.dataset().outputs.maxCoeff();
  GpModel liar = model;
  for (const VectorXd& p : pending) {
    if (p.size() != model_dim) throw InvalidInput("propose_next: pending point dimension mismatch");
    liar = augment(liar, p, incumbent);
  }

  VectorXd query(model_dim);
  if (fidelity) query(x_dim) = *fidelity;
  auto score = [&](const VectorXd& x) {
    for (const VectorXd& p : pending)
      if (p.head(x_dim) == x) return -std::numeric_limits<double>::infinity();
    query.head(x_dim) = x;
    const Prediction pr = liar.predict(query);
    return expected_improvement({pr.mean, std::sqrt(pr.variance), incumbent});
  };

  const int n_cand = std::max(options.candidates, 1);
  std::vector<VectorXd> cands;
  std::vector<double> scores;
  cands.reserve(static_cast<std::size_t>(n_cand));
  scores.reserve(static_cast<std::size_t>(n_cand));
  for (int i = 0; i < n_cand; ++i) {
    cands.push_back(encode(space, sample_random(space, rng)));
    scores.push_back(score(cands.back()));
  }

  std::vector<std::size_t> order(cands.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(std::max(options.top_k, 0)),
                                       order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(),
                    [&](std::size_t a, std::size_t b) {
                      return scores[a] > scores[b] || (scores[a] == scores[b] && a < b);
                    });

  std::size_t best_idx = order.front();
  VectorXd best = cands[best_idx];
  double best_score = scores[best_idx];

  // Local walks start from the best random candidates and from the best
  // observed configurations, so refinement around the incumbent does not
  // depend on a random candidate happening to land near it.
  std::vector<std::pair<VectorXd, double>> starts;
  for (std::size_t t = 0; t < k; ++t) starts.emplace_back(cands[order[t]], scores[order[t]]);
  const VectorXd& outputs = model.dataset().outputs;
  std::vector<Index> observed(static_cast<std::size_t>(outputs.size()));
  std::iota(observed.begin(), observed.end(), Index{0});
  const auto k_obs = std::min<std::size_t>(k, observed.size());
  std::partial_sort(observed.begin(), observed.begin() + static_cast<std::ptrdiff_t>(k_obs),
                    observed.end(), [&](Index a, Index b) {
                      return outputs(a) > outputs(b) || (outputs(a) == outputs(b) && a < b);
                    });
  for (std::size_t t = 0; t < k_obs; ++t) {
    VectorXd x = model.dataset().inputs.row(observed[t]).head(x_dim).transpose();
    const double fx = score(x);
    starts.emplace_back(std::move(x), fx);
  }

  std::normal_distribution<double> step(0.0, options.local_sigma);
  for (auto& [x, fx] : starts) {
    for (int s = 0; s < options.local_steps; ++s) {
      VectorXd y = x;
      for (Index j = 0; j < x_dim; ++j) y(j) = std::clamp(y(j) + step(rng), 0.0, 1.0);
      y = encode(space, decode(space, y));
      const double fy = score(y);
      if (fy > fx) {
        x = std::move(y);
        fx = fy;
      }
    }
    if (fx > best_score) {
      best_score = fx;
      best = x;
    }
  }
  return decode(space, best);
}

}  // namespace locbo
