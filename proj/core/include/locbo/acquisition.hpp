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

// Expected Improvement over a GP surrogate, in the maximization convention:
// larger objective values are better.

#include <cstdint>
#include <optional>
#include <span>

#include "locbo/gp.hpp"
#include "locbo/search_space.hpp"

namespace locbo {

struct Incumbent {
  double value = 0.0;  // best observed objective (maximization convention)
  HyperConfig config;
  int fidelity = 0;    // epochs at which it was observed
};

struct EiQuery {
  double mean = 0.0;
  double sd = 0.0;
  double incumbent = 0.0;
};

double normal_pdf(double z);
double normal_cdf(double z);

// E[max(f - incumbent, 0)] for f ~ N(mean, sd^2). Always >= 0.
double expected_improvement(const EiQuery& q);

struct ProposalOptions {
  int candidates = 2000;
  int top_k = 5;
  int local_steps = 20;
  double local_sigma = 0.05;
};

// Picks the candidate maximizing EI. Candidates are random configurations
// from the space (so always on the quantization grid) plus accept-if-better
// Gaussian walks around the best few. Pending points are imputed with the
// incumbent value on a private copy of the model (constant liar) and never
// returned verbatim. When the model has no data the result equals
// sample_random with an Rng seeded from `seed`.
//
// `fidelity` is the encoded fidelity coordinate appended to every candidate;
// pass std::nullopt when the model has no fidelity input. Pending points
// carry the same layout as the model inputs.
HyperConfig propose_next(const GpModel& model, const SearchSpace& space,
                         std::span<const VectorXd> pending, std::optional<double> fidelity,
                         std::uint64_t seed, const ProposalOptions& options = {});

// EI of every row of `candidates` (already including any fidelity column).
VectorXd expected_improvement_batch(const GpModel& model, const MatrixXd& candidates,
                                    double incumbent);

}  // namespace locbo
