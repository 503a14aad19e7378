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

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "locbo/acquisition.hpp"
#include "locbo/rng.hpp"
#include "oracles.hpp"

namespace locbo {
namespace {

TEST(ExpectedImprovement, NoUncertaintyNoImprovement) {
  EXPECT_EQ(expected_improvement({-1.0, 0.0, 0.0}), 0.0);
}

TEST(ExpectedImprovement, NoUncertaintyDeterministicGain) {
  EXPECT_DOUBLE_EQ(expected_improvement({2.0, 0.0, 1.0}), 1.0);
}

TEST(ExpectedImprovement, StandardNormalAtIncumbent) {
  const double ei = expected_improvement({0.0, 1.0, 0.0});
  EXPECT_NEAR(ei, 1.0 / std::sqrt(2.0 * M_PI), 1e-15);
  const auto mc = oracle::mc_expected_improvement(0.0, 1.0, 0.0, 1'000'000, 17);
  EXPECT_LE(std::abs(ei - mc.mean), 3.0 * mc.standard_error);
}

TEST(ExpectedImprovement, NeverNegativeAndFiniteInTheTails) {
  for (double mean : {-50.0, -5.0, 0.0, 5.0, 50.0})
    for (double sd : {1e-12, 1e-3, 1.0, 10.0}) {
      const double ei = expected_improvement({mean, sd, 0.0});
      EXPECT_GE(ei, 0.0);
      EXPECT_TRUE(std::isfinite(ei));
    }
}

TEST(NormalCdf, Symmetry) {
  for (double z : {0.0, 0.3, 1.7, 4.0}) EXPECT_NEAR(normal_cdf(z) + normal_cdf(-z), 1.0, 1e-15);
}

SearchSpace unit_line() { return SearchSpace({{"x", ContinuousRange{0.0, 1.0, Scale::linear}}}); }

GpModel bowl_model(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  MatrixXd x(20, 1);
  VectorXd y(20);
  for (Index i = 0; i < 20; ++i) {
    x(i, 0) = u(rng);
    y(i) = -(x(i, 0) - 0.7) * (x(i, 0) - 0.7);
  }
  return fit_mle(GpDataset(x, y), 3, seed);
}

TEST(ProposeNext, EmptyModelFallsBackToRandomSampling) {
  const SearchSpace space = SearchSpace::preset("localisation-wifi");
  const auto dim = static_cast<Index>(space.encoded_dim());
  const GpModel m = GpModel::empty(dim, KernelParams::defaults(dim));
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    Rng rng(seed);
    EXPECT_EQ(propose_next(m, space, {}, std::nullopt, seed), sample_random(space, rng));
  }
}

TEST(ProposeNext, FindsTheBowlOptimum) {
  const SearchSpace space = unit_line();
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const GpModel m = bowl_model(seed);
    const double proposed = propose_next(m, space, {}, std::nullopt, seed).real("x");
    // Grid-search oracle over 1001 points of the same EI surface.
    MatrixXd grid(1001, 1);
    for (Index i = 0; i <= 1000; ++i) grid(i, 0) = static_cast<double>(i) / 1000.0;
    const VectorXd ei = expected_improvement_batch(m, grid, m.dataset().outputs.maxCoeff());
    Index best = 0;
    ei.maxCoeff(&best);
    EXPECT_NEAR(proposed, grid(best, 0), 0.15);
    if (std::abs(proposed - 0.7) <= 0.15) ++hits;
  }
  EXPECT_GE(hits, 8);
}

TEST(ProposeNext, NeverReturnsAPendingPoint) {
  const SearchSpace space({{"n", IntegerRange{0, 3}},
                           {"c", Choices{{"a", "b"}}}});
  const auto dim = static_cast<Index>(space.encoded_dim());
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    // A model whose optimum sits on a grid point, which is then made pending.
    MatrixXd x(3, dim);
    VectorXd y(3);
    Rng rng(seed);
    for (Index i = 0; i < 3; ++i) {
      x.row(i) = encode(space, sample_random(space, rng)).transpose();
      y(i) = static_cast<double>(i);
    }
    KernelParams p = KernelParams::defaults(dim);
    const GpModel m = GpModel::build(GpDataset(x, y), p);
    const HyperConfig first = propose_next(m, space, {}, std::nullopt, seed);
    const std::vector<VectorXd> pending{encode(space, first)};
    const HyperConfig second = propose_next(m, space, pending, std::nullopt, seed);
    EXPECT_FALSE(encode(space, second) == pending.front()) << "seed " << seed;
  }
}

TEST(ProposeNext, AppendsTheFidelityCoordinate) {
  const SearchSpace space = unit_line();
  MatrixXd x(3, 2);
  x << 0.1, 1.0, 0.5, 1.0, 0.9, 0.2;
  const GpModel m = GpModel::build(GpDataset(x, VectorXd::LinSpaced(3, 0.0, 1.0)),
                                   KernelParams::defaults(2));
  const HyperConfig c = propose_next(m, space, {}, 1.0, 3);
  EXPECT_GE(c.real("x"), 0.0);
  EXPECT_LE(c.real("x"), 1.0);
}

}  // namespace
}  // namespace locbo
