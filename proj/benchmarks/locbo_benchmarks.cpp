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

// Micro-benchmarks for the tuner's hot paths: surrogate fitting and
// prediction, the EI proposal search, and one SGD epoch of the network.

#include <random>

#include <benchmark/benchmark.h>

#include "locbo/acquisition.hpp"
#include "locbo/data.hpp"
#include "locbo/gp.hpp"
#include "locbo/mlp.hpp"
#include "locbo/search_space.hpp"

namespace {

using namespace locbo;

GpDataset dataset_for(const SearchSpace& space, Index n, std::uint64_t seed) {
  Rng rng(seed);
  MatrixXd x(n, static_cast<Index>(space.encoded_dim()) + 1);
  VectorXd y(n);
  for (Index i = 0; i < n; ++i) {
    const VectorXd e = encode(space, sample_random(space, rng));
    x.row(i).head(e.size()) = e.transpose();
    x(i, e.size()) = uniform01(rng);
    y(i) = -e.squaredNorm();
  }
  return GpDataset(x, y);
}

void BM_FitMle(benchmark::State& state) {
  const SearchSpace space = SearchSpace::preset("localisation-wifi");
  const GpDataset data = dataset_for(space, state.range(0), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fit_mle(data, 5, 2));
}
BENCHMARK(BM_FitMle)->Arg(10)->Arg(40)->Unit(benchmark::kMillisecond);

void BM_Predict(benchmark::State& state) {
  const SearchSpace space = SearchSpace::preset("localisation-wifi");
  const GpDataset data = dataset_for(space, state.range(0), 3);
  const GpModel m = GpModel::build(data, KernelParams::defaults(data.dim()));
  const VectorXd q = data.inputs.row(0).transpose();
  for (auto _ : state) benchmark::DoNotOptimize(m.predict(q));
}
BENCHMARK(BM_Predict)->Arg(10)->Arg(100);

void BM_ProposeNext(benchmark::State& state) {
  const SearchSpace space = SearchSpace::preset("localisation-wifi");
  const GpDataset data = dataset_for(space, 30, 4);
  const GpModel m = GpModel::build(data, KernelParams::defaults(data.dim()));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(propose_next(m, space, {}, 1.0, seed++));
}
BENCHMARK(BM_ProposeNext)->Unit(benchmark::kMillisecond);

void BM_SgdEpoch(benchmark::State& state) {
  const LocalisationDataset d = generate_synthetic(ScenarioConfig{});
  MlpModel m = MlpModel::initialise({d.feature_count(), state.range(0), state.range(0), 2},
                                    {0.1, 0.1}, 5);
  Rng rng(6);
  for (auto _ : state) benchmark::DoNotOptimize(sgd_epoch(m, d.features, d.labels, 1e-3, 32, rng));
}
BENCHMARK(BM_SgdEpoch)->Arg(32)->Arg(128)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
