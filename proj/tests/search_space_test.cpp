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
#include <map>

#include <gtest/gtest.h>

#include "locbo/errors.hpp"
#include "locbo/search_space.hpp"

namespace locbo {
namespace {

using Eigen::Index;
using Eigen::VectorXd;

const SearchSpace& wifi() {
  static const SearchSpace s = SearchSpace::preset("localisation-wifi");
  return s;
}

// Offset of a parameter's block within the encoded vector.
Index offset_of(const SearchSpace& s, const std::string& name) {
  std::size_t off = 0;
  for (const ParamSpec& p : s.params()) {
    if (p.name == name) return static_cast<Index>(off);
    off += p.encoded_width();
  }
  return -1;
}

HyperConfig base_config() {
  Rng rng(1);
  return sample_random(wifi(), rng);
}

TEST(Encode, LogLearningRateEndpoints) {
  HyperConfig c = base_config();
  const Index j = offset_of(wifi(), "learning_rate");
  c.set("learning_rate", 1e-6);
  EXPECT_NEAR(encode(wifi(), c)(j), 0.0, 1e-15);
  c.set("learning_rate", 1.0);
  EXPECT_NEAR(encode(wifi(), c)(j), 1.0, 1e-15);
  c.set("learning_rate", 1e-3);
  EXPECT_NEAR(encode(wifi(), c)(j), 0.5, 1e-15);
}

TEST(Encode, IntegerEndpoints) {
  HyperConfig c = base_config();
  const Index j = offset_of(wifi(), "units1");
  c.set("units1", std::int64_t{12});
  EXPECT_EQ(encode(wifi(), c)(j), 0.0);
  c.set("units1", std::int64_t{256});
  EXPECT_EQ(encode(wifi(), c)(j), 1.0);
}

TEST(Encode, OneHotCategorical) {
  HyperConfig c = base_config();
  c.set("scaling", std::string("minmax"));
  const VectorXd v = encode(wifi(), c);
  const Index j = offset_of(wifi(), "scaling");
  ASSERT_EQ(wifi().find("scaling")->encoded_width(), 5U);
  EXPECT_EQ(v.segment(j, 5), (VectorXd(5) << 0, 0, 0, 1, 0).finished());
}

TEST(Encode, EverythingInUnitCube) {
  Rng rng(3);
  for (int i = 0; i < 200; ++i) {
    const VectorXd v = encode(wifi(), sample_random(wifi(), rng));
    EXPECT_GE(v.minCoeff(), 0.0);
    EXPECT_LE(v.maxCoeff(), 1.0);
  }
}

TEST(Decode, RoundTripsFuzzedConfigs) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const HyperConfig c = sample_random(wifi(), rng);
    const HyperConfig back = decode(wifi(), encode(wifi(), c));
    for (const ParamSpec& p : wifi().params()) {
      if (std::holds_alternative<ContinuousRange>(p.kind)) {
        const double a = c.real(p.name), b = back.real(p.name);
        EXPECT_NEAR(a, b, 1e-12 * std::max(1.0, std::abs(a))) << p.name;
      } else {
        EXPECT_EQ(c.at(p.name), back.at(p.name)) << p.name;
      }
    }
  }
}

TEST(Decode, IntegerMidpoint) {
  VectorXd v = encode(wifi(), base_config());
  v(offset_of(wifi(), "batch_size")) = 0.5;
  EXPECT_EQ(decode(wifi(), v).integer("batch_size"), 16 + std::llround(0.5 * 112));
  EXPECT_EQ(decode(wifi(), v).integer("batch_size"), 72);
}

TEST(Decode, CategoricalTieGoesToLowerIndex) {
  VectorXd v = encode(wifi(), base_config());
  v.segment(offset_of(wifi(), "scaling"), 5) << 0.3, 0.3, 0.2, 0.1, 0.1;
  EXPECT_EQ(decode(wifi(), v).choice("scaling"), "L1");
}

TEST(Decode, ClampsOutOfRangeCoordinates) {
  VectorXd v = encode(wifi(), base_config());
  v(offset_of(wifi(), "units1")) = 1.7;
  v(offset_of(wifi(), "dropout1")) = -0.2;
  const HyperConfig c = decode(wifi(), v);
  EXPECT_EQ(c.integer("units1"), 256);
  EXPECT_EQ(c.real("dropout1"), 0.0);
}

TEST(Decode, RejectsWrongLength) {
  EXPECT_THROW(decode(wifi(), VectorXd::Zero(3)), InvalidInput);
}

TEST(SampleRandom, LogUniformLearningRate) {
  Rng rng(21);
  int below = 0;
  const int n = 10000;
  for (int i = 0; i < n; ++i) {
    const double lr = sample_random(wifi(), rng).real("learning_rate");
    ASSERT_GT(lr, 1e-6);
    ASSERT_LT(lr, 1.0);
    if (lr < 1e-3) ++below;
  }
  EXPECT_NEAR(static_cast<double>(below) / n, 0.5, 0.02);
}

TEST(SampleRandom, UniformBatchSize) {
  Rng rng(22);
  const int n = 10000;
  std::map<std::int64_t, int> counts;
  for (int i = 0; i < n; ++i) ++counts[sample_random(wifi(), rng).integer("batch_size")];
  EXPECT_EQ(counts.size(), 113U);
  const double p = 1.0 / 113.0;
  const double sigma = std::sqrt(n * p * (1.0 - p));
  for (const auto& [value, count] : counts) EXPECT_NEAR(count, n * p, 5.0 * sigma) << value;
}

TEST(SampleRandom, DeterministicPerSeed) {
  Rng a(5), b(5);
  for (int i = 0; i < 10; ++i) EXPECT_EQ(sample_random(wifi(), a), sample_random(wifi(), b));
}

TEST(SearchSpace, PresetsDifferInPca) {
  EXPECT_NE(wifi().find("pca_count"), nullptr);
  EXPECT_EQ(SearchSpace::preset("localisation-uwb").find("pca_count"), nullptr);
  EXPECT_THROW(SearchSpace::preset("nope"), ConfigError);
}

TEST(SearchSpace, RejectsBadSpecs) {
  EXPECT_THROW(SearchSpace({{"a", ContinuousRange{1.0, 0.0}}}), ConfigError);
  EXPECT_THROW(SearchSpace({{"a", ContinuousRange{0.0, 1.0, Scale::log10}}}), ConfigError);
  EXPECT_THROW(SearchSpace({{"a", IntegerRange{3, 3}}}), ConfigError);
  EXPECT_THROW(SearchSpace({{"a", Choices{{"x"}}}}), ConfigError);
  EXPECT_THROW(SearchSpace({{"a", IntegerRange{0, 1}}, {"a", IntegerRange{0, 1}}}), ConfigError);
}

TEST(SearchSpace, ValidateCatchesMissingAndOutOfRange) {
  HyperConfig c = base_config();
  c.set("units1", std::int64_t{1000});
  EXPECT_THROW(wifi().validate(c), InvalidInput);
  HyperConfig d = base_config();
  d.set("extra", 1.0);
  EXPECT_THROW(wifi().validate(d), InvalidInput);
}

}  // namespace
}  // namespace locbo
