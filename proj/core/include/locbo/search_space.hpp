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

// Mixed continuous / integer / categorical hyperparameter spaces and their
// encoding into the unit hypercube seen by the surrogate.

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "locbo/rng.hpp"

namespace locbo {

enum class Scale { linear, log10 };

struct ContinuousRange {
  double lo = 0.0;
  double hi = 1.0;
  Scale scale = Scale::linear;
};

struct IntegerRange {
  std::int64_t lo = 0;
  std::int64_t hi = 1;
};

struct Choices {
  std::vector<std::string> values;
};

struct ParamSpec {
  std::string name;
  std::variant<ContinuousRange, IntegerRange, Choices> kind;

  // Number of encoded coordinates this parameter occupies.
  std::size_t encoded_width() const;
};

using ParamValue = std::variant<double, std::int64_t, std::string>;

// One concrete assignment, keyed by parameter name.
class HyperConfig {
 public:
  HyperConfig() = default;

  void set(const std::string& name, ParamValue value) { values_[name] = std::move(value); }
  bool contains(const std::string& name) const { return values_.contains(name); }
  const ParamValue& at(const std::string& name) const;

  double real(const std::string& name) const;
  std::int64_t integer(const std::string& name) const;
  const std::string& choice(const std::string& name) const;

  const std::map<std::string, ParamValue>& values() const noexcept { return values_; }
  bool operator==(const HyperConfig&) const = default;

 private:
  std::map<std::string, ParamValue> values_;
};

std::string format_value(const ParamValue& v);

class SearchSpace {
 public:
  SearchSpace() = default;
  // Validates every spec; throws ConfigError naming the bad parameter.
  explicit SearchSpace(std::vector<ParamSpec> params);

  // Built-in presets: "localisation-wifi" and "localisation-uwb".
  static SearchSpace preset(std::string_view name);

  const std::vector<ParamSpec>& params() const noexcept { return params_; }
  std::size_t encoded_dim() const noexcept { return encoded_dim_; }
  bool empty() const noexcept { return params_.empty(); }
  const ParamSpec* find(std::string_view name) const;

  // Throws InvalidInput if a parameter is missing, unknown or out of range.
  void validate(const HyperConfig& config) const;

 private:
  std::vector<ParamSpec> params_;
  std::size_t encoded_dim_ = 0;
};

// Endpoint margin used by sample_random for continuous parameters.
inline constexpr double kSampleMargin = 1e-9;

Eigen::VectorXd encode(const SearchSpace& space, const HyperConfig& config);
HyperConfig decode(const SearchSpace& space, const Eigen::Ref<const Eigen::VectorXd>& encoded);
HyperConfig sample_random(const SearchSpace& space, Rng& rng);

// Parameter kind as written in config files: continuous / integer / categorical.
std::string_view kind_name(const ParamSpec& spec);

}  // namespace locbo
