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

#include "locbo/search_space.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <set>

#include "locbo/errors.hpp"

namespace locbo {
namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double to_scaled(double v, Scale s) { return s == Scale::log10 ? std::log10(v) : v; }
double from_scaled(double t, Scale s) { return s == Scale::log10 ? std::pow(10.0, t) : t; }

double continuous_from_unit(const ContinuousRange& r, double u) {
  const double lo = to_scaled(r.lo, r.scale);
  const double hi = to_scaled(r.hi, r.scale);
  return std::clamp(from_scaled(lo + u * (hi - lo), r.scale), r.lo, r.hi);
}

const char* type_name(const ParamValue& v) {
  switch (v.index()) {
    case 0: return "real";
    case 1: return "integer";
    default: return "choice";
  }
}

}  // namespace

std::size_t ParamSpec::encoded_width() const {
  if (const auto* c = std::get_if<Choices>(&kind)) return c->values.size();
  return 1;
}

std::string_view kind_name(const ParamSpec& spec) {
  return std::visit(overloaded{[](const ContinuousRange&) { return std::string_view("continuous"); },
                               [](const IntegerRange&) { return std::string_view("integer"); },
                               [](const Choices&) { return std::string_view("categorical"); }},
                    spec.kind);
}

const ParamValue& HyperConfig::at(const std::string& name) const {
  const auto it = values_.find(name);
  if (it == values_.end()) throw InvalidInput("config has no parameter '" + name + "'");
  return it->second;
}

double HyperConfig::real(const std::string& name) const {
  const ParamValue& v = at(name);
  if (const auto* d = std::get_if<double>(&v)) return *d;
  if (const auto* i = std::get_if<std::int64_t>(&v)) return static_cast<double>(*i);
  throw InvalidInput("parameter '" + name + "' is a choice, not a number");
}

std::int64_t HyperConfig::integer(const std::string& name) const {
  const ParamValue& v = at(name);
  if (const auto* i = std::get_if<std::int64_t>(&v)) return *i;
  throw InvalidInput("parameter '" + name + "' is not an integer");
}

const std::string& HyperConfig::choice(const std::string& name) const {
  const ParamValue& v = at(name);
  if (const auto* s = std::get_if<std::string>(&v)) return *s;
  throw InvalidInput("parameter '" + name + "' is not a choice");
}

std::string format_value(const ParamValue& v) {
  return std::visit(overloaded{[](double d) {
                                 char buf[32];
                                 std::snprintf(buf, sizeof buf, "%.17g", d);
                                 return std::string(buf);
                               },
                               [](std::int64_t i) { return std::to_string(i); },
                               [](const std::string& s) { return s; }},
                    v);
}

SearchSpace::SearchSpace(std::vector<ParamSpec> params) : params_(std::move(params)) {
  std::set<std::string> names;
  for (const ParamSpec& p : params_) {
    if (p.name.empty()) throw ConfigError("params", "parameter with empty name");
    if (!names.insert(p.name).second) throw ConfigError(p.name, "duplicate parameter name");
    std::visit(overloaded{
                   [&](const ContinuousRange& r) {
                     if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || !(r.lo < r.hi))
                       throw ConfigError(p.name, "continuous range needs finite lo < hi");
                     if (r.scale == Scale::log10 && !(r.lo > 0.0))
                       throw ConfigError(p.name, "log10 scale needs lo > 0");
                   },
                   [&](const IntegerRange& r) {
                     if (!(r.lo < r.hi)) throw ConfigError(p.name, "integer range needs lo < hi");
                   },
                   [&](const Choices& c) {
                     const std::set<std::string> distinct(c.values.begin(), c.values.end());
                     if (c.values.size() < 2 || distinct.size() != c.values.size())
                       throw ConfigError(p.name, "categorical needs at least 2 distinct choices");
                   }},
               p.kind);
    encoded_dim_ += p.encoded_width();
  }
}

SearchSpace SearchSpace::preset(std::string_view name) {
  const std::vector<std::string> scalings{"L1", "L2", "standardise", "minmax", "none"};
  std::vector<ParamSpec> params{
      {"units1", IntegerRange{12, 256}},
      {"units2", IntegerRange{12, 256}},
      {"dropout1", ContinuousRange{0.0, 0.75, Scale::linear}},
      {"dropout2", ContinuousRange{0.0, 0.75, Scale::linear}},
      {"learning_rate", ContinuousRange{1e-6, 1.0, Scale::log10}},
      {"batch_size", IntegerRange{16, 128}},
  };
  if (name == "localisation-wifi") {
    params.push_back({"pca_count", IntegerRange{1, 7}});
  } else if (name != "localisation-uwb") {
    throw ConfigError("preset", "unknown search-space preset '" + std::string(name) + "'");
  }
  params.push_back({"scaling", Choices{scalings}});
  return SearchSpace(std::move(params));
}

const ParamSpec* SearchSpace::find(std::string_view name) const {
  for (const ParamSpec& p : params_)
    if (p.name == name) return &p;
  return nullptr;
}

void SearchSpace::validate(const HyperConfig& config) const {
  for (const auto& [name, value] : config.values())
    if (find(name) == nullptr) throw InvalidInput("unknown parameter '" + name + "'");
  for (const ParamSpec& p : params_) {
    if (!config.contains(p.name)) throw InvalidInput("missing parameter '" + p.name + "'");
    const ParamValue& v = config.at(p.name);
    const bool ok = std::visit(
        overloaded{[&](const ContinuousRange& r) {
                     const auto* d = std::get_if<double>(&v);
                     return d != nullptr && std::isfinite(*d) && *d >= r.lo && *d <= r.hi;
                   },
                   [&](const IntegerRange& r) {
                     const auto* i = std::get_if<std::int64_t>(&v);
                     return i != nullptr && *i >= r.lo && *i <= r.hi;
                   },
                   [&](const Choices& c) {
                     const auto* s = std::get_if<std::string>(&v);
                     return s != nullptr &&
                            std::find(c.values.begin(), c.values.end(), *s) != c.values.end();
                   }},
        p.kind);
    if (!ok)
      throw InvalidInput("parameter '" + p.name + "' value " + format_value(v) + " (" +
                         type_name(v) + ") is outside its range");
  }
}

Eigen::VectorXd encode(const SearchSpace& space, const HyperConfig& config) {
  space.validate(config);
  Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.encoded_dim()));
  Eigen::Index at = 0;
  for (const ParamSpec& p : space.params()) {
    const ParamValue& v = config.at(p.name);
    std::visit(overloaded{[&](const ContinuousRange& r) {
                            const double lo = to_scaled(r.lo, r.scale);
                            const double hi = to_scaled(r.hi, r.scale);
                            const double u = (to_scaled(std::get<double>(v), r.scale) - lo) / (hi - lo);
                            out(at++) = std::clamp(u, 0.0, 1.0);
                          },
                          [&](const IntegerRange& r) {
                            out(at++) = static_cast<double>(std::get<std::int64_t>(v) - r.lo) /
                                        static_cast<double>(r.hi - r.lo);
                          },
                          [&](const Choices& c) {
                            const auto idx = std::find(c.values.begin(), c.values.end(),
                                                       std::get<std::string>(v)) -
                                             c.values.begin();
                            out(at + idx) = 1.0;
                            at += static_cast<Eigen::Index>(c.values.size());
                          }},
               p.kind);
  }
  return out;
}

HyperConfig decode(const SearchSpace& space, const Eigen::Ref<const Eigen::VectorXd>& encoded) {
  if (static_cast<std::size_t>(encoded.size()) != space.encoded_dim())
    throw InvalidInput("decode: vector length does not match the encoded dimension");
  if (!encoded.allFinite()) throw InvalidInput("decode: non-finite entry");
  HyperConfig config;
  Eigen::Index at = 0;
  for (const ParamSpec& p : space.params()) {
    std::visit(overloaded{[&](const ContinuousRange& r) {
                            const double u = std::clamp(encoded(at++), 0.0, 1.0);
                            config.set(p.name, continuous_from_unit(r, u));
                          },
                          [&](const IntegerRange& r) {
                            const double u = std::clamp(encoded(at++), 0.0, 1.0);
                            const auto step = std::llround(u * static_cast<double>(r.hi - r.lo));
                            config.set(p.name, std::clamp<std::int64_t>(r.lo + step, r.lo, r.hi));
                          },
                          [&](const Choices& c) {
                            std::size_t best = 0;
                            for (std::size_t i = 1; i < c.values.size(); ++i)
                              if (encoded(at + static_cast<Eigen::Index>(i)) >
                                  encoded(at + static_cast<Eigen::Index>(best)))
                                best = i;
                            config.set(p.name, c.values[best]);
                            at += static_cast<Eigen::Index>(c.values.size());
                          }},
               p.kind);
  }
  return config;
}

HyperConfig sample_random(const SearchSpace& space, Rng& rng) {
  HyperConfig config;
  for (const ParamSpec& p : space.params()) {
    std::visit(overloaded{[&](const ContinuousRange& r) {
                            const double u = kSampleMargin + uniform01(rng) * (1.0 - 2.0 * kSampleMargin);
                            config.set(p.name, continuous_from_unit(r, u));
                          },
                          [&](const IntegerRange& r) {
                            std::uniform_int_distribution<std::int64_t> dist(r.lo, r.hi);
                            config.set(p.name, dist(rng));
                          },
                          [&](const Choices& c) {
                            std::uniform_int_distribution<std::size_t> dist(0, c.values.size() - 1);
                            config.set(p.name, c.values[dist(rng)]);
                          }},
               p.kind);
  }
  return config;
}

}  // namespace locbo
