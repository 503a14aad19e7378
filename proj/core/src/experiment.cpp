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

#include "locbo/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "locbo/errors.hpp"
#include "locbo/rng.hpp"
#include "locbo/text_io.hpp"

namespace locbo {
namespace {

namespace fs = std::filesystem;

std::string join_field(const std::string& prefix, const std::string& key) {
  return prefix.empty() ? key : prefix + "." + key;
}

void require_map(const YAML::Node& node, const std::string& field) {
  if (!node.IsMap()) throw ConfigError(field.empty() ? "<root>" : field, "expected a mapping");
}

void reject_unknown(const YAML::Node& node, const std::string& prefix,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& kv : node) {
    const auto key = kv.first.as<std::string>();
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
      throw ConfigError(join_field(prefix, key), "unknown key");
  }
}

template <typename T>
T scalar(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(field, "invalid value");
  }
}

template <typename T>
void read_opt(const YAML::Node& parent, const std::string& prefix, const char* key, T& out) {
  if (const YAML::Node n = parent[key]) out = scalar<T>(n, join_field(prefix, key));
}

FeatureLayout layout_from_string(const std::string& s) {
  if (s == "wifi7") return FeatureLayout::wifi7;
  if (s == "full") return FeatureLayout::full;
  throw ConfigError("layout", "expected wifi7 or full, got '" + s + "'");
}

std::string_view layout_name(FeatureLayout l) { return l == FeatureLayout::wifi7 ? "wifi7" : "full"; }

void read_scenario(const YAML::Node& node, ScenarioConfig& sc) {
  const std::string p = "dataset.synthetic";
  require_map(node, p);
  reject_unknown(node, p, {"samples", "seed", "layout", "room", "access_points", "trajectory",
                           "noise", "path_loss"});
  read_opt(node, p, "samples", sc.samples);
  read_opt(node, p, "seed", sc.seed);
  if (const YAML::Node n = node["layout"]) sc.layout = layout_from_string(scalar<std::string>(n, p));
  if (const YAML::Node room = node["room"]) {
    require_map(room, "room");
    reject_unknown(room, "room", {"width_m", "height_m"});
    read_opt(room, "room", "width_m", sc.width_m);
    read_opt(room, "room", "height_m", sc.height_m);
  }
  if (const YAML::Node aps = node["access_points"]) {
    if (!aps.IsSequence()) throw ConfigError("access_points", "expected a list of [x, y] pairs");
    sc.access_points.clear();
    for (const YAML::Node& ap : aps) {
      if (!ap.IsSequence() || ap.size() != 2)
        throw ConfigError("access_points", "each entry must be [x, y]");
      sc.access_points.emplace_back(scalar<double>(ap[0], "access_points"),
                                    scalar<double>(ap[1], "access_points"));
    }
  }
  if (const YAML::Node t = node["trajectory"]) {
    require_map(t, "trajectory");
    reject_unknown(t, "trajectory", {"a", "b", "fill"});
    read_opt(t, "trajectory", "a", sc.lissajous_a);
    read_opt(t, "trajectory", "b", sc.lissajous_b);
    read_opt(t, "trajectory", "fill", sc.trajectory_fill);
  }
  if (const YAML::Node n = node["noise"]) {
    require_map(n, "noise");
    reject_unknown(n, "noise", {"range_sd_m", "angle_sd_rad", "shadowing_sd_db", "multipath_prob",
                                "multipath_scale"});
    read_opt(n, "noise", "range_sd_m", sc.range_sd_m);
    read_opt(n, "noise", "angle_sd_rad", sc.angle_sd_rad);
    read_opt(n, "noise", "shadowing_sd_db", sc.shadowing_sd_db);
    read_opt(n, "noise", "multipath_prob", sc.multipath_prob);
    read_opt(n, "noise", "multipath_scale", sc.multipath_scale);
  }
  if (const YAML::Node n = node["path_loss"]) {
    require_map(n, "path_loss");
    reject_unknown(n, "path_loss", {"exponent", "reference_distance_m", "reference_power_dbm"});
    read_opt(n, "path_loss", "exponent", sc.path_loss_exponent);
    read_opt(n, "path_loss", "reference_distance_m", sc.reference_distance_m);
    read_opt(n, "path_loss", "reference_power_dbm", sc.reference_power_dbm);
  }
}

ParamSpec read_param(const YAML::Node& node, std::size_t i) {
  const std::string where = "space.params[" + std::to_string(i) + "]";
  require_map(node, where);
  reject_unknown(node, where, {"name", "type", "lo", "hi", "scale", "choices"});
  if (!node["name"] || !node["type"]) throw ConfigError(where, "needs 'name' and 'type'");
  ParamSpec spec;
  spec.name = scalar<std::string>(node["name"], where + ".name");
  const auto type = scalar<std::string>(node["type"], where + ".type");
  const std::string at = spec.name;
  if (type == "continuous") {
    if (!node["lo"] || !node["hi"]) throw ConfigError(at, "continuous needs lo and hi");
    ContinuousRange r{scalar<double>(node["lo"], at + ".lo"), scalar<double>(node["hi"], at + ".hi"),
                      Scale::linear};
    if (const YAML::Node s = node["scale"]) {
      const auto scale = scalar<std::string>(s, at + ".scale");
      if (scale == "log10") r.scale = Scale::log10;
      else if (scale != "linear") throw ConfigError(at + ".scale", "expected linear or log10");
    }
    spec.kind = r;
  } else if (type == "integer") {
    if (!node["lo"] || !node["hi"]) throw ConfigError(at, "integer needs lo and hi");
    spec.kind = IntegerRange{scalar<std::int64_t>(node["lo"], at + ".lo"),
                             scalar<std::int64_t>(node["hi"], at + ".hi")};
  } else if (type == "categorical") {
    const YAML::Node c = node["choices"];
    if (!c || !c.IsSequence()) throw ConfigError(at + ".choices", "expected a list");
    Choices ch;
    for (const YAML::Node& v : c) ch.values.push_back(scalar<std::string>(v, at + ".choices"));
    spec.kind = std::move(ch);
  } else {
    throw ConfigError(where + ".type", "expected continuous, integer or categorical");
  }
  return spec;
}

SearchSpace read_space(const YAML::Node& node, std::string& preset_name) {
  require_map(node, "space");
  reject_unknown(node, "space", {"preset", "params"});
  if (node["preset"] && node["params"]) throw ConfigError("space", "give either preset or params");
  if (const YAML::Node p = node["preset"]) {
    preset_name = scalar<std::string>(p, "space.preset");
    return SearchSpace::preset(preset_name);
  }
  const YAML::Node params = node["params"];
  if (!params || !params.IsSequence()) throw ConfigError("space.params", "expected a list");
  std::vector<ParamSpec> specs;
  for (std::size_t i = 0; i < params.size(); ++i) specs.push_back(read_param(params[i], i));
  preset_name.clear();
  return SearchSpace(std::move(specs));
}

void emit_space(YAML::Emitter& out, const SearchSpace& space) {
  out << YAML::Key << "params" << YAML::Value << YAML::BeginSeq;
  for (const ParamSpec& p : space.params()) {
    out << YAML::BeginMap << YAML::Key << "name" << YAML::Value << p.name;
    out << YAML::Key << "type" << YAML::Value << std::string(kind_name(p));
    if (const auto* c = std::get_if<ContinuousRange>(&p.kind)) {
      out << YAML::Key << "lo" << YAML::Value << format_double(c->lo);
      out << YAML::Key << "hi" << YAML::Value << format_double(c->hi);
      out << YAML::Key << "scale" << YAML::Value
          << (c->scale == Scale::log10 ? "log10" : "linear");
    } else if (const auto* r = std::get_if<IntegerRange>(&p.kind)) {
      out << YAML::Key << "lo" << YAML::Value << r->lo;
      out << YAML::Key << "hi" << YAML::Value << r->hi;
    } else {
      out << YAML::Key << "choices" << YAML::Value << YAML::Flow
          << std::get<Choices>(p.kind).values;
    }
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;
}

YAML::Node parse_yaml(std::string_view text) {
  try {
    return YAML::Load(std::string(text));
  } catch (const YAML::Exception& e) {
    throw ConfigError("<yaml>", e.what());
  }
}

std::string fmt_opt(const std::optional<double>& v) { return v ? format_double(*v) : ""; }

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

}  // namespace

void ExperimentConfig::validate() const {
  if (synthetic.has_value() == csv.has_value())
    throw ConfigError("dataset", "exactly one of synthetic or csv is required");
  if (synthetic) synthetic->validate();
  if (!(split.train > 0.0 && split.val > 0.0 && split.test >= 0.0) ||
      std::abs(split.train + split.val + split.test - 1.0) > 1e-9)
    throw ConfigError("split", "train and val must be > 0, test >= 0, and the three sum to 1");
  if (space.empty()) throw ConfigError("space", "search space is empty");
  TunerSettings probe = tuner;
  probe.validate();
  if (seeds.empty()) throw ConfigError("tuner.seeds", "needs at least one seed");
  if (methods.empty()) throw ConfigError("tuner.methods", "needs at least one method");
  std::set<std::string> seen;
  for (const std::string& m : methods) {
    if (m != "bo" && m != "rs") throw ConfigError("tuner.methods", "unknown method '" + m + "'");
    if (!seen.insert(m).second) throw ConfigError("tuner.methods", "duplicate method '" + m + "'");
  }
  if (final_epochs < 0) throw ConfigError("final_epochs", "must be >= 0");
  if (output.empty()) throw ConfigError("output", "must not be empty");
}

ExperimentConfig ExperimentConfig::preset(std::string_view name) {
  ExperimentConfig cfg;
  cfg.name = std::string(name);
  cfg.space_preset = std::string(name);
  cfg.space = SearchSpace::preset(name);
  cfg.seeds.resize(10);
  std::iota(cfg.seeds.begin(), cfg.seeds.end(), std::uint64_t{1});
  cfg.final_epochs = 200;
  cfg.output = fs::path("runs") / std::string(name);
  cfg.synthetic = ScenarioConfig{};
  if (name == "localisation-wifi") {
    cfg.tuner.budget_s = 200.0;
    cfg.synthetic->layout = FeatureLayout::wifi7;
  } else {
    cfg.tuner.budget_s = 1000.0;
    cfg.synthetic->layout = FeatureLayout::full;
  }
  return cfg;
}

ExperimentConfig parse_experiment(std::string_view yaml, const fs::path& base_dir) {
  const YAML::Node root = parse_yaml(yaml);
  ExperimentConfig cfg;
  if (!root || root.IsNull()) return cfg;
  require_map(root, "");
  reject_unknown(root, "", {"name", "preset", "dataset", "split", "space", "tuner", "fidelity",
                            "final_epochs", "output"});
  if (const YAML::Node p = root["preset"]) cfg = ExperimentConfig::preset(scalar<std::string>(p, "preset"));
  read_opt(root, "", "name", cfg.name);

  if (const YAML::Node ds = root["dataset"]) {
    require_map(ds, "dataset");
    reject_unknown(ds, "dataset", {"synthetic", "csv"});
    if (ds["synthetic"] && ds["csv"])
      throw ConfigError("dataset", "exactly one of synthetic or csv is required");
    if (const YAML::Node syn = ds["synthetic"]) {
      ScenarioConfig sc = cfg.synthetic.value_or(ScenarioConfig{});
      if (!syn.IsNull()) read_scenario(syn, sc);
      cfg.synthetic = sc;
      cfg.csv.reset();
    } else if (const YAML::Node c = ds["csv"]) {
      fs::path path = scalar<std::string>(c, "dataset.csv");
      if (path.is_relative() && !base_dir.empty()) path = base_dir / path;
      cfg.csv = path;
      cfg.synthetic.reset();
    }
  }
  if (const YAML::Node s = root["split"]) {
    require_map(s, "split");
    reject_unknown(s, "split", {"train", "val", "test", "seed"});
    read_opt(s, "split", "train", cfg.split.train);
    read_opt(s, "split", "val", cfg.split.val);
    read_opt(s, "split", "test", cfg.split.test);
    read_opt(s, "split", "seed", cfg.split_seed);
  }
  if (const YAML::Node s = root["space"]) cfg.space = read_space(s, cfg.space_preset);
  if (const YAML::Node t = root["tuner"]) {
    const std::string p = "tuner";
    require_map(t, p);
    reject_unknown(t, p, {"budget_s", "max_trials", "workers", "init_trials", "seeds", "methods",
                          "median_stopping", "gp_restarts", "clock", "epoch_seconds",
                          "candidates", "local_top_k", "local_steps", "local_sigma"});
    read_opt(t, p, "budget_s", cfg.tuner.budget_s);
    read_opt(t, p, "max_trials", cfg.tuner.max_trials);
    read_opt(t, p, "workers", cfg.tuner.workers);
    read_opt(t, p, "init_trials", cfg.tuner.init_trials);
    read_opt(t, p, "median_stopping", cfg.tuner.median_stopping);
    read_opt(t, p, "gp_restarts", cfg.tuner.gp_restarts);
    read_opt(t, p, "epoch_seconds", cfg.tuner.epoch_seconds);
    read_opt(t, p, "candidates", cfg.tuner.proposal.candidates);
    read_opt(t, p, "local_top_k", cfg.tuner.proposal.top_k);
    read_opt(t, p, "local_steps", cfg.tuner.proposal.local_steps);
    read_opt(t, p, "local_sigma", cfg.tuner.proposal.local_sigma);
    if (const YAML::Node c = t["clock"]) {
      const auto clock = scalar<std::string>(c, "tuner.clock");
      if (clock == "wall") cfg.tuner.clock = ClockMode::wall;
      else if (clock == "epochs") cfg.tuner.clock = ClockMode::epochs;
      else throw ConfigError("tuner.clock", "expected wall or epochs");
    }
    if (const YAML::Node s = t["seeds"]) cfg.seeds = scalar<std::vector<std::uint64_t>>(s, "tuner.seeds");
    if (const YAML::Node m = t["methods"]) cfg.methods = scalar<std::vector<std::string>>(m, "tuner.methods");
  }
  if (const YAML::Node f = root["fidelity"]) {
    require_map(f, "fidelity");
    reject_unknown(f, "fidelity", {"min_epochs", "max_epochs", "warmup_trials", "grace_epochs"});
    read_opt(f, "fidelity", "min_epochs", cfg.tuner.fidelity.min_epochs);
    read_opt(f, "fidelity", "max_epochs", cfg.tuner.fidelity.max_epochs);
    read_opt(f, "fidelity", "warmup_trials", cfg.tuner.fidelity.warmup_trials);
    read_opt(f, "fidelity", "grace_epochs", cfg.tuner.fidelity.grace_epochs);
  }
  read_opt(root, "", "final_epochs", cfg.final_epochs);
  if (const YAML::Node o = root["output"]) cfg.output = scalar<std::string>(o, "output");
  cfg.validate();
  return cfg;
}

ExperimentConfig load_experiment(const fs::path& path) {
  return parse_experiment(read_file(path), path.parent_path());
}

std::string scenario_to_yaml(const ScenarioConfig& sc) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << sc.samples;
  out << YAML::Key << "seed" << YAML::Value << sc.seed;
  out << YAML::Key << "layout" << YAML::Value << std::string(layout_name(sc.layout));
  out << YAML::Key << "room" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "width_m" << YAML::Value << format_double(sc.width_m);
  out << YAML::Key << "height_m" << YAML::Value << format_double(sc.height_m) << YAML::EndMap;
  out << YAML::Key << "access_points" << YAML::Value << YAML::BeginSeq;
  for (const Eigen::Vector2d& ap : sc.resolved_access_points())
    out << YAML::Flow << YAML::BeginSeq << format_double(ap.x()) << format_double(ap.y())
        << YAML::EndSeq;
  out << YAML::EndSeq;
  out << YAML::Key << "trajectory" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "a" << YAML::Value << format_double(sc.lissajous_a);
  out << YAML::Key << "b" << YAML::Value << format_double(sc.lissajous_b);
  out << YAML::Key << "fill" << YAML::Value << format_double(sc.trajectory_fill) << YAML::EndMap;
  out << YAML::Key << "noise" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "range_sd_m" << YAML::Value << format_double(sc.range_sd_m);
  out << YAML::Key << "angle_sd_rad" << YAML::Value << format_double(sc.angle_sd_rad);
  out << YAML::Key << "shadowing_sd_db" << YAML::Value << format_double(sc.shadowing_sd_db);
  out << YAML::Key << "multipath_prob" << YAML::Value << format_double(sc.multipath_prob);
  out << YAML::Key << "multipath_scale" << YAML::Value << format_double(sc.multipath_scale)
      << YAML::EndMap;
  out << YAML::Key << "path_loss" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "exponent" << YAML::Value << format_double(sc.path_loss_exponent);
  out << YAML::Key << "reference_distance_m" << YAML::Value
      << format_double(sc.reference_distance_m);
  out << YAML::Key << "reference_power_dbm" << YAML::Value
      << format_double(sc.reference_power_dbm) << YAML::EndMap;
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string experiment_to_yaml(const ExperimentConfig& cfg) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << cfg.name;
  out << YAML::Key << "dataset" << YAML::Value << YAML::BeginMap;
  if (cfg.synthetic) {
    out << YAML::Key << "synthetic" << YAML::Value << YAML::Load(scenario_to_yaml(*cfg.synthetic));
  } else {
    out << YAML::Key << "csv" << YAML::Value << cfg.csv->string();
  }
  out << YAML::EndMap;
  out << YAML::Key << "split" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "train" << YAML::Value << format_double(cfg.split.train);
  out << YAML::Key << "val" << YAML::Value << format_double(cfg.split.val);
  out << YAML::Key << "test" << YAML::Value << format_double(cfg.split.test);
  out << YAML::Key << "seed" << YAML::Value << cfg.split_seed << YAML::EndMap;
  out << YAML::Key << "space" << YAML::Value << YAML::BeginMap;
  if (!cfg.space_preset.empty())
    out << YAML::Key << "preset" << YAML::Value << cfg.space_preset;
  else
    emit_space(out, cfg.space);
  out << YAML::EndMap;
  const TunerSettings& t = cfg.tuner;
  out << YAML::Key << "tuner" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "budget_s" << YAML::Value << format_double(t.budget_s);
  out << YAML::Key << "max_trials" << YAML::Value << t.max_trials;
  out << YAML::Key << "workers" << YAML::Value << t.workers;
  out << YAML::Key << "init_trials" << YAML::Value << t.init_trials;
  out << YAML::Key << "seeds" << YAML::Value << YAML::Flow << cfg.seeds;
  out << YAML::Key << "methods" << YAML::Value << YAML::Flow << cfg.methods;
  out << YAML::Key << "median_stopping" << YAML::Value << t.median_stopping;
  out << YAML::Key << "gp_restarts" << YAML::Value << t.gp_restarts;
  out << YAML::Key << "clock" << YAML::Value << (t.clock == ClockMode::wall ? "wall" : "epochs");
  out << YAML::Key << "epoch_seconds" << YAML::Value << format_double(t.epoch_seconds);
  out << YAML::Key << "candidates" << YAML::Value << t.proposal.candidates;
  out << YAML::Key << "local_top_k" << YAML::Value << t.proposal.top_k;
  out << YAML::Key << "local_steps" << YAML::Value << t.proposal.local_steps;
  out << YAML::Key << "local_sigma" << YAML::Value << format_double(t.proposal.local_sigma);
  out << YAML::EndMap;
  out << YAML::Key << "fidelity" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "min_epochs" << YAML::Value << t.fidelity.min_epochs;
  out << YAML::Key << "max_epochs" << YAML::Value << t.fidelity.max_epochs;
  out << YAML::Key << "warmup_trials" << YAML::Value << t.fidelity.warmup_trials;
  out << YAML::Key << "grace_epochs" << YAML::Value << t.fidelity.grace_epochs << YAML::EndMap;
  out << YAML::Key << "final_epochs" << YAML::Value << cfg.final_epochs;
  out << YAML::Key << "output" << YAML::Value << cfg.output.string();
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string space_to_yaml(const SearchSpace& space) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  emit_space(out, space);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

SearchSpace space_from_yaml(std::string_view yaml) {
  std::string preset;
  return read_space(parse_yaml(yaml), preset);
}

std::string config_to_yaml(const SearchSpace& space, const HyperConfig& config,
                           std::optional<double> validation_error_m) {
  space.validate(config);
  YAML::Emitter out;
  out << YAML::BeginMap << YAML::Key << "config" << YAML::Value << YAML::BeginMap;
  for (const ParamSpec& p : space.params())
    out << YAML::Key << p.name << YAML::Value << format_value(config.at(p.name));
  out << YAML::EndMap;
  if (validation_error_m)
    out << YAML::Key << "validation_error_m" << YAML::Value << format_double(*validation_error_m);
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

HyperConfig config_from_yaml(const SearchSpace& space, std::string_view yaml) {
  const YAML::Node root = parse_yaml(yaml);
  require_map(root, "");
  const YAML::Node node = root["config"];
  if (!node || !node.IsMap()) throw ConfigError("config", "expected a mapping of parameter values");
  HyperConfig config;
  for (const auto& kv : node) {
    const auto name = kv.first.as<std::string>();
    const ParamSpec* p = space.find(name);
    if (p == nullptr) throw ConfigError("config." + name, "not in the search space");
    const std::string field = "config." + name;
    if (std::holds_alternative<ContinuousRange>(p->kind))
      config.set(name, scalar<double>(kv.second, field));
    else if (std::holds_alternative<IntegerRange>(p->kind))
      config.set(name, scalar<std::int64_t>(kv.second, field));
    else
      config.set(name, scalar<std::string>(kv.second, field));
  }
  try {
    space.validate(config);
  } catch (const InvalidInput& e) {
    throw ConfigError("config", e.what());
  }
  return config;
}

LocalisationDataset load_dataset(const ExperimentConfig& cfg) {
  LocalisationDataset data = cfg.synthetic ? generate_synthetic(*cfg.synthetic) : load_csv(*cfg.csv);
  return split(std::move(data), cfg.split, cfg.split_seed);
}

std::string run_stem(std::string_view method, std::uint64_t seed) {
  return std::string(method) + "_seed" + std::to_string(seed);
}

std::string final_row_csv(const FinalRow& row) {
  return "method,seed,train_m,val_m,test_m\n" + row.method + "," + std::to_string(row.seed) + "," +
         format_double(row.train_m) + "," + format_double(row.val_m) + "," + fmt_opt(row.test_m) +
         "\n";
}

std::vector<FinalRow> read_final_csv(const fs::path& path) {
  std::istringstream in(read_file(path));
  std::string line;
  if (!std::getline(in, line) || line.rfind("method,seed,train_m,val_m,test_m", 0) != 0)
    throw InvalidInput(path.string() + ": missing results header");
  std::vector<FinalRow> rows;
  for (int ln = 2; std::getline(in, line); ++ln) {
    if (line.empty() || line == "\r") continue;
    const std::string where = path.string() + " line " + std::to_string(ln);
    const auto f = split_fields(line);
    if (f.size() != 5) throw InvalidInput(where + ": expected 5 columns");
    FinalRow r;
    r.method = std::string(f[0]);
    r.seed = static_cast<std::uint64_t>(parse_integer(f[1], where));
    r.train_m = parse_double(f[2], where);
    r.val_m = parse_double(f[3], where);
    if (!f[4].empty() && f[4] != "\r") r.test_m = parse_double(f[4], where);
    rows.push_back(std::move(r));
  }
  return rows;
}

fs::path cmd_generate(const ExperimentConfig& cfg, const fs::path& out) {
  if (!cfg.synthetic) throw ConfigError("dataset", "generate needs a synthetic scenario");
  cfg.synthetic->validate();
  const fs::path csv = out / "dataset.csv";
  save_csv(generate_synthetic(*cfg.synthetic), csv);
  write_file(out / "scenario.yaml", scenario_to_yaml(*cfg.synthetic));
  return csv;
}

namespace {

FinalRow write_final(const FinalModel& fm, std::string_view method, std::uint64_t seed,
                     const fs::path& stem) {
  FinalRow row;
  row.method = std::string(method);
  row.seed = seed;
  row.train_m = fm.outcome.train_error_m;
  row.val_m = fm.outcome.val_error_m;
  row.test_m = fm.outcome.test_error_m;
  save_model(fm.outcome.model, fs::path(stem.string() + "_model.txt"));
  fm.pipeline.save(fs::path(stem.string() + "_pipeline.txt"));
  write_file(fs::path(stem.string() + "_final.csv"), final_row_csv(row));
  return row;
}

}  // namespace

std::vector<TuneRun> cmd_tune(const ExperimentConfig& cfg, std::ostream* log) {
  cfg.validate();
  const LocalisationDataset data = load_dataset(cfg);
  const LocalisationObjective objective(data);
  const Objective fn = [&objective](const TrialRequest& r, const StopPoll& p) {
    return objective(r, p);
  };
  fs::create_directories(cfg.output);
  write_file(cfg.output / "experiment.yaml", experiment_to_yaml(cfg));

  std::vector<TuneRun> runs;
  for (const std::uint64_t seed : cfg.seeds) {
    for (const std::string& method : cfg.methods) {
      TuneRun run;
      run.method = method;
      run.seed = seed;
      const fs::path stem = cfg.output / run_stem(method, seed);
      try {
        TunerSettings settings = cfg.tuner;
        settings.seed = seed;
        TuningResult res = method == "bo" ? run_bo(cfg.space, fn, settings)
                                          : run_random_search(cfg.space, fn, settings);
        write_trials_csv(cfg.space, res.history, fs::path(stem.string() + "_trials.csv"));
        write_curve_csv(res.curve, fs::path(stem.string() + "_curve.csv"));
        write_file(fs::path(stem.string() + "_best_config.yaml"),
                   config_to_yaml(cfg.space, res.best_config, res.best_validation_error_m));
        if (log)
          *log << method << " seed " << seed << ": " << res.history.size()
               << " trials, best validation error " << format_double(res.best_validation_error_m)
               << " m\n";
        if (cfg.final_epochs > 0) {
          const FinalModel fm = train_final(data, res.best_config, cfg.final_epochs,
                                            derive_seed(seed, {kStreamFinal}));
          run.final = write_final(fm, method, seed, stem);
          if (log)
            *log << method << " seed " << seed << ": final test error "
                 << fmt_opt(run.final->test_m) << " m\n";
        }
        run.result = std::move(res);
      } catch (const std::exception& e) {
        run.error = e.what();
        if (log) *log << method << " seed " << seed << ": failed: " << run.error << "\n";
      }
      runs.push_back(std::move(run));
    }
  }
  return runs;
}

FinalRow cmd_train(const ExperimentConfig& cfg, const fs::path& best_config, int epochs,
                   std::uint64_t seed, const fs::path& out_stem, std::string_view method) {
  if (epochs <= 0) throw ConfigError("epochs", "must be > 0");
  const HyperConfig config = config_from_yaml(cfg.space, read_file(best_config));
  const LocalisationDataset data = load_dataset(cfg);
  const FinalModel fm = train_final(data, config, epochs, seed);
  if (fm.outcome.status == TrainStatus::diverged)
    throw std::runtime_error("training diverged: " + fm.outcome.message);
  return write_final(fm, method, seed, out_stem);
}

double cmd_eval(const fs::path& model, const fs::path& pipeline, const fs::path& dataset) {
  const MlpModel net = load_model(model);
  const FeaturePipeline pipe = FeaturePipeline::load(pipeline);
  const LocalisationDataset data = load_csv(dataset);
  if (data.size() == 0) throw InvalidInput(dataset.string() + ": no samples");
  if (data.feature_count() != pipe.input_dim())
    throw InvalidInput("dataset has " + std::to_string(data.feature_count()) +
                       " features, the pipeline expects " + std::to_string(pipe.input_dim()));
  const Eigen::MatrixXd x = pipe.transform(data.features);
  if (x.cols() != net.input_dim()) throw InvalidInput("pipeline output does not match the model");
  return localisation_error(predict_positions(net, x), data.labels);
}

ComparisonReport build_report(std::vector<FinalRow> rows) {
  std::stable_sort(rows.begin(), rows.end(), [](const FinalRow& a, const FinalRow& b) {
    return std::tie(a.method, a.seed) < std::tie(b.method, b.seed);
  });
  ComparisonReport rep;
  std::map<std::string, std::vector<const FinalRow*>> by_method;
  for (const FinalRow& r : rows) by_method[r.method].push_back(&r);
  for (const auto& [method, group] : by_method) {
    MethodSummary s;
    s.method = method;
    s.runs = group.size();
    std::vector<double> tr, va, te;
    for (const FinalRow* r : group) {
      tr.push_back(r->train_m);
      va.push_back(r->val_m);
      if (r->test_m) te.push_back(*r->test_m);
    }
    s.train_mean_m = mean_of(tr);
    s.val_mean_m = mean_of(va);
    if (te.size() == group.size()) s.test_mean_m = mean_of(te);
    rep.summaries.push_back(s);
  }
  const MethodSummary* bo = nullptr;
  const MethodSummary* rs = nullptr;
  for (const MethodSummary& s : rep.summaries) {
    if (s.method == "bo") bo = &s;
    if (s.method == "rs") rs = &s;
  }
  if (bo && rs && bo->test_mean_m && rs->test_mean_m && *rs->test_mean_m != 0.0)
    rep.reduction_pct = 100.0 * (*rs->test_mean_m - *bo->test_mean_m) / *rs->test_mean_m;
  rep.rows = std::move(rows);
  return rep;
}

std::string ComparisonReport::table() const {
  std::vector<std::vector<std::string>> cells{
      {"method", "seed", "train_m", "val_m", "test_m", "test_reduction_pct"}};
  auto num = [](double v) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(4) << v;
    return s.str();
  };
  for (const FinalRow& r : rows)
    cells.push_back({r.method, std::to_string(r.seed), num(r.train_m), num(r.val_m),
                     r.test_m ? num(*r.test_m) : "-", ""});
  for (const MethodSummary& s : summaries) {
    std::string red;
    if (s.method == "bo" && reduction_pct) {
      std::ostringstream o;
      o << std::fixed << std::setprecision(2) << *reduction_pct;
      red = o.str();
    }
    cells.push_back({s.method, "mean", num(s.train_mean_m), num(s.val_mean_m),
                     s.test_mean_m ? num(*s.test_mean_m) : "-", red});
  }
  std::vector<std::size_t> width(cells.front().size(), 0);
  for (const auto& row : cells)
    for (std::size_t j = 0; j < row.size(); ++j) width[j] = std::max(width[j], row[j].size());
  std::ostringstream out;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    for (std::size_t j = 0; j < cells[i].size(); ++j) {
      if (j > 0) out << "  ";
      if (j < 2) out << std::left;
      else out << std::right;
      out << std::setw(static_cast<int>(width[j])) << cells[i][j];
    }
    out << "\n";
    if (i == 0) {
      std::size_t total = 0;
      for (std::size_t w : width) total += w;
      out << std::string(total + 2 * (width.size() - 1), '-') << "\n";
    }
  }
  std::string text = out.str();
  // Trailing spaces from the last (often empty) column.
  std::string trimmed;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    line.erase(line.find_last_not_of(' ') + 1);
    trimmed += line + "\n";
  }
  return trimmed;
}

std::string ComparisonReport::csv() const {
  std::string out = "method,seed,train_m,val_m,test_m,test_reduction_pct\n";
  for (const FinalRow& r : rows)
    out += r.method + "," + std::to_string(r.seed) + "," + format_double(r.train_m) + "," +
           format_double(r.val_m) + "," + fmt_opt(r.test_m) + ",\n";
  for (const MethodSummary& s : summaries)
    out += s.method + ",mean," + format_double(s.train_mean_m) + "," +
           format_double(s.val_mean_m) + "," + fmt_opt(s.test_mean_m) + "," +
           (s.method == "bo" ? fmt_opt(reduction_pct) : "") + "\n";
  return out;
}

ComparisonReport cmd_report(const fs::path& run_dir) {
  if (!fs::is_directory(run_dir)) throw InvalidInput(run_dir.string() + ": not a directory");
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(run_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_regular_file() && name.size() > 10 &&
        name.compare(name.size() - 10, 10, "_final.csv") == 0)
      files.push_back(entry.path());
  }
  if (files.empty()) throw InvalidInput(run_dir.string() + ": no *_final.csv result files");
  std::sort(files.begin(), files.end());
  std::vector<FinalRow> rows;
  for (const fs::path& f : files) {
    auto part = read_final_csv(f);
    rows.insert(rows.end(), part.begin(), part.end());
  }
  ComparisonReport rep = build_report(std::move(rows));
  write_file(run_dir / "report.txt", rep.table());
  write_file(run_dir / "report.csv", rep.csv());
  return rep;
}

}  // namespace locbo
