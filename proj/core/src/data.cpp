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

#include "locbo/data.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <set>

#include "locbo/errors.hpp"
#include "locbo/rng.hpp"
#include "locbo/text_io.hpp"

namespace locbo {
namespace {

constexpr double kPi = std::numbers::pi;

void require_non_negative(double v, const char* field) {
  if (!(v >= 0.0) || !std::isfinite(v)) throw ConfigError(field, "must be finite and >= 0");
}

}  // namespace

Eigen::MatrixXd LocalisationDataset::feature_rows(const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), features.cols());
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = features.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

Eigen::MatrixXd LocalisationDataset::label_rows(const std::vector<std::size_t>& idx) const {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), 2);
  for (std::size_t i = 0; i < idx.size(); ++i)
    out.row(static_cast<Eigen::Index>(i)) = labels.row(static_cast<Eigen::Index>(idx[i]));
  return out;
}

void LocalisationDataset::validate() const {
  if (labels.cols() != 2) throw InvalidInput("dataset labels must have 2 columns");
  if (labels.rows() != features.rows()) throw InvalidInput("dataset row counts disagree");
  if (static_cast<Eigen::Index>(feature_names.size()) != features.cols())
    throw InvalidInput("dataset feature names do not match feature columns");
  if (!features.allFinite() || !labels.allFinite())
    throw InvalidInput("dataset contains non-finite values");
  if (split.empty()) return;
  std::vector<char> seen(static_cast<std::size_t>(size()), 0);
  for (const auto* part : {&split.train, &split.val, &split.test}) {
    for (std::size_t i : *part) {
      if (i >= seen.size() || seen[i]) throw InvalidInput("dataset splits overlap or overflow");
      seen[i] = 1;
    }
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end())
    throw InvalidInput("dataset splits do not cover every row");
}

std::vector<Eigen::Vector2d> ScenarioConfig::resolved_access_points() const {
  if (!access_points.empty()) return access_points;
  return {{0.0, 0.0}, {0.0, height_m}, {width_m, 0.0}, {width_m, height_m}};
}

Eigen::Vector2d ScenarioConfig::position(double t) const {
  const double cx = 0.5 * width_m;
  const double cy = 0.5 * height_m;
  return {cx + trajectory_fill * cx * std::sin(lissajous_a * t + 0.5 * kPi),
          cy + trajectory_fill * cy * std::sin(lissajous_b * t)};
}

void ScenarioConfig::validate() const {
  if (!(width_m > 0.0) || !std::isfinite(width_m)) throw ConfigError("room.width_m", "must be > 0");
  if (!(height_m > 0.0) || !std::isfinite(height_m))
    throw ConfigError("room.height_m", "must be > 0");
  for (const Eigen::Vector2d& ap : resolved_access_points()) {
    if (!(ap.x() >= 0.0 && ap.x() <= width_m && ap.y() >= 0.0 && ap.y() <= height_m))
      throw ConfigError("access_points", "access point outside the room");
  }
  if (layout == FeatureLayout::wifi7 && resolved_access_points().size() < 4)
    throw ConfigError("layout", "wifi7 layout needs at least 4 access points");
  if (!(trajectory_fill > 0.0 && trajectory_fill <= 1.0))
    throw ConfigError("trajectory.fill", "must be in (0, 1]");
  require_non_negative(range_sd_m, "noise.range_sd_m");
  require_non_negative(angle_sd_rad, "noise.angle_sd_rad");
  require_non_negative(shadowing_sd_db, "noise.shadowing_sd_db");
  require_non_negative(multipath_scale, "noise.multipath_scale");
  if (!(multipath_prob >= 0.0 && multipath_prob <= 1.0))
    throw ConfigError("noise.multipath_prob", "must be in [0, 1]");
  if (!(reference_distance_m > 0.0)) throw ConfigError("path_loss.reference_distance_m", "must be > 0");
}

ScenarioConfig ScenarioConfig::noiseless() {
  ScenarioConfig c;
  c.range_sd_m = 0.0;
  c.angle_sd_rad = 0.0;
  c.shadowing_sd_db = 0.0;
  c.multipath_prob = 0.0;
  return c;
}

double wrap_angle(double a) {
  const double two_pi = 2.0 * kPi;
  a = std::fmod(a, two_pi);
  if (a <= -kPi) a += two_pi;
  if (a > kPi) a -= two_pi;
  return a;
}

LocalisationDataset generate_synthetic(const ScenarioConfig& cfg) {
  cfg.validate();
  const std::vector<Eigen::Vector2d> aps = cfg.resolved_access_points();
  const std::size_t n_ap = aps.size();
  const auto n = static_cast<Eigen::Index>(cfg.samples);

  Eigen::MatrixXd range(n, static_cast<Eigen::Index>(n_ap));
  Eigen::MatrixXd bearing(n, static_cast<Eigen::Index>(n_ap));
  Eigen::MatrixXd rss(n, static_cast<Eigen::Index>(n_ap));
  LocalisationDataset data;
  data.labels.resize(n, 2);

  Rng rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double t = 2.0 * kPi * static_cast<double>(i) / static_cast<double>(std::max<Eigen::Index>(n, 1));
    const Eigen::Vector2d pos = cfg.position(t);
    data.labels.row(i) = pos.transpose();
    for (std::size_t a = 0; a < n_ap; ++a) {
      const auto col = static_cast<Eigen::Index>(a);
      const Eigen::Vector2d diff = pos - aps[a];
      const double dist = diff.norm();
      double r = dist + cfg.range_sd_m * gauss(rng);
      if (uniform01(rng) < cfg.multipath_prob)
        r = dist + std::abs(cfg.multipath_scale * cfg.range_sd_m * gauss(rng));
      range(i, col) = r;
      bearing(i, col) = wrap_angle(std::atan2(diff.y(), diff.x()) + cfg.angle_sd_rad * gauss(rng));
      const double d = std::max(dist, 0.1 * cfg.reference_distance_m);
      rss(i, col) = cfg.reference_power_dbm -
                    10.0 * cfg.path_loss_exponent * std::log10(d / cfg.reference_distance_m) +
                    cfg.shadowing_sd_db * gauss(rng);
    }
  }

  std::vector<Eigen::VectorXd> columns;
  auto add = [&](const Eigen::MatrixXd& m, std::size_t ap, const char* prefix) {
    columns.push_back(m.col(static_cast<Eigen::Index>(ap)));
    data.feature_names.push_back(std::string(prefix) + "_ap" + std::to_string(ap));
  };
  if (cfg.layout == FeatureLayout::full) {
    for (std::size_t a = 0; a < n_ap; ++a) add(range, a, "range");
    for (std::size_t a = 0; a < n_ap; ++a) add(bearing, a, "bearing");
    for (std::size_t a = 0; a < n_ap; ++a) add(rss, a, "rss");
  } else {
    add(bearing, 0, "bearing");
    add(bearing, 1, "bearing");
    for (std::size_t a = 0; a < 4; ++a) add(range, a, "range");
    add(rss, 0, "rss");
  }
  data.features.resize(n, static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c)
    data.features.col(static_cast<Eigen::Index>(c)) = columns[c];
  return data;
}

std::string to_csv(const LocalisationDataset& data) {
  std::string out = "x_m,y_m";
  for (const std::string& name : data.feature_names) out += "," + name;
  out += "\n";
  for (Eigen::Index i = 0; i < data.size(); ++i) {
    out += format_double17(data.labels(i, 0));
    out += ",";
    out += format_double17(data.labels(i, 1));
    for (Eigen::Index j = 0; j < data.feature_count(); ++j) {
      out += ",";
      out += format_double17(data.features(i, j));
    }
    out += "\n";
  }
  return out;
}

void save_csv(const LocalisationDataset& data, const std::filesystem::path& path) {
  data.validate();
  write_file(path, to_csv(data));
}

LocalisationDataset parse_csv(const std::string& text) {
  std::vector<std::string_view> lines;
  {
    std::string_view rest(text);
    while (!rest.empty()) {
      const std::size_t nl = rest.find('\n');
      std::string_view line = rest.substr(0, nl);
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      lines.push_back(line);
      if (nl == std::string_view::npos) break;
      rest.remove_prefix(nl + 1);
    }
  }
  if (lines.empty() || lines.front().empty()) throw InvalidInput("line 1: missing CSV header");
  const auto header = split_fields(lines.front());
  if (header.size() < 2 || header[0] != "x_m" || header[1] != "y_m")
    throw InvalidInput("line 1: header must start with x_m,y_m");

  LocalisationDataset data;
  for (std::size_t j = 2; j < header.size(); ++j) data.feature_names.emplace_back(header[j]);
  const std::size_t cols = header.size();

  std::vector<std::vector<double>> rows;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (lines[ln].empty()) continue;
    const std::string where = "line " + std::to_string(ln + 1);
    const auto fields = split_fields(lines[ln]);
    if (fields.size() != cols)
      throw InvalidInput(where + ": expected " + std::to_string(cols) + " columns, found " +
                         std::to_string(fields.size()));
    std::vector<double> row;
    row.reserve(cols);
    for (const auto f : fields) {
      const double v = parse_double(f, where);
      if (!std::isfinite(v)) throw InvalidInput(where + ": non-finite value");
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }

  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto f = static_cast<Eigen::Index>(cols - 2);
  data.labels.resize(n, 2);
  data.features.resize(n, f);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& row = rows[static_cast<std::size_t>(i)];
    data.labels(i, 0) = row[0];
    data.labels(i, 1) = row[1];
    for (Eigen::Index j = 0; j < f; ++j) data.features(i, j) = row[static_cast<std::size_t>(j + 2)];
  }
  return data;
}

LocalisationDataset load_csv(const std::filesystem::path& path) {
  return parse_csv(read_file(path));
}

LocalisationDataset split(LocalisationDataset data, const SplitRatios& ratios, std::uint64_t seed) {
  if (!(ratios.train > 0.0 && ratios.val > 0.0 && ratios.test > 0.0))
    throw InvalidInput("split ratios must be positive");
  if (std::abs(ratios.train + ratios.val + ratios.test - 1.0) > 1e-9)
    throw InvalidInput("split ratios must sum to 1");
  const auto n = static_cast<std::size_t>(data.size());
  const auto n_train = static_cast<std::size_t>(std::llround(ratios.train * static_cast<double>(n)));
  const auto n_val = static_cast<std::size_t>(std::llround(ratios.val * static_cast<double>(n)));
  if (n_train == 0 || n_val == 0 || n_train + n_val >= n)
    throw InvalidInput("split leaves an empty partition for n = " + std::to_string(n));

  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  Rng rng(seed);
  std::shuffle(idx.begin(), idx.end(), rng);
  data.split.train.assign(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(n_train));
  data.split.val.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train),
                        idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val));
  data.split.test.assign(idx.begin() + static_cast<std::ptrdiff_t>(n_train + n_val), idx.end());
  return data;
}

}  // namespace locbo
