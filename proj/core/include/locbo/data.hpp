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

// Localisation datasets: synthetic corner-AP scenario, CSV interchange and
// seeded train/validation/test splitting.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace locbo {

struct SplitIndices {
  std::vector<std::size_t> train;
  std::vector<std::size_t> val;
  std::vector<std::size_t> test;

  bool empty() const noexcept { return train.empty() && val.empty() && test.empty(); }
};

struct LocalisationDataset {
  Eigen::MatrixXd features;  // n x f
  Eigen::MatrixXd labels;    // n x 2, metres
  std::vector<std::string> feature_names;
  SplitIndices split;

  Eigen::Index size() const noexcept { return features.rows(); }
  Eigen::Index feature_count() const noexcept { return features.cols(); }

  Eigen::MatrixXd feature_rows(const std::vector<std::size_t>& idx) const;
  Eigen::MatrixXd label_rows(const std::vector<std::size_t>& idx) const;

  // Shapes, finiteness, and (when present) disjoint covering splits.
  void validate() const;
};

enum class FeatureLayout {
  full,   // range, bearing and RSS for every AP
  wifi7,  // bearings of APs 0 and 1, ranges of APs 0-3, RSS of AP 0
};

struct ScenarioConfig {
  double width_m = 8.0;
  double height_m = 6.0;
  // Empty means the four corners: (0,0), (0,H), (W,0), (W,H).
  std::vector<Eigen::Vector2d> access_points;
  // Lissajous trajectory x = cx + ax sin(a t + pi/2), y = cy + ay sin(b t),
  // amplitudes `trajectory_fill` of the half extents.
  double lissajous_a = 3.0;
  double lissajous_b = 2.0;
  double trajectory_fill = 0.9;
  std::size_t samples = 2000;
  double range_sd_m = 0.1;
  double angle_sd_rad = 0.05;
  double shadowing_sd_db = 2.0;
  double multipath_prob = 0.05;
  double multipath_scale = 3.0;  // outlier bias ~ |N(0, scale * range_sd)|
  double path_loss_exponent = 2.5;
  double reference_distance_m = 1.0;
  double reference_power_dbm = -40.0;
  FeatureLayout layout = FeatureLayout::wifi7;
  std::uint64_t seed = 1;

  std::vector<Eigen::Vector2d> resolved_access_points() const;
  Eigen::Vector2d position(double t) const;
  // Throws ConfigError naming the offending field.
  void validate() const;

  static ScenarioConfig noiseless();
};

// Wraps an angle into (-pi, pi].
double wrap_angle(double a);

LocalisationDataset generate_synthetic(const ScenarioConfig& cfg);

// Header `x_m,y_m,<feature names>`; one row per sample; 17 significant digits.
void save_csv(const LocalisationDataset& data, const std::filesystem::path& path);
std::string to_csv(const LocalisationDataset& data);
// Errors name the 1-based line number. The split is left empty.
LocalisationDataset load_csv(const std::filesystem::path& path);
LocalisationDataset parse_csv(const std::string& text);

struct SplitRatios {
  double train = 0.70;
  double val = 0.15;
  double test = 0.15;
};

LocalisationDataset split(LocalisationDataset data, const SplitRatios& ratios, std::uint64_t seed);

}  // namespace locbo
