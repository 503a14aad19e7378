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

// Feature scaling and PCA-based feature selection. The pipeline applies the
// scaler first and projects the scaled features onto the leading principal
// components; both stages are fitted on training rows only.

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Core>

namespace locbo {

enum class ScalingMethod { l1, l2, standardise, minmax, none };

std::string_view to_string(ScalingMethod m);
// Accepts the search-space spellings: L1, L2, standardise, minmax, none.
ScalingMethod scaling_from_string(std::string_view s);

struct ScalerModel {
  ScalingMethod method = ScalingMethod::none;
  // standardise: mean / std (population, floored at 1e-12).
  // minmax: min / (max - min), 0 marks a constant feature.
  Eigen::VectorXd offset;
  Eigen::VectorXd scale;
};

inline constexpr double kStdFloor = 1e-12;

ScalerModel fit_scaler(ScalingMethod method, const Eigen::MatrixXd& train);
Eigen::MatrixXd apply_scaler(const ScalerModel& scaler, const Eigen::MatrixXd& features);

struct PcaModel {
  Eigen::VectorXd mean;
  Eigen::MatrixXd components;  // f x f, columns are unit eigenvectors
  Eigen::VectorXd eigenvalues; // descending
};

struct SymmetricEigen {
  Eigen::VectorXd values;   // unsorted, matching columns of `vectors`
  Eigen::MatrixXd vectors;
  int sweeps = 0;
};

// Cyclic Jacobi rotations until the off-diagonal Frobenius norm falls below
// `tol` times the matrix norm.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& symmetric, double tol = 1e-12,
                            int max_sweeps = 100);

// Eigendecomposition of the sample covariance (n - 1 denominator) of the
// mean-centered rows. Each eigenvector's largest-magnitude entry is positive.
PcaModel fit_pca(const Eigen::MatrixXd& train);
Eigen::MatrixXd project(const PcaModel& pca, const Eigen::MatrixXd& features, Eigen::Index m);

class FeaturePipeline {
 public:
  FeaturePipeline() = default;

  // `components` = std::nullopt keeps every scaled feature and skips PCA.
  static FeaturePipeline fit(const Eigen::MatrixXd& train, ScalingMethod method,
                             std::optional<Eigen::Index> components);

  Eigen::MatrixXd transform(const Eigen::MatrixXd& features) const;

  const ScalerModel& scaler() const noexcept { return scaler_; }
  const std::optional<PcaModel>& pca() const noexcept { return pca_; }
  Eigen::Index input_dim() const noexcept { return input_dim_; }
  Eigen::Index output_dim() const noexcept;

  std::string serialize() const;
  static FeaturePipeline parse(std::string_view text);
  void save(const std::filesystem::path& path) const;
  static FeaturePipeline load(const std::filesystem::path& path);

 private:
  ScalerModel scaler_;
  std::optional<PcaModel> pca_;
  Eigen::Index components_ = 0;
  Eigen::Index input_dim_ = 0;
};

}  // namespace locbo
