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

#include "locbo/features.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include "locbo/errors.hpp"
#include "locbo/text_io.hpp"

namespace locbo {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string_view to_string(ScalingMethod m) {
  switch (m) {
    case ScalingMethod::l1: return "L1";
    case ScalingMethod::l2: return "L2";
    case ScalingMethod::standardise: return "standardise";
    case ScalingMethod::minmax: return "minmax";
    case ScalingMethod::none: return "none";
  }
  return "none";
}

ScalingMethod scaling_from_string(std::string_view s) {
  if (s == "L1" || s == "l1") return ScalingMethod::l1;
  if (s == "L2" || s == "l2") return ScalingMethod::l2;
  if (s == "standardise" || s == "standardize") return ScalingMethod::standardise;
  if (s == "minmax") return ScalingMethod::minmax;
  if (s == "none") return ScalingMethod::none;
  throw InvalidInput("unknown scaling method '" + std::string(s) + "'");
}

ScalerModel fit_scaler(ScalingMethod method, const MatrixXd& train) {
  ScalerModel m;
  m.method = method;
  const Index f = train.cols();
  if (method == ScalingMethod::standardise) {
    if (train.rows() == 0) throw InvalidInput("fit_scaler: empty training features");
    m.offset = train.colwise().mean().transpose();
    m.scale.resize(f);
    for (Index j = 0; j < f; ++j) {
      const double var = (train.col(j).array() - m.offset(j)).square().mean();
      m.scale(j) = std::max(std::sqrt(var), kStdFloor);
    }
  } else if (method == ScalingMethod::minmax) {
    if (train.rows() == 0) throw InvalidInput("fit_scaler: empty training features");
    m.offset = train.colwise().minCoeff().transpose();
    m.scale = train.colwise().maxCoeff().transpose() - m.offset;
  }
  return m;
}

MatrixXd apply_scaler(const ScalerModel& s, const MatrixXd& x) {
  MatrixXd out = x;
  switch (s.method) {
    case ScalingMethod::none:
      break;
    case ScalingMethod::l1:
    case ScalingMethod::l2:
      for (Index i = 0; i < out.rows(); ++i) {
        const double norm = s.method == ScalingMethod::l1 ? out.row(i).lpNorm<1>() : out.row(i).norm();
        if (norm > 0.0) out.row(i) /= norm;
      }
      break;
    case ScalingMethod::standardise:
      if (x.cols() != s.offset.size()) throw InvalidInput("apply_scaler: feature count mismatch");
      out = (x.rowwise() - s.offset.transpose()).array().rowwise() / s.scale.transpose().array();
      break;
    case ScalingMethod::minmax:
      if (x.cols() != s.offset.size()) throw InvalidInput("apply_scaler: feature count mismatch");
      for (Index j = 0; j < out.cols(); ++j) {
        if (s.scale(j) > 0.0)
          out.col(j) = (x.col(j).array() - s.offset(j)) / s.scale(j);
        else
          out.col(j).setZero();
      }
      break;
  }
  return out;
}

SymmetricEigen jacobi_eigen(const MatrixXd& symmetric, double tol, int max_sweeps) {
  if (symmetric.rows() != symmetric.cols()) throw InvalidInput("jacobi_eigen: matrix not square");
  const Index n = symmetric.rows();
  MatrixXd a = 0.5 * (symmetric + symmetric.transpose());
  MatrixXd v = MatrixXd::Identity(n, n);
  const double norm = std::max(a.norm(), 1e-300);
  int sweep = 0;
  for (; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Index p = 0; p < n; ++p)
      for (Index q = 0; q < n; ++q)
        if (p != q) off += a(p, q) * a(p, q);
    if (std::sqrt(off) <= tol * norm) break;
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }
  return {a.diagonal(), v, sweep};
}

PcaModel fit_pca(const MatrixXd& train) {
  if (train.rows() < 2) throw InvalidInput("fit_pca: need at least 2 rows");
  const Index f = train.cols();
  PcaModel pca;
  pca.mean = train.colwise().mean().transpose();
  const MatrixXd centered = train.rowwise() - pca.mean.transpose();
  const MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(train.rows() - 1);
  const SymmetricEigen eig = jacobi_eigen(cov);

  std::vector<Index> order(static_cast<std::size_t>(f));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index a, Index b) { return eig.values(a) > eig.values(b); });
  pca.components.resize(f, f);
  pca.eigenvalues.resize(f);
  for (Index k = 0; k < f; ++k) {
    const Index src = order[static_cast<std::size_t>(k)];
    VectorXd col = eig.vectors.col(src);
    Index arg = 0;
    for (Index i = 1; i < f; ++i)
      if (std::abs(col(i)) > std::abs(col(arg))) arg = i;
    if (col(arg) < 0.0) col = -col;
    pca.components.col(k) = col;
    pca.eigenvalues(k) = std::max(eig.values(src), 0.0);
  }
  return pca;
}

MatrixXd project(const PcaModel& pca, const MatrixXd& features, Index m) {
  const Index f = pca.mean.size();
  if (m < 1 || m > f) throw InvalidInput("project: component count out of range");
  if (features.cols() != f) throw InvalidInput("project: feature count mismatch");
  return (features.rowwise() - pca.mean.transpose()) * pca.components.leftCols(m);
}

FeaturePipeline FeaturePipeline::fit(const MatrixXd& train, ScalingMethod method,
                                     std::optional<Index> components) {
  FeaturePipeline p;
  p.input_dim_ = train.cols();
  p.scaler_ = fit_scaler(method, train);
  if (components) {
    if (*components < 1 || *components > train.cols())
      throw InvalidInput("FeaturePipeline: PCA component count out of range");
    p.pca_ = fit_pca(apply_scaler(p.scaler_, train));
    p.components_ = *components;
  }
  return p;
}

Index FeaturePipeline::output_dim() const noexcept { return pca_ ? components_ : input_dim_; }

MatrixXd FeaturePipeline::transform(const MatrixXd& features) const {
  if (features.cols() != input_dim_) throw InvalidInput("FeaturePipeline: feature count mismatch");
  MatrixXd scaled = apply_scaler(scaler_, features);
  if (!pca_) return scaled;
  return project(*pca_, scaled, components_);
}

namespace {

void write_vector(std::ostringstream& out, const char* key, const VectorXd& v) {
  out << key;
  for (Index i = 0; i < v.size(); ++i) out << ' ' << format_double(v(i));
  out << '\n';
}

struct LineReader {
  std::istringstream in;
  explicit LineReader(std::string_view text) : in(std::string(text)) {}

  std::vector<std::string> tokens(std::string_view expect_key) {
    std::string line;
    if (!std::getline(in, line)) throw InvalidInput("pipeline file truncated before " + std::string(expect_key));
    std::istringstream ls(line);
    std::vector<std::string> t;
    for (std::string w; ls >> w;) t.push_back(w);
    if (t.empty() || t.front() != expect_key)
      throw InvalidInput("pipeline file: expected '" + std::string(expect_key) + "'");
    return t;
  }

  VectorXd vector(std::string_view key, Index n) {
    const auto t = tokens(key);
    if (static_cast<Index>(t.size()) != n + 1)
      throw InvalidInput("pipeline file: wrong value count for " + std::string(key));
    VectorXd v(n);
    for (Index i = 0; i < n; ++i) v(i) = parse_double(t[static_cast<std::size_t>(i + 1)], key);
    return v;
  }
};

}  // namespace

std::string FeaturePipeline::serialize() const {
  std::ostringstream out;
  out << "locbo-pipeline 1\n";
  out << "scaling " << to_string(scaler_.method) << '\n';
  out << "input_dim " << input_dim_ << '\n';
  write_vector(out, "offset", scaler_.offset);
  write_vector(out, "scale", scaler_.scale);
  if (!pca_) {
    out << "pca 0\n";
    return out.str();
  }
  out << "pca " << components_ << '\n';
  write_vector(out, "mean", pca_->mean);
  write_vector(out, "eigenvalues", pca_->eigenvalues);
  for (Index i = 0; i < pca_->components.rows(); ++i)
    write_vector(out, "row", pca_->components.row(i).transpose());
  return out.str();
}

FeaturePipeline FeaturePipeline::parse(std::string_view text) {
  LineReader r(text);
  const auto magic = r.tokens("locbo-pipeline");
  if (magic.size() != 2 || magic[1] != "1") throw InvalidInput("pipeline file: unsupported version");
  FeaturePipeline p;
  const auto scaling = r.tokens("scaling");
  if (scaling.size() != 2) throw InvalidInput("pipeline file: bad scaling line");
  p.scaler_.method = scaling_from_string(scaling[1]);
  const auto dim = r.tokens("input_dim");
  if (dim.size() != 2) throw InvalidInput("pipeline file: bad input_dim line");
  p.input_dim_ = parse_integer(dim[1], "input_dim");
  const bool stateful = p.scaler_.method == ScalingMethod::standardise ||
                        p.scaler_.method == ScalingMethod::minmax;
  p.scaler_.offset = r.vector("offset", stateful ? p.input_dim_ : 0);
  p.scaler_.scale = r.vector("scale", stateful ? p.input_dim_ : 0);
  const auto pca = r.tokens("pca");
  if (pca.size() != 2) throw InvalidInput("pipeline file: bad pca line");
  const Index m = parse_integer(pca[1], "pca");
  if (m == 0) return p;
  if (m < 0 || m > p.input_dim_) throw InvalidInput("pipeline file: pca count out of range");
  PcaModel model;
  model.mean = r.vector("mean", p.input_dim_);
  model.eigenvalues = r.vector("eigenvalues", p.input_dim_);
  model.components.resize(p.input_dim_, p.input_dim_);
  for (Index i = 0; i < p.input_dim_; ++i) model.components.row(i) = r.vector("row", p.input_dim_).transpose();
  p.pca_ = std::move(model);
  p.components_ = m;
  return p;
}

void FeaturePipeline::save(const std::filesystem::path& path) const { write_file(path, serialize()); }

FeaturePipeline FeaturePipeline::load(const std::filesystem::path& path) {
  return parse(read_file(path));
}

}  // namespace locbo
