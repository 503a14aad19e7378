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


// Acceptance suite: one line per criterion, PASS or FAIL, and a non-zero exit
// status when anything fails. Criteria 5-7 share a single BO-vs-RS sweep.
//
// Artifacts land in $LOCBO_ACCEPTANCE_DIR (default: <tmp>/locbo_acceptance)
// and are left in place for inspection.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "locbo/acquisition.hpp"
#include "locbo/data.hpp"
#include "locbo/experiment.hpp"
#include "locbo/features.hpp"
#include "locbo/gp.hpp"
#include "locbo/mlp.hpp"
#include "locbo/rng.hpp"
#include "locbo/search_space.hpp"
#include "locbo/tuner.hpp"
#include "oracles.hpp"

namespace fs = std::filesystem;
using namespace locbo;
using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

class Stopwatch {
 public:
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

 private:
  std::chrono::steady_clock::time_point start_ = std::chrono::steady_clock::now();
};

std::string fmt(double v, int precision = 4) {
  std::ostringstream os;
  os << std::setprecision(precision) << v;
  return os.str();
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

fs::path work_root() {
  if (const char* env = std::getenv("LOCBO_ACCEPTANCE_DIR")) return env;
  return fs::temp_directory_path() / "locbo_acceptance";
}

MatrixXd gaussian(Index rows, Index cols, std::mt19937_64& rng) {
  std::normal_distribution<double> z;
  return MatrixXd::NullaryExpr(rows, cols, [&] { return z(rng); });
}

// ---------------------------------------------------------------------------
// 1. GP against explicit-inverse formulas.

Verdict gp_oracle() {
  Stopwatch sw;
  std::mt19937_64 rng(20260101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::uniform_int_distribution<int> n_dist(1, 20), d_dist(1, 6);
  double worst = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const Index n = n_dist(rng), d = d_dist(rng);
    MatrixXd x = MatrixXd::NullaryExpr(n, d, [&] { return u(rng); });
    KernelParams p;
    p.lengthscales = VectorXd::NullaryExpr(d, [&] { return std::pow(10.0, -1.0 + 1.5 * u(rng)); });
    p.signal_variance = std::pow(10.0, -1.0 + 2.0 * u(rng));
    p.noise_variance = std::pow(10.0, -4.0 + 3.0 * u(rng));
    // Outputs are a draw from the GP itself plus an offset. Arbitrary outputs
    // under a near-noiseless kernel give log likelihoods around -1e4, where
    // 1e-8 absolute is below double-precision resolution for any method.
    const Eigen::LLT<MatrixXd> prior(oracle::noisy_gram(x, p));
    const VectorXd y = (prior.matrixL() * gaussian(n, 1, rng)).array() + (4.0 * u(rng) - 2.0);
    const GpDataset data(x, y);
    const GpModel m = GpModel::build(data, p);

    for (int q = 0; q < 3; ++q) {
      const VectorXd query = VectorXd::NullaryExpr(d, [&] { return u(rng); });
      const auto [mu, var] =
          oracle::dense_predict(x, y, p, m.mean_constant(), query, m.jitter());
      const Prediction pr = m.predict(query);
      worst = std::max({worst, std::abs(pr.mean - mu), std::abs(pr.variance - std::max(0.0, var))});
    }
    const double lml = log_marginal_likelihood(data, p, m.mean_constant());
    worst = std::max(worst, std::abs(lml - oracle::dense_lml(x, y, p, m.mean_constant(), m.jitter())));
  }
  const double s = sw.seconds();
  return {worst <= 1e-8 && s < 30.0,
          "1000 datasets, max abs deviation " + fmt(worst, 3) + ", " + fmt(s, 3) + " s"};
}

// ---------------------------------------------------------------------------
// 2. Closed-form EI against Monte Carlo.

Verdict ei_oracle() {
  Stopwatch sw;
  const double deltas[] = {-2.0, -1.0, 0.0, 1.0, 2.0};
  const double sds[] = {0.1, 0.5, 1.0, 2.0, 5.0};
  double worst_z = 0.0;
  int degenerate = 0;
  std::uint64_t seed = 500;
  for (double delta : deltas) {
    for (double sd : sds) {
      const double ei = expected_improvement({delta, sd, 0.0});
      const auto mc = oracle::mc_expected_improvement(delta, sd, 0.0, 1'000'000, seed++);
      if (mc.standard_error > 0.0) {
        worst_z = std::max(worst_z, std::abs(ei - mc.mean) / mc.standard_error);
      } else {
        // No sample improved on the incumbent (z <= -10): the estimate is
        // exactly 0 and EI must be negligible.
        ++degenerate;
        if (!(ei < 1e-12)) worst_z = std::numeric_limits<double>::infinity();
      }
    }
  }
  const double s = sw.seconds();
  return {worst_z <= 3.0 && s < 20.0,
          "5x5 grid, worst |EI - MC| = " + fmt(worst_z, 3) + " standard errors (" +
              std::to_string(degenerate) + " cells with no improving sample, EI < 1e-12), " +
              fmt(s, 3) + " s"};
}

// ---------------------------------------------------------------------------
// 3. Backprop against central differences.

Verdict backprop() {
  Stopwatch sw;
  MlpModel m = MlpModel::initialise({7, 8, 8, 2}, {}, 31);
  // Non-zero biases keep pre-activations off the ReLU kink at exactly zero.
  std::mt19937_64 rng(32);
  std::normal_distribution<double> bias(0.0, 0.1);
  for (Index l = 0; l < m.layer_count(); ++l)
    for (Index i = 0; i < m.biases(l).size(); ++i) m.biases(l)(i) = bias(rng);
  const MatrixXd x = gaussian(16, 7, rng);
  const MatrixXd y = gaussian(16, 2, rng);
  const double dev = gradient_check(m, x, y);
  const double s = sw.seconds();
  return {dev < 1e-4 && s < 10.0,
          "7-8-8-2 network, max relative deviation " + fmt(dev, 3) + ", " + fmt(s, 3) + " s"};
}

// ---------------------------------------------------------------------------
// 4. PCA against the characteristic polynomial and a reference solver.

Verdict pca_oracle() {
  std::mt19937_64 rng(44);
  double value_dev = 0.0, vector_dev = 0.0, recon_dev = 0.0;
  for (int t = 0; t < 20; ++t) {
    const MatrixXd mixing = gaussian(5, 5, rng);
    const MatrixXd samples = gaussian(200, 5, rng) * mixing;
    const PcaModel pca = fit_pca(samples);

    const MatrixXd centred = samples.rowwise() - samples.colwise().mean();
    const MatrixXd cov = centred.transpose() * centred / 199.0;

    std::vector<double> roots = oracle::charpoly_eigenvalues(cov);
    std::sort(roots.rbegin(), roots.rend());
    if (roots.size() != 5) return {false, "characteristic polynomial lost a root"};
    for (int i = 0; i < 5; ++i) value_dev = std::max(value_dev, std::abs(pca.eigenvalues(i) - roots[i]));

    Eigen::SelfAdjointEigenSolver<MatrixXd> ref(cov);
    for (int i = 0; i < 5; ++i) {
      const VectorXd r = ref.eigenvectors().col(4 - i);  // ascending in the reference
      const VectorXd v = pca.components.col(i);
      vector_dev = std::max(vector_dev, std::min((v - r).cwiseAbs().maxCoeff(),
                                                 (v + r).cwiseAbs().maxCoeff()));
    }
    const MatrixXd rebuilt =
        pca.components * pca.eigenvalues.asDiagonal() * pca.components.transpose();
    recon_dev = std::max(recon_dev, (rebuilt - cov).cwiseAbs().maxCoeff());
  }
  const bool ok = value_dev <= 1e-8 && vector_dev <= 1e-8 && recon_dev <= 1e-8;
  return {ok, "20 covariances, eigenvalue dev " + fmt(value_dev, 3) + ", eigenvector dev " +
                  fmt(vector_dev, 3) + ", reconstruction dev " + fmt(recon_dev, 3)};
}

// ---------------------------------------------------------------------------
// 5-7. Paired BO vs RS sweep.

struct Sweep {
  std::vector<TuneRun> runs;
  double seconds = 0.0;
  std::string error;
};

Sweep run_sweep(const fs::path& out) {
  ExperimentConfig cfg = ExperimentConfig::preset("localisation-wifi");
  cfg.synthetic->samples = 2000;
  cfg.tuner.max_trials = 40;
  cfg.tuner.budget_s = 1e9;  // the trial cap is the budget
  cfg.tuner.workers = 1;
  cfg.methods = {"bo", "rs"};
  cfg.output = out;
  Sweep sweep;
  Stopwatch sw;
  try {
    sweep.runs = cmd_tune(cfg, &std::cerr);
  } catch (const std::exception& e) {
    sweep.error = e.what();
  }
  sweep.seconds = sw.seconds();
  return sweep;
}

Verdict bo_beats_rs(const Sweep& sweep) {
  if (!sweep.error.empty()) return {false, "sweep aborted: " + sweep.error};
  std::map<std::uint64_t, double> bo, rs;
  for (const TuneRun& r : sweep.runs) {
    if (!r.error.empty() || !r.final || !r.final->test_m)
      return {false, r.method + " seed " + std::to_string(r.seed) + " produced no final model"};
    (r.method == "bo" ? bo : rs)[r.seed] = *r.final->test_m;
  }
  if (bo.size() != 10 || rs.size() != 10) return {false, "expected 10 paired seeds per arm"};
  int wins = 0;
  double bo_mean = 0.0, rs_mean = 0.0;
  for (const auto& [seed, err] : bo) {
    if (err <= rs.at(seed)) ++wins;
    bo_mean += err / 10.0;
    rs_mean += rs.at(seed) / 10.0;
  }
  const bool ok = bo_mean <= rs_mean && wins >= 8 && sweep.seconds < 15.0 * 60.0;
  return {ok, "mean test error BO " + fmt(bo_mean) + " m vs RS " + fmt(rs_mean) + " m, BO wins " +
                  std::to_string(wins) + "/10 seeds, " + fmt(sweep.seconds, 4) + " s"};
}

Verdict curves_monotone(const Sweep& sweep) {
  if (sweep.runs.empty()) return {false, "no runs"};
  std::size_t points = 0;
  for (const TuneRun& r : sweep.runs) {
    if (!r.result) return {false, "missing result"};
    const auto& c = r.result->curve;
    if (c.empty()) return {false, "empty curve"};
    for (std::size_t i = 1; i < c.size(); ++i)
      if (c[i].best_error_m > c[i - 1].best_error_m || !(c[i].elapsed_s > c[i - 1].elapsed_s))
        return {false, r.method + " seed " + std::to_string(r.seed) + " curve not monotone at point " +
                           std::to_string(i)};
    points += c.size();
  }
  return {true, std::to_string(sweep.runs.size()) + " curves, " + std::to_string(points) +
                    " points, all non-increasing"};
}

// A stopped trial "dominates" when each of its epoch errors is below the
// pointwise minimum, at that epoch, over the completed trials it was compared
// against. Such a trial must never have been stopped.
Verdict median_stop_safety(const Sweep& sweep) {
  if (sweep.runs.empty()) return {false, "no runs"};
  std::size_t stopped = 0, violations = 0;
  for (const TuneRun& r : sweep.runs) {
    if (!r.result) return {false, "missing result"};
    std::map<std::size_t, const TrialRecord*> by_index;
    for (const TrialRecord& t : r.result->history) by_index[t.index] = &t;
    for (const TrialRecord& t : r.result->history) {
      if (t.status != TrialStatus::stopped_early) continue;
      ++stopped;
      const auto& refs = r.result->stop_references.at(t.index);
      bool dominates = !refs.empty();
      for (std::size_t e = 0; dominates && e < t.epoch_errors.size(); ++e) {
        for (std::size_t k : refs) {
          const TrialRecord& ref = *by_index.at(k);
          if (e < ref.epoch_errors.size() && !(t.epoch_errors[e] < ref.epoch_errors[e])) {
            dominates = false;
            break;
          }
        }
      }
      if (dominates) ++violations;
    }
  }
  return {violations == 0 && stopped > 0,
          std::to_string(stopped) + " stopped trials checked, " + std::to_string(violations) +
              " violations"};
}

// ---------------------------------------------------------------------------
// 8. Noiseless scenario is learnable.

Verdict learnability(const fs::path& out) {
  Stopwatch sw;
  ExperimentConfig cfg = ExperimentConfig::preset("localisation-wifi");
  cfg.synthetic = ScenarioConfig::noiseless();
  cfg.synthetic->samples = 2000;
  cfg.tuner.max_trials = 40;
  cfg.tuner.budget_s = 1e9;
  cfg.seeds = {1};
  cfg.methods = {"bo"};
  cfg.output = out;
  std::vector<TuneRun> runs;
  try {
    runs = cmd_tune(cfg, &std::cerr);
  } catch (const std::exception& e) {
    return {false, std::string("tuning failed: ") + e.what()};
  }
  if (runs.size() != 1 || !runs[0].final || !runs[0].final->test_m)
    return {false, "no final model: " + (runs.empty() ? std::string() : runs[0].error)};

  // Sanity: the features really do pin the position down.
  const LocalisationDataset data = load_dataset(cfg);
  const ScenarioConfig& sc = *cfg.synthetic;
  const auto aps = sc.resolved_access_points();
  double tri = 0.0;
  const auto names = data.feature_names;
  for (Index i = 0; i < std::min<Index>(data.size(), 200); ++i) {
    std::vector<Eigen::Vector2d> anchors;
    std::vector<double> ranges;
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (names[j].rfind("range_ap", 0) != 0) continue;
      anchors.push_back(aps.at(std::stoul(names[j].substr(8))));
      ranges.push_back(data.features(i, static_cast<Index>(j)));
    }
    tri = std::max(tri, (oracle::trilaterate(anchors, ranges) - data.labels.row(i).transpose()).norm());
  }

  const double test = *runs[0].final->test_m;
  const double s = sw.seconds();
  return {test < 0.3 && s < 300.0, "test error " + fmt(test) + " m (trilateration oracle " +
                                       fmt(tri, 3) + " m), " + fmt(s, 4) + " s"};
}

// ---------------------------------------------------------------------------
// 9. Serial tune is byte-for-byte reproducible.

Verdict determinism(const fs::path& root) {
  auto run = [&](const fs::path& out) {
    ExperimentConfig cfg = ExperimentConfig::preset("localisation-wifi");
    cfg.synthetic->samples = 400;
    cfg.tuner.clock = ClockMode::epochs;
    cfg.tuner.workers = 1;
    cfg.tuner.budget_s = 2.0;  // 200 virtual epochs
    cfg.seeds = {3};
    cfg.methods = {"bo"};
    cfg.final_epochs = 0;
    cfg.output = out;
    const auto runs = cmd_tune(cfg);
    if (runs.empty() || !runs[0].error.empty())
      throw std::runtime_error(runs.empty() ? "no run" : runs[0].error);
    return read_file(out / (run_stem("bo", 3) + "_trials.csv"));
  };
  try {
    const std::string a = run(root / "a");
    const std::string b = run(root / "b");
    const auto rows = std::count(a.begin(), a.end(), '\n') - 1;
    return {!a.empty() && a == b, std::to_string(rows) + " trials, " + std::to_string(a.size()) +
                                      " bytes, " + (a == b ? "identical" : "DIFFERENT")};
  } catch (const std::exception& e) {
    return {false, e.what()};
  }
}

// ---------------------------------------------------------------------------
// 10. Round trips.

Verdict round_trips(const fs::path& root) {
  // Dataset CSV, through text and through a file.
  ScenarioConfig sc;
  sc.samples = 500;
  sc.layout = FeatureLayout::full;
  const LocalisationDataset data = generate_synthetic(sc);
  const LocalisationDataset text_back = parse_csv(to_csv(data));
  save_csv(data, root / "dataset.csv");
  const LocalisationDataset file_back = load_csv(root / "dataset.csv");
  for (const LocalisationDataset* back : {&text_back, &file_back}) {
    if (back->features != data.features || back->labels != data.labels ||
        back->feature_names != data.feature_names)
      return {false, "dataset CSV round trip changed values"};
  }

  // Configurations: encode/decode and the YAML form.
  std::size_t configs = 0;
  double worst_rel = 0.0;
  for (const char* preset : {"localisation-wifi", "localisation-uwb"}) {
    const SearchSpace space = SearchSpace::preset(preset);
    Rng rng(derive_seed(10, {configs}));
    for (int i = 0; i < 500; ++i, ++configs) {
      const HyperConfig c = sample_random(space, rng);
      const HyperConfig back = decode(space, encode(space, c));
      for (const ParamSpec& p : space.params()) {
        if (std::holds_alternative<ContinuousRange>(p.kind)) {
          const double a = c.real(p.name), b = back.real(p.name);
          worst_rel = std::max(worst_rel, std::abs(a - b) / std::max(1.0, std::abs(a)));
        } else if (c.at(p.name) != back.at(p.name)) {
          return {false, "encode/decode changed " + p.name};
        }
      }
      if (config_from_yaml(space, config_to_yaml(space, c)) != c)
        return {false, "YAML round trip changed a configuration"};
    }
  }
  if (worst_rel > 1e-12) return {false, "encode/decode relative error " + fmt(worst_rel, 3)};

  // Model file.
  MlpModel model = MlpModel::initialise({7, 32, 16, 2}, {0.1, 0.2}, 77);
  std::mt19937_64 rng(78);
  for (Index l = 0; l < model.layer_count(); ++l) model.biases(l) = gaussian(model.biases(l).size(), 1, rng);
  save_model(model, root / "model.txt");
  if (!(load_model(root / "model.txt") == model) || !(parse_model(serialize_model(model)) == model))
    return {false, "model round trip changed parameters"};

  return {true, "dataset 500x" + std::to_string(data.feature_count()) + " exact, " +
                    std::to_string(configs) + " configs (continuous rel. error " + fmt(worst_rel, 3) +
                    "), model exact"};
}

}  // namespace

int main(int argc, char** argv) {
  // Optional arguments select criteria by number, e.g. `locbo_acceptance 1 2 10`.
  std::vector<int> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  auto wanted = [&](int id) {
    return selected.empty() || std::find(selected.begin(), selected.end(), id) != selected.end();
  };

  const fs::path root = work_root();
  fs::remove_all(root);
  fs::create_directories(root);

  int failures = 0;
  auto report = [&](int id, const char* name, auto&& check) {
    if (!wanted(id)) return;
    const Verdict v = check();
    if (!v.pass) ++failures;
    std::cout << (v.pass ? "PASS" : "FAIL") << "  criterion " << std::setw(2) << id << "  " << name
              << ": " << v.detail << std::endl;
  };

  report(1, "GP oracle equivalence", gp_oracle);
  report(2, "EI oracle equivalence", ei_oracle);
  report(3, "backprop correctness", backprop);
  report(4, "PCA oracle equivalence", pca_oracle);
  Sweep sweep;
  if (wanted(5) || wanted(6) || wanted(7)) sweep = run_sweep(root / "sweep");
  report(5, "BO beats RS", [&] { return bo_beats_rs(sweep); });
  report(6, "tuning-curve contract", [&] { return curves_monotone(sweep); });
  report(7, "median stopping safety", [&] { return median_stop_safety(sweep); });
  report(8, "end-to-end learnability", [&] { return learnability(root / "noiseless"); });
  report(9, "determinism", [&] { return determinism(root / "determinism"); });
  report(10, "round trips", [&] { return round_trips(root); });

  std::cout << (failures == 0 ? "all selected criteria passed"
                              : std::to_string(failures) + " criteria failed")
            << " (artifacts in " << root.string() << ")" << std::endl;
  return failures == 0 ? 0 : 1;
}
