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

#include "locbo/tuner.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <deque>
#include <limits>
#include <map>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "locbo/errors.hpp"
#include "locbo/rng.hpp"
#include "locbo/text_io.hpp"

namespace locbo {

void TunerSettings::validate() const {
  if (!(budget_s >= 0.0) || std::isnan(budget_s)) throw ConfigError("tuner.budget_s", "must be >= 0");
  if (workers < 1) throw ConfigError("tuner.workers", "must be >= 1");
  if (init_trials < 0) throw ConfigError("tuner.init_trials", "must be >= 0");
  if (gp_restarts < 1) throw ConfigError("tuner.gp_restarts", "must be >= 1");
  if (clock == ClockMode::epochs && workers != 1)
    throw ConfigError("tuner.clock", "the epoch clock requires workers = 1");
  if (!(epoch_seconds > 0.0)) throw ConfigError("tuner.epoch_seconds", "must be > 0");
  fidelity.validate();
}

double failure_penalty(std::span<const TrialRecord> history) {
  double worst = 0.0;
  for (const TrialRecord& t : history)
    if (t.status != TrialStatus::failed) worst = std::max(worst, t.objective);
  return std::max(kMinFailurePenalty, 2.0 * worst);
}

std::vector<CurvePoint> extract_curve(std::span<const TrialRecord> history) {
  std::vector<const TrialRecord*> order;
  order.reserve(history.size());
  for (const TrialRecord& t : history) order.push_back(&t);
  std::stable_sort(order.begin(), order.end(), [](const TrialRecord* a, const TrialRecord* b) {
    return a->finished_at_s < b->finished_at_s;
  });
  std::vector<CurvePoint> curve;
  curve.reserve(order.size());
  double best = std::numeric_limits<double>::infinity();
  for (const TrialRecord* t : order) {
    best = std::min(best, t->objective);
    double at = t->finished_at_s;
    if (!curve.empty() && !(at > curve.back().elapsed_s))
      at = std::nextafter(curve.back().elapsed_s, std::numeric_limits<double>::infinity());
    curve.push_back({at, best});
  }
  return curve;
}

namespace {

using Clock = std::chrono::steady_clock;

class TuningLoop {
 public:
  TuningLoop(const SearchSpace& space, const Objective& objective, const TunerSettings& settings,
             bool use_bo)
      : space_(space), objective_(objective), s_(settings), use_bo_(use_bo) {
    s_.validate();
    if (space_.empty()) throw InvalidInput("tuner: empty search space");
    if (use_bo_) {
      const auto dim = static_cast<Index>(space_.encoded_dim()) + 1;
      gp_ = GpModel::empty(dim, KernelParams::defaults(dim));
    }
  }

  TuningResult run() {
    start_ = Clock::now();
    const int initial = std::max(1, std::min(s_.workers, s_.init_trials));
    for (int i = 0; i < initial && can_start(); ++i) launch();
    while (running_ > 0) {
      TrialRecord rec = wait_next();
      --running_;
      record(std::move(rec));
      while (running_ < s_.workers && can_start()) launch();
    }
    for (auto& [_, t] : threads_) t.join();
    threads_.clear();

    if (history_.empty()) throw std::runtime_error("no trials completed");
    TuningResult result;
    result.method = use_bo_ ? "bo" : "rs";
    std::size_t best = 0;
    for (std::size_t i = 1; i < history_.size(); ++i)
      if (history_[i].objective < history_[best].objective) best = i;
    result.best_config = history_[best].config;
    result.best_validation_error_m = history_[best].objective;
    result.best_trial = history_[best].index;
    result.curve = extract_curve(history_);
    result.history = std::move(history_);
    result.stop_references = std::move(references_);
    return result;
  }

 private:
  double elapsed() const {
    if (s_.clock == ClockMode::epochs) return virtual_now_;
    return std::chrono::duration<double>(Clock::now() - start_).count();
  }

  bool can_start() const {
    return (s_.max_trials == 0 || next_index_ < s_.max_trials) && elapsed() < s_.budget_s;
  }

  VectorXd with_fidelity(const HyperConfig& config, int epochs) const {
    const VectorXd x = encode(space_, config);
    VectorXd out(x.size() + 1);
    out.head(x.size()) = x;
    out(x.size()) = fidelity_coordinate(epochs, s_.fidelity.max_epochs);
    return out;
  }

  HyperConfig choose(std::size_t index, int epoch_budget) {
    if (!use_bo_ || index < static_cast<std::size_t>(s_.init_trials)) {
      Rng rng(derive_seed(s_.seed, {kStreamConfig, index}));
      return sample_random(space_, rng);
    }
    std::vector<VectorXd> pending;
    pending.reserve(pending_.size());
    for (const auto& [_, p] : pending_) pending.push_back(p);
    return propose_next(gp_, space_, pending,
                        fidelity_coordinate(epoch_budget, s_.fidelity.max_epochs),
                        derive_seed(s_.seed, {kStreamProposal, index}), s_.proposal);
  }

  void launch() {
    TrialRequest req;
    req.index = next_index_++;
    req.epoch_budget = fidelity_for_trial(history_, s_.fidelity);
    req.config = choose(req.index, req.epoch_budget);
    req.seed = derive_seed(s_.seed, {kStreamTrial, req.index});
    if (use_bo_) pending_[req.index] = with_fidelity(req.config, req.epoch_budget);

    std::vector<std::size_t> refs;
    refs.reserve(completed_.size());
    for (const TrialRecord& t : completed_) refs.push_back(t.index);
    if (references_.size() <= req.index) references_.resize(req.index + 1);
    references_[req.index] = std::move(refs);
    ++running_;

    if (s_.workers == 1) {
      const double virtual_start = virtual_now_;
      auto expired = [this, virtual_start](std::size_t epochs_done) {
        if (s_.clock == ClockMode::epochs)
          return virtual_start + static_cast<double>(epochs_done) * s_.epoch_seconds >= s_.budget_s;
        return elapsed() >= s_.budget_s;
      };
      done_.push_back(execute(std::move(req), completed_, expired));
      return;
    }
    auto expired = [this](std::size_t) { return elapsed() >= s_.budget_s; };
    const std::size_t index = req.index;
    threads_.emplace(index, std::thread([this, req = std::move(req), snapshot = completed_,
                                         expired]() mutable {
      TrialRecord rec = execute(std::move(req), snapshot, expired);
      std::lock_guard lock(mu_);
      done_.push_back(std::move(rec));
      cv_.notify_one();
    }));
  }

  template <typename Expired>
  TrialRecord execute(TrialRequest req, const std::vector<TrialRecord>& reference,
                      const Expired& expired) const {
    TrialRecord rec;
    rec.index = req.index;
    rec.config = req.config;
    rec.seed = req.seed;
    rec.epoch_budget = req.epoch_budget;
    bool stopped = false;
    StopPoll poll = [&](std::span<const double> errors) {
      if (expired(errors.size())) {
        stopped = true;
        return true;
      }
      if (!s_.median_stopping) return false;
      TrialRecord current;
      current.epoch_errors.assign(errors.begin(), errors.end());
      const int epoch = static_cast<int>(errors.size());
      if (median_stop_decision(current, reference, epoch, s_.fidelity.grace_epochs) ==
          StopDecision::stop) {
        stopped = true;
        return true;
      }
      return false;
    };

    const auto t0 = Clock::now();
    Evaluation ev;
    try {
      ev = objective_(req, poll);
    } catch (const std::exception& e) {
      ev.failed = true;
      ev.message = e.what();
    }
    rec.wall_time_s = std::chrono::duration<double>(Clock::now() - t0).count();
    rec.epoch_errors = std::move(ev.epoch_errors);
    rec.final_epochs = static_cast<int>(rec.epoch_errors.size());
    rec.message = std::move(ev.message);
    const bool bad_errors = std::any_of(rec.epoch_errors.begin(), rec.epoch_errors.end(),
                                        [](double e) { return !std::isfinite(e) || e < 0.0; });
    if (ev.failed || rec.epoch_errors.empty() || bad_errors) {
      rec.status = TrialStatus::failed;
      if (rec.message.empty()) rec.message = "objective produced no usable epoch errors";
    } else if (stopped && rec.final_epochs < rec.epoch_budget) {
      rec.status = TrialStatus::stopped_early;
    } else {
      rec.status = TrialStatus::completed;
    }
    return rec;
  }

  TrialRecord wait_next() {
    if (s_.workers == 1) {
      TrialRecord rec = std::move(done_.front());
      done_.pop_front();
      return rec;
    }
    std::unique_lock lock(mu_);
    cv_.wait(lock, [&] { return !done_.empty(); });
    TrialRecord rec = std::move(done_.front());
    done_.pop_front();
    lock.unlock();
    if (auto it = threads_.find(rec.index); it != threads_.end()) {
      it->second.join();
      threads_.erase(it);
    }
    return rec;
  }

  void record(TrialRecord rec) {
    if (s_.clock == ClockMode::epochs) {
      const double duration = static_cast<double>(std::max(rec.final_epochs, 1)) * s_.epoch_seconds;
      rec.wall_time_s = duration;
      virtual_now_ += duration;
      rec.finished_at_s = virtual_now_;
    } else {
      rec.finished_at_s = elapsed();
    }

    if (rec.status == TrialStatus::failed) {
      rec.objective = failure_penalty(history_);
    } else {
      rec.objective = *std::min_element(rec.epoch_errors.begin(), rec.epoch_errors.end());
    }
    pending_.erase(rec.index);

    if (use_bo_) {
      // A failure belongs to the configuration, not to the epoch it happened
      // at, so failed trials are observed at their scheduled budget.
      const int r = rec.status == TrialStatus::failed ? rec.epoch_budget : rec.final_epochs;
      const VectorXd x = with_fidelity(rec.config, r);
      try {
        gp_ = augment(gp_, x, -rec.objective);
      } catch (const NumericalError&) {
        GpDataset data = gp_.dataset();
        data.inputs.conservativeResize(data.size() + 1, Eigen::NoChange);
        data.inputs.row(data.size() - 1) = x.transpose();
        data.outputs.conservativeResize(data.outputs.size() + 1);
        data.outputs(data.outputs.size() - 1) = -rec.objective;
        gp_ = fit_mle(data, s_.gp_restarts, derive_seed(s_.seed, {kStreamGpFit, rec.index}));
        since_refit_ = 0;
      }
      ++since_refit_;
      if (should_refit(gp_.size(), since_refit_)) {
        gp_ = fit_mle(gp_.dataset(), s_.gp_restarts,
                      derive_seed(s_.seed, {kStreamGpFit, static_cast<std::uint64_t>(gp_.size())}));
        since_refit_ = 0;
      }
      if (gp_.size() != static_cast<Index>(history_.size() + 1))
        throw std::logic_error("tuner: surrogate size diverged from trial history");
    }

    if (history_.empty() || -rec.objective > incumbent_.value) {
      incumbent_.value = -rec.objective;
      incumbent_.config = rec.config;
      incumbent_.fidelity = rec.final_epochs;
    }
    if (rec.status == TrialStatus::completed) completed_.push_back(rec);
    history_.push_back(std::move(rec));

    double best = -std::numeric_limits<double>::infinity();
    for (const TrialRecord& t : history_) best = std::max(best, -t.objective);
    if (best != incumbent_.value) throw std::logic_error("tuner: incumbent out of sync with history");
  }

  const SearchSpace& space_;
  const Objective& objective_;
  TunerSettings s_;
  bool use_bo_;

  Clock::time_point start_;
  double virtual_now_ = 0.0;
  std::size_t next_index_ = 0;
  int running_ = 0;

  GpModel gp_;
  int since_refit_ = 0;
  Incumbent incumbent_;
  std::map<std::size_t, VectorXd> pending_;
  std::vector<TrialRecord> history_;
  std::vector<TrialRecord> completed_;
  std::vector<std::vector<std::size_t>> references_;

  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<TrialRecord> done_;
  std::map<std::size_t, std::thread> threads_;
};

}  // namespace

TuningResult run_bo(const SearchSpace& space, const Objective& objective,
                    const TunerSettings& settings) {
  return TuningLoop(space, objective, settings, true).run();
}

TuningResult run_random_search(const SearchSpace& space, const Objective& objective,
                               const TunerSettings& settings) {
  return TuningLoop(space, objective, settings, false).run();
}

std::string trials_csv(const SearchSpace& space, std::span<const TrialRecord> history) {
  std::string out = "trial,seed";
  for (const ParamSpec& p : space.params()) out += "," + p.name;
  out += ",epoch_budget,epochs,status,objective_m,wall_time_s,finished_at_s\n";
  for (const TrialRecord& t : history) {
    out += std::to_string(t.index) + "," + std::to_string(t.seed);
    for (const ParamSpec& p : space.params()) out += "," + format_value(t.config.at(p.name));
    out += "," + std::to_string(t.epoch_budget) + "," + std::to_string(t.final_epochs) + "," +
           std::string(to_string(t.status)) + "," + format_double(t.objective) + "," +
           format_double(t.wall_time_s) + "," + format_double(t.finished_at_s) + "\n";
  }
  return out;
}

void write_trials_csv(const SearchSpace& space, std::span<const TrialRecord> history,
                      const std::filesystem::path& path) {
  write_file(path, trials_csv(space, history));
}

std::vector<TrialRecord> read_trials_csv(const SearchSpace& space, const std::filesystem::path& path) {
  const std::string text = read_file(path);
  std::vector<std::string_view> lines;
  for (std::size_t pos = 0; pos < text.size();) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string::npos) nl = text.size();
    if (nl > pos) lines.emplace_back(text.data() + pos, nl - pos);
    pos = nl + 1;
  }
  if (lines.empty()) throw InvalidInput(path.string() + ": empty trials file");
  const auto header = split_fields(lines.front());
  const std::size_t n_params = space.params().size();
  if (header.size() != n_params + 8) throw InvalidInput(path.string() + ": unexpected header");
  for (std::size_t j = 0; j < n_params; ++j)
    if (header[j + 2] != space.params()[j].name)
      throw InvalidInput(path.string() + ": column '" + std::string(header[j + 2]) +
                         "' does not match the search space");

  std::vector<TrialRecord> out;
  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    const std::string where = path.string() + " line " + std::to_string(ln + 1);
    const auto f = split_fields(lines[ln]);
    if (f.size() != header.size()) throw InvalidInput(where + ": wrong column count");
    TrialRecord t;
    t.index = static_cast<std::size_t>(parse_integer(f[0], where));
    t.seed = std::stoull(std::string(f[1]));
    for (std::size_t j = 0; j < n_params; ++j) {
      const ParamSpec& p = space.params()[j];
      const std::string_view v = f[j + 2];
      if (std::holds_alternative<ContinuousRange>(p.kind))
        t.config.set(p.name, parse_double(v, where));
      else if (std::holds_alternative<IntegerRange>(p.kind))
        t.config.set(p.name, static_cast<std::int64_t>(parse_integer(v, where)));
      else
        t.config.set(p.name, std::string(v));
    }
    t.epoch_budget = static_cast<int>(parse_integer(f[n_params + 2], where));
    t.final_epochs = static_cast<int>(parse_integer(f[n_params + 3], where));
    t.status = trial_status_from_string(f[n_params + 4]);
    t.objective = parse_double(f[n_params + 5], where);
    t.wall_time_s = parse_double(f[n_params + 6], where);
    t.finished_at_s = parse_double(f[n_params + 7], where);
    out.push_back(std::move(t));
  }
  return out;
}

std::string curve_csv(std::span<const CurvePoint> curve) {
  std::string out = "elapsed_s,best_error_m\n";
  for (const CurvePoint& c : curve)
    out += format_double(c.elapsed_s) + "," + format_double(c.best_error_m) + "\n";
  return out;
}

void write_curve_csv(std::span<const CurvePoint> curve, const std::filesystem::path& path) {
  write_file(path, curve_csv(curve));
}

}  // namespace locbo
