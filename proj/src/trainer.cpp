// Copyright 2026 The PRSB Authors
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

#include "prsb/trainer.hpp"

#include "prsb/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace prsb {
namespace {

// Stream tags under a run seed.
constexpr std::uint64_t kShuffleStream = 1;
constexpr std::uint64_t kSubsetStream = 2;
constexpr std::uint64_t kModelStream = 3;
constexpr std::uint64_t kFinalSubsetStream = 4;
constexpr std::uint64_t kFinalModelStream = 5;

constexpr std::size_t kSelectionWindow = 50;

}  // namespace

void RegularizerSpec::validate(std::size_t feature_count) const {
  if (!(lambda_l1 >= 0.0) || !(lambda_fused >= 0.0) || !(lambda_group >= 0.0)) {
    throw std::invalid_argument("regularization coefficients must be non-negative");
  }
  if (lambda_fused > 0.0 && grid_height * grid_width != feature_count) {
    throw std::invalid_argument("fused penalty grid " + std::to_string(grid_height) + "x" +
                                std::to_string(grid_width) + " does not cover " + std::to_string(feature_count) +
                                " features");
  }
}

PenaltyValue l1_penalty(std::span<const double> alpha, double lambda) {
  PenaltyValue out;
  out.value = lambda * std::accumulate(alpha.begin(), alpha.end(), 0.0);
  out.subgradient.assign(alpha.size(), lambda);
  return out;
}

PenaltyValue fused_penalty(std::span<const double> alpha, std::size_t height, std::size_t width, double lambda) {
  if (height * width != alpha.size()) throw std::invalid_argument("grid shape does not match parameter count");
  PenaltyValue out;
  out.subgradient.assign(alpha.size(), 0.0);
  auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  double total = 0.0;
  auto pair = [&](std::size_t a, std::size_t b) {
    const double diff = alpha[a] - alpha[b];
    total += std::abs(diff);
    out.subgradient[a] += lambda * sign(diff);
    out.subgradient[b] -= lambda * sign(diff);
  };
  for (std::size_t r = 0; r < height; ++r) {
    for (std::size_t c = 0; c < width; ++c) {
      const std::size_t at = r * width + c;
      if (r > 0) pair(at, at - width);
      if (c > 0) pair(at, at - 1);
    }
  }
  out.value = lambda * total;
  return out;
}

std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart) {
  return Rng(seed).split(0x5245u, restart).key();
}

TrainerRun::TrainerRun(const Dataset& data, LearnerSpec learner, LossSpec loss, TrainConfig cfg, RegularizerSpec reg,
                       std::uint64_t run_seed)
    : data_(&data),
      learner_(learner),
      loss_(loss),
      cfg_(cfg),
      reg_(reg),
      rng_(run_seed) {
  data.validate();
  cfg_.validate();
  reg_.validate(data.cols());
  loss_.check_task(data.task);
  if (data.rows() < 2) throw std::invalid_argument("training needs at least two samples");

  const double initial = std::min(1.0, cfg_.initial_selections / static_cast<double>(cfg_.ensemble_size));
  alpha_ = SelectionProbs::constant(data.cols(), initial);

  const auto batches = static_cast<std::size_t>(std::ceil(1.0 / cfg_.minibatch_fraction - 1e-9));
  batch_count_ = std::clamp<std::size_t>(batches, 2, data.rows());

  order_.resize(data.rows());
  report_.seed = run_seed;
  report_.learning_rate = cfg_.learning_rate;
}

void TrainerRun::begin_epoch() {
  std::iota(order_.begin(), order_.end(), std::size_t{0});
  Rng shuffle = rng_.split(kShuffleStream, epoch_);
  shuffle.shuffle(std::span<std::size_t>(order_));
  epoch_objective_sum_ = 0.0;
  epoch_steps_ = 0;
}

void TrainerRun::run_minibatch(std::size_t b, const PenaltyHook& extra) {
  if (report_.aborted) return;
  const Dataset& data = *data_;
  const std::size_t n = data.rows();
  const std::size_t lo = b * n / batch_count_;
  const std::size_t hi = (b + 1) * n / batch_count_;
  std::vector<std::size_t> batch(order_.begin() + static_cast<std::ptrdiff_t>(lo),
                                 order_.begin() + static_cast<std::ptrdiff_t>(hi));
  std::vector<std::size_t> pool;
  pool.reserve(n - batch.size());
  pool.insert(pool.end(), order_.begin(), order_.begin() + static_cast<std::ptrdiff_t>(lo));
  pool.insert(pool.end(), order_.begin() + static_cast<std::ptrdiff_t>(hi), order_.end());

  const std::uint64_t phase = epoch_ * batch_count_ + b;
  Rng subset_rng = rng_.split(kSubsetStream, phase);
  std::vector<FeatureSubset> subsets;
  subsets.reserve(cfg_.ensemble_size);
  for (std::size_t t = 0; t < cfg_.ensemble_size; ++t) subsets.push_back(sample_subset(alpha_, subset_rng));

  const auto models = kernels::fit_models(learner_, data, pool, subsets, rng_.split(kModelStream, phase));
  const auto predictions = kernels::predict_models(models, data, batch);
  std::vector<double> targets;
  targets.reserve(batch.size());
  for (std::size_t r : batch) targets.push_back(data.target[r]);

  report_.retrain_steps.push_back(report_.total_steps);
  ImportanceState state(alpha_, std::move(subsets));
  SelectionProbs beta = alpha_;
  const double teff_threshold = cfg_.teff_retrain_fraction * static_cast<double>(cfg_.ensemble_size);

  for (std::size_t step = 0; step < cfg_.max_steps_between_retrain; ++step) {
    GradientEstimate g = estimate_gradient(predictions, state, targets, loss_);
    double objective = g.mean_loss;
    if (reg_.lambda_l1 > 0.0) {
      const auto pen = l1_penalty(beta.values(), reg_.lambda_l1);
      objective += pen.value;
      for (std::size_t j = 0; j < g.partials.size(); ++j) g.partials[j] += pen.subgradient[j];
    }
    if (reg_.lambda_fused > 0.0) {
      const auto pen = fused_penalty(beta.values(), reg_.grid_height, reg_.grid_width, reg_.lambda_fused);
      objective += pen.value;
      for (std::size_t j = 0; j < g.partials.size(); ++j) g.partials[j] += pen.subgradient[j];
    }
    if (extra) objective += extra(beta.values(), g.partials);

    for (std::uint8_t u : g.undefined) report_.undefined_partials += u;
    const bool finite = std::isfinite(objective) &&
                        std::all_of(g.partials.begin(), g.partials.end(), [](double v) { return std::isfinite(v); });
    if (!finite) {
      report_.aborted = true;
      report_.abort_reason = "non-finite gradient at step " + std::to_string(report_.total_steps);
      return;
    }
    epoch_objective_sum_ += objective;
    ++epoch_steps_;

    beta.descend(g.partials, cfg_.learning_rate);
    state.update(beta);
    ++report_.total_steps;
    report_.teff_trace.push_back(state.t_eff());
    if (state.collapsed()) {
      ++report_.collapse_events;
      break;
    }
    if (state.t_eff() < teff_threshold) break;
  }
  alpha_ = beta;
}

void TrainerRun::end_epoch() {
  if (report_.aborted) return;
  const double mean = epoch_steps_ > 0 ? epoch_objective_sum_ / static_cast<double>(epoch_steps_)
                                       : std::numeric_limits<double>::quiet_NaN();
  report_.epoch_objective.push_back(mean);
  if (cfg_.verbose) {
    const auto& trace = report_.teff_trace;
    const double teff_min = trace.empty() ? 0.0 : *std::min_element(trace.end() - static_cast<std::ptrdiff_t>(std::min<std::size_t>(trace.size(), epoch_steps_)), trace.end());
    std::cerr << "[prsb] seed " << report_.seed << " epoch " << epoch_ + 1 << "/" << cfg_.epochs << " objective "
              << mean << " sum(alpha) " << alpha_.sum() << " steps " << epoch_steps_ << " min T_eff " << teff_min
              << "\n";
  }
  ++epoch_;
}

void TrainerRun::run(const PenaltyHook& extra) {
  while (!finished()) {
    begin_epoch();
    for (std::size_t b = 0; b < batch_count_ && !report_.aborted; ++b) run_minibatch(b, extra);
    end_epoch();
  }
}

TrainReport TrainerRun::finish_report() const {
  TrainReport out = report_;
  out.final_alpha = alpha_;
  const auto& trace = out.epoch_objective;
  if (out.aborted || trace.empty()) {
    out.selection_score = std::numeric_limits<double>::infinity();
  } else {
    const std::size_t window = std::min(kSelectionWindow, trace.size());
    out.selection_score =
        std::accumulate(trace.end() - static_cast<std::ptrdiff_t>(window), trace.end(), 0.0) /
        static_cast<double>(window);
  }
  return out;
}

Ensemble fit_final_ensemble(const Dataset& data, const LearnerSpec& learner, const SelectionProbs& alpha,
                            std::size_t ensemble_size, std::uint64_t run_seed) {
  const Rng rng(run_seed);
  Rng subset_rng = rng.split(kFinalSubsetStream);
  std::vector<FeatureSubset> subsets;
  subsets.reserve(ensemble_size);
  for (std::size_t t = 0; t < ensemble_size; ++t) subsets.push_back(sample_subset(alpha, subset_rng));
  std::vector<std::size_t> all(data.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  Ensemble ensemble;
  ensemble.models = kernels::fit_models(learner, data, all, subsets, rng.split(kFinalModelStream));
  ensemble.alpha = alpha;
  ensemble.task = data.task;
  ensemble.output_dim = data.output_dim();
  return ensemble;
}

Ensemble TrainerRun::fit_final() const {
  return fit_final_ensemble(*data_, learner_, alpha_, cfg_.ensemble_size, report_.seed);
}

TrainResult train(const Dataset& data, const LearnerSpec& learner, const LossSpec& loss, const TrainConfig& cfg,
                  const RegularizerSpec& reg) {
  cfg.validate();
  std::vector<TrainReport> reports(cfg.restarts);
  std::vector<SelectionProbs> alphas(cfg.restarts);
  std::vector<std::string> errors(cfg.restarts);

  auto run_restart = [&](std::size_t r) {
    try {
      TrainerRun run(data, learner, loss, cfg, reg, restart_seed(cfg.seed, r));
      run.run();
      reports[r] = run.finish_report();
      reports[r].restart = r;
      alphas[r] = run.alpha();
    } catch (const std::exception& e) {
      errors[r] = e.what();
    }
  };
  if (cfg.parallel_restarts) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(cfg.restarts); ++r) {
      run_restart(static_cast<std::size_t>(r));
    }
  } else {
    for (std::size_t r = 0; r < cfg.restarts; ++r) run_restart(r);
  }
  for (const auto& e : errors) {
    if (!e.empty()) throw std::invalid_argument(e);
  }

  std::size_t best = cfg.restarts;
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    if (reports[r].aborted) continue;
    if (best == cfg.restarts || reports[r].selection_score < reports[best].selection_score) best = r;
  }
  if (best == cfg.restarts) {
    throw std::runtime_error("every training restart aborted: " + reports.front().abort_reason);
  }

  TrainResult result;
  result.alpha = alphas[best];
  result.ensemble = fit_final_ensemble(data, learner, result.alpha, cfg.ensemble_size, restart_seed(cfg.seed, best));
  result.report = reports[best];
  result.restarts = std::move(reports);
  result.best_restart = best;
  return result;
}

}  // namespace prsb
