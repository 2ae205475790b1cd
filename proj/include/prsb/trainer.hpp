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

#ifndef PRSB_TRAINER_HPP
#define PRSB_TRAINER_HPP

#include "prsb/base_learners.hpp"
#include "prsb/core_types.hpp"
#include "prsb/ensemble.hpp"
#include "prsb/gradient.hpp"
#include "prsb/rng.hpp"
#include "prsb/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

namespace prsb {

/// Penalty coefficients added to the data objective.
struct RegularizerSpec {
  double lambda_l1 = 0.0;
  /// Total-variation coefficient over an H x W grid of features (row-major).
  double lambda_fused = 0.0;
  std::size_t grid_height = 0;
  std::size_t grid_width = 0;
  /// Row-group coefficient; only used by the multi-output network trainer.
  double lambda_group = 0.0;

  void validate(std::size_t feature_count) const;
};

struct PenaltyValue {
  double value = 0.0;
  std::vector<double> subgradient;
};

/// lambda * sum_j alpha_j; gradient lambda everywhere (alpha >= 0).
PenaltyValue l1_penalty(std::span<const double> alpha, double lambda);

/// lambda * (sum of |differences| between vertical and horizontal grid
/// neighbours). Subgradient uses sign(0) = 0.
PenaltyValue fused_penalty(std::span<const double> alpha, std::size_t height, std::size_t width, double lambda);

/// Extra penalty evaluated at the current parameters: adds its subgradient to
/// `gradient` and returns its value.
using PenaltyHook = std::function<double(std::span<const double> beta, std::span<double> gradient)>;

struct TrainReport {
  std::uint64_t seed = 0;
  std::size_t restart = 0;
  double learning_rate = 0.0;
  /// Mean over the epoch's gradient steps of minibatch loss plus penalties.
  std::vector<double> epoch_objective;
  /// Global gradient-step index at which each model-training phase started.
  std::vector<std::size_t> retrain_steps;
  /// T_eff after every gradient step.
  std::vector<double> teff_trace;
  std::size_t total_steps = 0;
  std::size_t collapse_events = 0;
  /// Partials zeroed because a conditional mean had no models.
  std::size_t undefined_partials = 0;
  /// Mean objective over the last min(50, epochs) epochs; restart selection key.
  double selection_score = 0.0;
  SelectionProbs final_alpha;
  bool aborted = false;
  std::string abort_reason;
};

struct TrainResult {
  SelectionProbs alpha;
  Ensemble ensemble;
  TrainReport report;
  /// Reports of every restart, in restart order.
  std::vector<TrainReport> restarts;
  std::size_t best_restart = 0;
};

/// Seed of restart r; independent of the number of restarts requested.
std::uint64_t restart_seed(std::uint64_t seed, std::size_t restart);

/// One restart of the projected-gradient training loop, exposed step by step
/// so several runs can be interleaved (the network trainer advances all
/// target genes one minibatch at a time).
class TrainerRun {
 public:
  TrainerRun(const Dataset& data, LearnerSpec learner, LossSpec loss, TrainConfig cfg, RegularizerSpec reg,
             std::uint64_t run_seed);

  [[nodiscard]] std::size_t minibatches_per_epoch() const { return batch_count_; }
  [[nodiscard]] std::size_t epoch() const { return epoch_; }
  [[nodiscard]] bool finished() const { return epoch_ >= cfg_.epochs || report_.aborted; }

  void begin_epoch();
  /// Trains T models on the complement of minibatch b, then takes projected
  /// gradient steps until T_eff falls below the retrain threshold or the
  /// step cap is reached.
  void run_minibatch(std::size_t b, const PenaltyHook& extra = {});
  void end_epoch();

  /// Runs every remaining epoch.
  void run(const PenaltyHook& extra = {});

  [[nodiscard]] const SelectionProbs& alpha() const { return alpha_; }
  [[nodiscard]] const TrainReport& report() const { return report_; }

  /// Final report with the selection score filled in.
  [[nodiscard]] TrainReport finish_report() const;
  /// Final T-model ensemble drawn from the current alpha and fitted on
  /// bootstraps of the full dataset.
  [[nodiscard]] Ensemble fit_final() const;

 private:
  const Dataset* data_;
  LearnerSpec learner_;
  LossSpec loss_;
  TrainConfig cfg_;
  RegularizerSpec reg_;
  Rng rng_;
  SelectionProbs alpha_;
  std::size_t batch_count_ = 0;
  std::size_t epoch_ = 0;
  std::vector<std::size_t> order_;
  double epoch_objective_sum_ = 0.0;
  std::size_t epoch_steps_ = 0;
  TrainReport report_;
};

/// T models with subsets drawn from `alpha`, each fitted on a bootstrap of the
/// full dataset. Streams are keyed by `run_seed`.
Ensemble fit_final_ensemble(const Dataset& data, const LearnerSpec& learner, const SelectionProbs& alpha,
                            std::size_t ensemble_size, std::uint64_t run_seed);

/// Full training: cfg.restarts independent runs, keeping the one with the
/// lowest selection score, followed by the final ensemble fit.
TrainResult train(const Dataset& data, const LearnerSpec& learner, const LossSpec& loss, const TrainConfig& cfg,
                  const RegularizerSpec& reg = {});

}  // namespace prsb

#endif  // PRSB_TRAINER_HPP
