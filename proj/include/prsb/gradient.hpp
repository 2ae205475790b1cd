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

#ifndef PRSB_GRADIENT_HPP
#define PRSB_GRADIENT_HPP

#include "prsb/base_learners.hpp"
#include "prsb/core_types.hpp"
#include "prsb/kernels.hpp"
#include "prsb/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace prsb {

enum class LossKind { kMse, kCrossEntropy };

struct LossSpec {
  LossKind kind = LossKind::kMse;
  double clamp_eps = 1e-12;

  /// MSE for regression, cross-entropy for classification.
  static LossSpec for_task(TaskKind task);
  /// Throws std::invalid_argument if the loss does not fit the task.
  void check_task(TaskKind task) const;
  [[nodiscard]] bool classification() const { return kind == LossKind::kCrossEntropy; }
};

struct LossValue {
  double value = 0.0;
  std::vector<double> derivative;  ///< dL/dprediction, one entry per output
};

/// MSE: (y-p)^2 and -2(y-p). Cross-entropy: -log p_y on the clamped
/// probability, derivative -1/p_y at the true class and 0 elsewhere.
LossValue loss_and_dloss(const LossSpec& loss, double y, std::span<const double> prediction);

/// Renormalizes a weighted class-probability vector to sum 1 and clamps it
/// below by `clamp_eps`. An all-zero vector is left as the uniform
/// distribution.
void finalize_class_probabilities(std::span<double> probabilities, double clamp_eps);

/// Importance-sampled ensemble output at state.beta():
/// (1/T) sum_t w_t f_t(x). Class probabilities are then renormalized and
/// clamped. Throws WeightCollapseError when every weight is zero.
Prediction ensemble_predict_is(std::span<const TrainedModel> models, const ImportanceState& state,
                               std::span<const double> x, double clamp_eps = 1e-12);

struct ConditionalMeans {
  std::optional<Prediction> without;  ///< f_{j,0}; empty when T_{j,0} = 0
  std::optional<Prediction> with;     ///< f_{j,1}; empty when T_{j,1} = 0
  std::size_t count_without = 0;
  std::size_t count_with = 0;
};

/// Leave-one-out weighted means of the sub-ensembles that exclude / include
/// feature j, each divided by its model count.
ConditionalMeans conditional_means(std::span<const TrainedModel> models, const ImportanceState& state,
                                   std::span<const double> x, std::size_t j);

struct GradientEstimate {
  std::vector<double> partials;
  std::vector<std::size_t> count_without;
  std::vector<std::size_t> count_with;
  std::vector<std::uint8_t> undefined;
  /// Some partial was zeroed because a conditional mean was undefined.
  bool retrain_hint = false;
  /// Ensemble predictions on the minibatch, row-major n x dim.
  std::vector<double> predictions;
  /// Mean loss of those predictions.
  double mean_loss = 0.0;
};

/// dF/dbeta_j on a minibatch whose base-model outputs are already in
/// `predictions`.
GradientEstimate estimate_gradient(const kernels::BatchPredictions& predictions, const ImportanceState& state,
                                   std::span<const double> targets, const LossSpec& loss,
                                   kernels::Execution mode = kernels::Execution::kParallel);

/// Convenience overload: evaluates the models on `minibatch` rows first.
GradientEstimate estimate_gradient(std::span<const TrainedModel> models, const ImportanceState& state,
                                   const Dataset& data, std::span<const std::size_t> minibatch, const LossSpec& loss);

/// Outputs f_z(x_i) of a deterministic learner for every subset z of M
/// features, for exact-expectation computations. Bit j of the mask index is
/// z_j. Only practical for small M.
class SubsetTable {
 public:
  SubsetTable(std::size_t features, std::size_t samples, int dim);

  [[nodiscard]] std::size_t feature_count() const { return features_; }
  [[nodiscard]] std::size_t sample_count() const { return samples_; }
  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] std::size_t subset_count() const { return std::size_t{1} << features_; }

  [[nodiscard]] std::span<double> at(std::size_t mask, std::size_t i);
  [[nodiscard]] std::span<const double> at(std::size_t mask, std::size_t i) const;

 private:
  std::size_t features_;
  std::size_t samples_;
  int dim_;
  std::vector<double> values_;
};

/// sum_z p(z|alpha) f_z(x_i), finalized like ensemble_predict_is for
/// classification.
Prediction exact_expectation(const SubsetTable& table, const SelectionProbs& alpha, std::size_t i,
                             const LossSpec& loss);

/// Exact conditional expectations given z_j = 0 / z_j = 1.
ConditionalMeans exact_conditional_means(const SubsetTable& table, const SelectionProbs& alpha, std::size_t i,
                                         std::size_t j);

/// F(alpha) = (1/N) sum_i L(y_i, E[f_z(x_i)]).
double exact_objective(const SubsetTable& table, const SelectionProbs& alpha, std::span<const double> targets,
                       const LossSpec& loss);

/// Gradient assembled from exact conditional expectations; equals the true
/// derivative of exact_objective.
GradientEstimate exact_gradient(const SubsetTable& table, const SelectionProbs& alpha,
                                std::span<const double> targets, const LossSpec& loss);

}  // namespace prsb

#endif  // PRSB_GRADIENT_HPP
