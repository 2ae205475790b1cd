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

#ifndef PRSB_KERNELS_HPP
#define PRSB_KERNELS_HPP

#include "prsb/base_learners.hpp"
#include "prsb/core_types.hpp"
#include "prsb/rng.hpp"
#include "prsb/sampling.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

/// Hot loops of the trainer. Every kernel has a serial reference path and an
/// OpenMP path; the parallel paths are deterministic (fixed per-item
/// accumulation order, per-model RNG streams), so both return the same bits
/// for fitting and prediction and agree to rounding for the gradient partials.
namespace prsb::kernels {

enum class Execution { kSerial, kParallel };

/// Sets the OpenMP worker count from PRSB_THREADS when it holds a positive
/// integer. Returns the count in effect.
int configure_threads_from_env();

/// Outputs of T models on n samples, stored [t][i][d].
class BatchPredictions {
 public:
  BatchPredictions() = default;
  BatchPredictions(std::size_t models, std::size_t samples, int dim);

  [[nodiscard]] std::size_t model_count() const { return models_; }
  [[nodiscard]] std::size_t sample_count() const { return samples_; }
  [[nodiscard]] int dim() const { return dim_; }

  [[nodiscard]] std::span<double> at(std::size_t t, std::size_t i) {
    return {values_.data() + (t * samples_ + i) * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  [[nodiscard]] std::span<const double> at(std::size_t t, std::size_t i) const {
    return {values_.data() + (t * samples_ + i) * static_cast<std::size_t>(dim_), static_cast<std::size_t>(dim_)};
  }
  [[nodiscard]] std::span<const double> values() const { return values_; }

 private:
  std::size_t models_ = 0;
  std::size_t samples_ = 0;
  int dim_ = 1;
  std::vector<double> values_;
};

/// Fits one model per subset. Model t trains on a bootstrap of `pool` drawn
/// from rng.split(t), so the result does not depend on the execution mode.
std::vector<TrainedModel> fit_models(const LearnerSpec& spec, const Dataset& data, std::span<const std::size_t> pool,
                                     std::span<const FeatureSubset> subsets, const Rng& rng,
                                     Execution mode = Execution::kParallel);

BatchPredictions predict_models(std::span<const TrainedModel> models, const Dataset& data,
                                std::span<const std::size_t> rows, Execution mode = Execution::kParallel);

/// sum_t weights[t] * P[t][i] / divisor for every sample; row-major n x dim.
std::vector<double> weighted_sum(const BatchPredictions& predictions, std::span<const double> weights, double divisor,
                                 Execution mode = Execution::kParallel);

struct Partials {
  std::vector<double> gradient;        ///< length M
  std::vector<std::uint8_t> undefined; ///< 1 where T_{j,0} or T_{j,1} is zero
};

/// Per-feature derivative
///   (1/n) sum_i sum_d dloss[i][d] * (f_{j,1}(x_i)[d] - f_{j,0}(x_i)[d])
/// with importance-weighted leave-one-out conditional means. Features whose
/// conditional mean is undefined get 0 and are flagged.
///
/// The reference evaluates both conditional means explicitly for every
/// (feature, sample) pair, recomputing leave-one-out weights factor by factor.
Partials partials_reference(const BatchPredictions& predictions, const ImportanceState& state,
                            std::span<const double> dloss);

/// Same quantity in O(T*(n*dim + M)): the sample and class sums are
/// contracted into one scalar per model before the feature loop, and the
/// leave-one-out weights come from the cached products in `state`.
Partials partials_parallel(const BatchPredictions& predictions, const ImportanceState& state,
                           std::span<const double> dloss);

}  // namespace prsb::kernels

#endif  // PRSB_KERNELS_HPP
