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

#ifndef PRSB_ENSEMBLE_HPP
#define PRSB_ENSEMBLE_HPP

#include "prsb/base_learners.hpp"
#include "prsb/core_types.hpp"

#include <span>
#include <vector>

namespace prsb {

/// T trained base models with the subsets they saw and the distribution the
/// subsets were drawn from (empty `alpha` for uniform-K ensembles).
struct Ensemble {
  std::vector<TrainedModel> models;
  SelectionProbs alpha;
  TaskKind task = TaskKind::kRegression;
  int output_dim = 1;

  /// Unweighted mean of the base-model outputs.
  [[nodiscard]] Prediction predict(std::span<const double> x) const;
  /// Row-major N x output_dim predictions for every row of `data`.
  [[nodiscard]] std::vector<double> predict_all(const Dataset& data) const;
};

/// Row-major N x output_dim predictions of a single model.
std::vector<double> predict_all(const TrainedModel& model, const Dataset& data);

}  // namespace prsb

#endif  // PRSB_ENSEMBLE_HPP
