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

#ifndef PRSB_BASELINES_HPP
#define PRSB_BASELINES_HPP

#include "prsb/base_learners.hpp"
#include "prsb/core_types.hpp"
#include "prsb/ensemble.hpp"
#include "prsb/rng.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace prsb {

/// {1, M/100, M/50, M/20, M/10, M/5, M/3, M/2, sqrt(M), M}, each rounded
/// down, clamped to [1, M], sorted and deduplicated.
std::vector<std::size_t> default_k_grid(std::size_t feature_count);

/// Seeded fold id for every row. Classification folds are stratified by class.
std::vector<std::size_t> cv_folds(const Dataset& data, std::size_t folds, Rng& rng);

/// Uniformly random subset of exactly k of the m features.
FeatureSubset random_subset(std::size_t m, std::size_t k, Rng& rng);

struct RsbConfig {
  std::size_t ensemble_size = 100;
  /// Empty means default_k_grid(M).
  std::vector<std::size_t> k_grid;
  std::size_t cv_folds = 10;
};

struct RsbResult {
  Ensemble ensemble;
  std::size_t chosen_k = 0;
  std::vector<std::size_t> grid;
  std::vector<double> cv_errors;  ///< one per grid entry
};

/// T models, each fitted on a bootstrap of `rows` with k random features.
Ensemble fit_random_subspace(const Dataset& data, const LearnerSpec& learner, std::span<const std::size_t> rows,
                             std::size_t k, std::size_t ensemble_size, const Rng& rng);

RsbResult rsb_train(const Dataset& data, const LearnerSpec& learner, const RsbConfig& cfg, const Rng& rng);

/// One model on all features and all rows.
Ensemble single_model(const Dataset& data, const LearnerSpec& learner);

/// Cross-validated error of a single model restricted to `subset`.
double cv_subset_error(const Dataset& data, const LearnerSpec& learner, const FeatureSubset& subset,
                       std::span<const std::size_t> folds, std::size_t fold_count);

struct EdaConfig {
  std::size_t population = 100;
  std::size_t elite = 50;
  double initial_alpha = 0.05;
  std::size_t restarts = 20;
  std::size_t max_iterations = 100;
  std::size_t cv_folds = 10;

  void validate() const;
};

struct EdaIteration {
  double population_error = 0.0;
  double elite_error = 0.0;
  double hamming = 0.0;
};

struct EdaResult {
  SelectionProbs alpha;
  std::size_t best_restart = 0;
  /// Number of iterations run by the selected restart.
  std::size_t iterations = 0;
  bool converged = false;
  double final_error = 0.0;
  std::vector<EdaIteration> trace;
};

using SubsetScorer = std::function<double(const FeatureSubset&)>;

/// UMDA over m binary variables minimizing `scorer`, which must be
/// thread-safe.
EdaResult eda_optimize(std::size_t m, const SubsetScorer& scorer, const EdaConfig& cfg, const Rng& rng);

EdaResult eda_rank(const Dataset& data, const LearnerSpec& learner, const EdaConfig& cfg, const Rng& rng);

}  // namespace prsb

#endif  // PRSB_BASELINES_HPP
