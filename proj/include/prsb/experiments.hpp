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

// One cell of the simulated benchmark: a (problem, method, learner, seed)
// run from data generation to test metrics.
#ifndef PRSB_EXPERIMENTS_HPP
#define PRSB_EXPERIMENTS_HPP

#include "prsb/base_learners.hpp"
#include "prsb/baselines.hpp"
#include "prsb/core_types.hpp"
#include "prsb/simdata.hpp"

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string_view>
#include <vector>

namespace prsb {

enum class Method { kSingle, kRsb, kPrsb, kEda };

std::string_view to_string(Method method);
Method parse_method(std::string_view name);

struct ExperimentSettings {
  std::size_t ensemble_size = 100;
  std::size_t epochs = 200;
  std::size_t restarts = 20;
  double learning_rate = 0.1;
  std::size_t knn_k = 5;
  std::size_t rsb_folds = 10;
  EdaConfig eda;
  bool parallel_restarts = false;
  bool verbose = false;
};

/// Train/test split with features z-scored by training statistics.
struct PreparedData {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> relevant;
};

PreparedData prepare(const SimProblemSpec& spec);

struct CellResult {
  SimProblem problem = SimProblem::kHypercube;
  Method method = Method::kPrsb;
  LearnerKind learner = LearnerKind::kCartTree;
  std::uint64_t seed = 0;
  double test_error = 0.0;
  /// NaN when the method produces no feature ranking.
  double aupr = std::numeric_limits<double>::quiet_NaN();
  /// AUPR averaged over random orderings of tied selection probabilities.
  double aupr_tied = std::numeric_limits<double>::quiet_NaN();
  double alpha_sum = std::numeric_limits<double>::quiet_NaN();
  /// RSB only.
  double chosen_k = std::numeric_limits<double>::quiet_NaN();
  /// EDA only: iterations run by the kept restart.
  double iterations = std::numeric_limits<double>::quiet_NaN();
  double seconds = 0.0;
};

LearnerSpec learner_for(LearnerKind kind, const ExperimentSettings& settings);

CellResult run_cell(const PreparedData& data, SimProblem problem, Method method, LearnerKind learner,
                    std::uint64_t seed, const ExperimentSettings& settings);

CellResult run_cell(SimProblem problem, Method method, LearnerKind learner, std::uint64_t seed,
                    const ExperimentSettings& settings);

}  // namespace prsb

#endif  // PRSB_EXPERIMENTS_HPP
