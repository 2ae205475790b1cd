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

#ifndef PRSB_EVAL_HPP
#define PRSB_EVAL_HPP

#include "prsb/core_types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace prsb {

/// Indices sorted by decreasing score, ties by ascending index.
std::vector<std::size_t> rank_features(std::span<const double> scores);

/// Area under the precision-recall curve of a ranking, in its
/// average-precision form: the mean over relevant items of the precision at
/// the rank where each is retrieved. Relevant items missing from the ranking
/// contribute zero. Throws std::invalid_argument if `relevant` is empty or
/// holds an index >= item_count.
double aupr(std::span<const std::size_t> ranking, std::span<const std::size_t> relevant, std::size_t item_count);

/// Expected AUPR of the score ranking when tied scores are ordered uniformly
/// at random. Equals aupr(rank_features(scores), ...) when no scores tie.
double expected_aupr(std::span<const double> scores, std::span<const std::size_t> relevant);

/// Index of the largest entry; ties resolve to the lowest index.
std::size_t argmax(std::span<const double> values);

double mean_squared_error(std::span<const double> predictions, std::span<const double> targets);

/// `probabilities` is row-major n x classes; predicted class is the argmax.
double misclassification_rate(std::span<const double> probabilities, std::span<const double> labels,
                              std::size_t classes);

/// MSE for regression, misclassification rate for classification.
/// `predictions` is row-major n x output_dim.
double test_error(std::span<const double> predictions, std::span<const double> targets, TaskKind task,
                  int output_dim);

}  // namespace prsb

#endif  // PRSB_EVAL_HPP
