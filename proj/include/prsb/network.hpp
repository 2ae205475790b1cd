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

#ifndef PRSB_NETWORK_HPP
#define PRSB_NETWORK_HPP

#include "prsb/base_learners.hpp"
#include "prsb/core_types.hpp"
#include "prsb/trainer.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace prsb {

using GeneEdge = std::pair<std::size_t, std::size_t>;  ///< (regulator gene, target gene)

struct GrnProblem {
  Matrix expression;  ///< samples x genes
  std::vector<std::string> gene_names;
  /// Gene indices of the candidate regulators (rows of the alpha matrix).
  std::vector<std::size_t> regulators;
  std::vector<GeneEdge> gold;

  [[nodiscard]] std::size_t gene_count() const { return static_cast<std::size_t>(expression.cols()); }
  [[nodiscard]] std::size_t sample_count() const { return static_cast<std::size_t>(expression.rows()); }
  void validate() const;
};

struct Edge {
  std::size_t regulator = 0;  ///< gene index
  std::size_t target = 0;     ///< gene index
  double weight = 0.0;
};

struct GrnResult {
  double lambda = 0.0;
  /// regulators.size() x genes; self-regulation entries stay 0.
  Matrix alpha;
  /// Descending by weight, ties in (regulator row, target) order.
  std::vector<Edge> ranking;
  std::vector<TrainReport> column_reports;
  /// Per column: empty, or the error that stopped its training.
  std::vector<std::string> column_errors;
  std::size_t best_restart = 0;
  double objective = 0.0;
};

/// lambda * sum_j ||row_j||_2 over a row-major alpha matrix.
double group_penalty(const Matrix& alpha, double lambda);
/// lambda * alpha_jg / ||row_j||_2, and 0 on zero rows.
Matrix group_subgradient(const Matrix& alpha, double lambda);

/// Dataset predicting gene `target` from every candidate regulator but itself,
/// and the alpha row of each of its features.
std::pair<Dataset, std::vector<std::size_t>> target_dataset(const GrnProblem& problem, std::size_t target);

/// Seed of column g's trainer for restart r.
std::uint64_t column_seed(std::uint64_t seed, std::size_t target, std::size_t restart);

/// Joint PRSB over every target gene with the row-group regularizer. All
/// columns take each minibatch step in one synchronized round.
GrnResult grn_train(const GrnProblem& problem, const LearnerSpec& learner, const TrainConfig& cfg, double lambda);

std::vector<Edge> rank_edges(const GrnProblem& problem, const Matrix& alpha);
/// AUPR of an edge ranking against the gold edges (self-loops ignored).
double edge_aupr(const GrnProblem& problem, std::span<const Edge> ranking);
/// Edge AUPR averaged over random orderings of equal weights.
double edge_expected_aupr(const GrnProblem& problem, std::span<const Edge> ranking);
/// Gold edges among the candidate edges over all candidate edges.
double edge_prevalence(const GrnProblem& problem);
/// Number of rows with ||alpha_j||_2 > threshold.
std::size_t active_rows(const Matrix& alpha, double threshold = 0.01);
/// Mean over targets of the column sums of alpha.
double mean_column_sum(const Matrix& alpha);

std::vector<double> default_lambda_grid();

struct LambdaSweep {
  double chosen = 0.0;
  std::size_t chosen_index = 0;
  std::vector<double> grid;
  std::vector<double> mean_alpha_sum;
  std::vector<GrnResult> results;
};

/// Largest lambda whose mean column alpha sum exceeds 1 (the smallest grid
/// value when none does).
std::size_t select_lambda(std::span<const double> grid, std::span<const double> mean_alpha_sum);

LambdaSweep lambda_sweep(const GrnProblem& problem, const LearnerSpec& learner, const TrainConfig& cfg,
                         std::span<const double> grid);

}  // namespace prsb

#endif  // PRSB_NETWORK_HPP
