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

#include "prsb/network.hpp"

#include "prsb/eval.hpp"
#include "prsb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <set>
#include <stdexcept>

namespace prsb {
namespace {

constexpr std::uint64_t kColumnStream = 0x47524e;

}  // namespace

void GrnProblem::validate() const {
  const std::size_t g = gene_count();
  if (g < 2) throw std::invalid_argument("network inference needs at least two genes");
  if (sample_count() < 2) throw std::invalid_argument("network inference needs at least two samples");
  if (!gene_names.empty() && gene_names.size() != g) throw std::invalid_argument("gene name count does not match");
  if (regulators.empty()) throw std::invalid_argument("no candidate regulators");
  std::set<std::size_t> seen;
  for (std::size_t r : regulators) {
    if (r >= g) throw std::invalid_argument("regulator index out of range");
    if (!seen.insert(r).second) throw std::invalid_argument("duplicate candidate regulator");
  }
  for (const auto& [reg, target] : gold) {
    if (reg >= g || target >= g) throw std::invalid_argument("gold edge gene index out of range");
  }
  if (!expression.allFinite()) throw std::invalid_argument("expression matrix has non-finite values");
}

double group_penalty(const Matrix& alpha, double lambda) {
  double total = 0.0;
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) total += alpha.row(j).norm();
  return lambda * total;
}

Matrix group_subgradient(const Matrix& alpha, double lambda) {
  Matrix out = Matrix::Zero(alpha.rows(), alpha.cols());
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) {
    const double norm = alpha.row(j).norm();
    if (norm > 0.0) out.row(j) = lambda * alpha.row(j) / norm;
  }
  return out;
}

std::pair<Dataset, std::vector<std::size_t>> target_dataset(const GrnProblem& problem, std::size_t target) {
  std::vector<std::size_t> rows;
  std::vector<std::size_t> genes;
  for (std::size_t j = 0; j < problem.regulators.size(); ++j) {
    if (problem.regulators[j] == target) continue;
    rows.push_back(j);
    genes.push_back(problem.regulators[j]);
  }
  if (rows.empty()) throw std::invalid_argument("target gene has no candidate regulator besides itself");
  const auto n = static_cast<Eigen::Index>(problem.sample_count());
  Dataset d;
  d.task = TaskKind::kRegression;
  d.features.resize(n, static_cast<Eigen::Index>(genes.size()));
  for (std::size_t c = 0; c < genes.size(); ++c) {
    d.features.col(static_cast<Eigen::Index>(c)) = problem.expression.col(static_cast<Eigen::Index>(genes[c]));
  }
  d.target.resize(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    d.target[static_cast<std::size_t>(i)] = problem.expression(i, static_cast<Eigen::Index>(target));
  }
  return {std::move(d), std::move(rows)};
}

std::uint64_t column_seed(std::uint64_t seed, std::size_t target, std::size_t restart) {
  return restart_seed(Rng(seed).split(kColumnStream, target).key(), restart);
}

GrnResult grn_train(const GrnProblem& problem, const LearnerSpec& learner, const TrainConfig& cfg, double lambda) {
  problem.validate();
  cfg.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
  const std::size_t genes = problem.gene_count();
  const std::size_t m = problem.regulators.size();
  const double column_scale = static_cast<double>(genes);

  std::vector<Dataset> data(genes);
  std::vector<std::vector<std::size_t>> row_of(genes);
  for (std::size_t g = 0; g < genes; ++g) std::tie(data[g], row_of[g]) = target_dataset(problem, g);

  GrnResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    GrnResult result;
    result.lambda = lambda;
    result.alpha = Matrix::Zero(static_cast<Eigen::Index>(m), static_cast<Eigen::Index>(genes));
    result.column_errors.assign(genes, {});
    std::vector<std::unique_ptr<TrainerRun>> runs(genes);
    for (std::size_t g = 0; g < genes; ++g) {
      runs[g] = std::make_unique<TrainerRun>(data[g], learner, LossSpec{}, cfg, RegularizerSpec{},
                                             column_seed(cfg.seed, g, r));
      const auto& a = runs[g]->alpha();
      for (std::size_t k = 0; k < row_of[g].size(); ++k) {
        result.alpha(static_cast<Eigen::Index>(row_of[g][k]), static_cast<Eigen::Index>(g)) = a[k];
      }
    }

    const std::size_t batches = runs[0]->minibatches_per_epoch();
    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
      for (auto& run : runs) run->begin_epoch();
      for (std::size_t b = 0; b < batches; ++b) {
        // Squared row norms of the snapshot; each column swaps in its own
        // current values.
        Eigen::VectorXd row_sq = result.alpha.rowwise().squaredNorm();
        const Matrix snapshot = result.alpha;
#pragma omp parallel for schedule(dynamic, 1)
        for (std::ptrdiff_t gi = 0; gi < static_cast<std::ptrdiff_t>(genes); ++gi) {
          const auto g = static_cast<std::size_t>(gi);
          if (!result.column_errors[g].empty() || runs[g]->report().aborted) continue;
          PenaltyHook hook;
          if (lambda > 0.0) {
            hook = [&, g](std::span<const double> beta, std::span<double> gradient) {
              double value = 0.0;
              std::vector<double> own(m, 0.0);
              for (std::size_t k = 0; k < beta.size(); ++k) own[row_of[g][k]] = beta[k];
              for (std::size_t j = 0; j < m; ++j) {
                const double prev = snapshot(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(g));
                const double sq = std::max(0.0, row_sq[static_cast<Eigen::Index>(j)] - prev * prev) + own[j] * own[j];
                value += std::sqrt(sq);
              }
              for (std::size_t k = 0; k < beta.size(); ++k) {
                const std::size_t j = row_of[g][k];
                const double prev = snapshot(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(g));
                const double norm =
                    std::sqrt(std::max(0.0, row_sq[static_cast<Eigen::Index>(j)] - prev * prev) + beta[k] * beta[k]);
                if (norm > 0.0) gradient[k] += column_scale * lambda * beta[k] / norm;
              }
              return lambda * value;
            };
          }
          try {
            runs[g]->run_minibatch(b, hook);
          } catch (const std::exception& e) {
            result.column_errors[g] = e.what();
          }
        }
        for (std::size_t g = 0; g < genes; ++g) {
          const auto& a = runs[g]->alpha();
          for (std::size_t k = 0; k < row_of[g].size(); ++k) {
            result.alpha(static_cast<Eigen::Index>(row_of[g][k]), static_cast<Eigen::Index>(g)) = a[k];
          }
        }
      }
      for (auto& run : runs) run->end_epoch();
    }

    double score = 0.0;
    std::size_t scored = 0;
    for (std::size_t g = 0; g < genes; ++g) {
      result.column_reports.push_back(runs[g]->finish_report());
      result.column_reports.back().restart = r;
      if (result.column_errors[g].empty() && !result.column_reports.back().aborted) {
        score += result.column_reports.back().selection_score;
        ++scored;
      }
    }
    result.objective = scored == 0 ? std::numeric_limits<double>::infinity() : score / static_cast<double>(scored);
    result.best_restart = r;
    if (r == 0 || result.objective < best.objective) best = std::move(result);
  }
  best.ranking = rank_edges(problem, best.alpha);
  return best;
}

std::vector<Edge> rank_edges(const GrnProblem& problem, const Matrix& alpha) {
  std::vector<Edge> edges;
  for (std::size_t j = 0; j < problem.regulators.size(); ++j) {
    for (std::size_t g = 0; g < problem.gene_count(); ++g) {
      if (problem.regulators[j] == g) continue;
      edges.push_back({problem.regulators[j], g, alpha(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(g))});
    }
  }
  std::stable_sort(edges.begin(), edges.end(), [](const Edge& a, const Edge& b) { return a.weight > b.weight; });
  return edges;
}

double edge_aupr(const GrnProblem& problem, std::span<const Edge> ranking) {
  const std::set<GeneEdge> gold(problem.gold.begin(), problem.gold.end());
  std::vector<std::size_t> order(ranking.size());
  std::vector<std::size_t> relevant;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    order[i] = i;
    if (gold.count({ranking[i].regulator, ranking[i].target}) > 0) relevant.push_back(i);
  }
  return aupr(order, relevant, ranking.size());
}

double edge_expected_aupr(const GrnProblem& problem, std::span<const Edge> ranking) {
  const std::set<GeneEdge> gold(problem.gold.begin(), problem.gold.end());
  std::vector<double> scores(ranking.size());
  std::vector<std::size_t> relevant;
  for (std::size_t i = 0; i < ranking.size(); ++i) {
    scores[i] = ranking[i].weight;
    if (gold.count({ranking[i].regulator, ranking[i].target}) > 0) relevant.push_back(i);
  }
  return expected_aupr(scores, relevant);
}

double edge_prevalence(const GrnProblem& problem) {
  const std::set<std::size_t> regs(problem.regulators.begin(), problem.regulators.end());
  const std::set<GeneEdge> gold(problem.gold.begin(), problem.gold.end());
  std::size_t hits = 0;
  for (const auto& [reg, target] : gold) hits += (reg != target && regs.count(reg) > 0) ? 1 : 0;
  std::size_t candidates = 0;
  for (std::size_t r : problem.regulators) candidates += problem.gene_count() - (r < problem.gene_count() ? 1 : 0);
  return candidates == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(candidates);
}

std::size_t active_rows(const Matrix& alpha, double threshold) {
  std::size_t count = 0;
  for (Eigen::Index j = 0; j < alpha.rows(); ++j) count += alpha.row(j).norm() > threshold ? 1 : 0;
  return count;
}

double mean_column_sum(const Matrix& alpha) {
  if (alpha.cols() == 0) return 0.0;
  return alpha.sum() / static_cast<double>(alpha.cols());
}

std::vector<double> default_lambda_grid() { return {0.0, 0.002, 0.005, 0.007, 0.01, 0.015}; }

std::size_t select_lambda(std::span<const double> grid, std::span<const double> mean_alpha_sum) {
  if (grid.empty() || grid.size() != mean_alpha_sum.size()) throw std::invalid_argument("bad lambda sweep input");
  std::size_t chosen = 0;
  bool found = false;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!found && grid[i] < grid[chosen]) chosen = i;
    if (mean_alpha_sum[i] > 1.0 && (!found || grid[i] > grid[chosen])) {
      chosen = i;
      found = true;
    }
  }
  return chosen;
}

LambdaSweep lambda_sweep(const GrnProblem& problem, const LearnerSpec& learner, const TrainConfig& cfg,
                         std::span<const double> grid) {
  if (grid.empty()) throw std::invalid_argument("empty lambda grid");
  LambdaSweep out;
  out.grid.assign(grid.begin(), grid.end());
  for (double lambda : grid) {
    out.results.push_back(grn_train(problem, learner, cfg, lambda));
    out.mean_alpha_sum.push_back(mean_column_sum(out.results.back().alpha));
  }
  out.chosen_index = select_lambda(out.grid, out.mean_alpha_sum);
  out.chosen = out.grid[out.chosen_index];
  return out;
}

}  // namespace prsb
