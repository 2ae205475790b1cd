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

#include "prsb/baselines.hpp"

#include "prsb/eval.hpp"
#include "prsb/kernels.hpp"
#include "prsb/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace prsb {
namespace {

// Out-of-fold predictions of `fit_fold` pooled over all rows, scored once.
template <class FitFold>
double pooled_cv_error(const Dataset& data, std::span<const std::size_t> folds, std::size_t fold_count,
                       FitFold&& fit_fold) {
  const std::size_t n = data.rows();
  const auto dim = static_cast<std::size_t>(data.output_dim());
  std::vector<double> predictions(n * dim, 0.0);
  std::vector<std::size_t> train_rows;
  for (std::size_t f = 0; f < fold_count; ++f) {
    train_rows.clear();
    bool any_test = false;
    for (std::size_t i = 0; i < n; ++i) {
      if (folds[i] == f) {
        any_test = true;
      } else {
        train_rows.push_back(i);
      }
    }
    if (!any_test) continue;
    const Ensemble model = fit_fold(std::span<const std::size_t>(train_rows), f);
    for (std::size_t i = 0; i < n; ++i) {
      if (folds[i] != f) continue;
      const Prediction p = model.predict(data.row(i));
      std::copy(p.begin(), p.end(), predictions.begin() + static_cast<std::ptrdiff_t>(i * dim));
    }
  }
  return test_error(predictions, data.target, data.task, data.output_dim());
}

std::vector<std::size_t> all_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), std::size_t{0});
  return rows;
}

}  // namespace

std::vector<std::size_t> default_k_grid(std::size_t feature_count) {
  if (feature_count == 0) throw std::invalid_argument("K grid needs at least one feature");
  const std::size_t m = feature_count;
  std::vector<std::size_t> grid = {1, m / 100, m / 50, m / 20, m / 10, m / 5, m / 3, m / 2,
                                   static_cast<std::size_t>(std::floor(std::sqrt(static_cast<double>(m)))), m};
  for (auto& k : grid) k = std::clamp<std::size_t>(k, 1, m);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::vector<std::size_t> cv_folds(const Dataset& data, std::size_t folds, Rng& rng) {
  const std::size_t n = data.rows();
  if (folds < 2) throw std::invalid_argument("cross-validation needs at least 2 folds");
  if (n < folds) throw std::invalid_argument("fewer rows than cross-validation folds");
  std::vector<std::vector<std::size_t>> strata;
  if (data.task == TaskKind::kClassification) {
    strata.resize(data.class_count);
    for (std::size_t i = 0; i < n; ++i) strata[data.label(i)].push_back(i);
  } else {
    strata.push_back(all_rows(n));
  }
  std::vector<std::size_t> out(n, 0);
  std::size_t next = 0;
  for (auto& stratum : strata) {
    rng.shuffle(std::span<std::size_t>(stratum));
    for (std::size_t i : stratum) out[i] = next++ % folds;
  }
  return out;
}

FeatureSubset random_subset(std::size_t m, std::size_t k, Rng& rng) {
  if (k > m) throw std::invalid_argument("subset size exceeds feature count");
  std::vector<std::size_t> idx = all_rows(m);
  for (std::size_t i = 0; i < k; ++i) {
    const auto r = i + static_cast<std::size_t>(rng.below(m - i));
    std::swap(idx[i], idx[r]);
  }
  idx.resize(k);
  return FeatureSubset::from_indices(m, idx);
}

Ensemble fit_random_subspace(const Dataset& data, const LearnerSpec& learner, std::span<const std::size_t> rows,
                             std::size_t k, std::size_t ensemble_size, const Rng& rng) {
  const std::size_t m = data.cols();
  Rng subset_rng = rng.split(1);
  std::vector<FeatureSubset> subsets;
  subsets.reserve(ensemble_size);
  for (std::size_t t = 0; t < ensemble_size; ++t) subsets.push_back(random_subset(m, k, subset_rng));
  Ensemble ens;
  ens.models = kernels::fit_models(learner, data, rows, subsets, rng.split(2));
  ens.alpha = SelectionProbs::constant(m, static_cast<double>(k) / static_cast<double>(m));
  ens.task = data.task;
  ens.output_dim = data.output_dim();
  return ens;
}

RsbResult rsb_train(const Dataset& data, const LearnerSpec& learner, const RsbConfig& cfg, const Rng& rng) {
  data.validate();
  const std::size_t m = data.cols();
  if (cfg.ensemble_size == 0) throw std::invalid_argument("RSB ensemble size must be positive");
  RsbResult out;
  if (cfg.k_grid.empty()) {
    out.grid = default_k_grid(m);
  } else {
    out.grid = cfg.k_grid;
    for (auto& k : out.grid) k = std::clamp<std::size_t>(k, 1, m);
    std::sort(out.grid.begin(), out.grid.end());
    out.grid.erase(std::unique(out.grid.begin(), out.grid.end()), out.grid.end());
  }
  Rng fold_rng = rng.split(1);
  const auto folds = cv_folds(data, cfg.cv_folds, fold_rng);

  double best = std::numeric_limits<double>::infinity();
  for (std::size_t g = 0; g < out.grid.size(); ++g) {
    const std::size_t k = out.grid[g];
    const double err = pooled_cv_error(data, folds, cfg.cv_folds, [&](std::span<const std::size_t> rows, std::size_t f) {
      return fit_random_subspace(data, learner, rows, k, cfg.ensemble_size, rng.split(2, g * cfg.cv_folds + f));
    });
    out.cv_errors.push_back(err);
    if (err < best) {
      best = err;
      out.chosen_k = k;
    }
  }
  const auto rows = all_rows(data.rows());
  out.ensemble = fit_random_subspace(data, learner, rows, out.chosen_k, cfg.ensemble_size, rng.split(3));
  return out;
}

Ensemble single_model(const Dataset& data, const LearnerSpec& learner) {
  data.validate();
  const auto rows = all_rows(data.rows());
  Ensemble ens;
  ens.models.push_back(fit(learner, data, FeatureSubset::full(data.cols()), rows));
  ens.alpha = SelectionProbs::constant(data.cols(), 1.0);
  ens.task = data.task;
  ens.output_dim = data.output_dim();
  return ens;
}

double cv_subset_error(const Dataset& data, const LearnerSpec& learner, const FeatureSubset& subset,
                       std::span<const std::size_t> folds, std::size_t fold_count) {
  return pooled_cv_error(data, folds, fold_count, [&](std::span<const std::size_t> rows, std::size_t) {
    Ensemble ens;
    ens.models.push_back(fit(learner, data, subset, rows));
    ens.task = data.task;
    ens.output_dim = data.output_dim();
    return ens;
  });
}

void EdaConfig::validate() const {
  if (population < 2) throw std::invalid_argument("EDA population must hold at least 2 subsets");
  if (elite == 0 || elite > population) throw std::invalid_argument("EDA elite size must be in [1, population]");
  if (!(initial_alpha >= 0.0 && initial_alpha <= 1.0)) throw std::invalid_argument("EDA initial alpha must be in [0,1]");
  if (restarts == 0 || max_iterations == 0) throw std::invalid_argument("EDA restarts and iterations must be positive");
}

EdaResult eda_optimize(std::size_t m, const SubsetScorer& scorer, const EdaConfig& cfg, const Rng& rng) {
  cfg.validate();
  if (m == 0) throw std::invalid_argument("EDA needs at least one feature");
  EdaResult best;
  best.final_error = std::numeric_limits<double>::infinity();
  const std::size_t t_count = cfg.population;

  for (std::size_t r = 0; r < cfg.restarts; ++r) {
    Rng sampler = rng.split(r);
    std::vector<double> alpha(m, cfg.initial_alpha);
    std::vector<FeatureSubset> population(t_count);
    std::vector<double> errors(t_count);
    std::vector<std::size_t> order(t_count);
    std::vector<EdaIteration> trace;
    double d_init = 0.0;
    double final_error = 0.0;
    bool converged = false;

    for (std::size_t it = 0; it < cfg.max_iterations; ++it) {
      const SelectionProbs probs{std::vector<double>(alpha)};
      for (auto& z : population) z = sample_subset(probs, sampler);
      const auto count = static_cast<std::ptrdiff_t>(t_count);
#pragma omp parallel for schedule(dynamic, 1)
      for (std::ptrdiff_t t = 0; t < count; ++t) {
        errors[static_cast<std::size_t>(t)] = scorer(population[static_cast<std::size_t>(t)]);
      }
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return errors[a] < errors[b]; });

      EdaIteration step;
      step.population_error = std::accumulate(errors.begin(), errors.end(), 0.0) / static_cast<double>(t_count);
      std::fill(alpha.begin(), alpha.end(), 0.0);
      for (std::size_t e = 0; e < cfg.elite; ++e) {
        const auto& z = population[order[e]];
        step.elite_error += errors[order[e]];
        for (std::size_t j = 0; j < m; ++j) alpha[j] += z.test(j) ? 1.0 : 0.0;
      }
      step.elite_error /= static_cast<double>(cfg.elite);
      for (auto& a : alpha) a /= static_cast<double>(cfg.elite);
      step.hamming = mean_pairwise_hamming(population);
      trace.push_back(step);
      final_error = step.population_error;

      if (it == 0) d_init = step.hamming;
      if (step.hamming == 0.0 || (it > 0 && step.hamming < 0.5 * d_init)) {
        converged = true;
        break;
      }
    }

    if (final_error < best.final_error) {
      best.alpha = SelectionProbs(std::move(alpha));
      best.best_restart = r;
      best.iterations = trace.size();
      best.converged = converged;
      best.final_error = final_error;
      best.trace = std::move(trace);
    }
  }
  return best;
}

EdaResult eda_rank(const Dataset& data, const LearnerSpec& learner, const EdaConfig& cfg, const Rng& rng) {
  data.validate();
  Rng fold_rng = rng.split(1);
  const auto folds = cv_folds(data, cfg.cv_folds, fold_rng);
  const SubsetScorer scorer = [&](const FeatureSubset& z) {
    return cv_subset_error(data, learner, z, folds, cfg.cv_folds);
  };
  return eda_optimize(data.cols(), scorer, cfg, rng.split(2));
}

}  // namespace prsb
