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

#include "prsb/gradient.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace prsb {

LossSpec LossSpec::for_task(TaskKind task) {
  return {task == TaskKind::kRegression ? LossKind::kMse : LossKind::kCrossEntropy};
}

void LossSpec::check_task(TaskKind task) const {
  if ((kind == LossKind::kMse) != (task == TaskKind::kRegression)) {
    throw std::invalid_argument(kind == LossKind::kMse ? "mse loss requires a regression task"
                                                       : "cross-entropy loss requires a classification task");
  }
}

LossValue loss_and_dloss(const LossSpec& loss, double y, std::span<const double> prediction) {
  LossValue out;
  if (loss.kind == LossKind::kMse) {
    if (prediction.size() != 1) throw std::invalid_argument("mse expects a scalar prediction");
    const double residual = y - prediction[0];
    out.value = residual * residual;
    out.derivative = {-2.0 * residual};
    return out;
  }
  const auto label = static_cast<std::size_t>(y);
  if (label >= prediction.size()) throw std::invalid_argument("class label outside the prediction vector");
  const double p = std::max(prediction[label], loss.clamp_eps);
  out.value = -std::log(p);
  out.derivative.assign(prediction.size(), 0.0);
  out.derivative[label] = -1.0 / p;
  return out;
}

void finalize_class_probabilities(std::span<double> probabilities, double clamp_eps) {
  double total = 0.0;
  for (double v : probabilities) total += v;
  if (total > 0.0) {
    for (double& v : probabilities) v /= total;
  } else {
    for (double& v : probabilities) v = 1.0 / static_cast<double>(probabilities.size());
  }
  for (double& v : probabilities) v = std::max(v, clamp_eps);
}

Prediction ensemble_predict_is(std::span<const TrainedModel> models, const ImportanceState& state,
                               std::span<const double> x, double clamp_eps) {
  if (models.size() != state.model_count()) throw std::invalid_argument("models and importance state disagree");
  if (models.empty()) throw std::invalid_argument("ensemble is empty");
  if (state.collapsed()) throw WeightCollapseError("all importance weights are zero");
  const auto dim = static_cast<std::size_t>(models.front().output_dim());
  Prediction sum(dim, 0.0);
  Prediction one(dim);
  const auto weights = state.weights();
  for (std::size_t t = 0; t < models.size(); ++t) {
    models[t].predict(x, one);
    for (std::size_t d = 0; d < dim; ++d) sum[d] += weights[t] * one[d];
  }
  const auto t_count = static_cast<double>(models.size());
  for (double& v : sum) v /= t_count;
  if (models.front().task() == TaskKind::kClassification) finalize_class_probabilities(sum, clamp_eps);
  return sum;
}

ConditionalMeans conditional_means(std::span<const TrainedModel> models, const ImportanceState& state,
                                   std::span<const double> x, std::size_t j) {
  if (models.size() != state.model_count()) throw std::invalid_argument("models and importance state disagree");
  if (j >= state.feature_count()) throw std::out_of_range("feature index out of range");
  const auto dim = static_cast<std::size_t>(models.empty() ? 1 : models.front().output_dim());
  Prediction sum0(dim, 0.0);
  Prediction sum1(dim, 0.0);
  Prediction one(dim);
  ConditionalMeans out;
  for (std::size_t t = 0; t < models.size(); ++t) {
    const bool on = state.subsets()[t].test(j);
    const double w = state.weight_without(t, j);
    models[t].predict(x, one);
    auto& sum = on ? sum1 : sum0;
    for (std::size_t d = 0; d < dim; ++d) sum[d] += w * one[d];
    (on ? out.count_with : out.count_without) += 1;
  }
  if (out.count_without > 0) {
    for (double& v : sum0) v /= static_cast<double>(out.count_without);
    out.without = std::move(sum0);
  }
  if (out.count_with > 0) {
    for (double& v : sum1) v /= static_cast<double>(out.count_with);
    out.with = std::move(sum1);
  }
  return out;
}

GradientEstimate estimate_gradient(const kernels::BatchPredictions& predictions, const ImportanceState& state,
                                   std::span<const double> targets, const LossSpec& loss, kernels::Execution mode) {
  const std::size_t n = predictions.sample_count();
  if (n == 0) throw std::invalid_argument("minibatch is empty");
  if (targets.size() != n) throw std::invalid_argument("one target per minibatch sample is required");
  if (state.collapsed()) throw WeightCollapseError("all importance weights are zero");
  const auto dim = static_cast<std::size_t>(predictions.dim());

  GradientEstimate out;
  out.predictions =
      kernels::weighted_sum(predictions, state.weights(), static_cast<double>(predictions.model_count()), mode);
  std::vector<double> dloss(n * dim);
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::span<double> p(out.predictions.data() + i * dim, dim);
    if (loss.classification()) finalize_class_probabilities(p, loss.clamp_eps);
    const LossValue lv = loss_and_dloss(loss, targets[i], p);
    loss_sum += lv.value;
    std::copy(lv.derivative.begin(), lv.derivative.end(), dloss.begin() + static_cast<std::ptrdiff_t>(i * dim));
  }
  out.mean_loss = loss_sum / static_cast<double>(n);

  auto partials = mode == kernels::Execution::kParallel ? kernels::partials_parallel(predictions, state, dloss)
                                                        : kernels::partials_reference(predictions, state, dloss);
  out.partials = std::move(partials.gradient);
  out.undefined = std::move(partials.undefined);
  const std::size_t m = state.feature_count();
  out.count_with.resize(m);
  out.count_without.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    out.count_with[j] = state.count_with(j);
    out.count_without[j] = state.count_without(j);
    if (out.undefined[j]) out.retrain_hint = true;
  }
  return out;
}

GradientEstimate estimate_gradient(std::span<const TrainedModel> models, const ImportanceState& state,
                                   const Dataset& data, std::span<const std::size_t> minibatch, const LossSpec& loss) {
  const auto predictions = kernels::predict_models(models, data, minibatch);
  std::vector<double> targets;
  targets.reserve(minibatch.size());
  for (std::size_t r : minibatch) targets.push_back(data.target[r]);
  return estimate_gradient(predictions, state, targets, loss);
}

SubsetTable::SubsetTable(std::size_t features, std::size_t samples, int dim)
    : features_(features), samples_(samples), dim_(dim) {
  if (features > 20) throw std::invalid_argument("subset tables are limited to 20 features");
  values_.assign((std::size_t{1} << features) * samples * static_cast<std::size_t>(dim), 0.0);
}

std::span<double> SubsetTable::at(std::size_t mask, std::size_t i) {
  const auto dim = static_cast<std::size_t>(dim_);
  return {values_.data() + (mask * samples_ + i) * dim, dim};
}

std::span<const double> SubsetTable::at(std::size_t mask, std::size_t i) const {
  const auto dim = static_cast<std::size_t>(dim_);
  return {values_.data() + (mask * samples_ + i) * dim, dim};
}

namespace {

// p(z|alpha) with factor `skip` omitted (skip >= M keeps every factor).
double mask_probability(std::size_t mask, const SelectionProbs& alpha, std::size_t skip) {
  double p = 1.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (k == skip) continue;
    p *= ((mask >> k) & 1U) ? alpha[k] : 1.0 - alpha[k];
  }
  return p;
}

Prediction raw_expectation(const SubsetTable& table, const SelectionProbs& alpha, std::size_t i) {
  Prediction sum(static_cast<std::size_t>(table.dim()), 0.0);
  for (std::size_t mask = 0; mask < table.subset_count(); ++mask) {
    const double p = mask_probability(mask, alpha, alpha.size());
    const auto f = table.at(mask, i);
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += p * f[d];
  }
  return sum;
}

}  // namespace

Prediction exact_expectation(const SubsetTable& table, const SelectionProbs& alpha, std::size_t i,
                             const LossSpec& loss) {
  if (alpha.size() != table.feature_count()) throw std::invalid_argument("alpha length does not match table");
  Prediction p = raw_expectation(table, alpha, i);
  if (loss.classification()) finalize_class_probabilities(p, loss.clamp_eps);
  return p;
}

ConditionalMeans exact_conditional_means(const SubsetTable& table, const SelectionProbs& alpha, std::size_t i,
                                         std::size_t j) {
  if (alpha.size() != table.feature_count()) throw std::invalid_argument("alpha length does not match table");
  const auto dim = static_cast<std::size_t>(table.dim());
  Prediction f0(dim, 0.0);
  Prediction f1(dim, 0.0);
  for (std::size_t mask = 0; mask < table.subset_count(); ++mask) {
    const double p = mask_probability(mask, alpha, j);
    auto& sum = ((mask >> j) & 1U) ? f1 : f0;
    const auto f = table.at(mask, i);
    for (std::size_t d = 0; d < dim; ++d) sum[d] += p * f[d];
  }
  ConditionalMeans out;
  out.count_without = table.subset_count() / 2;
  out.count_with = table.subset_count() / 2;
  out.without = std::move(f0);
  out.with = std::move(f1);
  return out;
}

double exact_objective(const SubsetTable& table, const SelectionProbs& alpha, std::span<const double> targets,
                       const LossSpec& loss) {
  if (targets.size() != table.sample_count()) throw std::invalid_argument("one target per sample is required");
  double total = 0.0;
  for (std::size_t i = 0; i < table.sample_count(); ++i) {
    total += loss_and_dloss(loss, targets[i], exact_expectation(table, alpha, i, loss)).value;
  }
  return total / static_cast<double>(table.sample_count());
}

GradientEstimate exact_gradient(const SubsetTable& table, const SelectionProbs& alpha,
                                std::span<const double> targets, const LossSpec& loss) {
  if (targets.size() != table.sample_count()) throw std::invalid_argument("one target per sample is required");
  const std::size_t m = table.feature_count();
  const std::size_t n = table.sample_count();
  const auto dim = static_cast<std::size_t>(table.dim());
  GradientEstimate out;
  out.partials.assign(m, 0.0);
  out.undefined.assign(m, 0);
  out.count_with.assign(m, table.subset_count() / 2);
  out.count_without.assign(m, table.subset_count() / 2);
  out.predictions.reserve(n * dim);
  double loss_sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Prediction p = exact_expectation(table, alpha, i, loss);
    const LossValue lv = loss_and_dloss(loss, targets[i], p);
    loss_sum += lv.value;
    out.predictions.insert(out.predictions.end(), p.begin(), p.end());
    for (std::size_t j = 0; j < m; ++j) {
      const auto cm = exact_conditional_means(table, alpha, i, j);
      for (std::size_t d = 0; d < dim; ++d) out.partials[j] += lv.derivative[d] * ((*cm.with)[d] - (*cm.without)[d]);
    }
  }
  for (double& g : out.partials) g /= static_cast<double>(n);
  out.mean_loss = loss_sum / static_cast<double>(n);
  return out;
}

}  // namespace prsb
