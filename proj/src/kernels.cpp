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

#include "prsb/kernels.hpp"

#include <omp.h>

#include <charconv>
#include <cstdlib>
#include <cstring>
#include <stdexcept>

namespace prsb::kernels {

int configure_threads_from_env() {
  if (const char* env = std::getenv("PRSB_THREADS")) {
    int n = 0;
    const auto* end = env + std::strlen(env);
    const auto [ptr, ec] = std::from_chars(env, end, n);
    if (ec == std::errc() && ptr == end && n > 0) omp_set_num_threads(n);
  }
  return omp_get_max_threads();
}

BatchPredictions::BatchPredictions(std::size_t models, std::size_t samples, int dim)
    : models_(models), samples_(samples), dim_(dim), values_(models * samples * static_cast<std::size_t>(dim), 0.0) {}

std::vector<TrainedModel> fit_models(const LearnerSpec& spec, const Dataset& data, std::span<const std::size_t> pool,
                                     std::span<const FeatureSubset> subsets, const Rng& rng, Execution mode) {
  const auto count = static_cast<std::ptrdiff_t>(subsets.size());
  std::vector<TrainedModel> models(subsets.size());
  auto fit_one = [&](std::ptrdiff_t t) {
    Rng stream = rng.split(static_cast<std::uint64_t>(t));
    const auto rows = bootstrap_sample(pool, stream);
    models[static_cast<std::size_t>(t)] =
        fit(spec, data, subsets[static_cast<std::size_t>(t)], rows, stream.key());
  };
  if (mode == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t t = 0; t < count; ++t) fit_one(t);
  } else {
    for (std::ptrdiff_t t = 0; t < count; ++t) fit_one(t);
  }
  return models;
}

BatchPredictions predict_models(std::span<const TrainedModel> models, const Dataset& data,
                                std::span<const std::size_t> rows, Execution mode) {
  BatchPredictions out(models.size(), rows.size(), data.output_dim());
  const auto count = static_cast<std::ptrdiff_t>(models.size());
  auto predict_one = [&](std::ptrdiff_t t) {
    const auto& model = models[static_cast<std::size_t>(t)];
    for (std::size_t i = 0; i < rows.size(); ++i) model.predict(data.row(rows[i]), out.at(static_cast<std::size_t>(t), i));
  };
  if (mode == Execution::kParallel) {
#pragma omp parallel for schedule(dynamic, 4)
    for (std::ptrdiff_t t = 0; t < count; ++t) predict_one(t);
  } else {
    for (std::ptrdiff_t t = 0; t < count; ++t) predict_one(t);
  }
  return out;
}

std::vector<double> weighted_sum(const BatchPredictions& predictions, std::span<const double> weights, double divisor,
                                 Execution mode) {
  if (weights.size() != predictions.model_count()) throw std::invalid_argument("one weight per model is required");
  const auto n = predictions.sample_count();
  const auto dim = static_cast<std::size_t>(predictions.dim());
  std::vector<double> out(n * dim, 0.0);
  // Parallel over samples; each output accumulates models in index order.
  auto sample = [&](std::ptrdiff_t ii) {
    const auto i = static_cast<std::size_t>(ii);
    for (std::size_t t = 0; t < predictions.model_count(); ++t) {
      const auto p = predictions.at(t, i);
      for (std::size_t d = 0; d < dim; ++d) out[i * dim + d] += weights[t] * p[d];
    }
    for (std::size_t d = 0; d < dim; ++d) out[i * dim + d] /= divisor;
  };
  if (mode == Execution::kParallel) {
#pragma omp parallel for schedule(static)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) sample(i);
  } else {
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) sample(i);
  }
  return out;
}

namespace {

void check_partials_inputs(const BatchPredictions& predictions, const ImportanceState& state,
                           std::span<const double> dloss) {
  if (predictions.model_count() != state.model_count()) {
    throw std::invalid_argument("prediction batch and importance state disagree on the model count");
  }
  if (dloss.size() != predictions.sample_count() * static_cast<std::size_t>(predictions.dim())) {
    throw std::invalid_argument("loss derivative must hold one value per sample and output");
  }
  if (predictions.sample_count() == 0) throw std::invalid_argument("gradient needs at least one sample");
}

}  // namespace

Partials partials_reference(const BatchPredictions& predictions, const ImportanceState& state,
                            std::span<const double> dloss) {
  check_partials_inputs(predictions, state, dloss);
  const std::size_t m = state.feature_count();
  const std::size_t t_count = state.model_count();
  const std::size_t n = predictions.sample_count();
  const auto dim = static_cast<std::size_t>(predictions.dim());
  const auto& subsets = state.subsets();

  Partials out{std::vector<double>(m, 0.0), std::vector<std::uint8_t>(m, 0)};
  std::vector<double> loo(t_count);
  std::vector<double> f0(dim);
  std::vector<double> f1(dim);
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t with = 0;
    for (std::size_t t = 0; t < t_count; ++t) {
      loo[t] = importance_weight_without(subsets[t], state.alpha(), state.beta(), j);
      with += subsets[t].test(j) ? 1 : 0;
    }
    const std::size_t without = t_count - with;
    if (with == 0 || without == 0) {
      out.undefined[j] = 1;
      continue;
    }
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      std::fill(f0.begin(), f0.end(), 0.0);
      std::fill(f1.begin(), f1.end(), 0.0);
      for (std::size_t t = 0; t < t_count; ++t) {
        auto& target = subsets[t].test(j) ? f1 : f0;
        const auto p = predictions.at(t, i);
        for (std::size_t d = 0; d < dim; ++d) target[d] += loo[t] * p[d];
      }
      for (std::size_t d = 0; d < dim; ++d) {
        const double cond1 = f1[d] / static_cast<double>(with);
        const double cond0 = f0[d] / static_cast<double>(without);
        total += dloss[i * dim + d] * (cond1 - cond0);
      }
    }
    out.gradient[j] = total / static_cast<double>(n);
  }
  return out;
}

Partials partials_parallel(const BatchPredictions& predictions, const ImportanceState& state,
                           std::span<const double> dloss) {
  check_partials_inputs(predictions, state, dloss);
  const std::size_t m = state.feature_count();
  const std::size_t t_count = state.model_count();
  const std::size_t n = predictions.sample_count();
  const auto dim = static_cast<std::size_t>(predictions.dim());
  const auto& subsets = state.subsets();

  // contracted[t] = (1/n) sum_i sum_d dloss[i][d] * P[t][i][d]
  std::vector<double> contracted(t_count, 0.0);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t tt = 0; tt < static_cast<std::ptrdiff_t>(t_count); ++tt) {
    const auto t = static_cast<std::size_t>(tt);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const auto p = predictions.at(t, i);
      for (std::size_t d = 0; d < dim; ++d) acc += dloss[i * dim + d] * p[d];
    }
    contracted[t] = acc / static_cast<double>(n);
  }

  Partials out{std::vector<double>(m, 0.0), std::vector<std::uint8_t>(m, 0)};
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t jj = 0; jj < static_cast<std::ptrdiff_t>(m); ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    const std::size_t with = state.count_with(j);
    const std::size_t without = state.count_without(j);
    if (with == 0 || without == 0) {
      out.undefined[j] = 1;
      continue;
    }
    double sum_with = 0.0;
    double sum_without = 0.0;
    for (std::size_t t = 0; t < t_count; ++t) {
      const double term = state.weight_without(t, j) * contracted[t];
      if (subsets[t].test(j)) {
        sum_with += term;
      } else {
        sum_without += term;
      }
    }
    out.gradient[j] = sum_with / static_cast<double>(with) - sum_without / static_cast<double>(without);
  }
  return out;
}

}  // namespace prsb::kernels
