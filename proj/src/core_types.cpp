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

#include "prsb/core_types.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace prsb {

void Dataset::validate() const {
  if (rows() == 0 || cols() == 0) {
    throw std::invalid_argument("dataset must have at least one sample and one feature");
  }
  if (target.size() != rows()) {
    throw std::invalid_argument("target length " + std::to_string(target.size()) +
                                " does not match sample count " + std::to_string(rows()));
  }
  if (!features.allFinite()) {
    throw std::invalid_argument("dataset contains non-finite feature values");
  }
  if (task == TaskKind::kClassification) {
    if (class_count < 1) {
      throw std::invalid_argument("classification dataset needs class_count >= 1");
    }
    for (std::size_t i = 0; i < target.size(); ++i) {
      const double y = target[i];
      if (y < 0 || y >= class_count || y != std::floor(y)) {
        throw std::invalid_argument("class label at row " + std::to_string(i) + " is not in [0, " +
                                    std::to_string(class_count) + ")");
      }
    }
  } else {
    for (double y : target) {
      if (!std::isfinite(y)) throw std::invalid_argument("dataset contains non-finite targets");
    }
  }
}

Dataset Dataset::select_rows(std::span<const std::size_t> indices) const {
  Dataset out;
  out.task = task;
  out.class_count = class_count;
  out.features.resize(static_cast<Eigen::Index>(indices.size()), features.cols());
  out.target.reserve(indices.size());
  for (std::size_t r = 0; r < indices.size(); ++r) {
    out.features.row(static_cast<Eigen::Index>(r)) = features.row(static_cast<Eigen::Index>(indices[r]));
    out.target.push_back(target[indices[r]]);
  }
  return out;
}

FeatureSubset FeatureSubset::full(std::size_t feature_count) {
  FeatureSubset s(feature_count);
  std::fill(s.bits_.begin(), s.bits_.end(), std::uint8_t{1});
  return s;
}

FeatureSubset FeatureSubset::from_indices(std::size_t feature_count, std::span<const std::size_t> indices) {
  FeatureSubset s(feature_count);
  for (std::size_t j : indices) {
    if (j >= feature_count) throw std::out_of_range("feature index out of range");
    s.bits_[j] = 1;
  }
  return s;
}

std::size_t FeatureSubset::count() const {
  return static_cast<std::size_t>(std::count(bits_.begin(), bits_.end(), std::uint8_t{1}));
}

std::vector<std::size_t> FeatureSubset::active() const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < bits_.size(); ++j) {
    if (bits_[j]) out.push_back(j);
  }
  return out;
}

SelectionProbs::SelectionProbs(std::vector<double> values) : values_(std::move(values)) {
  for (std::size_t j = 0; j < values_.size(); ++j) {
    const double a = values_[j];
    if (!(a >= 0.0 && a <= 1.0)) {
      throw std::invalid_argument("selection probability " + std::to_string(j) + " = " + std::to_string(a) +
                                  " is outside [0,1]");
    }
  }
}

SelectionProbs SelectionProbs::constant(std::size_t feature_count, double value) {
  return SelectionProbs(std::vector<double>(feature_count, value));
}

double SelectionProbs::sum() const { return std::accumulate(values_.begin(), values_.end(), 0.0); }

void SelectionProbs::descend(std::span<const double> gradient, double eta) {
  if (gradient.size() != values_.size()) {
    throw std::invalid_argument("gradient length does not match selection probabilities");
  }
  for (std::size_t j = 0; j < values_.size(); ++j) {
    double b = values_[j] - eta * gradient[j];
    b = std::max(b, 0.0);
    b = std::min(b, 1.0);
    values_[j] = b;
  }
}

Dataset Standardizer::apply(const Dataset& data) const {
  Dataset out = data;
  apply_inplace(out.features);
  return out;
}

void Standardizer::apply_inplace(Matrix& features) const {
  if (static_cast<std::size_t>(features.cols()) != mean.size()) {
    throw std::invalid_argument("standardizer was fitted on a different feature count");
  }
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const auto j = static_cast<std::size_t>(c);
    if (scale[j] == 0.0) {
      features.col(c).setZero();
    } else {
      features.col(c) = (features.col(c).array() - mean[j]) / scale[j];
    }
  }
}

Normalized normalize(const Dataset& raw) {
  if (raw.rows() == 0 || raw.cols() == 0) {
    throw std::invalid_argument("cannot normalize an empty dataset");
  }
  const auto n = static_cast<double>(raw.rows());
  Standardizer stats;
  stats.mean.resize(raw.cols());
  stats.scale.resize(raw.cols());
  for (Eigen::Index c = 0; c < raw.features.cols(); ++c) {
    const auto j = static_cast<std::size_t>(c);
    const double mean = raw.features.col(c).sum() / n;
    const double var = (raw.features.col(c).array() - mean).square().sum() / n;
    const double sd = std::sqrt(var);
    stats.mean[j] = mean;
    // Constant up to rounding of the mean.
    stats.scale[j] = sd <= 1e-12 * std::max(1.0, std::abs(mean)) ? 0.0 : sd;
  }
  return {stats.apply(raw), std::move(stats)};
}

void TrainConfig::validate() const {
  if (ensemble_size == 0) throw std::invalid_argument("ensemble size must be positive");
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("learning rate must be finite and non-negative");
  }
  if (epochs == 0) throw std::invalid_argument("epoch count must be positive");
  if (!(minibatch_fraction > 0.0 && minibatch_fraction < 1.0)) {
    throw std::invalid_argument("minibatch fraction must lie in (0,1)");
  }
  if (restarts == 0) throw std::invalid_argument("restart count must be positive");
  if (max_steps_between_retrain == 0) throw std::invalid_argument("max steps between retrains must be positive");
  if (!(teff_retrain_fraction > 0.0 && teff_retrain_fraction <= 1.0)) {
    throw std::invalid_argument("T_eff retrain fraction must lie in (0,1]");
  }
  if (!(initial_selections > 0.0)) throw std::invalid_argument("initial selections must be positive");
}

}  // namespace prsb
