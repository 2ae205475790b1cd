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

#ifndef PRSB_CORE_TYPES_HPP
#define PRSB_CORE_TYPES_HPP

#include <Eigen/Dense>

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace prsb {

/// Row-major dense matrix; rows are samples, columns are features.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

enum class TaskKind { kRegression, kClassification };

/// Raised when the importance weight of a subset is undefined because one of
/// its factors has a zero denominator.
class DegenerateRatioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when every importance weight is zero.
class WeightCollapseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// N samples by M features plus a real or class-index target.
///
/// Class targets are stored as exact small integers in `target` and must lie
/// in [0, class_count).
struct Dataset {
  Matrix features;
  std::vector<double> target;
  TaskKind task = TaskKind::kRegression;
  int class_count = 0;

  [[nodiscard]] std::size_t rows() const { return static_cast<std::size_t>(features.rows()); }
  [[nodiscard]] std::size_t cols() const { return static_cast<std::size_t>(features.cols()); }

  /// 1 for regression, C for classification.
  [[nodiscard]] int output_dim() const { return task == TaskKind::kRegression ? 1 : class_count; }

  [[nodiscard]] int label(std::size_t i) const { return static_cast<int>(target[i]); }

  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return {features.data() + i * cols(), cols()};
  }

  /// Throws std::invalid_argument when any invariant is broken.
  void validate() const;

  /// Copy of the selected rows, in the given order.
  [[nodiscard]] Dataset select_rows(std::span<const std::size_t> indices) const;
};

/// Binary mask over M features. The empty mask is legal.
class FeatureSubset {
 public:
  FeatureSubset() = default;
  explicit FeatureSubset(std::size_t feature_count) : bits_(feature_count, 0) {}

  static FeatureSubset full(std::size_t feature_count);
  static FeatureSubset from_indices(std::size_t feature_count, std::span<const std::size_t> indices);

  [[nodiscard]] std::size_t size() const { return bits_.size(); }
  [[nodiscard]] bool test(std::size_t j) const { return bits_[j] != 0; }
  void set(std::size_t j, bool on = true) { bits_[j] = on ? 1 : 0; }

  /// Number of selected features.
  [[nodiscard]] std::size_t count() const;
  [[nodiscard]] bool none() const { return count() == 0; }

  /// Selected feature indices in ascending order.
  [[nodiscard]] std::vector<std::size_t> active() const;

  [[nodiscard]] const std::vector<std::uint8_t>& bits() const { return bits_; }

  friend auto operator<=>(const FeatureSubset&, const FeatureSubset&) = default;

 private:
  std::vector<std::uint8_t> bits_;
};

/// Per-feature Bernoulli parameters, each in [0,1]. Also serves as the
/// feature-importance vector.
class SelectionProbs {
 public:
  SelectionProbs() = default;
  /// Throws std::invalid_argument if any value is outside [0,1] or non-finite.
  explicit SelectionProbs(std::vector<double> values);

  static SelectionProbs constant(std::size_t feature_count, double value);

  [[nodiscard]] std::size_t size() const { return values_.size(); }
  [[nodiscard]] double operator[](std::size_t j) const { return values_[j]; }
  [[nodiscard]] std::span<const double> values() const { return values_; }
  [[nodiscard]] double sum() const;

  /// Projected descent step: value_j <- clamp(value_j - eta * grad_j, 0, 1).
  void descend(std::span<const double> gradient, double eta);

  friend bool operator==(const SelectionProbs&, const SelectionProbs&) = default;

 private:
  std::vector<double> values_;
};

/// Regression: one value. Classification: C class probabilities.
using Prediction = std::vector<double>;

/// Per-column z-score statistics fitted on a training set.
struct Standardizer {
  std::vector<double> mean;
  std::vector<double> scale;  ///< population standard deviation, 0 for constant columns

  [[nodiscard]] Dataset apply(const Dataset& data) const;
  void apply_inplace(Matrix& features) const;
};

struct Normalized {
  Dataset data;
  Standardizer stats;
};

/// Z-scores every feature column with population statistics. Constant
/// columns become zero. Targets are left untouched.
Normalized normalize(const Dataset& raw);

/// Hyper-parameters of the gradient-descent training loop.
struct TrainConfig {
  std::size_t ensemble_size = 100;
  double learning_rate = 0.1;
  std::size_t epochs = 200;
  double minibatch_fraction = 0.10;
  std::size_t restarts = 20;
  std::size_t max_steps_between_retrain = 100;
  double teff_retrain_fraction = 0.5;
  /// Expected number of models selecting each feature at initialization;
  /// alpha starts at initial_selections / ensemble_size.
  double initial_selections = 5.0;
  std::uint64_t seed = 0;
  bool parallel_restarts = false;
  /// Per-epoch progress and T_eff summaries on stderr.
  bool verbose = false;

  void validate() const;
};

}  // namespace prsb

#endif  // PRSB_CORE_TYPES_HPP
