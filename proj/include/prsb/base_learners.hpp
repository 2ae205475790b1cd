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

#ifndef PRSB_BASE_LEARNERS_HPP
#define PRSB_BASE_LEARNERS_HPP

#include "prsb/core_types.hpp"
#include "prsb/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace prsb {

enum class LearnerKind { kCartTree, kKnn, kConstant };

std::string_view to_string(LearnerKind kind);
/// Accepts "tree"/"cart", "knn" and "constant". Throws std::invalid_argument.
LearnerKind parse_learner_kind(std::string_view name);

struct LearnerSpec {
  LearnerKind kind = LearnerKind::kCartTree;
  std::size_t k_neighbors = 5;
  std::size_t max_depth = 0;  ///< 0 means unlimited
  std::size_t min_samples_split = 2;

  static LearnerSpec tree() { return {}; }
  static LearnerSpec knn(std::size_t k = 5) { return {LearnerKind::kKnn, k}; }
  static LearnerSpec constant() { return {LearnerKind::kConstant}; }
};

namespace detail {

struct ConstantPayload {
  std::vector<double> value;
};

struct TreeNode {
  // Internal nodes route x[feature] <= threshold to `left`. Leaves have
  // feature == -1 and their output starts at leaf_values[value_offset].
  int feature = -1;
  double threshold = 0.0;
  std::int32_t left = -1;
  std::int32_t right = -1;
  std::size_t value_offset = 0;
};

struct TreePayload {
  std::vector<TreeNode> nodes;
  std::vector<double> leaf_values;
};

struct KnnPayload {
  std::vector<std::size_t> columns;   // restricted feature indices
  Matrix points;                      // restricted columns x bootstrap rows
  std::vector<double> targets;
  std::vector<std::size_t> sample_ids;  // original row index, for tie-breaking
  std::size_t k = 5;
};

}  // namespace detail

/// A fitted base model. Immutable and cheap to share across threads.
///
/// Prediction only reads the feature columns selected by `subset()`.
class TrainedModel {
 public:
  [[nodiscard]] const FeatureSubset& subset() const { return subset_; }
  [[nodiscard]] std::uint64_t bootstrap_id() const { return bootstrap_id_; }
  [[nodiscard]] int output_dim() const { return output_dim_; }
  [[nodiscard]] bool is_constant() const { return std::holds_alternative<detail::ConstantPayload>(payload_); }
  [[nodiscard]] TaskKind task() const { return task_; }

  /// Writes output_dim() values into `out`; x must hold all M features.
  void predict(std::span<const double> x, std::span<double> out) const;
  [[nodiscard]] Prediction predict(std::span<const double> x) const;

  /// Tree depth (0 for a single leaf); -1 for non-tree models.
  [[nodiscard]] int tree_depth() const;

 private:
  friend TrainedModel fit(const LearnerSpec&, const Dataset&, const FeatureSubset&, std::span<const std::size_t>,
                          std::uint64_t);

  std::variant<detail::ConstantPayload, detail::TreePayload, detail::KnnPayload> payload_;
  FeatureSubset subset_;
  std::uint64_t bootstrap_id_ = 0;
  int output_dim_ = 1;
  TaskKind task_ = TaskKind::kRegression;
};

/// Trains a base model on `rows` of `data` restricted to `subset`. `rows` may
/// repeat indices (bootstrap). An empty subset or the constant learner yields
/// the bootstrap mean (regression) or a one-hot majority class.
TrainedModel fit(const LearnerSpec& spec, const Dataset& data, const FeatureSubset& subset,
                 std::span<const std::size_t> rows, std::uint64_t bootstrap_id = 0);

/// |pool| indices drawn uniformly with replacement from `pool`.
std::vector<std::size_t> bootstrap_sample(std::span<const std::size_t> pool, Rng& rng);

/// Mean output over `rows` (regression) or one-hot majority class, ties to
/// the lowest class index.
std::vector<double> constant_output(const Dataset& data, std::span<const std::size_t> rows);

}  // namespace prsb

#endif  // PRSB_BASE_LEARNERS_HPP
