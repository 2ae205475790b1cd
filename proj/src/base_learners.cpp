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

#include "prsb/base_learners.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>

namespace prsb {
namespace {

// Restricted copy of the training rows, one contiguous block per column.
struct TrainingView {
  std::vector<std::size_t> columns;
  std::vector<double> x;  // columns.size() x n, column-major
  std::vector<double> y;
  std::size_t n = 0;
  int classes = 0;
  bool classification = false;

  [[nodiscard]] double at(std::size_t r, std::size_t c) const { return x[c * n + r]; }
};

TrainingView make_view(const Dataset& data, const FeatureSubset& subset, std::span<const std::size_t> rows) {
  TrainingView v;
  v.columns = subset.active();
  v.n = rows.size();
  v.classes = data.class_count;
  v.classification = data.task == TaskKind::kClassification;
  v.x.resize(v.n * v.columns.size());
  v.y.resize(v.n);
  for (std::size_t r = 0; r < v.n; ++r) {
    const auto src = data.row(rows[r]);
    for (std::size_t c = 0; c < v.columns.size(); ++c) v.x[c * v.n + r] = src[v.columns[c]];
    v.y[r] = data.target[rows[r]];
  }
  return v;
}

// Rows of every column are presorted once by (value, row); a split
// stable-partitions each column's segment so the order survives.
class TreeBuilder {
 public:
  TreeBuilder(const TrainingView& view, const LearnerSpec& spec) : view_(view), spec_(spec) {
    const std::size_t width = view.columns.size();
    sorted_.resize(std::max<std::size_t>(width, 1) * view.n);
    std::vector<std::pair<double, std::size_t>> keyed(view.n);
    for (std::size_t c = 0; c < width; ++c) {
      for (std::size_t r = 0; r < view.n; ++r) keyed[r] = {view.at(r, c), r};
      std::sort(keyed.begin(), keyed.end());
      for (std::size_t r = 0; r < view.n; ++r) sorted_[c * view.n + r] = keyed[r].second;
    }
    if (width == 0) {
      for (std::size_t r = 0; r < view.n; ++r) sorted_[r] = r;
    }
    goes_left_.resize(view.n);
    buffer_.resize(view.n);
    xs_.resize(view.n);
    ys_.resize(view.n);
    inverse_.resize(view.n + 1);
    for (std::size_t i = 1; i <= view.n; ++i) inverse_[i] = 1.0 / static_cast<double>(i);
    counts_left_.resize(static_cast<std::size_t>(std::max(view.classes, 1)));
    counts_total_.resize(counts_left_.size());
  }

  detail::TreePayload build() {
    grow(0, view_.n, 0);
    return std::move(tree_);
  }

 private:
  struct Split {
    std::size_t column = 0;
    double threshold = 0.0;
    double score = -std::numeric_limits<double>::infinity();
    bool found = false;
  };

  [[nodiscard]] const std::size_t* rows_of(std::size_t c) const { return sorted_.data() + c * view_.n; }

  std::int32_t grow(std::size_t begin, std::size_t end, std::size_t depth) {
    const auto id = static_cast<std::int32_t>(tree_.nodes.size());
    tree_.nodes.emplace_back();
    const std::size_t count = end - begin;

    const bool depth_capped = spec_.max_depth > 0 && depth >= spec_.max_depth;
    Split split;
    if (!depth_capped && count >= std::max<std::size_t>(spec_.min_samples_split, 2) && !is_pure(begin, end)) {
      split = find_split(begin, end);
    }
    if (!split.found) {
      make_leaf(id, begin, end);
      return id;
    }

    const std::size_t* split_rows = rows_of(split.column);
    std::size_t n_left = 0;
    for (std::size_t i = begin; i < end; ++i) {
      const std::size_t r = split_rows[i];
      const bool left = view_.at(r, split.column) <= split.threshold;
      goes_left_[r] = left ? 1 : 0;
      n_left += left ? 1 : 0;
    }
    for (std::size_t c = 0; c < view_.columns.size(); ++c) {
      std::size_t* seg = sorted_.data() + c * view_.n;
      std::size_t l = begin;
      std::size_t rcount = 0;
      for (std::size_t i = begin; i < end; ++i) {
        const std::size_t r = seg[i];
        if (goes_left_[r]) {
          seg[l++] = r;
        } else {
          buffer_[rcount++] = r;
        }
      }
      std::copy(buffer_.begin(), buffer_.begin() + static_cast<std::ptrdiff_t>(rcount),
                seg + static_cast<std::ptrdiff_t>(l));
    }
    const std::size_t mid = begin + n_left;
    const std::int32_t left = grow(begin, mid, depth + 1);
    const std::int32_t right = grow(mid, end, depth + 1);
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.feature = static_cast<int>(view_.columns[split.column]);
    node.threshold = split.threshold;
    node.left = left;
    node.right = right;
    return id;
  }

  bool is_pure(std::size_t begin, std::size_t end) const {
    const std::size_t* rows = rows_of(0);
    const double first = view_.y[rows[begin]];
    for (std::size_t i = begin + 1; i < end; ++i) {
      if (view_.y[rows[i]] != first) return false;
    }
    return true;
  }

  void make_leaf(std::int32_t id, std::size_t begin, std::size_t end) {
    auto& node = tree_.nodes[static_cast<std::size_t>(id)];
    node.value_offset = tree_.leaf_values.size();
    const auto count = static_cast<double>(end - begin);
    const std::size_t* rows = rows_of(0);
    if (view_.classification) {
      std::vector<double> freq(static_cast<std::size_t>(view_.classes), 0.0);
      for (std::size_t i = begin; i < end; ++i) freq[static_cast<std::size_t>(view_.y[rows[i]])] += 1.0;
      for (double& f : freq) f /= count;
      tree_.leaf_values.insert(tree_.leaf_values.end(), freq.begin(), freq.end());
    } else {
      double sum = 0.0;
      for (std::size_t i = begin; i < end; ++i) sum += view_.y[rows[i]];
      tree_.leaf_values.push_back(sum / count);
    }
  }

  // Maximizes sum_L^2/n_L + sum_R^2/n_R (variance reduction) or
  // sum_c cL_c^2/n_L + sum_c cR_c^2/n_R (Gini decrease). Columns are scanned in
  // ascending feature order and thresholds ascending, so only a strictly
  // better score replaces the incumbent.
  Split find_split(std::size_t begin, std::size_t end) {
    Split best;
    double bar = -std::numeric_limits<double>::infinity();
    const std::size_t count = end - begin;
    const std::size_t classes = counts_left_.size();

    double sum_total = 0.0;
    const std::size_t* any_rows = rows_of(0);
    if (view_.classification) {
      std::fill(counts_total_.begin(), counts_total_.end(), 0.0);
      for (std::size_t i = begin; i < end; ++i) counts_total_[static_cast<std::size_t>(view_.y[any_rows[i]])] += 1.0;
    } else {
      for (std::size_t i = begin; i < end; ++i) sum_total += view_.y[any_rows[i]];
    }

    for (std::size_t c = 0; c < view_.columns.size(); ++c) {
      const std::size_t* rows = rows_of(c) + begin;
      const double* xc = view_.x.data() + c * view_.n;
      if (xc[rows[0]] == xc[rows[count - 1]]) continue;
      for (std::size_t i = 0; i < count; ++i) {
        xs_[i] = xc[rows[i]];
        ys_[i] = view_.y[rows[i]];
      }

      double sum_left = 0.0;
      if (view_.classification) std::fill(counts_left_.begin(), counts_left_.end(), 0.0);
      for (std::size_t i = 0; i + 1 < count; ++i) {
        const double yi = ys_[i];
        if (view_.classification) {
          counts_left_[static_cast<std::size_t>(yi)] += 1.0;
        } else {
          sum_left += yi;
        }
        const double xa = xs_[i];
        const double xb = xs_[i + 1];
        if (!(xa < xb)) continue;

        const double inv_left = inverse_[i + 1];
        const double inv_right = inverse_[count - i - 1];
        double score;
        if (view_.classification) {
          double sq_left = 0.0;
          double sq_right = 0.0;
          for (std::size_t k = 0; k < classes; ++k) {
            const double right = counts_total_[k] - counts_left_[k];
            sq_left += counts_left_[k] * counts_left_[k];
            sq_right += right * right;
          }
          score = sq_left * inv_left + sq_right * inv_right;
        } else {
          const double sum_right = sum_total - sum_left;
          score = sum_left * sum_left * inv_left + sum_right * sum_right * inv_right;
        }
        if (score > bar) {
          double threshold = xa + (xb - xa) / 2.0;
          if (!(threshold < xb)) threshold = xa;
          best = {c, threshold, score, true};
          bar = score + 1e-12 * std::max(1.0, std::abs(score));
        }
      }
    }
    return best;
  }

  const TrainingView& view_;
  const LearnerSpec& spec_;
  detail::TreePayload tree_;
  std::vector<std::size_t> sorted_;
  std::vector<std::uint8_t> goes_left_;
  std::vector<std::size_t> buffer_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  std::vector<double> inverse_;
  std::vector<double> counts_left_;
  std::vector<double> counts_total_;
};

}  // namespace

std::string_view to_string(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::kCartTree:
      return "tree";
    case LearnerKind::kKnn:
      return "knn";
    case LearnerKind::kConstant:
      return "constant";
  }
  return "unknown";
}

LearnerKind parse_learner_kind(std::string_view name) {
  if (name == "tree" || name == "cart") return LearnerKind::kCartTree;
  if (name == "knn") return LearnerKind::kKnn;
  if (name == "constant") return LearnerKind::kConstant;
  throw std::invalid_argument("unknown learner '" + std::string(name) + "' (expected tree, knn or constant)");
}

std::vector<double> constant_output(const Dataset& data, std::span<const std::size_t> rows) {
  if (data.task == TaskKind::kRegression) {
    double sum = 0.0;
    for (std::size_t r : rows) sum += data.target[r];
    return {rows.empty() ? 0.0 : sum / static_cast<double>(rows.size())};
  }
  std::vector<std::size_t> counts(static_cast<std::size_t>(data.class_count), 0);
  for (std::size_t r : rows) ++counts[static_cast<std::size_t>(data.label(r))];
  const auto majority = static_cast<std::size_t>(std::max_element(counts.begin(), counts.end()) - counts.begin());
  std::vector<double> out(counts.size(), 0.0);
  out[majority] = 1.0;
  return out;
}

TrainedModel fit(const LearnerSpec& spec, const Dataset& data, const FeatureSubset& subset,
                 std::span<const std::size_t> rows, std::uint64_t bootstrap_id) {
  if (subset.size() != data.cols()) {
    throw std::invalid_argument("subset length " + std::to_string(subset.size()) + " does not match feature count " +
                                std::to_string(data.cols()));
  }
  if (rows.empty()) throw std::invalid_argument("cannot fit a model on zero rows");
  for (std::size_t r : rows) {
    if (r >= data.rows()) throw std::out_of_range("bootstrap row index out of range");
  }

  TrainedModel model;
  model.subset_ = subset;
  model.bootstrap_id_ = bootstrap_id;
  model.output_dim_ = data.output_dim();
  model.task_ = data.task;

  if (spec.kind == LearnerKind::kConstant || subset.none()) {
    model.payload_ = detail::ConstantPayload{constant_output(data, rows)};
    return model;
  }

  if (spec.kind == LearnerKind::kCartTree) {
    const TrainingView view = make_view(data, subset, rows);
    model.payload_ = TreeBuilder(view, spec).build();
    return model;
  }

  if (spec.k_neighbors == 0) throw std::invalid_argument("k_neighbors must be at least 1");
  detail::KnnPayload knn;
  knn.columns = subset.active();
  knn.points.resize(static_cast<Eigen::Index>(knn.columns.size()), static_cast<Eigen::Index>(rows.size()));
  knn.targets.reserve(rows.size());
  knn.sample_ids.assign(rows.begin(), rows.end());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const auto src = data.row(rows[r]);
    for (std::size_t c = 0; c < knn.columns.size(); ++c) {
      knn.points(static_cast<Eigen::Index>(c), static_cast<Eigen::Index>(r)) = src[knn.columns[c]];
    }
    knn.targets.push_back(data.target[rows[r]]);
  }
  knn.k = std::min(spec.k_neighbors, rows.size());
  model.payload_ = std::move(knn);
  return model;
}

void TrainedModel::predict(std::span<const double> x, std::span<double> out) const {
  if (out.size() != static_cast<std::size_t>(output_dim_)) {
    throw std::invalid_argument("prediction buffer has the wrong length");
  }
  if (x.size() != subset_.size()) throw std::invalid_argument("input length does not match feature count");

  if (const auto* c = std::get_if<detail::ConstantPayload>(&payload_)) {
    std::copy(c->value.begin(), c->value.end(), out.begin());
    return;
  }

  if (const auto* tree = std::get_if<detail::TreePayload>(&payload_)) {
    std::size_t at = 0;
    while (tree->nodes[at].feature >= 0) {
      const auto& node = tree->nodes[at];
      at = static_cast<std::size_t>(x[static_cast<std::size_t>(node.feature)] <= node.threshold ? node.left
                                                                                               : node.right);
    }
    const auto first = tree->leaf_values.begin() + static_cast<std::ptrdiff_t>(tree->nodes[at].value_offset);
    std::copy(first, first + output_dim_, out.begin());
    return;
  }

  const auto& knn = std::get<detail::KnnPayload>(payload_);
  struct Neighbor {
    double distance;
    std::size_t sample;
    std::size_t position;
    bool operator<(const Neighbor& o) const {
      if (distance != o.distance) return distance < o.distance;
      if (sample != o.sample) return sample < o.sample;
      return position < o.position;
    }
  };
  // Distances accumulate one feature column at a time, then a single pass
  // keeps the k smallest in a sorted buffer.
  thread_local std::vector<double> dist_buffer;
  thread_local std::vector<Neighbor> best_buffer;
  auto& dist = dist_buffer;
  auto& best = best_buffer;
  const std::size_t n = knn.targets.size();
  const std::size_t width = knn.columns.size();
  if (dist.size() < n) dist.resize(n);
  double* __restrict d = dist.data();
  for (std::size_t c = 0; c < width; ++c) {
    const double* __restrict col = knn.points.data() + c * n;
    const double q = x[knn.columns[c]];
    if (c == 0) {
      for (std::size_t r = 0; r < n; ++r) d[r] = (col[r] - q) * (col[r] - q);
    } else {
      for (std::size_t r = 0; r < n; ++r) d[r] += (col[r] - q) * (col[r] - q);
    }
  }
  best.clear();
  const std::size_t* ids = knn.sample_ids.data();
  double bound = std::numeric_limits<double>::infinity();
  for (std::size_t r = 0; r < n; ++r) {
    if (d[r] > bound) continue;
    const Neighbor cand{d[r], ids[r], r};
    if (best.size() == knn.k && !(cand < best.back())) continue;
    best.insert(std::upper_bound(best.begin(), best.end(), cand), cand);
    if (best.size() > knn.k) best.pop_back();
    if (best.size() == knn.k) bound = best.back().distance;
  }

  std::fill(out.begin(), out.end(), 0.0);
  const auto k = static_cast<double>(best.size());
  if (task_ == TaskKind::kRegression) {
    double sum = 0.0;
    for (const auto& nb : best) sum += knn.targets[nb.position];
    out[0] = sum / k;
  } else {
    for (const auto& nb : best) out[static_cast<std::size_t>(knn.targets[nb.position])] += 1.0;
    for (double& v : out) v /= k;
  }
}

Prediction TrainedModel::predict(std::span<const double> x) const {
  Prediction out(static_cast<std::size_t>(output_dim_));
  predict(x, out);
  return out;
}

int TrainedModel::tree_depth() const {
  const auto* tree = std::get_if<detail::TreePayload>(&payload_);
  if (tree == nullptr) return -1;
  // Iterative depth-first walk.
  int deepest = 0;
  std::vector<std::pair<std::size_t, int>> stack{{0, 0}};
  while (!stack.empty()) {
    const auto [at, depth] = stack.back();
    stack.pop_back();
    deepest = std::max(deepest, depth);
    const auto& node = tree->nodes[at];
    if (node.feature >= 0) {
      stack.emplace_back(static_cast<std::size_t>(node.left), depth + 1);
      stack.emplace_back(static_cast<std::size_t>(node.right), depth + 1);
    }
  }
  return deepest;
}

std::vector<std::size_t> bootstrap_sample(std::span<const std::size_t> pool, Rng& rng) {
  std::vector<std::size_t> out(pool.size());
  for (auto& r : out) r = pool[static_cast<std::size_t>(rng.below(pool.size()))];
  return out;
}

}  // namespace prsb
