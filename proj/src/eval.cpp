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

#include "prsb/eval.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace prsb {

std::vector<std::size_t> rank_features(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  return order;
}

double aupr(std::span<const std::size_t> ranking, std::span<const std::size_t> relevant, std::size_t item_count) {
  if (relevant.empty()) throw std::invalid_argument("AUPR needs at least one relevant item");
  std::vector<std::uint8_t> is_relevant(item_count, 0);
  for (std::size_t r : relevant) {
    if (r >= item_count) throw std::invalid_argument("relevant item index out of range");
    is_relevant[r] = 1;
  }
  const auto positives = static_cast<double>(std::count(is_relevant.begin(), is_relevant.end(), std::uint8_t{1}));
  double hits = 0.0;
  double precision_sum = 0.0;
  for (std::size_t k = 0; k < ranking.size(); ++k) {
    if (ranking[k] >= item_count) throw std::invalid_argument("ranked item index out of range");
    if (is_relevant[ranking[k]]) {
      hits += 1.0;
      precision_sum += hits / static_cast<double>(k + 1);
    }
  }
  return precision_sum / positives;
}

double expected_aupr(std::span<const double> scores, std::span<const std::size_t> relevant) {
  if (relevant.empty()) throw std::invalid_argument("AUPR needs at least one relevant item");
  std::vector<std::uint8_t> is_relevant(scores.size(), 0);
  for (std::size_t r : relevant) {
    if (r >= scores.size()) throw std::invalid_argument("relevant item index out of range");
    is_relevant[r] = 1;
  }
  const auto order = rank_features(scores);
  double total = 0.0;
  double ranked_before = 0.0;
  double hits_before = 0.0;
  for (std::size_t lo = 0; lo < order.size();) {
    std::size_t hi = lo + 1;
    while (hi < order.size() && scores[order[hi]] == scores[order[lo]]) ++hi;
    const double n = static_cast<double>(hi - lo);
    double k = 0.0;
    for (std::size_t p = lo; p < hi; ++p) k += is_relevant[order[p]];
    if (k > 0.0) {
      // A relevant item sits at offset y, uniform on 0..n-1, with y(k-1)/(n-1)
      // other relevant items ahead of it on average.
      const double share = n > 1.0 ? (k - 1.0) / (n - 1.0) : 0.0;
      double precision = 0.0;
      for (std::size_t y = 0; y < hi - lo; ++y) {
        const double yd = static_cast<double>(y);
        precision += (hits_before + 1.0 + yd * share) / (ranked_before + 1.0 + yd);
      }
      total += k * precision / n;
    }
    ranked_before += n;
    hits_before += k;
    lo = hi;
  }
  return total / static_cast<double>(std::count(is_relevant.begin(), is_relevant.end(), std::uint8_t{1}));
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("argmax of an empty vector");
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin());
}

double mean_squared_error(std::span<const double> predictions, std::span<const double> targets) {
  if (predictions.size() != targets.size() || targets.empty()) {
    throw std::invalid_argument("MSE needs equally sized, non-empty prediction and target vectors");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double r = targets[i] - predictions[i];
    sum += r * r;
  }
  return sum / static_cast<double>(targets.size());
}

double misclassification_rate(std::span<const double> probabilities, std::span<const double> labels,
                              std::size_t classes) {
  if (classes == 0 || probabilities.size() != labels.size() * classes || labels.empty()) {
    throw std::invalid_argument("misclassification rate needs n x classes probabilities for n labels");
  }
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const std::size_t predicted = argmax(probabilities.subspan(i * classes, classes));
    if (predicted != static_cast<std::size_t>(labels[i])) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(labels.size());
}

double test_error(std::span<const double> predictions, std::span<const double> targets, TaskKind task,
                  int output_dim) {
  if (task == TaskKind::kRegression) return mean_squared_error(predictions, targets);
  return misclassification_rate(predictions, targets, static_cast<std::size_t>(output_dim));
}

}  // namespace prsb
