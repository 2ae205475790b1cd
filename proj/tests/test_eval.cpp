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

#include "doctest.h"
#include "prsb/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace prsb;

namespace {

// Average precision written out prefix by prefix.
double ap_oracle(const std::vector<std::size_t>& ranking, const std::vector<std::size_t>& relevant) {
  double total = 0;
  std::size_t hits = 0;
  for (std::size_t pos = 0; pos < ranking.size(); ++pos) {
    if (std::find(relevant.begin(), relevant.end(), ranking[pos]) != relevant.end()) {
      ++hits;
      total += static_cast<double>(hits) / static_cast<double>(pos + 1);
    }
  }
  return total / static_cast<double>(relevant.size());
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("ranking examples") {
    CHECK(rank_features(std::vector<double>{0.1, 0.9, 0.5}) == std::vector<std::size_t>{1, 2, 0});
    CHECK(rank_features(std::vector<double>(4, 0.3)) == std::vector<std::size_t>{0, 1, 2, 3});
  }

  TEST_CASE("ranking agrees with an independent comparator") {
    std::mt19937 gen(1);
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<double> a(40);
      for (auto& v : a) v = static_cast<double>(gen() % 10) / 10.0;
      std::vector<std::size_t> idx(40);
      std::iota(idx.begin(), idx.end(), 0);
      std::sort(idx.begin(), idx.end(), [&](std::size_t p, std::size_t q) { return a[p] > a[q] || (a[p] == a[q] && p < q); });
      CHECK(rank_features(a) == idx);
    }
  }

  TEST_CASE("aupr examples") {
    const std::vector<std::size_t> rel = {2, 5};
    CHECK(aupr(std::vector<std::size_t>{5, 2, 0, 1, 3, 4}, rel, 6) == 1.0);
    CHECK(aupr(std::vector<std::size_t>{1, 0, 2, 3}, std::vector<std::size_t>{0}, 4) == 0.5);
    CHECK_THROWS(aupr(std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{}, 2));
    CHECK_THROWS(aupr(std::vector<std::size_t>{0, 1}, std::vector<std::size_t>{7}, 2));
  }

  TEST_CASE("random rankings match the expected average precision") {
    std::mt19937 gen(2);
    std::vector<std::size_t> ranking(300);
    std::iota(ranking.begin(), ranking.end(), 0);
    const std::vector<std::size_t> rel = {0, 1, 2, 3, 4};
    double total = 0;
    for (int k = 0; k < 1000; ++k) {
      std::shuffle(ranking.begin(), ranking.end(), gen);
      const double v = aupr(ranking, rel, 300);
      CHECK(v == doctest::Approx(ap_oracle(ranking, rel)).epsilon(1e-13));
      total += v;
    }
    // E[AP] = H_N/N + (R-1)/(N-1) * (1 - H_N/N); tends to the prevalence for large N.
    double harmonic = 0;
    for (int k = 1; k <= 300; ++k) harmonic += 1.0 / k;
    const double expected = harmonic / 300 + 4.0 / 299.0 * (1 - harmonic / 300);
    CHECK(std::abs(total / 1000 - expected) < 0.005);
    CHECK(expected < 3 * 5.0 / 300.0);
  }

  TEST_CASE("aupr depends only on the positions of relevant items") {
    std::mt19937 gen(3);
    std::vector<std::size_t> ranking(30);
    std::iota(ranking.begin(), ranking.end(), 0);
    std::shuffle(ranking.begin(), ranking.end(), gen);
    const std::vector<std::size_t> rel = {3, 7, 11};
    const double base = aupr(ranking, rel, 30);
    for (int k = 0; k < 20; ++k) {
      std::vector<std::size_t> slots, items;
      for (std::size_t p = 0; p < ranking.size(); ++p) {
        if (std::find(rel.begin(), rel.end(), ranking[p]) == rel.end()) {
          slots.push_back(p);
          items.push_back(ranking[p]);
        }
      }
      std::shuffle(items.begin(), items.end(), gen);
      auto other = ranking;
      for (std::size_t q = 0; q < slots.size(); ++q) other[slots[q]] = items[q];
      CHECK(aupr(other, rel, 30) == base);
    }
  }

  TEST_CASE("promoting a relevant item raises aupr") {
    std::mt19937 gen(4);
    std::vector<std::size_t> ranking(25);
    std::iota(ranking.begin(), ranking.end(), 0);
    std::shuffle(ranking.begin(), ranking.end(), gen);
    const std::vector<std::size_t> rel = {1, 4, 9, 16};
    auto is_rel = [&](std::size_t v) { return std::find(rel.begin(), rel.end(), v) != rel.end(); };
    for (std::size_t p = 1; p < ranking.size(); ++p) {
      if (is_rel(ranking[p]) && !is_rel(ranking[p - 1])) {
        auto swapped = ranking;
        std::swap(swapped[p], swapped[p - 1]);
        CHECK(aupr(swapped, rel, 25) > aupr(ranking, rel, 25));
      }
    }
  }

  TEST_CASE("tie-averaged aupr examples") {
    // No ties: identical to the ordinary ranking.
    const std::vector<double> distinct = {0.9, 0.1, 0.5, 0.7};
    const std::vector<std::size_t> rel = {1, 3};
    CHECK(expected_aupr(distinct, rel) == doctest::Approx(aupr(rank_features(distinct), rel, 4)).epsilon(1e-15));
    // Two relevant and two irrelevant all tied: mean over the 6 patterns
    // RRII RIRI RIIR IRRI IRIR IIRR.
    const std::vector<double> flat(4, 0.5);
    const double patterns = 1.0 + 0.5 * (1 + 2.0 / 3) + 0.5 * (1 + 0.5) + 0.5 * (0.5 + 2.0 / 3) +
                            0.5 * (0.5 + 0.5) + 0.5 * (1.0 / 3 + 0.5);
    CHECK(expected_aupr(flat, rel) == doctest::Approx(patterns / 6.0).epsilon(1e-14));
    CHECK_THROWS(expected_aupr(flat, std::vector<std::size_t>{}));
    CHECK_THROWS(expected_aupr(flat, std::vector<std::size_t>{4}));
  }

  TEST_CASE("tie-averaged aupr matches enumeration of tie orders") {
    std::mt19937 gen(31);
    for (int trial = 0; trial < 40; ++trial) {
      const std::size_t m = 7;
      std::vector<double> scores(m);
      for (auto& v : scores) v = static_cast<double>(gen() % 3);
      std::vector<std::size_t> rel;
      for (std::size_t j = 0; j < m; ++j) {
        if (gen() % 3 == 0) rel.push_back(j);
      }
      if (rel.empty()) rel.push_back(gen() % m);
      // Every permutation consistent with the score order, equally weighted.
      std::vector<std::size_t> perm(m);
      std::iota(perm.begin(), perm.end(), std::size_t{0});
      double sum = 0;
      int count = 0;
      do {
        bool sorted = true;
        for (std::size_t k = 1; k < m && sorted; ++k) sorted = scores[perm[k - 1]] >= scores[perm[k]];
        if (!sorted) continue;
        sum += ap_oracle(perm, rel);
        ++count;
      } while (std::next_permutation(perm.begin(), perm.end()));
      CHECK(expected_aupr(scores, rel) == doctest::Approx(sum / count).epsilon(1e-12));
    }
  }

  TEST_CASE("test error examples") {
    const std::vector<double> y = {1.0, 2.0, 4.0};
    CHECK(test_error(y, y, TaskKind::kRegression, 1) == 0.0);
    const std::vector<double> probs = {0.9, 0.1, 0.2, 0.8};
    CHECK(test_error(probs, std::vector<double>{1.0, 0.0}, TaskKind::kClassification, 2) == 1.0);
    CHECK(test_error(probs, std::vector<double>{0.0, 1.0}, TaskKind::kClassification, 2) == 0.0);
    CHECK(argmax(std::vector<double>{0.4, 0.4, 0.2}) == 0);
    CHECK(misclassification_rate(std::vector<double>{0.5, 0.5}, std::vector<double>{1.0}, 2) == 1.0);
  }

  TEST_CASE("constant mean predictor has MSE equal to the variance") {
    std::mt19937 gen(5);
    std::normal_distribution<double> z(3.0, 2.0);
    std::vector<double> y(1000);
    for (auto& v : y) v = z(gen);
    const double mean = std::accumulate(y.begin(), y.end(), 0.0) / 1000;
    double var = 0;
    for (double v : y) var += (v - mean) * (v - mean);
    var /= 1000;
    CHECK(mean_squared_error(std::vector<double>(1000, mean), y) == doctest::Approx(var).epsilon(1e-12));
    CHECK_THROWS(mean_squared_error(std::vector<double>(3, 0.0), std::vector<double>(2, 0.0)));
  }
}
