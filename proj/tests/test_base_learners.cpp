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
#include "helpers.hpp"
#include "prsb/base_learners.hpp"
#include "prsb/ensemble.hpp"
#include "prsb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

using namespace prsb;
using prsb::testing::classification;
using prsb::testing::random_regression;
using prsb::testing::regression;

namespace {

std::vector<std::size_t> iota_rows(std::size_t n) {
  std::vector<std::size_t> rows(n);
  std::iota(rows.begin(), rows.end(), 0);
  return rows;
}

Dataset random_classification(std::size_t n, std::size_t m, int classes, std::uint32_t seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> z(0.0, 1.0);
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  d.task = TaskKind::kClassification;
  d.class_count = classes;
  d.target.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < m; ++j) d.features(i, j) = z(gen);
    d.target[i] = static_cast<double>(gen() % static_cast<unsigned>(classes));
  }
  return d;
}

// Brute-force kNN: sort every training row by (distance, row index).
Prediction knn_oracle(const Dataset& d, const FeatureSubset& z, std::span<const std::size_t> rows,
                      std::span<const double> x, std::size_t k) {
  std::vector<std::pair<double, std::size_t>> order;
  for (std::size_t r : rows) {
    double dist = 0;
    for (std::size_t j : z.active()) dist += (d.features(r, j) - x[j]) * (d.features(r, j) - x[j]);
    order.emplace_back(dist, r);
  }
  std::sort(order.begin(), order.end());
  k = std::min(k, order.size());
  if (d.task == TaskKind::kRegression) {
    double s = 0;
    for (std::size_t q = 0; q < k; ++q) s += d.target[order[q].second];
    return {s / static_cast<double>(k)};
  }
  Prediction p(d.class_count, 0.0);
  for (std::size_t q = 0; q < k; ++q) p[d.label(order[q].second)] += 1.0 / static_cast<double>(k);
  return p;
}

}  // namespace

TEST_SUITE("base_learners") {
  TEST_CASE("learner names round-trip") {
    for (auto kind : {LearnerKind::kCartTree, LearnerKind::kKnn, LearnerKind::kConstant}) {
      CHECK(parse_learner_kind(to_string(kind)) == kind);
    }
    CHECK_THROWS(parse_learner_kind("svm"));
  }

  TEST_CASE("empty subset gives the bootstrap mean") {
    const auto d = regression({{0.0}, {5.0}, {9.0}}, {1, 2, 3});
    for (auto spec : {LearnerSpec::tree(), LearnerSpec::knn(), LearnerSpec::constant()}) {
      const auto model = fit(spec, d, FeatureSubset(1), iota_rows(3));
      CHECK(model.is_constant());
      CHECK(model.predict(std::vector<double>{100.0})[0] == 2.0);
    }
    const std::vector<std::size_t> boot = {2, 2, 0};
    CHECK(fit(LearnerSpec::tree(), d, FeatureSubset(1), boot).predict(std::vector<double>{0.0})[0] ==
          doctest::Approx(7.0 / 3.0));
  }

  TEST_CASE("constant classifier puts all mass on the majority class") {
    const auto d = classification({{0.0}, {1.0}, {2.0}, {3.0}}, {2, 2, 0, 1}, 3);
    const auto model = fit(LearnerSpec::knn(), d, FeatureSubset(1), iota_rows(4));
    CHECK(model.predict(std::vector<double>{0.0}) == Prediction{0.0, 0.0, 1.0});
    // ties go to the lower class
    const auto tie = classification({{0.0}, {1.0}}, {1, 0}, 2);
    CHECK(fit(LearnerSpec::constant(), tie, FeatureSubset::full(1), iota_rows(2)).predict(std::vector<double>{0.0}) ==
          Prediction{1.0, 0.0});
  }

  TEST_CASE("stump separates a 1-D step exactly") {
    const auto d = regression({{0.0}, {1.0}, {0.0}, {1.0}}, {0, 1, 0, 1});
    auto spec = LearnerSpec::tree();
    spec.max_depth = 1;
    const auto model = fit(spec, d, FeatureSubset::full(1), iota_rows(4));
    CHECK(model.tree_depth() == 1);
    for (std::size_t i = 0; i < 4; ++i) CHECK(model.predict(d.row(i))[0] == d.target[i]);
    CHECK(model.predict(std::vector<double>{0.49})[0] == 0.0);
    CHECK(model.predict(std::vector<double>{0.51})[0] == 1.0);
  }

  TEST_CASE("regression leaf returns the mean of its targets") {
    auto spec = LearnerSpec::tree();
    spec.max_depth = 1;
    const auto d = regression({{0.0}, {0.0}, {1.0}, {1.0}}, {4, 6, 10, 10});
    const auto model = fit(spec, d, FeatureSubset::full(1), iota_rows(4));
    CHECK(model.predict(std::vector<double>{0.0})[0] == 5.0);
  }

  TEST_CASE("kNN with k=1 reproduces training targets") {
    const auto d = random_regression(60, 4, 3);
    const auto model = fit(LearnerSpec::knn(1), d, FeatureSubset::full(4), iota_rows(60));
    for (std::size_t i = 0; i < 60; ++i) CHECK(model.predict(d.row(i))[0] == d.target[i]);
  }

  TEST_CASE("kNN class frequencies") {
    const auto d = classification({{0.0}, {0.1}, {0.2}, {5.0}, {6.0}}, {0, 0, 1, 1, 1}, 2);
    const auto model = fit(LearnerSpec::knn(3), d, FeatureSubset::full(1), iota_rows(5));
    const auto p = model.predict(std::vector<double>{0.0});
    CHECK(p[0] == doctest::Approx(2.0 / 3.0));
    CHECK(p[1] == doctest::Approx(1.0 / 3.0));
  }

  TEST_CASE("kNN distance ties go to the lower sample index") {
    const auto d = regression({{1.0}, {-1.0}, {1.0}}, {10, 20, 30});
    const auto model = fit(LearnerSpec::knn(1), d, FeatureSubset::full(1), iota_rows(3));
    CHECK(model.predict(std::vector<double>{0.0})[0] == 10.0);
    const std::vector<std::size_t> rows = {2, 1, 0};
    CHECK(fit(LearnerSpec::knn(1), d, FeatureSubset::full(1), rows).predict(std::vector<double>{0.0})[0] == 10.0);
  }

  TEST_CASE("k larger than the bootstrap is clamped") {
    const auto d = regression({{0.0}, {1.0}, {2.0}}, {3, 6, 9});
    const auto model = fit(LearnerSpec::knn(50), d, FeatureSubset::full(1), iota_rows(3));
    CHECK(model.predict(std::vector<double>{0.0})[0] == doctest::Approx(6.0));
    CHECK_THROWS(fit(LearnerSpec::knn(0), d, FeatureSubset::full(1), iota_rows(3)));
  }

  TEST_CASE("kNN agrees with a brute-force oracle") {
    for (std::uint32_t seed = 0; seed < 4; ++seed) {
      const auto reg = random_regression(80, 6, seed);
      const auto cls = random_classification(80, 6, 3, seed + 10);
      Rng rng(seed);
      const auto boot = bootstrap_sample(iota_rows(80), rng);
      FeatureSubset z(6);
      z.set(seed % 6);
      z.set((seed + 3) % 6);
      for (std::size_t k : {1, 3, 5, 9}) {
        const auto m1 = fit(LearnerSpec::knn(k), reg, z, boot);
        const auto m2 = fit(LearnerSpec::knn(k), cls, z, boot);
        for (std::size_t i = 0; i < 80; i += 7) {
          const auto x = reg.row(i);
          CHECK(m1.predict(x)[0] == doctest::Approx(knn_oracle(reg, z, boot, x, k)[0]).epsilon(1e-12));
          const auto p = m2.predict(cls.row(i));
          const auto q = knn_oracle(cls, z, boot, cls.row(i), k);
          for (int c = 0; c < 3; ++c) {
            CHECK(p[c] == doctest::Approx(q[c]).epsilon(1e-12));
            const double scaled = p[c] * static_cast<double>(k);
            CHECK(std::abs(scaled - std::round(scaled)) < 1e-9);
          }
        }
      }
    }
  }

  TEST_CASE("fully grown CART fits its bootstrap exactly") {
    for (std::uint32_t seed = 0; seed < 5; ++seed) {
      const auto reg = random_regression(120, 5, seed);
      const auto cls = random_classification(120, 5, 4, seed);
      Rng rng(seed + 100);
      const auto boot = bootstrap_sample(iota_rows(120), rng);
      FeatureSubset z(5);
      z.set(1);
      z.set(4);
      const auto t1 = fit(LearnerSpec::tree(), reg, z, boot);
      const auto t2 = fit(LearnerSpec::tree(), cls, z, boot);
      for (std::size_t r : boot) {
        CHECK(t1.predict(reg.row(r))[0] == doctest::Approx(reg.target[r]).epsilon(1e-12));
        const auto p = t2.predict(cls.row(r));
        CHECK(p[cls.label(r)] == 1.0);
      }
    }
  }

  TEST_CASE("CART leaf classes are proportions") {
    const auto d = classification({{0.0}, {0.0}, {0.0}, {1.0}}, {0, 1, 1, 0}, 2);
    const auto model = fit(LearnerSpec::tree(), d, FeatureSubset::full(1), iota_rows(4));
    const auto p = model.predict(std::vector<double>{0.0});
    CHECK(p[0] == doctest::Approx(1.0 / 3.0));
    CHECK(p[1] == doctest::Approx(2.0 / 3.0));
  }

  TEST_CASE("split ties go to the lowest feature index") {
    // both columns separate the targets perfectly
    const auto d = regression({{0.0, 0.0}, {1.0, 1.0}}, {0, 1});
    auto spec = LearnerSpec::tree();
    spec.max_depth = 1;
    const auto model = fit(spec, d, FeatureSubset::full(2), iota_rows(2));
    CHECK(model.predict(std::vector<double>{0.0, 1.0})[0] == 0.0);
    CHECK(model.predict(std::vector<double>{1.0, 0.0})[0] == 1.0);
  }

  TEST_CASE("predictions ignore unselected columns") {
    std::mt19937 gen(5);
    std::normal_distribution<double> noise(0.0, 10.0);
    const auto reg = random_regression(100, 7, 9);
    const auto cls = random_classification(100, 7, 3, 9);
    FeatureSubset z(7);
    z.set(0);
    z.set(3);
    z.set(5);
    for (auto spec : {LearnerSpec::tree(), LearnerSpec::knn(5)}) {
      for (const Dataset* d : {&reg, &cls}) {
        const auto model = fit(spec, *d, z, iota_rows(100));
        for (int trial = 0; trial < 50; ++trial) {
          std::vector<double> x(d->row(trial).begin(), d->row(trial).end());
          const auto before = model.predict(x);
          for (std::size_t j : {1, 2, 4, 6}) x[j] += noise(gen);
          CHECK(model.predict(x) == before);
        }
      }
    }
  }

  TEST_CASE("fitting is deterministic") {
    const auto d = random_regression(50, 3, 2);
    const auto a = fit(LearnerSpec::tree(), d, FeatureSubset::full(3), iota_rows(50), 7);
    const auto b = fit(LearnerSpec::tree(), d, FeatureSubset::full(3), iota_rows(50), 7);
    CHECK(a.bootstrap_id() == 7);
    for (std::size_t i = 0; i < 50; ++i) CHECK(a.predict(d.row(i)) == b.predict(d.row(i)));
  }

  TEST_CASE("bootstrap draws with replacement from the pool") {
    std::vector<std::size_t> pool = {3, 8, 11, 20};
    Rng rng(9);
    std::vector<int> hits(21, 0);
    for (int k = 0; k < 2000; ++k) {
      const auto b = bootstrap_sample(pool, rng);
      CHECK(b.size() == pool.size());
      for (std::size_t r : b) {
        CHECK(std::find(pool.begin(), pool.end(), r) != pool.end());
        ++hits[r];
      }
    }
    for (std::size_t r : pool) CHECK(std::abs(hits[r] / 8000.0 - 0.25) < 0.02);
  }

  TEST_CASE("max depth and min split are honoured") {
    const auto d = random_regression(200, 4, 1);
    auto spec = LearnerSpec::tree();
    spec.max_depth = 3;
    CHECK(fit(spec, d, FeatureSubset::full(4), iota_rows(200)).tree_depth() <= 3);
    spec.max_depth = 0;
    spec.min_samples_split = 500;
    CHECK(fit(spec, d, FeatureSubset::full(4), iota_rows(200)).tree_depth() == 0);
    CHECK(fit(LearnerSpec::knn(), d, FeatureSubset::full(4), iota_rows(200)).tree_depth() == -1);
  }
}

TEST_SUITE("ensemble") {
  TEST_CASE("ensemble prediction is the unweighted mean") {
    const auto d = regression({{0.0}, {1.0}, {2.0}, {3.0}}, {1, 2, 3, 10});
    Ensemble e;
    e.alpha = SelectionProbs::constant(1, 0.5);
    const std::vector<std::size_t> a = {0, 1}, b = {2, 3};
    e.models.push_back(fit(LearnerSpec::tree(), d, FeatureSubset(1), a));
    e.models.push_back(fit(LearnerSpec::tree(), d, FeatureSubset(1), b));
    CHECK(e.predict(std::vector<double>{0.0})[0] == doctest::Approx((1.5 + 6.5) / 2));
    const auto all = e.predict_all(d);
    CHECK(all.size() == 4);
    for (double v : all) CHECK(v == doctest::Approx(4.0));
    const auto single = predict_all(e.models[1], d);
    CHECK(single == std::vector<double>(4, 6.5));
  }
}
