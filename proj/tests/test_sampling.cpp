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
#include "prsb/rng.hpp"
#include "prsb/sampling.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <vector>

using namespace prsb;

namespace {

FeatureSubset mask_subset(std::size_t m, std::size_t mask) {
  FeatureSubset z(m);
  for (std::size_t j = 0; j < m; ++j) z.set(j, ((mask >> j) & 1U) != 0);
  return z;
}

SelectionProbs random_probs(std::size_t m, std::mt19937& gen, double lo = 0.0, double hi = 1.0) {
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<double> a(m);
  for (auto& v : a) v = u(gen);
  return SelectionProbs(a);
}

// Independent reference: (sum w)^2 / sum w^2 in long double.
double ess_oracle(const std::vector<double>& w) {
  long double s = 0, s2 = 0;
  for (double v : w) {
    s += v;
    s2 += static_cast<long double>(v) * v;
  }
  return static_cast<double>(s * s / s2);
}

}  // namespace

TEST_SUITE("rng") {
  TEST_CASE("same seed, same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 100; ++i) CHECK(a() == b());
    CHECK(Rng(42).split(3).key() == Rng(42).split(3).key());
    CHECK(Rng(42).split(3).key() != Rng(42).split(4).key());
    CHECK(Rng(42).split(1, 2).key() == Rng(42).split(1).split(2).key());
  }

  TEST_CASE("uniform, below and normal moments") {
    Rng r(7);
    double sum = 0, sum_sq = 0;
    std::vector<int> hist(7, 0);
    const int n = 200000;
    for (int i = 0; i < n; ++i) {
      const double u = r.uniform();
      CHECK_UNARY(u >= 0.0);
      CHECK_UNARY(u < 1.0);
      ++hist[r.below(7)];
      const double z = r.normal();
      sum += z;
      sum_sq += z * z;
    }
    CHECK(std::abs(sum / n) < 0.01);
    CHECK(std::abs(sum_sq / n - 1.0) < 0.02);
    for (int c : hist) CHECK(std::abs(c / double(n) - 1.0 / 7.0) < 0.005);
  }

  TEST_CASE("shuffle is a permutation") {
    Rng r(1);
    std::vector<int> v(50);
    for (int i = 0; i < 50; ++i) v[i] = i;
    r.shuffle(std::span<int>(v));
    CHECK(std::set<int>(v.begin(), v.end()).size() == 50);
  }
}

TEST_SUITE("sampling") {
  TEST_CASE("degenerate Bernoulli draws") {
    Rng r(3);
    CHECK(sample_subset(SelectionProbs::constant(9, 1.0), r).count() == 9);
    CHECK(sample_subset(SelectionProbs::constant(9, 0.0), r).none());
  }

  TEST_CASE("per-bit frequency at one half") {
    Rng r(5);
    std::vector<int> ones(20, 0);
    const int draws = 10000;
    const auto a = SelectionProbs::constant(20, 0.5);
    for (int k = 0; k < draws; ++k) {
      const auto z = sample_subset(a, r);
      for (std::size_t j = 0; j < 20; ++j) ones[j] += z.test(j) ? 1 : 0;
    }
    for (int c : ones) CHECK(std::abs(c / double(draws) - 0.5) < 0.02);
  }

  TEST_CASE("pmf examples") {
    const auto a = SelectionProbs::constant(2, 0.5);
    double total = 0;
    for (std::size_t mask = 0; mask < 4; ++mask) {
      CHECK(pmf(mask_subset(2, mask), a) == 0.25);
      total += pmf(mask_subset(2, mask), a);
    }
    CHECK(total == 1.0);
    CHECK(pmf(mask_subset(2, 0b01), SelectionProbs({0.3, 0.8})) == doctest::Approx(0.06).epsilon(1e-15));
  }

  TEST_CASE("pmf sums to one over every subset") {
    std::mt19937 gen(17);
    for (std::size_t m = 1; m <= 12; ++m) {
      auto a = random_probs(m, gen);
      if (m % 3 == 0) {
        std::vector<double> v(a.values().begin(), a.values().end());
        v[0] = 0.0;
        v[m - 1] = 1.0;
        a = SelectionProbs(v);
      }
      long double total = 0;
      for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) total += pmf(mask_subset(m, mask), a);
      CHECK(std::abs(static_cast<double>(total) - 1.0) < 1e-12);
    }
  }

  TEST_CASE("leave-one-out factorization") {
    std::mt19937 gen(23);
    const std::size_t m = 7;
    const auto a = random_probs(m, gen);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); mask += 5) {
      const auto z = mask_subset(m, mask);
      for (std::size_t j = 0; j < m; ++j) {
        const double factor = z.test(j) ? a[j] : 1.0 - a[j];
        CHECK(pmf(z, a) == doctest::Approx(pmf_without(z, a, j) * factor).epsilon(1e-14));
      }
    }
  }

  TEST_CASE("importance weights") {
    std::mt19937 gen(29);
    const auto a = random_probs(6, gen, 0.05, 0.95);
    for (std::size_t mask = 0; mask < 64; ++mask) CHECK(importance_weight(mask_subset(6, mask), a, a) == 1.0);
    FeatureSubset one(1);
    one.set(0, true);
    CHECK(importance_weight(one, SelectionProbs({0.5}), SelectionProbs({0.25})) == 0.5);
    CHECK_THROWS_AS(importance_weight(one, SelectionProbs({0.0}), SelectionProbs({0.25})), DegenerateRatioError);
  }

  TEST_CASE("importance weights agree with the ratio of full products") {
    std::mt19937 gen(31);
    const std::size_t m = 8;
    const auto a = random_probs(m, gen, 0.05, 0.95);
    const auto b = random_probs(m, gen, 0.05, 0.95);
    for (std::size_t mask = 0; mask < (std::size_t{1} << m); ++mask) {
      const auto z = mask_subset(m, mask);
      CHECK(importance_weight(z, a, b) == doctest::Approx(pmf(z, b) / pmf(z, a)).epsilon(1e-12));
      CHECK(importance_weight_without(z, a, b, 3) ==
            doctest::Approx(pmf_without(z, b, 3) / pmf_without(z, a, 3)).epsilon(1e-12));
    }
  }

  TEST_CASE("log-space fallback keeps extreme ratios finite") {
    const std::size_t m = 150;
    const auto a = SelectionProbs::constant(m, 0.01);
    const auto b = SelectionProbs::constant(m, 0.5);
    const auto z = FeatureSubset::full(m);
    const double w = importance_weight(z, a, b);
    CHECK(std::isfinite(w));
    CHECK(w == doctest::Approx(std::exp(m * std::log(50.0))).epsilon(1e-9));
    const auto tiny = importance_weight(FeatureSubset::full(m), b, a);
    CHECK(tiny == doctest::Approx(std::exp(-(m * std::log(50.0)))).epsilon(1e-9));
  }

  TEST_CASE("importance weights are unbiased") {
    std::mt19937 gen(37);
    const std::size_t m = 10;
    const auto a = random_probs(m, gen, 0.2, 0.8);
    std::vector<double> bv(a.values().begin(), a.values().end());
    for (auto& v : bv) v = std::clamp(v + 0.05, 0.0, 1.0);
    const SelectionProbs b(bv);
    Rng r(41);
    double mean = 0;
    const int draws = 10000;
    for (int k = 0; k < draws; ++k) mean += importance_weight(sample_subset(a, r), a, b);
    CHECK(std::abs(mean / draws - 1.0) < 1e-2);
  }

  TEST_CASE("effective sample size examples") {
    CHECK(effective_sample_size(std::vector<double>(100, 1.0)) == 100.0);
    std::vector<double> single(100, 0.0);
    single[0] = 1.0;
    CHECK(effective_sample_size(single) == 1.0);
    CHECK(effective_sample_size(std::vector<double>{2, 1, 1}) == doctest::Approx(16.0 / 6.0).epsilon(1e-15));
    CHECK_THROWS_AS(effective_sample_size(std::vector<double>(4, 0.0)), WeightCollapseError);
    CHECK_THROWS(effective_sample_size(std::vector<double>{1.0, -1.0}));
  }

  TEST_CASE("effective sample size bounds and scale invariance") {
    std::mt19937 gen(43);
    std::exponential_distribution<double> e(1.0);
    for (int trial = 0; trial < 200; ++trial) {
      const std::size_t t = 1 + trial % 50;
      std::vector<double> w(t);
      for (auto& v : w) v = e(gen);
      const double ess = effective_sample_size(w);
      CHECK(ess >= 1.0);
      CHECK(ess <= static_cast<double>(t));
      CHECK(ess == doctest::Approx(ess_oracle(w)).epsilon(1e-12));
      std::vector<double> scaled = w;
      for (auto& v : scaled) v *= 1e200;
      CHECK(effective_sample_size(scaled) == doctest::Approx(ess).epsilon(1e-12));
      if (t > 1) {
        w[0] *= 1.5;
        CHECK(effective_sample_size(w) < static_cast<double>(t));
      }
    }
  }

  TEST_CASE("importance state matches the free functions") {
    std::mt19937 gen(47);
    const std::size_t m = 6;
    const auto a = random_probs(m, gen, 0.1, 0.9);
    Rng r(2);
    std::vector<FeatureSubset> subsets;
    for (int t = 0; t < 40; ++t) subsets.push_back(sample_subset(a, r));
    ImportanceState state(a, subsets);
    CHECK(state.t_eff() == 40.0);
    for (double w : state.weights()) CHECK(w == 1.0);
    const auto b = random_probs(m, gen, 0.1, 0.9);
    state.update(b);
    std::vector<double> expect;
    for (std::size_t t = 0; t < subsets.size(); ++t) {
      expect.push_back(importance_weight(subsets[t], a, b));
      CHECK(state.weights()[t] == doctest::Approx(expect.back()).epsilon(1e-13));
      for (std::size_t j = 0; j < m; ++j) {
        CHECK(state.weight_without(t, j) ==
              doctest::Approx(importance_weight_without(subsets[t], a, b, j)).epsilon(1e-13));
      }
    }
    CHECK(state.t_eff() == doctest::Approx(ess_oracle(expect)).epsilon(1e-12));
    std::size_t with0 = 0;
    for (const auto& z : subsets) with0 += z.test(0) ? 1 : 0;
    CHECK(state.count_with(0) == with0);
    CHECK(state.count_without(0) == 40 - with0);
  }

  TEST_CASE("zero factors give zero weight and leave-one-out recovers them") {
    const SelectionProbs a({0.5, 0.5});
    std::vector<FeatureSubset> subsets = {mask_subset(2, 0b01), mask_subset(2, 0b10), mask_subset(2, 0b11)};
    ImportanceState state(a, subsets);
    state.update(SelectionProbs({0.0, 0.5}));
    CHECK(state.weights()[0] == 0.0);
    CHECK(state.weights()[1] == 2.0);
    CHECK(state.weights()[2] == 0.0);
    CHECK(state.weight_without(0, 0) == 1.0);
    CHECK(state.weight_without(2, 0) == 1.0);
    CHECK(state.weight_without(2, 1) == 0.0);
    CHECK(state.weight_without(1, 0) == 1.0);
    CHECK(state.t_eff() == 1.0);
    state.update(SelectionProbs({0.0, 0.0}));
    CHECK(state.collapsed());
  }

  TEST_CASE("collapse when every weight vanishes") {
    const SelectionProbs a({0.5});
    ImportanceState state(a, {mask_subset(1, 1), mask_subset(1, 1)});
    state.update(SelectionProbs({0.0}));
    CHECK(state.collapsed());
    CHECK(state.t_eff() == 0.0);
  }

  TEST_CASE("corrupted subsets are rejected") {
    const SelectionProbs a({0.0, 0.5});
    CHECK_THROWS_AS(ImportanceState(a, {mask_subset(2, 0b01)}), DegenerateRatioError);
  }

  TEST_CASE("mean pairwise Hamming distance") {
    const std::vector<FeatureSubset> two = {mask_subset(2, 0b00), mask_subset(2, 0b11)};
    CHECK(mean_pairwise_hamming(two) == 2.0);
    const std::vector<FeatureSubset> same(5, mask_subset(4, 0b1010));
    CHECK(mean_pairwise_hamming(same) == 0.0);
    // brute force over all pairs
    std::mt19937 gen(53);
    std::vector<FeatureSubset> pop;
    for (int t = 0; t < 30; ++t) pop.push_back(mask_subset(9, gen() % 512));
    double total = 0;
    int pairs = 0;
    for (std::size_t p = 0; p < pop.size(); ++p) {
      for (std::size_t q = p + 1; q < pop.size(); ++q) {
        for (std::size_t j = 0; j < 9; ++j) total += pop[p].test(j) != pop[q].test(j) ? 1 : 0;
        ++pairs;
      }
    }
    CHECK(mean_pairwise_hamming(pop) == doctest::Approx(total / pairs).epsilon(1e-14));
  }
}
