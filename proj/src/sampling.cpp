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

#include "prsb/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace prsb {
namespace {

constexpr double kLogFallbackHigh = 1e12;
constexpr double kLogFallbackLow = 1e-12;

void check_lengths(const FeatureSubset& subset, const SelectionProbs& alpha) {
  if (subset.size() != alpha.size()) {
    throw std::invalid_argument("subset length " + std::to_string(subset.size()) +
                                " does not match probability vector length " + std::to_string(alpha.size()));
  }
}

double bit_factor(bool on, double a) { return on ? a : 1.0 - a; }

// Product of the given factors, switching to a log-space sum when a partial
// product leaves [1e-12, 1e12].
template <class FactorAt>
double stable_product(std::size_t count, FactorAt&& factor_at) {
  double product = 1.0;
  for (std::size_t j = 0; j < count; ++j) {
    product *= factor_at(j);
    if (product > kLogFallbackHigh || (product < kLogFallbackLow && product > 0.0)) {
      double log_sum = 0.0;
      for (std::size_t k = 0; k < count; ++k) {
        const double f = factor_at(k);
        if (f == 0.0) return 0.0;
        log_sum += std::log(f);
      }
      return std::exp(log_sum);
    }
  }
  return product;
}

double ratio_factor(const FeatureSubset& subset, const SelectionProbs& alpha, const SelectionProbs& beta,
                    std::size_t j) {
  const bool on = subset.test(j);
  const double denom = bit_factor(on, alpha[j]);
  if (denom == 0.0) {
    throw DegenerateRatioError("importance weight undefined: feature " + std::to_string(j) +
                               " has zero probability under the sampling distribution");
  }
  return bit_factor(on, beta[j]) / denom;
}

}  // namespace

FeatureSubset sample_subset(const SelectionProbs& alpha, Rng& rng) {
  FeatureSubset subset(alpha.size());
  for (std::size_t j = 0; j < alpha.size(); ++j) {
    subset.set(j, rng.uniform() < alpha[j]);
  }
  return subset;
}

double pmf(const FeatureSubset& subset, const SelectionProbs& alpha) {
  check_lengths(subset, alpha);
  double p = 1.0;
  for (std::size_t j = 0; j < alpha.size(); ++j) p *= bit_factor(subset.test(j), alpha[j]);
  return p;
}

double pmf_without(const FeatureSubset& subset, const SelectionProbs& alpha, std::size_t j) {
  check_lengths(subset, alpha);
  double p = 1.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (k != j) p *= bit_factor(subset.test(k), alpha[k]);
  }
  return p;
}

double importance_weight(const FeatureSubset& subset, const SelectionProbs& alpha, const SelectionProbs& beta) {
  check_lengths(subset, alpha);
  check_lengths(subset, beta);
  return stable_product(alpha.size(), [&](std::size_t j) { return ratio_factor(subset, alpha, beta, j); });
}

double importance_weight_without(const FeatureSubset& subset, const SelectionProbs& alpha,
                                 const SelectionProbs& beta, std::size_t j) {
  check_lengths(subset, alpha);
  check_lengths(subset, beta);
  return stable_product(alpha.size(),
                        [&](std::size_t k) { return k == j ? 1.0 : ratio_factor(subset, alpha, beta, k); });
}

double effective_sample_size(std::span<const double> weights) {
  double largest = 0.0;
  for (double w : weights) {
    if (w < 0.0 || !std::isfinite(w)) {
      throw std::invalid_argument("importance weights must be finite and non-negative");
    }
    largest = std::max(largest, w);
  }
  if (largest == 0.0) {
    throw WeightCollapseError("all importance weights are zero");
  }
  // Scaling by the largest weight leaves the ratio unchanged and avoids overflow.
  double sum = 0.0;
  double sum_sq = 0.0;
  for (double w : weights) {
    const double s = w / largest;
    sum += s;
    sum_sq += s * s;
  }
  const double ess = sum * sum / sum_sq;
  return std::clamp(ess, 1.0, static_cast<double>(weights.size()));
}

ImportanceState::ImportanceState(SelectionProbs alpha, std::vector<FeatureSubset> subsets)
    : alpha_(std::move(alpha)), subsets_(std::move(subsets)) {
  const std::size_t m = alpha_.size();
  with_counts_.assign(m, 0);
  for (const auto& z : subsets_) {
    if (z.size() != m) throw std::invalid_argument("subset length does not match probability vector length");
    for (std::size_t j = 0; j < m; ++j) with_counts_[j] += z.test(j) ? 1 : 0;
  }
  update(alpha_);
}

void ImportanceState::update(const SelectionProbs& beta) {
  const std::size_t m = alpha_.size();
  if (beta.size() != m) throw std::invalid_argument("beta length does not match alpha length");
  beta_ = beta;
  constexpr double kUndefined = std::numeric_limits<double>::quiet_NaN();
  ratio_on_.resize(m);
  ratio_off_.resize(m);
  for (std::size_t j = 0; j < m; ++j) {
    ratio_on_[j] = alpha_[j] > 0.0 ? beta_[j] / alpha_[j] : kUndefined;
    ratio_off_[j] = alpha_[j] < 1.0 ? (1.0 - beta_[j]) / (1.0 - alpha_[j]) : kUndefined;
  }

  const std::size_t t_count = subsets_.size();
  nonzero_product_.assign(t_count, 1.0);
  zero_count_.assign(t_count, 0);
  weights_.assign(t_count, 0.0);
  for (std::size_t t = 0; t < t_count; ++t) {
    const auto& z = subsets_[t];
    const auto& bits = z.bits();
    std::size_t zeros = 0;
    double product = 1.0;
    bool out_of_range = false;
    for (std::size_t j = 0; j < m; ++j) {
      const double r = bits[j] ? ratio_on_[j] : ratio_off_[j];
      if (std::isnan(r)) {
        throw DegenerateRatioError("model " + std::to_string(t) + " uses feature " + std::to_string(j) +
                                   " with a zero-probability bit under its sampling distribution");
      }
      if (r == 0.0) {
        ++zeros;
        continue;
      }
      product *= r;
      out_of_range = out_of_range || product > kLogFallbackHigh || product < kLogFallbackLow;
    }
    if (out_of_range) {
      product = stable_product(m, [&](std::size_t j) {
        const double r = bits[j] ? ratio_on_[j] : ratio_off_[j];
        return r == 0.0 ? 1.0 : r;
      });
    }
    nonzero_product_[t] = product;
    zero_count_[t] = zeros;
    weights_[t] = zeros == 0 ? nonzero_product_[t] : 0.0;
  }

  if (t_count == 0) {
    t_eff_ = 0.0;
    return;
  }
  try {
    t_eff_ = effective_sample_size(weights_);
  } catch (const WeightCollapseError&) {
    t_eff_ = 0.0;
  }
}

double ImportanceState::factor(std::size_t t, std::size_t j) const {
  return subsets_[t].test(j) ? ratio_on_[j] : ratio_off_[j];
}

double ImportanceState::weight_without(std::size_t t, std::size_t j) const {
  const double r = factor(t, j);
  if (r == 0.0) return zero_count_[t] == 1 ? nonzero_product_[t] : 0.0;
  return zero_count_[t] == 0 ? nonzero_product_[t] / r : 0.0;
}

double mean_pairwise_hamming(std::span<const FeatureSubset> population) {
  const std::size_t n = population.size();
  if (n < 2) return 0.0;
  // Sum over features of (#ones * #zeros) equals the sum over pairs of bit
  // differences.
  const std::size_t m = population.front().size();
  double total = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    std::size_t ones = 0;
    for (const auto& z : population) ones += z.test(j) ? 1 : 0;
    total += static_cast<double>(ones) * static_cast<double>(n - ones);
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return total / pairs;
}

}  // namespace prsb
