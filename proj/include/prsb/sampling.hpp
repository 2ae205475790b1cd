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

#ifndef PRSB_SAMPLING_HPP
#define PRSB_SAMPLING_HPP

#include "prsb/core_types.hpp"
#include "prsb/rng.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace prsb {

/// Draws each bit independently with probability alpha_j.
FeatureSubset sample_subset(const SelectionProbs& alpha, Rng& rng);

/// Product of alpha_j^{z_j} (1-alpha_j)^{1-z_j}, with 0^0 = 1.
double pmf(const FeatureSubset& subset, const SelectionProbs& alpha);
/// Same product with factor j omitted.
double pmf_without(const FeatureSubset& subset, const SelectionProbs& alpha, std::size_t j);

/// p(z|beta) / p(z|alpha), accumulated factor by factor. Throws
/// DegenerateRatioError if a factor of p(z|alpha) is zero.
double importance_weight(const FeatureSubset& subset, const SelectionProbs& alpha, const SelectionProbs& beta);
double importance_weight_without(const FeatureSubset& subset, const SelectionProbs& alpha,
                                 const SelectionProbs& beta, std::size_t j);

/// (sum w)^2 / sum w^2. Throws WeightCollapseError when no weight is positive.
double effective_sample_size(std::span<const double> weights);

/// Importance-sampling bookkeeping for an ensemble whose subsets were drawn
/// from `alpha` and that is being reused at a shifted `beta`.
///
/// Per model t it keeps the product of the non-zero factor ratios and the
/// number of zero ratios, which gives both the full weight and every
/// leave-one-feature-out weight in O(1).
class ImportanceState {
 public:
  ImportanceState(SelectionProbs alpha, std::vector<FeatureSubset> subsets);

  /// Recomputes every weight for a new beta. Throws DegenerateRatioError for
  /// corrupted subsets (zero alpha factor on a sampled bit).
  void update(const SelectionProbs& beta);

  [[nodiscard]] const SelectionProbs& alpha() const { return alpha_; }
  [[nodiscard]] const SelectionProbs& beta() const { return beta_; }
  [[nodiscard]] const std::vector<FeatureSubset>& subsets() const { return subsets_; }
  [[nodiscard]] std::size_t model_count() const { return subsets_.size(); }
  [[nodiscard]] std::size_t feature_count() const { return alpha_.size(); }

  [[nodiscard]] std::span<const double> weights() const { return weights_; }
  /// Effective sample size; 0 when the weights have collapsed.
  [[nodiscard]] double t_eff() const { return t_eff_; }
  [[nodiscard]] bool collapsed() const { return t_eff_ == 0.0; }

  /// Ratio of the beta and alpha factors of feature j for model t.
  [[nodiscard]] double factor(std::size_t t, std::size_t j) const;
  /// p(z_-j|beta_-j) / p(z_-j|alpha_-j) for model t.
  [[nodiscard]] double weight_without(std::size_t t, std::size_t j) const;

  /// Number of models with z_j = 1 (T_{j,1}); the complement is T_{j,0}.
  [[nodiscard]] std::size_t count_with(std::size_t j) const { return with_counts_[j]; }
  [[nodiscard]] std::size_t count_without(std::size_t j) const { return model_count() - with_counts_[j]; }

 private:
  SelectionProbs alpha_;
  SelectionProbs beta_;
  std::vector<FeatureSubset> subsets_;
  std::vector<std::size_t> with_counts_;
  std::vector<double> ratio_on_;   // beta_j / alpha_j
  std::vector<double> ratio_off_;  // (1-beta_j) / (1-alpha_j)
  std::vector<double> nonzero_product_;
  std::vector<std::size_t> zero_count_;
  std::vector<double> weights_;
  double t_eff_ = 0.0;
};

/// Mean pairwise Hamming distance over all unordered pairs; 0 for fewer than
/// two subsets.
double mean_pairwise_hamming(std::span<const FeatureSubset> population);

}  // namespace prsb

#endif  // PRSB_SAMPLING_HPP
