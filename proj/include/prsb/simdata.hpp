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

#ifndef PRSB_SIMDATA_HPP
#define PRSB_SIMDATA_HPP

#include "prsb/core_types.hpp"
#include "prsb/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace prsb {

enum class SimProblem { kCheckerboard, kFriedman, kHypercube, kLinear };

std::string_view to_string(SimProblem problem);
/// Throws std::invalid_argument for unknown names.
SimProblem parse_sim_problem(std::string_view name);

/// One of the four benchmark problems: 300 irrelevant features appended to
/// the relevant ones, which come first.
struct SimProblemSpec {
  SimProblem kind = SimProblem::kHypercube;
  std::size_t n_train = 300;
  std::size_t n_test = 500;
  std::uint64_t seed = 0;
  /// Multiplies the additive output noise (1 = standard problem).
  double noise_scale = 1.0;

  static SimProblemSpec standard(SimProblem kind, std::uint64_t seed) { return {kind, 300, 500, seed, 1.0}; }

  /// 304 / 305 / 305 / 310.
  [[nodiscard]] std::size_t feature_count() const;
  /// 4 / 5 / 5 / 10.
  [[nodiscard]] std::size_t relevant_count() const;
  [[nodiscard]] TaskKind task() const;
};

struct SimData {
  Dataset train;
  Dataset test;
  std::vector<std::size_t> relevant;
};

/// Draws train and test sets from one pool of n_train + n_test samples.
SimData generate(const SimProblemSpec& spec);

/// 2 x0 x1 + 2 x2 x3 (noise-free checkerboard response).
double checkerboard_response(std::span<const double> x);
/// 10 sin(pi x0 x1) + 20 (x2 - 0.5)^2 + 10 x3 + 5 x4 (noise-free).
double friedman_response(std::span<const double> x);

/// Standard deviation of every Friedman input.
inline constexpr double kFriedmanScale = 0.5 / 3.0;

/// Rows of N(mean, scale^2 * rho^|i-j|) drawn through a Cholesky factor of the
/// Toeplitz covariance.
Matrix correlated_gaussian(std::size_t rows, std::size_t cols, double rho, double scale, double mean, Rng& rng);

/// Synthetic expression data with planted regulatory edges.
///
/// The first `masters` genes are exogenous N(0,1) regulators. Every other
/// gene is driven by `regulators_per_gene` distinct masters through a
/// saturating nonlinear response plus one pairwise interaction and Gaussian
/// noise.
struct SyntheticNetwork {
  Matrix expression;  ///< samples x genes
  std::vector<std::string> gene_names;
  std::vector<std::pair<std::size_t, std::size_t>> edges;  ///< (regulator, target)
};

SyntheticNetwork generate_network(std::size_t genes, std::size_t masters, std::size_t regulators_per_gene,
                                  std::size_t samples, double noise, std::uint64_t seed);

}  // namespace prsb

#endif  // PRSB_SIMDATA_HPP
