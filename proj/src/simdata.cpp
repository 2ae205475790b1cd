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

#include "prsb/simdata.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace prsb {
namespace {

constexpr std::size_t kIrrelevant = 300;
constexpr double kCorrelation = 0.9;
constexpr double kHypercubeSeparation = 1.0;

Dataset make_dataset(const Matrix& x, const std::vector<double>& y, std::size_t begin, std::size_t end,
                     TaskKind task) {
  Dataset d;
  d.task = task;
  d.class_count = task == TaskKind::kClassification ? 2 : 0;
  d.features = x.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
  d.target.assign(y.begin() + static_cast<std::ptrdiff_t>(begin), y.begin() + static_cast<std::ptrdiff_t>(end));
  return d;
}

}  // namespace

std::string_view to_string(SimProblem problem) {
  switch (problem) {
    case SimProblem::kCheckerboard:
      return "checkerboard";
    case SimProblem::kFriedman:
      return "friedman";
    case SimProblem::kHypercube:
      return "hypercube";
    case SimProblem::kLinear:
      return "linear";
  }
  return "unknown";
}

SimProblem parse_sim_problem(std::string_view name) {
  for (auto p : {SimProblem::kCheckerboard, SimProblem::kFriedman, SimProblem::kHypercube, SimProblem::kLinear}) {
    if (name == to_string(p)) return p;
  }
  throw std::invalid_argument("unknown problem '" + std::string(name) +
                              "' (expected checkerboard, friedman, hypercube or linear)");
}

std::size_t SimProblemSpec::relevant_count() const {
  switch (kind) {
    case SimProblem::kCheckerboard:
      return 4;
    case SimProblem::kFriedman:
    case SimProblem::kHypercube:
      return 5;
    case SimProblem::kLinear:
      return 10;
  }
  return 0;
}

std::size_t SimProblemSpec::feature_count() const { return relevant_count() + kIrrelevant; }

TaskKind SimProblemSpec::task() const {
  return kind == SimProblem::kHypercube || kind == SimProblem::kLinear ? TaskKind::kClassification
                                                                       : TaskKind::kRegression;
}

double checkerboard_response(std::span<const double> x) { return 2.0 * x[0] * x[1] + 2.0 * x[2] * x[3]; }

double friedman_response(std::span<const double> x) {
  const double shifted = x[2] - 0.5;
  return 10.0 * std::sin(std::numbers::pi * x[0] * x[1]) + 20.0 * shifted * shifted + 10.0 * x[3] + 5.0 * x[4];
}

Matrix correlated_gaussian(std::size_t rows, std::size_t cols, double rho, double scale, double mean, Rng& rng) {
  Eigen::MatrixXd cov(static_cast<Eigen::Index>(cols), static_cast<Eigen::Index>(cols));
  for (std::size_t i = 0; i < cols; ++i) {
    for (std::size_t j = 0; j < cols; ++j) {
      const double lag = static_cast<double>(i > j ? i - j : j - i);
      cov(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = scale * scale * std::pow(rho, lag);
    }
  }
  const Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) throw std::runtime_error("covariance matrix is not positive definite");
  const Eigen::MatrixXd lower = llt.matrixL();

  Matrix out(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  Eigen::VectorXd u(static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (auto& v : u) v = rng.normal();
    out.row(static_cast<Eigen::Index>(r)) = (lower * u).array() + mean;
  }
  return out;
}

SimData generate(const SimProblemSpec& spec) {
  if (spec.n_train == 0 || spec.n_test == 0) throw std::invalid_argument("train and test sizes must be positive");
  const std::size_t n = spec.n_train + spec.n_test;
  const std::size_t m = spec.feature_count();
  const std::size_t relevant = spec.relevant_count();
  Rng rng = Rng(spec.seed).split(static_cast<std::uint64_t>(spec.kind));
  Rng noise = rng.split(1);

  Matrix x;
  std::vector<double> y(n);
  switch (spec.kind) {
    case SimProblem::kCheckerboard: {
      x = correlated_gaussian(n, m, kCorrelation, 1.0, 0.0, rng);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = std::span<const double>(x.data() + i * m, m);
        y[i] = checkerboard_response(row) + spec.noise_scale * noise.normal();
      }
      break;
    }
    case SimProblem::kFriedman: {
      // Centered at 0.5 so that about 99% of the inputs fall in [0,1].
      x = correlated_gaussian(n, m, kCorrelation, kFriedmanScale, 0.5, rng);
      for (std::size_t i = 0; i < n; ++i) {
        const auto row = std::span<const double>(x.data() + i * m, m);
        y[i] = friedman_response(row) + 0.1 * spec.noise_scale * noise.normal();
      }
      break;
    }
    case SimProblem::kHypercube: {
      // Four distinct vertices of the 5-cube {-sep, +sep}^5; cluster c
      // belongs to class c % 2.
      constexpr std::size_t kClusters = 4;
      std::vector<std::uint32_t> vertices(std::size_t{1} << relevant);
      std::iota(vertices.begin(), vertices.end(), 0U);
      rng.shuffle(std::span<std::uint32_t>(vertices));
      std::vector<std::size_t> cluster(n);
      for (std::size_t i = 0; i < n; ++i) cluster[i] = i % kClusters;
      rng.shuffle(std::span<std::size_t>(cluster));

      x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t vertex = vertices[cluster[i]];
        for (std::size_t j = 0; j < m; ++j) {
          double v = rng.normal();
          if (j < relevant) v += ((vertex >> j) & 1U) ? kHypercubeSeparation : -kHypercubeSeparation;
          x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
        }
        y[i] = static_cast<double>(cluster[i] % 2);
      }
      break;
    }
    case SimProblem::kLinear: {
      x.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rng.normal();
      }
      std::vector<double> w(relevant);
      for (auto& v : w) v = 100.0 * rng.uniform();
      std::vector<double> score(n, 0.0);
      for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t k = 0; k < relevant; ++k) score[i] += w[k] * x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k));
      }
      std::vector<double> sorted = score;
      std::sort(sorted.begin(), sorted.end());
      const double median = n % 2 == 1 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
      for (std::size_t i = 0; i < n; ++i) y[i] = score[i] > median ? 1.0 : 0.0;
      break;
    }
  }

  SimData out;
  out.train = make_dataset(x, y, 0, spec.n_train, spec.task());
  out.test = make_dataset(x, y, spec.n_train, n, spec.task());
  out.relevant.resize(relevant);
  std::iota(out.relevant.begin(), out.relevant.end(), std::size_t{0});
  return out;
}

SyntheticNetwork generate_network(std::size_t genes, std::size_t masters, std::size_t regulators_per_gene,
                                  std::size_t samples, double noise, std::uint64_t seed) {
  if (masters == 0 || masters > genes || regulators_per_gene == 0 || regulators_per_gene > masters) {
    throw std::invalid_argument("network needs 0 < regulators_per_gene <= masters <= genes");
  }
  if (samples == 0) throw std::invalid_argument("network needs at least one sample");
  Rng rng(seed);
  SyntheticNetwork net;
  net.expression.resize(static_cast<Eigen::Index>(samples), static_cast<Eigen::Index>(genes));
  for (std::size_t g = 0; g < genes; ++g) net.gene_names.push_back("G" + std::to_string(g + 1));

  for (std::size_t i = 0; i < samples; ++i) {
    for (std::size_t g = 0; g < masters; ++g) net.expression(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) = rng.normal();
  }
  std::vector<std::size_t> pool(masters);
  for (std::size_t g = masters; g < genes; ++g) {
    std::iota(pool.begin(), pool.end(), std::size_t{0});
    rng.shuffle(std::span<std::size_t>(pool));
    std::vector<std::size_t> regs(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(regulators_per_gene));
    std::sort(regs.begin(), regs.end());
    std::vector<double> weight(regs.size());
    for (auto& w : weight) w = (rng.uniform() < 0.5 ? -1.0 : 1.0) * (0.75 + 0.75 * rng.uniform());
    for (std::size_t r : regs) net.edges.emplace_back(r, g);

    for (std::size_t i = 0; i < samples; ++i) {
      const auto row = static_cast<Eigen::Index>(i);
      double v = 0.0;
      for (std::size_t k = 0; k < regs.size(); ++k) {
        v += weight[k] * std::tanh(1.5 * net.expression(row, static_cast<Eigen::Index>(regs[k])));
      }
      if (regs.size() >= 2) {
        v += 0.5 * net.expression(row, static_cast<Eigen::Index>(regs[0])) *
             net.expression(row, static_cast<Eigen::Index>(regs[1]));
      }
      net.expression(row, static_cast<Eigen::Index>(g)) = v + noise * rng.normal();
    }
  }
  return net;
}

}  // namespace prsb
