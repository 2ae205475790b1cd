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
#include "prsb/simdata.hpp"

#include <cmath>
#include <numbers>
#include <set>
#include <vector>

using namespace prsb;

namespace {

double column_corr(const Matrix& x, Eigen::Index a, Eigen::Index b) {
  const auto ca = x.col(a).array() - x.col(a).mean();
  const auto cb = x.col(b).array() - x.col(b).mean();
  return (ca * cb).sum() / std::sqrt((ca * ca).sum() * (cb * cb).sum());
}

double column_var(const Matrix& x, Eigen::Index a) {
  const auto c = x.col(a).array() - x.col(a).mean();
  return (c * c).sum() / static_cast<double>(x.rows());
}

}  // namespace

TEST_SUITE("simdata") {
  TEST_CASE("problem shapes") {
    const std::size_t m[] = {304, 305, 305, 310};
    const std::size_t rel[] = {4, 5, 5, 10};
    int k = 0;
    for (auto kind : {SimProblem::kCheckerboard, SimProblem::kFriedman, SimProblem::kHypercube, SimProblem::kLinear}) {
      CHECK(parse_sim_problem(to_string(kind)) == kind);
      const auto spec = SimProblemSpec::standard(kind, 1);
      CHECK(spec.feature_count() == m[k]);
      CHECK(spec.relevant_count() == rel[k]);
      const auto data = generate(spec);
      CHECK(data.train.rows() == 300);
      CHECK(data.test.rows() == 500);
      CHECK(data.train.cols() == m[k]);
      CHECK(data.relevant.size() == rel[k]);
      for (std::size_t j = 0; j < rel[k]; ++j) CHECK(data.relevant[j] == j);
      CHECK_NOTHROW(data.train.validate());
      CHECK_NOTHROW(data.test.validate());
      ++k;
    }
    CHECK_THROWS(parse_sim_problem("madelon"));
  }

  TEST_CASE("response formulas") {
    std::vector<double> x(304, 0.0);
    x[0] = x[1] = x[2] = x[3] = 1.0;
    CHECK(checkerboard_response(x) == 4.0);
    std::vector<double> f(305, 0.5);
    CHECK(friedman_response(f) == doctest::Approx(10 * std::sin(std::numbers::pi * 0.25) + 5.0 + 2.5).epsilon(1e-15));
  }

  TEST_CASE("noise-free checkerboard targets follow the formula") {
    auto spec = SimProblemSpec::standard(SimProblem::kCheckerboard, 2);
    spec.noise_scale = 0.0;
    const auto d = generate(spec);
    for (std::size_t i = 0; i < d.train.rows(); ++i) CHECK(d.train.target[i] == checkerboard_response(d.train.row(i)));
  }

  TEST_CASE("same seed gives identical data") {
    for (auto kind : {SimProblem::kCheckerboard, SimProblem::kFriedman, SimProblem::kHypercube, SimProblem::kLinear}) {
      const auto a = generate(SimProblemSpec::standard(kind, 7));
      const auto b = generate(SimProblemSpec::standard(kind, 7));
      const auto c = generate(SimProblemSpec::standard(kind, 8));
      CHECK(a.train.features == b.train.features);
      CHECK(a.test.target == b.test.target);
      CHECK(a.train.features != c.train.features);
    }
  }

  TEST_CASE("correlated designs have Toeplitz correlation") {
    for (auto kind : {SimProblem::kCheckerboard, SimProblem::kFriedman}) {
      SimProblemSpec spec{kind, 10000, 10, 3, 1.0};
      const auto d = generate(spec);
      for (Eigen::Index a : {0, 10, 150}) {
        for (Eigen::Index lag : {1, 2, 5}) {
          CHECK(std::abs(column_corr(d.train.features, a, a + lag) - std::pow(0.9, static_cast<double>(lag))) < 0.05);
        }
      }
      if (kind == SimProblem::kFriedman) {
        for (Eigen::Index a : {0, 4, 100, 304}) {
          CHECK(std::abs(column_var(d.train.features, a) / (kFriedmanScale * kFriedmanScale) - 1.0) < 0.15);
          CHECK(std::abs(d.train.features.col(a).mean() - 0.5) < 0.01);
        }
      }
    }
  }

  TEST_CASE("correlated gaussian moments") {
    Rng rng(4);
    const auto x = correlated_gaussian(20000, 4, 0.5, 2.0, 1.0, rng);
    CHECK(std::abs(x.col(2).mean() - 1.0) < 0.05);
    CHECK(std::abs(column_var(x, 2) - 4.0) < 0.15);
    CHECK(std::abs(column_corr(x, 0, 2) - 0.25) < 0.03);
  }

  TEST_CASE("linear classes are balanced") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      const auto d = generate(SimProblemSpec::standard(SimProblem::kLinear, seed));
      double ones = 0;
      for (double y : d.train.target) ones += y;
      for (double y : d.test.target) ones += y;
      const double zeros = 800 - ones;
      CHECK(std::abs(ones - zeros) <= 2 * std::sqrt(800.0));
      CHECK(d.train.class_count == 2);
    }
  }

  TEST_CASE("hypercube: two clusters per class and unit-variance noise columns") {
    SimProblemSpec spec{SimProblem::kHypercube, 8000, 10, 5, 1.0};
    const auto d = generate(spec);
    const auto& x = d.train.features;
    double ones = 0;
    for (double y : d.train.target) ones += y;
    CHECK(std::abs(ones / 8000 - 0.5) < 0.02);
    for (Eigen::Index j : {5, 50, 304}) {
      CHECK(std::abs(x.col(j).mean()) < 0.05);
      CHECK(std::abs(column_var(x, j) - 1.0) < 0.06);
    }
    // Informative block: a sample's nearest vertex pattern is recoverable
    // from the mean of its class; class means must differ somewhere.
    Eigen::VectorXd m0 = Eigen::VectorXd::Zero(5), m1 = Eigen::VectorXd::Zero(5);
    double n0 = 0, n1 = 0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const Eigen::VectorXd v = x.row(i).head(5).transpose();
      if (d.train.target[static_cast<std::size_t>(i)] > 0.5) {
        m1 += v;
        ++n1;
      } else {
        m0 += v;
        ++n0;
      }
    }
    m0 /= n0;
    m1 /= n1;
    // two distinct vertices of a +-1 cube average to entries in {-1, 0, 1}
    for (Eigen::Index j = 0; j < 5; ++j) {
      for (double v : {m0(j), m1(j)}) {
        const double snapped = std::round(v);
        CHECK(std::abs(v - snapped) < 0.08);
      }
    }
    CHECK((m0 - m1).cwiseAbs().maxCoeff() > 0.5);
  }

  TEST_CASE("synthetic gene network") {
    const auto net = generate_network(20, 5, 3, 100, 0.1, 9);
    CHECK(net.expression.rows() == 100);
    CHECK(net.expression.cols() == 20);
    CHECK(net.gene_names.front() == "G1");
    CHECK(net.edges.size() == 15 * 3);
    std::set<std::pair<std::size_t, std::size_t>> unique(net.edges.begin(), net.edges.end());
    CHECK(unique.size() == net.edges.size());
    for (const auto& [r, t] : net.edges) {
      CHECK(r < 5);
      CHECK(t >= 5);
    }
    const auto again = generate_network(20, 5, 3, 100, 0.1, 9);
    CHECK(again.expression == net.expression);
    CHECK(again.edges == net.edges);
  }
}
