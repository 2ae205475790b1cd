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

#ifndef PRSB_TESTS_HELPERS_HPP
#define PRSB_TESTS_HELPERS_HPP

#include "prsb/core_types.hpp"

#include <cstddef>
#include <filesystem>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

namespace prsb::testing {

inline Dataset regression(std::initializer_list<std::initializer_list<double>> rows, std::vector<double> target) {
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.begin()->size()));
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    Eigen::Index j = 0;
    for (double v : row) d.features(i, j++) = v;
    ++i;
  }
  d.target = std::move(target);
  return d;
}

inline Dataset classification(std::initializer_list<std::initializer_list<double>> rows, std::vector<double> target,
                              int classes) {
  Dataset d = regression(rows, std::move(target));
  d.task = TaskKind::kClassification;
  d.class_count = classes;
  return d;
}

/// Gaussian features with a seeded std engine, independent of prsb::Rng.
inline Dataset random_regression(std::size_t n, std::size_t m, unsigned seed) {
  std::mt19937 gen(seed);
  std::normal_distribution<double> normal;
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(m));
  for (Eigen::Index i = 0; i < d.features.size(); ++i) d.features.data()[i] = normal(gen);
  d.target.resize(n);
  for (auto& y : d.target) y = normal(gen);
  return d;
}

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() / ("prsb_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  [[nodiscard]] const std::filesystem::path& path() const { return path_; }
  [[nodiscard]] std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace prsb::testing

#endif  // PRSB_TESTS_HELPERS_HPP
