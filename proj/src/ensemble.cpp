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

#include "prsb/ensemble.hpp"

#include <stdexcept>

namespace prsb {

Prediction Ensemble::predict(std::span<const double> x) const {
  if (models.empty()) throw std::logic_error("cannot predict with an empty ensemble");
  Prediction sum(static_cast<std::size_t>(output_dim), 0.0);
  Prediction one(sum.size());
  for (const auto& m : models) {
    m.predict(x, one);
    for (std::size_t d = 0; d < sum.size(); ++d) sum[d] += one[d];
  }
  const auto t = static_cast<double>(models.size());
  for (double& v : sum) v /= t;
  return sum;
}

std::vector<double> Ensemble::predict_all(const Dataset& data) const {
  const auto dim = static_cast<std::size_t>(output_dim);
  std::vector<double> out(data.rows() * dim);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(data.rows()); ++i) {
    const auto r = static_cast<std::size_t>(i);
    const Prediction p = predict(data.row(r));
    std::copy(p.begin(), p.end(), out.begin() + static_cast<std::ptrdiff_t>(r * dim));
  }
  return out;
}

std::vector<double> predict_all(const TrainedModel& model, const Dataset& data) {
  const auto dim = static_cast<std::size_t>(model.output_dim());
  std::vector<double> out(data.rows() * dim);
  for (std::size_t r = 0; r < data.rows(); ++r) {
    model.predict(data.row(r), std::span<double>(out).subspan(r * dim, dim));
  }
  return out;
}

}  // namespace prsb
