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

#ifndef PRSB_RNG_HPP
#define PRSB_RNG_HPP

#include <cstdint>
#include <limits>
#include <random>
#include <span>

namespace prsb {

/// Seedable, splittable random stream.
///
/// A stream is identified by a 64-bit key. `split` derives child keys from the
/// parent key alone (not from how many numbers the parent has produced), so a
/// child stream is the same whatever order the parent is consumed in. This is
/// what keeps parallel model fitting bit-identical to the serial path.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed);

  [[nodiscard]] Rng split(std::uint64_t stream) const;
  [[nodiscard]] Rng split(std::uint64_t a, std::uint64_t b) const { return split(a).split(b); }

  [[nodiscard]] std::uint64_t key() const { return key_; }

  static constexpr result_type min() { return std::numeric_limits<result_type>::min(); }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return engine_(); }

  /// Uniform double in [0,1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n); n must be positive.
  std::uint64_t below(std::uint64_t n);
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  template <class T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      const auto k = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[k]);
    }
  }

 private:
  std::uint64_t key_;
  std::mt19937_64 engine_;
};

/// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

}  // namespace prsb

#endif  // PRSB_RNG_HPP
