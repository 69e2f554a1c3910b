// fbcsp - filter-bank CSP EEG decoding toolkit
// Copyright 2026 the fbcsp developers
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <vector>

namespace fbcsp {

/// Deterministic counter-derived random stream (splitmix64 core).
///
/// All randomness in the toolkit flows from a single user seed. Every consumer
/// derives an independent stream as stream(seed, tag, index...), so results do
/// not depend on evaluation order or on how work is split across threads, and
/// the same seed reproduces bit-identical output on any platform.
class Rng {
 public:
  /// Derive an independent stream from (seed, stream_id).
  static Rng stream(std::uint64_t seed, std::uint64_t stream_id);
  /// Two-level derivation, e.g. (seed, trial, source).
  static Rng stream(std::uint64_t seed, std::uint64_t id_a, std::uint64_t id_b);

  std::uint64_t next_u64();

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform01();

  /// Standard normal deviate (Box-Muller, pair-cached).
  double gaussian();

  /// Unbiased uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// In-place Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// Fill with iid standard normal deviates.
  void fill_gaussian(double* dst, std::size_t n);

 private:
  explicit Rng(std::uint64_t state) : state_(state) {}

  std::uint64_t state_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

/// splitmix64 finalizer; exposed for stream-id hashing elsewhere.
std::uint64_t mix64(std::uint64_t x);

}  // namespace fbcsp
