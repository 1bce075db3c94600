/*
 * Copyright 2026 The polexam Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#ifndef POLEXAM_RNG_HPP_
#define POLEXAM_RNG_HPP_

#include <array>
#include <cstdint>
#include <span>

namespace polexam {

/// SplitMix64 step. Used to expand seeds and to derive independent streams.
std::uint64_t splitmix64(std::uint64_t& state);

/// Seed for sub-stream `stream` of a run seeded with `seed`.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/**
 * xoshiro256** generator with portable derived draws.
 *
 * The state is 32 bytes and trivially copyable, so the debugger can snapshot
 * it per frame. All derived draws (uniform doubles, bounded integers,
 * normals) are defined here instead of using <random> distributions, whose
 * algorithms differ between standard libraries. Golden fixtures therefore
 * hold on every platform.
 */
class Rng {
 public:
  using State = std::array<std::uint64_t, 4>;

  explicit Rng(std::uint64_t seed = 0);

  static Rng from_state(const State& state);

  std::uint64_t next_u64();

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform();

  /// Uniform integer in [0, bound). bound must be > 0.
  std::uint64_t below(std::uint64_t bound);

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double normal();

  /// Index drawn from `probs` by inverse CDF using one uniform. Entries with
  /// zero probability are never returned.
  std::size_t categorical(std::span<const double> probs);

  const State& state() const { return state_; }

  friend bool operator==(const Rng&, const Rng&) = default;

 private:
  State state_{};
};

}  // namespace polexam

#endif  // POLEXAM_RNG_HPP_
