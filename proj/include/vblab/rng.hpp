/*
 * Copyright 2026 The vblab Authors
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

#pragma once

#include <array>
#include <cstdint>

namespace vblab {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// A stream is identified by (seed, stream id); the n-th 128-bit block of a
/// stream is Philox(key = seed, counter = (stream id, n)). Any draw is a pure
/// function of (seed, stream, position), so work split across index ranges
/// reproduces the sequential result exactly when each instance uses its own
/// stream id.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform() noexcept;
  /// Uniform on (0, 1].
  double uniform_open_low() noexcept { return 1.0 - uniform(); }
  /// Standard normal via Box-Muller.
  double normal() noexcept;
  /// Uniform integer in [0, n); n > 0. Lemire's multiply-shift with rejection.
  std::uint64_t below(std::uint64_t n) noexcept;

  static std::array<std::uint32_t, 4> philox_block(std::array<std::uint32_t, 4> counter,
                                                   std::array<std::uint32_t, 2> key) noexcept;

 private:
  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_index_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  int buffered_words_ = 0;  // unread 64-bit words left in buffer_ (0..2)
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

/// Derives an independent seed for a named purpose (e.g. "weights", "shuffle")
/// with a SplitMix64 finalizer over (seed, tag).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t tag) noexcept;

/// Compile-time FNV-1a tag for derive_seed.
constexpr std::uint64_t purpose_tag(const char* name) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (; *name != '\0'; ++name) {
    h ^= static_cast<unsigned char>(*name);
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace vblab
