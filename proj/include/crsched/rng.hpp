// Copyright 2026 The crsched Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Counter-based random streams. Every (seed, stream id, slot) triple maps to
// one 64-bit value, so a consumer can evaluate exactly the draws it needs and
// two simulations sharing a seed see identical arrivals and channel gains
// regardless of the scheduling decisions they make.

#include <cmath>
#include <cstdint>

namespace crsched {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Stream roles. Each SU owns one stream per role.
enum class StreamRole : std::uint64_t {
  kArrival = 1,
  kGainToBase = 2,
  kGainToPrimary = 3,
  kScheduler = 4,
  kOracle = 5,
};

class CounterStream {
 public:
  constexpr CounterStream() = default;
  constexpr CounterStream(std::uint64_t seed, StreamRole role,
                          std::uint64_t index) noexcept
      : key_(mix64(mix64(seed) ^ mix64((static_cast<std::uint64_t>(role) << 40) ^
                                       (index + 1)))) {}

  constexpr std::uint64_t bits(std::uint64_t counter) const noexcept {
    return mix64(key_ + counter * 0xd1b54a32d192ed03ULL);
  }

  /// Uniform on [0, 1) with 53 bits of resolution.
  double uniform(std::uint64_t counter) const noexcept {
    return static_cast<double>(bits(counter) >> 11) * 0x1.0p-53;
  }

  /// Uniform on (0, 1].
  double uniform_open_low(std::uint64_t counter) const noexcept {
    return (static_cast<double>(bits(counter) >> 11) + 1.0) * 0x1.0p-53;
  }

  std::uint64_t key() const noexcept { return key_; }

 private:
  std::uint64_t key_ = 0;
};

/// Sequential generator over a counter stream, for consumers that draw a
/// variable number of values (Monte Carlo oracles).
class SequentialStream {
 public:
  SequentialStream(std::uint64_t seed, StreamRole role, std::uint64_t index)
      : stream_(seed, role, index) {}

  double uniform() noexcept { return stream_.uniform(next_++); }
  double uniform_open_low() noexcept { return stream_.uniform_open_low(next_++); }
  std::uint64_t bits() noexcept { return stream_.bits(next_++); }

  /// Uniform integer in [0, n). Lemire's multiply-shift; bias is below 2^-50
  /// for the n used here.
  std::uint64_t below(std::uint64_t n) noexcept {
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(bits()) * n) >> 64);
  }

 private:
  CounterStream stream_;
  std::uint64_t next_ = 0;
};

}  // namespace crsched
