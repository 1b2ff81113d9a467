/*
 * Copyright 2026 The adace Authors.
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
#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

#include <boost/random/chi_squared_distribution.hpp>
#include <boost/random/normal_distribution.hpp>

namespace adace {

/// Domain tags mixed into substream coordinates so that trial generation,
/// resampling and imputation never share a stream.
enum class StreamTag : std::uint64_t {
  kTrial = 0x7472'6961'6cULL,
  kImpute = 0x696d'7075'7465ULL,
  kBootstrap = 0x626f'6f74ULL,
  kResample = 0x7265'7361'6dULL,
  kOracle = 0x6f72'6163'6cULL,
};

inline constexpr std::uint64_t splitmix64(std::uint64_t& state) noexcept {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// xoshiro256** (Blackman & Vigna). Satisfies UniformRandomBitGenerator.
class Xoshiro256 {
 public:
  using result_type = std::uint64_t;

  explicit Xoshiro256(std::uint64_t seed = 0) noexcept { reseed(seed); }

  void reseed(std::uint64_t seed) noexcept {
    std::uint64_t s = seed;
    for (auto& w : s_) w = splitmix64(s);
  }

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }
  std::array<std::uint64_t, 4> s_{};
};

/// A reproducible random stream. Streams are identified by a root seed plus a
/// coordinate path (e.g. {kBootstrap, replicate, kImpute, m}); the same path
/// always yields the same stream regardless of which thread evaluates it.
class Stream {
 public:
  using result_type = Xoshiro256::result_type;

  explicit Stream(std::uint64_t key = 0) : key_(key), engine_(key) {}

  static Stream derive(std::uint64_t seed,
                       std::initializer_list<std::uint64_t> coords) {
    std::uint64_t h = seed ^ 0x6a09e667f3bcc909ULL;
    std::uint64_t mix = splitmix64(h);
    std::uint64_t idx = 0;
    for (std::uint64_t c : coords) {
      std::uint64_t s = c + 0x9e3779b97f4a7c15ULL * (++idx);
      mix ^= splitmix64(s);
      mix = splitmix64(mix);
    }
    return Stream(mix);
  }

  /// Child stream keyed by this stream's identity, not its position.
  Stream child(std::initializer_list<std::uint64_t> coords) const {
    return derive(key_, coords);
  }

  std::uint64_t key() const noexcept { return key_; }

  static constexpr result_type min() noexcept { return Xoshiro256::min(); }
  static constexpr result_type max() noexcept { return Xoshiro256::max(); }
  result_type operator()() noexcept { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double normal() { return normal_(engine_); }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  double chi_squared(double df) {
    return boost::random::chi_squared_distribution<double>(df)(engine_);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer on [0, n) by multiply-shift.
  std::size_t index(std::size_t n) noexcept {
    const unsigned __int128 wide =
        static_cast<unsigned __int128>(engine_()) * static_cast<std::uint64_t>(n);
    return static_cast<std::size_t>(wide >> 64);
  }

 private:
  std::uint64_t key_;
  Xoshiro256 engine_;
  boost::random::normal_distribution<double> normal_{0.0, 1.0};  // ziggurat
};

inline std::uint64_t tag(StreamTag t) noexcept {
  return static_cast<std::uint64_t>(t);
}

}  // namespace adace
