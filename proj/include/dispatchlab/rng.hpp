#pragma once

// Counter-based random streams.
//
// Every random draw in the library is a pure function of (seed, stream tag,
// entity id, index). Simulations therefore produce identical results no
// matter in which order entities are visited or how work is split across
// threads, and a counterfactual replay sees exactly the same draws as the
// factual run.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>

namespace dispatchlab::rng {

using Counter = std::array<std::uint32_t, 4>;
using Key = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., Random123).
inline Counter philox4x32(Counter ctr, Key key) {
  constexpr std::uint32_t kM0 = 0xD2511F53u;
  constexpr std::uint32_t kM1 = 0xCD9E8D57u;
  constexpr std::uint32_t kW0 = 0x9E3779B9u;
  constexpr std::uint32_t kW1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    if (round > 0) {
      key[0] += kW0;
      key[1] += kW1;
    }
    const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
    const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
    const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
    const auto lo0 = static_cast<std::uint32_t>(p0);
    const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
    const auto lo1 = static_cast<std::uint32_t>(p1);
    ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
  }
  return ctr;
}

/// Purpose of a stream. Distinct tags never share draws under the same seed.
enum class Tag : std::uint32_t {
  Cancellation = 1,
  DriverWalk = 2,
  OrderGen = 3,
  DriverGen = 4,
  Scenario = 5,
  Test = 99,
};

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Converts 64 random bits into a double in [0, 1).
inline double to_unit(std::uint64_t bits) {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

/// A keyed family of streams: one independent stream per entity id.
class StreamFamily {
 public:
  StreamFamily(std::uint64_t seed, Tag tag) {
    const std::uint64_t k = splitmix64(seed ^ (std::uint64_t{static_cast<std::uint32_t>(tag)} << 40));
    key_ = {static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32)};
  }

  std::uint64_t bits(std::uint64_t entity, std::uint64_t index) const {
    const Counter out = philox4x32(
        {static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32),
         static_cast<std::uint32_t>(entity), static_cast<std::uint32_t>(entity >> 32)},
        key_);
    return (std::uint64_t{out[1]} << 32) | out[0];
  }

  double uniform(std::uint64_t entity, std::uint64_t index) const {
    return to_unit(bits(entity, index));
  }

 private:
  Key key_{};
};

/// Sequential engine over one stream; satisfies UniformRandomBitGenerator.
class Engine {
 public:
  using result_type = std::uint64_t;

  Engine(std::uint64_t seed, Tag tag, std::uint64_t entity = 0)
      : family_(seed, tag), entity_(entity) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return family_.bits(entity_, index_++); }

  double uniform() { return to_unit((*this)()); }

  /// Unbiased integer in [0, n). Lemire's multiply-and-reject.
  std::uint64_t below(std::uint64_t n) {
    if (n <= 1) return 0;
    unsigned __int128 m = static_cast<unsigned __int128>((*this)()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<unsigned __int128>((*this)()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  double exponential(double mean) { return -mean * std::log1p(-uniform()); }

 private:
  StreamFamily family_;
  std::uint64_t entity_;
  std::uint64_t index_ = 0;
};

}  // namespace dispatchlab::rng
