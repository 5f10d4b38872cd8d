#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace mbnla {

// Counter-based random number generation (Philox-4x32, 10 rounds).
//
// Every (seed, stream, index, block) tuple maps to four independent 32-bit
// words through a stateless bijection, so any shard of any stream can be
// generated out of order with bit-exact equivalence to serial generation.
// This is what makes sharded shot sampling, filtering and bootstrap
// resampling deterministic regardless of thread count.

namespace detail {

inline constexpr uint32_t kPhiloxM0 = 0xD2511F53u;
inline constexpr uint32_t kPhiloxM1 = 0xCD9E8D57u;
inline constexpr uint32_t kPhiloxW0 = 0x9E3779B9u;
inline constexpr uint32_t kPhiloxW1 = 0xBB67AE85u;

inline void philox_round(std::array<uint32_t, 4>& ctr,
                         const std::array<uint32_t, 2>& key) {
  const uint64_t p0 = uint64_t(kPhiloxM0) * ctr[0];
  const uint64_t p1 = uint64_t(kPhiloxM1) * ctr[2];
  ctr = {uint32_t(p1 >> 32) ^ ctr[1] ^ key[0], uint32_t(p1),
         uint32_t(p0 >> 32) ^ ctr[3] ^ key[1], uint32_t(p0)};
}

}  // namespace detail

/// Philox-4x32-10 block function: 128-bit counter + 64-bit key -> 128 bits.
inline std::array<uint32_t, 4> philox4x32(std::array<uint32_t, 4> counter,
                                          std::array<uint32_t, 2> key) {
  detail::philox_round(counter, key);
  for (int round = 1; round < 10; ++round) {
    key[0] += detail::kPhiloxW0;
    key[1] += detail::kPhiloxW1;
    detail::philox_round(counter, key);
  }
  return counter;
}

/// Independent variate streams hanging off a single 64-bit seed. Keeping the
/// acceptance stream separate from the sampling stream means filtering a
/// record never perturbs the record itself.
enum class Stream : uint32_t {
  Measurement = 0,
  Filter = 1,
  Bootstrap = 2,
};

/// Four words at (seed, stream, index, block).
inline std::array<uint32_t, 4> rng_block(uint64_t seed, Stream stream,
                                         uint64_t index, uint32_t block) {
  return philox4x32(
      {uint32_t(index), uint32_t(index >> 32),
       static_cast<uint32_t>(stream), block},
      {uint32_t(seed), uint32_t(seed >> 32)});
}

/// Uniform double strictly inside (0, 1): 52 bits plus a half-step offset so
/// both endpoints stay excluded even after rounding.
inline double to_uniform(uint32_t hi, uint32_t lo) {
  const uint64_t bits = (uint64_t(hi) << 32) | lo;
  return (double(bits >> 12) + 0.5) * 0x1.0p-52;
}

/// Two standard normals from one counter block (Box-Muller).
inline std::array<double, 2> to_normal_pair(const std::array<uint32_t, 4>& w) {
  const double u1 = to_uniform(w[0], w[1]);
  const double u2 = to_uniform(w[2], w[3]);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  return {radius * std::cos(angle), radius * std::sin(angle)};
}

}  // namespace mbnla
