#pragma once

#include <array>
#include <cstdint>

namespace dirac_loc {

/// Philox4x32-10 block: a pure function of (key, counter).
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                               std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t M0 = 0xD2511F53u, M1 = 0xCD9E8D57u;
  constexpr std::uint32_t W0 = 0x9E3779B9u, W1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(M0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(M1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += W0;
    key[1] += W1;
  }
  return ctr;
}

/// Uniform double in [0, 1) addressed by (seed, a, b). Counter layout:
/// (lo(a), hi(a), lo(b), hi(b)), key = (lo(seed), hi(seed)); 53 bits from words 0 and 1.
inline double uniform01(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
  const auto out = philox4x32({static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                               static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)},
                              {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  const std::uint64_t bits = (static_cast<std::uint64_t>(out[0]) << 32 | out[1]) >> 11;
  return static_cast<double>(bits) * 0x1.0p-53;
}

/// Child seed for the k-th independent sample of a Monte-Carlo driver.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t k) {
  const auto out = philox4x32({static_cast<std::uint32_t>(k), static_cast<std::uint32_t>(k >> 32),
                               0x5EEDu, 0xC0FFEEu},
                              {static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)});
  return static_cast<std::uint64_t>(out[0]) << 32 | out[1];
}

}  // namespace dirac_loc
