#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace schrocurve {

/// Philox4x32-10 block: a keyed bijection on 128-bit counters.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) {
  constexpr std::uint32_t kMul0 = 0xD2511F53u, kMul1 = 0xCD9E8D57u;
  constexpr std::uint32_t kWeyl0 = 0x9E3779B9u, kWeyl1 = 0xBB67AE85u;
  for (int round = 0; round < 10; ++round) {
    const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * ctr[0];
    const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * ctr[2];
    ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ key[0], static_cast<std::uint32_t>(p1),
           static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ key[1], static_cast<std::uint32_t>(p0)};
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return ctr;
}

/**
 * Counter-based normal generator. Every draw is a pure function of
 * (seed, sample, mode, step), so serial and parallel runs agree bit for bit.
 */
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t seed() const { return seed_; }

  /// Standard normal draw for the given coordinates.
  double normal(std::uint64_t sample, std::uint32_t mode, std::uint32_t step) const {
    const auto block = philox4x32({static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32),
                                   mode, step},
                                  {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    const std::uint64_t b = (static_cast<std::uint64_t>(block[2]) << 32) | block[3];
    // 53-bit uniforms; u1 in (0, 1] keeps the log finite.
    const double u1 = (static_cast<double>(a >> 11) + 1.0) * 0x1.0p-53;
    const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform draw in [0, 1).
  double uniform(std::uint64_t sample, std::uint32_t mode, std::uint32_t step) const {
    const auto block = philox4x32({static_cast<std::uint32_t>(sample), static_cast<std::uint32_t>(sample >> 32),
                                   mode, step ^ 0x80000000u},
                                  {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
    const std::uint64_t a = (static_cast<std::uint64_t>(block[0]) << 32) | block[1];
    return static_cast<double>(a >> 11) * 0x1.0p-53;
  }

private:
  std::uint64_t seed_;
};

}  // namespace schrocurve
