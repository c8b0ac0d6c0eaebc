#pragma once

#include <array>
#include <cstdint>
#include <numbers>

namespace spr {

// SplitMix64 finalizer; used to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  return mix64(seed ^ mix64(stream + 0x632BE59BD9B4E019ULL));
}

// Maps 53 high bits of a 64-bit word to [0, 1).
constexpr double to_unit_double(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
class Philox4x32 {
 public:
  using Counter = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  explicit constexpr Philox4x32(Key key) noexcept : key_(key) {}
  explicit constexpr Philox4x32(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  constexpr Counter operator()(Counter ctr) const noexcept {
    Key k = key_;
    for (int round = 0; round < 10; ++round) {
      if (round > 0) {
        k[0] += kW0;
        k[1] += kW1;
      }
      const std::uint64_t p0 = std::uint64_t{kM0} * ctr[0];
      const std::uint64_t p1 = std::uint64_t{kM1} * ctr[2];
      ctr = {static_cast<std::uint32_t>(p1 >> 32) ^ ctr[1] ^ k[0], static_cast<std::uint32_t>(p1),
             static_cast<std::uint32_t>(p0 >> 32) ^ ctr[3] ^ k[1], static_cast<std::uint32_t>(p0)};
    }
    return ctr;
  }

 private:
  static constexpr std::uint32_t kM0 = 0xD2511F53;
  static constexpr std::uint32_t kM1 = 0xCD9E8D57;
  static constexpr std::uint32_t kW0 = 0x9E3779B9;
  static constexpr std::uint32_t kW1 = 0xBB67AE85;
  Key key_;
};

// Verification phases phi_{i,j} in [0, pi/2], recomputable from (seed, phase, right node, left node).
class PhaseField {
 public:
  explicit constexpr PhaseField(std::uint64_t seed) noexcept : gen_(derive_seed(seed, 0xF1F1ULL)) {}

  double operator()(std::uint32_t phase, std::uint32_t right, std::uint32_t left) const noexcept {
    const auto out = gen_({right, left, phase, 0u});
    const std::uint64_t bits = (std::uint64_t{out[0]} << 32) | out[1];
    // Closed interval: 53-bit grid over [0, 1] inclusive.
    return static_cast<double>(bits >> 11) / static_cast<double>((1ULL << 53) - 1) *
           (std::numbers::pi / 2.0);
  }

 private:
  Philox4x32 gen_;
};

}  // namespace spr
