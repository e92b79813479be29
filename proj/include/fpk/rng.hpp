#pragma once

// Counter-based normal variates: every (seed, path, step) addresses its own block of
// Philox4x32-10 output, so results never depend on thread count or path ordering.

#include <array>
#include <cstdint>
#include <span>

namespace fpk::rng {

using PhiloxCounter = std::array<std::uint32_t, 4>;
using PhiloxKey = std::array<std::uint32_t, 2>;

/// Philox4x32 with 10 rounds (Salmon et al., SC'11).
PhiloxCounter philox4x32_10(PhiloxCounter ctr, PhiloxKey key) noexcept;

/// Uniform on (0, 1] with 53 random bits: (2^53 - b) 2^-53, exact for every b.
inline double to_positive_unit(std::uint32_t hi, std::uint32_t lo) noexcept {
  const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 21) ^ (lo >> 11);
  return static_cast<double>((std::uint64_t{1} << 53) - bits) * 0x1.0p-53;
}

class NormalStream {
 public:
  explicit NormalStream(std::uint64_t seed) noexcept
      : key_{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32)} {}

  /// Fills `out` with independent standard normals for (path, step). Deterministic.
  /// Supports steps < 2^56 and out.size() <= 512.
  void normals(std::uint64_t path, std::uint64_t step, std::span<double> out) const noexcept;

 private:
  PhiloxKey key_;
};

}  // namespace fpk::rng
