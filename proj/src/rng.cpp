#include "fpk/rng.hpp"

#include <cmath>
#include <numbers>

namespace fpk::rng {
namespace {

constexpr std::uint32_t kMulA = 0xD2511F53;
constexpr std::uint32_t kMulB = 0xCD9E8D57;
constexpr std::uint32_t kWeylA = 0x9E3779B9;
constexpr std::uint32_t kWeylB = 0xBB67AE85;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& lo, std::uint32_t& hi) noexcept {
  const std::uint64_t p = static_cast<std::uint64_t>(a) * b;
  lo = static_cast<std::uint32_t>(p);
  hi = static_cast<std::uint32_t>(p >> 32);
}

}  // namespace

PhiloxCounter philox4x32_10(PhiloxCounter c, PhiloxKey k) noexcept {
  for (int round = 0; round < 10; ++round) {
    std::uint32_t lo0, hi0, lo1, hi1;
    mulhilo(kMulA, c[0], lo0, hi0);
    mulhilo(kMulB, c[2], lo1, hi1);
    c = {hi1 ^ c[1] ^ k[0], lo1, hi0 ^ c[3] ^ k[1], lo0};
    k[0] += kWeylA;
    k[1] += kWeylB;
  }
  return c;
}

void NormalStream::normals(std::uint64_t path, std::uint64_t step, std::span<double> out) const noexcept {
  const std::size_t n = out.size();
  for (std::size_t block = 0; 2 * block < n; ++block) {
    const PhiloxCounter ctr{static_cast<std::uint32_t>(step),
                            static_cast<std::uint32_t>(((step >> 32) << 8) | (block & 0xFF)),
                            static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
    const PhiloxCounter r = philox4x32_10(ctr, key_);
    const double u1 = to_positive_unit(r[0], r[1]);
    const double u2 = to_positive_unit(r[2], r[3]);
    const double rad = std::sqrt(-2.0 * std::log(u1));
    const double ang = 2.0 * std::numbers::pi * u2;
    out[2 * block] = rad * std::cos(ang);
    if (2 * block + 1 < n) out[2 * block + 1] = rad * std::sin(ang);
  }
}

}  // namespace fpk::rng
