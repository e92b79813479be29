#include "fpk/qmc.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/matrix.hpp"

namespace fpk::qmc {

double radical_inverse(std::uint64_t index, unsigned base) noexcept {
  double inv_base = 1.0 / base;
  double factor = inv_base;
  double result = 0.0;
  while (index > 0) {
    result += static_cast<double>(index % base) * factor;
    index /= base;
    factor *= inv_base;
  }
  return result;
}

std::vector<unsigned> primes(std::size_t n) {
  std::vector<unsigned> out;
  for (unsigned c = 2; out.size() < n; ++c) {
    bool prime = true;
    for (unsigned p : out) {
      if (p * p > c) break;
      if (c % p == 0) {
        prime = false;
        break;
      }
    }
    if (prime) out.push_back(c);
  }
  return out;
}

void halton(std::uint64_t index, std::span<const unsigned> bases, std::span<double> out) noexcept {
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = radical_inverse(index, bases[k]);
}

void cube_to_ball(std::span<double> u) noexcept {
  double inf_norm = 0.0;
  for (double& v : u) {
    v = 2.0 * v - 1.0;
    inf_norm = std::max(inf_norm, std::abs(v));
  }
  const double two_norm = norm(u);
  if (two_norm == 0.0) return;
  const double scale = inf_norm / two_norm;
  for (double& v : u) v *= scale;
}

std::vector<std::vector<double>> ball_points(std::span<const double> center, double radius,
                                             std::size_t n, std::uint64_t seed) {
  const std::size_t d = center.size();
  const auto bases = primes(d);
  std::vector<std::vector<double>> pts;
  pts.reserve(n);
  pts.emplace_back(center.begin(), center.end());
  std::vector<double> u(d);
  for (std::uint64_t k = 0; pts.size() < n; ++k) {
    halton(seed + 1 + k, bases, u);
    cube_to_ball(u);
    std::vector<double> x(d);
    for (std::size_t i = 0; i < d; ++i) x[i] = center[i] + radius * u[i];
    pts.push_back(std::move(x));
  }
  return pts;
}

std::vector<std::vector<double>> sphere_directions(std::size_t d, std::size_t n, std::uint64_t seed) {
  std::vector<std::vector<double>> dirs;
  dirs.reserve(std::max(n, 2 * d));
  for (std::size_t i = 0; i < d && dirs.size() < n; ++i) {
    for (double sgn : {1.0, -1.0}) {
      if (dirs.size() >= n) break;
      std::vector<double> e(d, 0.0);
      e[i] = sgn;
      dirs.push_back(std::move(e));
    }
  }
  const auto bases = primes(d);
  std::vector<double> u(d);
  for (std::uint64_t k = 0; dirs.size() < n; ++k) {
    halton(seed + 1 + k, bases, u);
    for (double& v : u) v = 2.0 * v - 1.0;
    const double r = norm(u);
    if (r < 1e-12) continue;
    for (double& v : u) v /= r;
    dirs.push_back(u);
  }
  return dirs;
}

}  // namespace fpk::qmc
