#pragma once

// Halton low-discrepancy points for deterministic sampling of balls and spheres.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace fpk::qmc {

/// Van der Corput radical inverse of `index` in `base`, in [0, 1).
double radical_inverse(std::uint64_t index, unsigned base) noexcept;

/// First n primes (bases for an n-dimensional Halton sequence).
std::vector<unsigned> primes(std::size_t n);

/// Halton point number `index` (index >= 1 avoids the origin) into `out` (size d).
void halton(std::uint64_t index, std::span<const unsigned> bases, std::span<double> out) noexcept;

/// Maps a cube point u in [0,1]^d into the closed unit ball along rays from the
/// origin (radial cube-to-ball map); preserves coverage of the cube sequence.
void cube_to_ball(std::span<double> u) noexcept;

/// Deterministic point set inside B_radius(center): the center first, then
/// Halton points starting at sequence offset `seed + 1`.
std::vector<std::vector<double>> ball_points(std::span<const double> center, double radius,
                                             std::size_t n, std::uint64_t seed);

/// Unit directions on S^{d-1}: the 2d signed coordinate axes first, then
/// normalized Halton cube points until `n` directions exist.
std::vector<std::vector<double>> sphere_directions(std::size_t d, std::size_t n, std::uint64_t seed);

}  // namespace fpk::qmc
