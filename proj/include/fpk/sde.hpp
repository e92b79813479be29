#pragma once

// Euler-Maruyama ensembles for dX = G(X) dt + sigma(X) dW with sigma sigma^T = A.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "fpk/chol.hpp"
#include "fpk/field.hpp"

namespace fpk {

struct SimConfig {
  Point x0;
  double horizon = 1.0;  // T
  double dt = 1e-3;
  std::size_t n_paths = 1000;
  std::uint64_t seed = 0;
  std::vector<double> snapshot_times;  // empty -> 21 equispaced nodes on [0, T]
  double r_explode = 1e6;
};

/// A validated config with the step adjusted down so that T/dt is an integer.
struct ResolvedSim {
  SimConfig config;
  std::size_t n_steps = 0;
  double dt = 0.0;
  bool dt_adjusted = false;
  std::vector<std::size_t> snapshot_steps;
};

/// Throws PreconditionError for dt <= 0, dt > T, n_paths == 0, snapshot times outside [0, T]
/// or not increasing after rounding to the step grid.
ResolvedSim resolve_sim(const SimConfig& cfg, std::size_t dim);

/// Particle cloud at one time. Exploded paths stay in place (frozen at their last state
/// inside the cutoff) and are flagged dead.
class EmpiricalMeasure {
 public:
  EmpiricalMeasure() = default;
  EmpiricalMeasure(double t, std::size_t dim, std::size_t n_paths)
      : t_(t), dim_(dim), positions_(n_paths * dim), alive_(n_paths, 1) {}

  double time() const noexcept { return t_; }
  std::size_t dim() const noexcept { return dim_; }
  std::size_t n_paths() const noexcept { return alive_.size(); }
  std::size_t n_alive() const noexcept;
  std::size_t n_dead() const noexcept { return n_paths() - n_alive(); }
  double alive_fraction() const noexcept;

  bool alive(std::size_t path) const noexcept { return alive_[path] != 0; }
  std::span<const double> position(std::size_t path) const noexcept {
    return {positions_.data() + path * dim_, dim_};
  }
  std::span<double> position(std::size_t path) noexcept { return {positions_.data() + path * dim_, dim_}; }
  void set_alive(std::size_t path, bool a) noexcept { alive_[path] = a ? 1 : 0; }

  /// Builds a measure from explicit samples, all alive.
  static EmpiricalMeasure from_samples(double t, std::size_t dim, std::span<const double> row_major);

  friend bool operator==(const EmpiricalMeasure&, const EmpiricalMeasure&) = default;

 private:
  double t_ = 0.0;
  std::size_t dim_ = 0;
  std::vector<double> positions_;
  std::vector<std::uint8_t> alive_;
};

struct SimResult {
  ResolvedSim run;
  std::vector<EmpiricalMeasure> snapshots;

  /// Snapshot whose time is within 1e-9 (relative to T) of `t`. Throws PreconditionError.
  const EmpiricalMeasure& at(double t) const;
};

/// X_{n+1} = X_n + G(X_n) dt + sigma(X_n) sqrt(dt) Z_n with Z_n keyed by (seed, path, n).
/// A path leaving B_{r_explode} (or turning non-finite) is frozen and marked dead.
/// Throws NotPositiveDefinite (with the point) if sigma cannot be formed along a path.
SimResult euler_maruyama(const CoefficientField& field, const SigmaField& sigma, const SimConfig& cfg,
                         std::size_t threads = 0);
SimResult euler_maruyama(const CoefficientField& field, const SimConfig& cfg, std::size_t threads = 0);

struct RefinementLevel {
  std::size_t level = 0;
  double dt = 0.0;
  std::size_t n_steps = 0;
  double dead_fraction = 0.0;
};

struct RefinementTable {
  std::vector<RefinementLevel> levels;
  /// strong_error[l] = mean over paths alive on both levels of |X^(l)_T - X^(l+1)_T|.
  std::vector<double> strong_error;
  std::vector<std::size_t> n_compared;
};

/// Level l steps with dt / 2^l; every level consumes the same finest-level Brownian increments
/// (coarse increments are exact sums of fine ones). Increments are rounded to multiples of 2^-40
/// so the sums are associative, which makes constant-coefficient levels agree bitwise.
RefinementTable refine_shared_noise(const CoefficientField& field, const SigmaField& sigma,
                                    const SimConfig& cfg, std::size_t n_levels, std::size_t threads = 0);

/// (#alive paths with |x| <= radius) / n_paths.
double mass_in_ball(const EmpiricalMeasure& m, double radius);

}  // namespace fpk
