#pragma once

// Lyapunov functions and the growth conditions that certify uniqueness, conservativeness,
// and existence of a finite invariant measure, checked on radial shell grids.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fpk/field.hpp"

namespace fpk {

enum class LyapunovKind { log1p, log_outer, half_log_outer, quadratic };

/// V(y) = ln(1 + |y|^2), g = ln(|x|^2 v N0^2) + 2, g = 1/2 ln(|x|^2 v N0^2) + 1, g = |x|^2 / 2.
/// The outer-log variants are C^2 away from the sphere |x| = N0.
class LyapunovFn final : public SmoothFunction {
 public:
  LyapunovFn(LyapunovKind kind, std::size_t dim, double n0 = 1.0);

  LyapunovKind kind() const noexcept { return kind_; }
  double n0() const noexcept { return n0_; }
  std::string tag() const;

  std::size_t dim() const noexcept override { return dim_; }
  double value(std::span<const double> x) const override;
  void jet(std::span<const double> x, double& value, std::span<double> grad,
           std::span<double> hess) const override;

 private:
  LyapunovKind kind_;
  std::size_t dim_;
  double n0_;
};

LyapunovKind parse_lyapunov_kind(const std::string& tag);

/// L V for V = ln(1 + |y|^2) from its closed-form expansion (independent of apply_L).
double LV(const CoefficientField& field, std::span<const double> y);

inline constexpr double kMarginTolerance = 1e-9;
inline constexpr double kGrowthFlagFactor = 1.1;

/// Shells at radii N0 (1 + k / shells_per_n0), k = 1, 2, ... while the radius stays <= r_max,
/// each carrying the same quasi-random direction set (signed axes first).
struct GridSpec {
  double n0 = 1.0;
  double r_max = 1000.0;
  std::size_t directions = 0;  // 0 -> 64 d
  std::uint64_t seed = 0;
  std::size_t shells_per_n0 = 8;
  double margin_tolerance = kMarginTolerance;
  /// Flag divergence when the per-shell minimal constant grows by more than this factor per
  /// doubling of the radius, monotonically across the outermost three shells.
  double growth_flag_factor = kGrowthFlagFactor;
};

struct ConditionSample {
  std::uint32_t shell = 0;      // 0-based; inner H2 samples use their own numbering (part 'A', inner)
  std::uint32_t direction = 0;  // index into ConditionReport::directions; origin uses UINT32_MAX
  char part = ' ';              // H2 only: 'A' (operator norm bound) or 'G' (drift bound)
  double radius = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;          // rhs - lhs, >= 0 means satisfied
  double gap_half = 0.0;        // dim2 only: spectral gap / 2
  double bound_half = 0.0;      // dim2 only: (|a11 - a22| + 2|a12|) / 2
};

enum class ConstantSense { minimal, maximal };

struct ConditionReport {
  std::string id;
  std::string description;
  GridSpec grid;
  std::size_t dim = 0;
  std::size_t n_shells = 0;
  std::vector<std::vector<double>> directions;
  std::vector<ConditionSample> samples;

  std::string constant_name;           // "K" or "M"
  ConstantSense sense = ConstantSense::minimal;
  std::optional<double> constant_used; // value the margins were evaluated at
  double feasible_constant = 0.0;      // minimal K/M, or maximal M for "<= -M" forms
  std::vector<double> shell_constants; // per outer shell
  bool divergent = false;
  std::size_t resampled = 0;           // samples moved off a non-differentiability sphere
  std::map<std::string, double> diagnostics;
  bool passed = false;

  Point point(const ConditionSample& s) const;
  /// Lowest-margin samples, at most n.
  std::vector<ConditionSample> worst(std::size_t n = 10) const;
  double min_margin() const;
};

enum class LyapunovMode { conservative, invariant };

/// ||A(x)|| <= K + K|x|^2 ln(1 + |x|^2) everywhere and <G(x), x> <= same outside B_N0.
/// Without `k`, margins are evaluated at the minimal feasible K; verdict then rests on divergence.
ConditionReport check_H2(const CoefficientField& field, const GridSpec& grid,
                         std::optional<double> k = std::nullopt);

/// -<Ax,x>/|x|^2 + 1/2 trace A + <G,x> <= M |x|^2 (ln|x| + 1) outside B_N0.
ConditionReport check_conservative_sprin(const CoefficientField& field, double m, const GridSpec& grid);

/// Variant 1: -<Ax,x>/|x|^2 + 1/2 trace A + <G,x> <= -M |x|^2.
/// Variant 2: 1/2 trace A + <G,x> <= -M.
ConditionReport check_invariant_sprin(const CoefficientField& field, int variant, double m,
                                      const GridSpec& grid);

/// Conservative: L g <= M g. Invariant: L g <= -M. L g through the generic generator.
ConditionReport check_lyapunov(const CoefficientField& field, const LyapunovFn& g, LyapunovMode mode,
                               double m, const GridSpec& grid);

/// d = 2 only: |a11 - a22|/2 + |a12| + <G,x> against M|x|^2(ln|x|+1) or -M|x|^2.
ConditionReport check_dim2(const CoefficientField& field, LyapunovMode mode, double m,
                           const GridSpec& grid);

}  // namespace fpk
