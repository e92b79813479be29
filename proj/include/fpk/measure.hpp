#pragma once

// Test functions and statistics over empirical measures.

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "fpk/field.hpp"
#include "fpk/sde.hpp"

namespace fpk {

/// phi(y) = exp(-1 / (1 - |y - c|^2 / r^2)) inside B_r(c), exactly 0 outside. phi(c) = 1/e.
class Bump final : public SmoothFunction {
 public:
  Bump(Point center, double radius);

  const Point& center() const noexcept { return center_; }
  double radius() const noexcept { return radius_; }

  std::size_t dim() const noexcept override { return center_.size(); }
  double value(std::span<const double> y) const override;
  void jet(std::span<const double> y, double& value, std::span<double> grad,
           std::span<double> hess) const override;

 private:
  Point center_;
  double radius_;
};

using TestFunction = Bump;

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
};

/// Sub-probability integral: dead paths contribute 0 but stay in the denominator.
/// Throws PreconditionError when no path is alive.
Estimate integrate(const EmpiricalMeasure& m, const std::function<double(std::span<const double>)>& f);
Estimate integrate(const EmpiricalMeasure& m, const SmoothFunction& f);

struct MomentSummary {
  Point mean;
  Matrix covariance;  // unbiased, alive paths only
  Point std_error;      // of the mean, per coordinate
  double alive_fraction = 1.0;
  std::size_t n_alive = 0;
};

/// Requires at least 2 alive paths.
MomentSummary moments(const EmpiricalMeasure& m);

/// Two-sample Kolmogorov-Smirnov statistic of coordinate `axis` over alive paths.
double ks_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, std::size_t axis);
double ks_distance(std::vector<double> a, std::vector<double> b);

/// Bumps at 0 and +-scale e_i, each with radii scale and 2 scale: 4d + 2 functions.
std::vector<Bump> default_bank(std::size_t dim, double scale);

}  // namespace fpk
