#pragma once

// Coefficient fields (A, G) of the generator L f = 1/2 trace(A D^2 f) + <G, grad f>.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "fpk/expr.hpp"
#include "fpk/matrix.hpp"

namespace fpk {

inline constexpr double kEllipticityTolerance = 1e-10;

/// Where a field came from; emitted verbatim in reports.
struct FieldSource {
  std::string catalog;                               // empty for expression fields
  std::map<std::string, double> params;              // resolved catalog parameters
  std::map<std::string, std::string> a_entries;      // "a21" -> expression text (i >= j only)
  std::vector<std::string> g_entries;
  std::optional<double> integrability_p;             // metadata only
  std::set<std::string> claimed;                     // subset of {H1, H2, conservative, invariant}
};

/// User-facing field description, before validation.
struct FieldConfig {
  std::size_t dim = 0;
  std::optional<std::string> catalog;
  std::map<std::string, double> params;
  std::map<std::string, std::string> a_entries;
  std::vector<std::string> g_entries;
  std::optional<double> integrability_p;
};

class CoefficientField {
 public:
  /// Writes A(x)_{ij} for i >= j into a row-major d x d buffer; the upper triangle is ignored.
  using LowerFn = std::function<void(std::span<const double>, std::span<double>)>;
  using DriftFn = std::function<void(std::span<const double>, std::span<double>)>;

  CoefficientField(std::size_t dim, LowerFn lower, DriftFn drift, FieldSource source,
                   bool constant_diffusion = false);

  std::size_t dim() const noexcept { return dim_; }
  const FieldSource& source() const noexcept { return source_; }
  /// True when A does not depend on x (lets callers factor once).
  bool constant_diffusion() const noexcept { return constant_diffusion_; }

  /// Full symmetric A(x) into `a` (size d*d). The upper triangle is mirrored from the lower.
  /// Throws DomainError on non-finite entries.
  void diffusion(std::span<const double> x, std::span<double> a) const;
  Matrix diffusion(std::span<const double> x) const;

  void drift(std::span<const double> x, std::span<double> g) const;
  Point drift(std::span<const double> x) const;

 private:
  void check_point(std::span<const double> x) const;

  std::size_t dim_;
  LowerFn lower_;
  DriftFn drift_;
  FieldSource source_;
  bool constant_diffusion_;
};

/// A C^2 function with exact value, gradient, and Hessian.
class SmoothFunction {
 public:
  virtual ~SmoothFunction() = default;
  virtual std::size_t dim() const noexcept = 0;
  virtual double value(std::span<const double> x) const = 0;
  /// `grad` has size d, `hess` is row-major d x d.
  virtual void jet(std::span<const double> x, double& value, std::span<double> grad,
                   std::span<double> hess) const = 0;
};

/// Evaluates L f at points; owns scratch buffers, so one instance per thread.
class Generator {
 public:
  explicit Generator(const CoefficientField& field);

  double apply(const SmoothFunction& f, std::span<const double> x);
  /// L f(x) from a precomputed gradient and Hessian.
  double apply(std::span<const double> x, std::span<const double> grad, std::span<const double> hess);

  const CoefficientField& field() const noexcept { return *field_; }

 private:
  const CoefficientField* field_;
  std::vector<double> a_, g_, grad_, hess_;
};

double apply_L(const CoefficientField& field, const SmoothFunction& f, std::span<const double> x);

/// Catalog names accepted by build_field.
std::vector<std::string> catalog_names();

/// Validates the config and constructs the field. Throws ConfigError.
CoefficientField build_field(const FieldConfig& cfg);

struct Ball {
  Point center;
  double radius = 1.0;
};

struct EllipticityEstimate {
  Ball ball;
  double lambda_min = 0.0;
  double lambda_max = 0.0;
  std::size_t n_samples = 0;
  Point argmin;
  Point argmax;
  double pd_tolerance = kEllipticityTolerance;
  bool passed = false;
  std::string message;
};

/// Smallest/largest eigenvalue of A over the ball center plus Halton points in the ball.
/// A failed check is reported in the result; non-finite entries throw DomainError.
EllipticityEstimate check_ellipticity(const CoefficientField& field, const Ball& ball,
                                      std::size_t n_samples, std::uint64_t seed,
                                      double pd_tolerance = kEllipticityTolerance);

}  // namespace fpk
