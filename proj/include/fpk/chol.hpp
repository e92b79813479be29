#pragma once

// Columnwise Cholesky factorization of A(x) = sigma(x) sigma(x)^T and small symmetric eigen tools.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "fpk/field.hpp"
#include "fpk/matrix.hpp"

namespace fpk {

inline constexpr double kPivotTolerance = 1e-12;   // relative to max diagonal entry
inline constexpr double kSymmetryTolerance = 1e-12;

/// Lower-triangular factor with strictly positive diagonal.
class SigmaFactor {
 public:
  SigmaFactor() = default;
  explicit SigmaFactor(Matrix lower) : m_(std::move(lower)) {}

  std::size_t dim() const noexcept { return m_.size(); }
  /// Zero for i < j.
  double operator()(std::size_t i, std::size_t j) const noexcept { return m_(i, j); }
  const Matrix& matrix() const noexcept { return m_; }
  /// sigma sigma^T
  Matrix reconstruct() const;

 private:
  Matrix m_;
};

/// Outcome of the allocation-free kernel: 0 on success, else the failing column (1-based).
struct PivotFailure {
  std::size_t column = 0;
  double pivot = 0.0;
};

/// Columnwise factorization into `sigma` (row-major d x d, upper triangle zeroed).
/// Column j: diagonal first, then rows i = j+1..d. No symmetry check; no allocation.
std::optional<PivotFailure> cholesky_columnwise(std::span<const double> a, std::size_t d,
                                                std::span<double> sigma) noexcept;

/// Throws PreconditionError when A is asymmetric beyond 1e-12 relative, NotPositiveDefinite
/// when a pivot is <= 1e-12 * max diagonal.
SigmaFactor cholesky_point(const Matrix& a);

/// sigma(x) for a coefficient field; every evaluation factors A(x) afresh unless A is constant.
class SigmaField {
 public:
  /// Custom dispersion (row-major d x d into the output span).
  using Fn = std::function<void(std::span<const double>, std::span<double>)>;

  explicit SigmaField(const CoefficientField& field);
  SigmaField(std::size_t dim, Fn fn);

  std::size_t dim() const noexcept { return dim_; }
  /// True when sigma does not depend on x.
  bool constant() const noexcept { return constant_.has_value(); }

  /// Throws NotPositiveDefinite carrying the offending point.
  SigmaFactor at(std::span<const double> x) const;
  /// Row-major into `sigma`; `scratch` must hold d*d doubles.
  void evaluate(std::span<const double> x, std::span<double> sigma, std::span<double> scratch) const;

 private:
  std::size_t dim_;
  std::shared_ptr<const CoefficientField> field_;  // own copy, so temporaries are safe
  Fn custom_;
  std::optional<std::vector<double>> constant_;
};

SigmaField cholesky_field(const CoefficientField& field);

/// Ascending eigenvalues. Closed form for d = 2, cyclic Jacobi otherwise.
std::vector<double> sym_eigs(const Matrix& a);
/// Cyclic Jacobi for any d; stops when off-diagonal norm <= 1e-13 * ||A||_F.
/// Throws Error after the sweep cap.
std::vector<double> jacobi_eigs(const Matrix& a);

struct SpectralGap2d {
  double gap = 0.0;    // sqrt((a11 - a22)^2 + 4 a12^2)
  double bound = 0.0;  // |a11 - a22| + 2 |a12|
};
SpectralGap2d spectral_gap_2d(const Matrix& a);

struct RegularityProbe {
  Ball ball;
  std::optional<double> step;  // empty: 1e-4 * (1 + ||x||) per point
  std::size_t n_points = 0;
  /// Max over probe points of ||grad sigma_ij|| (central differences), row-major d x d, lower part used.
  Matrix max_gradient;
  /// Max |sigma_ij(x +- h e_k) - sigma_ij(x)| over all entries, axes, and points.
  double max_modulus = 0.0;
  bool suspicious = false;  // some difference quotient exceeded 1/h
};

/// Central difference of sigma_ij along `axis` at x.
double probe_partial(const SigmaField& sigma, std::span<const double> x, std::size_t i,
                     std::size_t j, std::size_t axis, double h);

RegularityProbe regularity_probe(const SigmaField& sigma, const Ball& ball,
                                 std::optional<double> h, std::size_t n_points,
                                 std::uint64_t seed = 0);

}  // namespace fpk
