#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace fpk {

using Point = std::vector<double>;

/// Dense square matrix, row-major. Sizes here are small (d <= 64), so no expression templates.
class Matrix {
 public:
  Matrix() = default;
  explicit Matrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}
  Matrix(std::size_t n, std::vector<double> row_major);

  static Matrix identity(std::size_t n, double scale = 1.0);

  std::size_t size() const noexcept { return n_; }
  double& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const noexcept { return data_[i * n_ + j]; }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  double frobenius() const noexcept;
  double trace() const noexcept;
  Matrix transpose() const;
  /// Leading k x k block.
  Matrix leading_minor(std::size_t k) const;

  friend Matrix operator*(const Matrix& a, const Matrix& b);
  friend Matrix operator-(const Matrix& a, const Matrix& b);
  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

inline double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm_sq(std::span<const double> x) noexcept { return dot(x, x); }
inline double norm(std::span<const double> x) noexcept { return std::sqrt(norm_sq(x)); }

/// <A x, x> for a row-major d x d matrix.
double quadratic_form(std::span<const double> a, std::span<const double> x) noexcept;

}  // namespace fpk
