#include "fpk/matrix.hpp"

#include <stdexcept>

#include "fpk/errors.hpp"

namespace fpk {

NotPositiveDefinite::NotPositiveDefinite(std::size_t column, double pivot, std::vector<double> point)
    : Error("matrix is not positive definite: pivot " + std::to_string(pivot) + " at column " +
            std::to_string(column)),
      column_(column),
      pivot_(pivot),
      point_(std::move(point)) {}

Matrix::Matrix(std::size_t n, std::vector<double> row_major) : n_(n), data_(std::move(row_major)) {
  if (data_.size() != n * n) throw PreconditionError("Matrix: storage size does not match n*n");
}

Matrix Matrix::identity(std::size_t n, double scale) {
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = scale;
  return m;
}

double Matrix::frobenius() const noexcept {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::trace() const noexcept {
  double s = 0.0;
  for (std::size_t i = 0; i < n_; ++i) s += (*this)(i, i);
  return s;
}

Matrix Matrix::transpose() const {
  Matrix t(n_);
  for (std::size_t i = 0; i < n_; ++i)
    for (std::size_t j = 0; j < n_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

Matrix Matrix::leading_minor(std::size_t k) const {
  Matrix m(k);
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = 0; j < k; ++j) m(i, j) = (*this)(i, j);
  return m;
}

Matrix operator*(const Matrix& a, const Matrix& b) {
  if (a.n_ != b.n_) throw PreconditionError("Matrix product: size mismatch");
  Matrix c(a.n_);
  for (std::size_t i = 0; i < a.n_; ++i)
    for (std::size_t k = 0; k < a.n_; ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < a.n_; ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  if (a.n_ != b.n_) throw PreconditionError("Matrix difference: size mismatch");
  Matrix c(a.n_);
  for (std::size_t i = 0; i < a.data_.size(); ++i) c.data_[i] = a.data_[i] - b.data_[i];
  return c;
}

double quadratic_form(std::span<const double> a, std::span<const double> x) noexcept {
  const std::size_t d = x.size();
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < d; ++j) row += a[i * d + j] * x[j];
    s += row * x[i];
  }
  return s;
}

}  // namespace fpk
