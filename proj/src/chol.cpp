#include "fpk/chol.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/errors.hpp"
#include "fpk/qmc.hpp"

namespace fpk {

Matrix SigmaFactor::reconstruct() const {
  return m_ * m_.transpose();
}

std::optional<PivotFailure> cholesky_columnwise(std::span<const double> a, std::size_t d,
                                                std::span<double> sigma) noexcept {
  double max_diag = 0.0;
  for (std::size_t i = 0; i < d; ++i) max_diag = std::max(max_diag, std::abs(a[i * d + i]));
  const double tol = kPivotTolerance * max_diag;
  std::fill(sigma.begin(), sigma.begin() + static_cast<std::ptrdiff_t>(d * d), 0.0);

  for (std::size_t j = 0; j < d; ++j) {
    double pivot = a[j * d + j];
    for (std::size_t k = 0; k < j; ++k) pivot -= sigma[j * d + k] * sigma[j * d + k];
    if (!(pivot > tol)) return PivotFailure{j + 1, pivot};
    const double sjj = std::sqrt(pivot);
    sigma[j * d + j] = sjj;
    for (std::size_t i = j + 1; i < d; ++i) {
      double s = a[i * d + j];
      for (std::size_t k = 0; k < j; ++k) s -= sigma[j * d + k] * sigma[i * d + k];
      sigma[i * d + j] = s / sjj;
    }
  }
  return std::nullopt;
}

SigmaFactor cholesky_point(const Matrix& a) {
  const std::size_t d = a.size();
  if (d == 0) throw PreconditionError("cholesky_point: empty matrix");
  const double scale = std::max(a.frobenius(), 1e-300);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < i; ++j)
      if (std::abs(a(i, j) - a(j, i)) > kSymmetryTolerance * scale)
        throw PreconditionError("cholesky_point: matrix is not symmetric");
  Matrix sigma(d);
  if (auto fail = cholesky_columnwise(a.data(), d, sigma.data()))
    throw NotPositiveDefinite(fail->column, fail->pivot);
  return SigmaFactor(std::move(sigma));
}

SigmaField::SigmaField(const CoefficientField& field)
    : dim_(field.dim()), field_(std::make_shared<const CoefficientField>(field)) {
  if (field.constant_diffusion()) {
    const std::size_t d = dim_;
    Point origin(d, 0.0);
    std::vector<double> a(d * d), sigma(d * d);
    field.diffusion(origin, a);
    if (auto fail = cholesky_columnwise(a, d, sigma))
      throw NotPositiveDefinite(fail->column, fail->pivot, origin);
    constant_ = std::move(sigma);
  }
}

SigmaField::SigmaField(std::size_t dim, Fn fn) : dim_(dim), custom_(std::move(fn)) {}

void SigmaField::evaluate(std::span<const double> x, std::span<double> sigma,
                          std::span<double> scratch) const {
  if (constant_) {
    std::copy(constant_->begin(), constant_->end(), sigma.begin());
    return;
  }
  if (custom_) {
    custom_(x, sigma);
    return;
  }
  field_->diffusion(x, scratch);
  if (auto fail = cholesky_columnwise(scratch, dim_, sigma))
    throw NotPositiveDefinite(fail->column, fail->pivot, Point(x.begin(), x.end()));
}

SigmaFactor SigmaField::at(std::span<const double> x) const {
  Matrix sigma(dim_);
  std::vector<double> scratch(dim_ * dim_);
  evaluate(x, sigma.data(), scratch);
  return SigmaFactor(std::move(sigma));
}

SigmaField cholesky_field(const CoefficientField& field) { return SigmaField(field); }

std::vector<double> jacobi_eigs(const Matrix& input) {
  const std::size_t d = input.size();
  Matrix a = input;
  const double fro = a.frobenius();
  constexpr int kMaxSweeps = 100;
  auto off_norm = [&] {
    double s = 0.0;
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j)
        if (i != j) s += a(i, j) * a(i, j);
    return std::sqrt(s);
  };
  int sweep = 0;
  for (; sweep < kMaxSweeps; ++sweep) {
    if (off_norm() <= 1e-13 * fro) break;
    for (std::size_t p = 0; p + 1 < d; ++p) {
      for (std::size_t q = p + 1; q < d; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < d; ++k) {
          if (k == p || k == q) continue;
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = a(p, k) = c * akp - s * akq;
          a(k, q) = a(q, k) = s * akp + c * akq;
        }
        a(p, p) -= t * apq;
        a(q, q) += t * apq;
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }
  if (sweep == kMaxSweeps && off_norm() > 1e-13 * fro)
    throw Error("jacobi_eigs: no convergence after " + std::to_string(kMaxSweeps) + " sweeps");
  std::vector<double> eig(d);
  for (std::size_t i = 0; i < d; ++i) eig[i] = a(i, i);
  std::sort(eig.begin(), eig.end());
  return eig;
}

std::vector<double> sym_eigs(const Matrix& a) {
  for (double v : a.data())
    if (!std::isfinite(v)) throw DomainError("sym_eigs: non-finite entry");
  if (a.size() == 2) {
    const double mean = 0.5 * (a(0, 0) + a(1, 1));
    const double half = 0.5 * std::hypot(a(0, 0) - a(1, 1), 2.0 * a(0, 1));
    return {mean - half, mean + half};
  }
  return jacobi_eigs(a);
}

SpectralGap2d spectral_gap_2d(const Matrix& a) {
  if (a.size() != 2) throw PreconditionError("spectral_gap_2d: matrix must be 2x2");
  for (double v : a.data())
    if (!std::isfinite(v)) throw DomainError("spectral_gap_2d: non-finite entry");
  const double diff = a(0, 0) - a(1, 1);
  return {std::hypot(diff, 2.0 * a(0, 1)), std::abs(diff) + 2.0 * std::abs(a(0, 1))};
}

double probe_partial(const SigmaField& sigma, std::span<const double> x, std::size_t i,
                     std::size_t j, std::size_t axis, double h) {
  Point xp(x.begin(), x.end()), xm(x.begin(), x.end());
  xp[axis] += h;
  xm[axis] -= h;
  return (sigma.at(xp)(i, j) - sigma.at(xm)(i, j)) / (2.0 * h);
}

RegularityProbe regularity_probe(const SigmaField& sigma, const Ball& ball,
                                 std::optional<double> h, std::size_t n_points, std::uint64_t seed) {
  const std::size_t d = sigma.dim();
  if (ball.center.size() != d) throw PreconditionError("regularity_probe: ball dimension mismatch");
  if (!(ball.radius > 0.0)) throw PreconditionError("regularity_probe: radius must be positive");
  if (h && !(*h > 0.0)) throw PreconditionError("regularity_probe: step must be positive");
  if (n_points == 0) throw PreconditionError("regularity_probe: need at least one point");

  RegularityProbe out;
  out.ball = ball;
  out.step = h;
  out.n_points = n_points;
  out.max_gradient = Matrix(d);

  const auto points = qmc::ball_points(ball.center, ball.radius, n_points, seed);
  std::vector<double> grad_sq(d * d);
  for (const auto& x : points) {
    const double step = h ? *h : 1e-4 * (1.0 + norm(x));
    const SigmaFactor s0 = sigma.at(x);
    std::fill(grad_sq.begin(), grad_sq.end(), 0.0);
    for (std::size_t k = 0; k < d; ++k) {
      Point xp = x, xm = x;
      xp[k] += step;
      xm[k] -= step;
      const SigmaFactor sp = sigma.at(xp);
      const SigmaFactor sm = sigma.at(xm);
      for (std::size_t i = 0; i < d; ++i) {
        for (std::size_t j = 0; j <= i; ++j) {
          const double q = (sp(i, j) - sm(i, j)) / (2.0 * step);
          grad_sq[i * d + j] += q * q;
          if (std::abs(q) > 1.0 / step) out.suspicious = true;
          out.max_modulus = std::max({out.max_modulus, std::abs(sp(i, j) - s0(i, j)),
                                      std::abs(sm(i, j) - s0(i, j))});
        }
      }
    }
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        out.max_gradient(i, j) = std::max(out.max_gradient(i, j), std::sqrt(grad_sq[i * d + j]));
  }
  return out;
}

}  // namespace fpk
