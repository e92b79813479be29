#include "fpk/measure.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/errors.hpp"

namespace fpk {

Bump::Bump(Point center, double radius) : center_(std::move(center)), radius_(radius) {
  if (!(radius > 0.0)) throw PreconditionError("Bump: radius must be positive");
  if (center_.empty()) throw PreconditionError("Bump: empty center");
}

double Bump::value(std::span<const double> y) const {
  double s = 0.0;
  for (std::size_t i = 0; i < center_.size(); ++i) {
    const double u = y[i] - center_[i];
    s += u * u;
  }
  s /= radius_ * radius_;
  if (s >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - s));
}

void Bump::jet(std::span<const double> y, double& value, std::span<double> grad,
               std::span<double> hess) const {
  const std::size_t d = center_.size();
  const double r2 = radius_ * radius_;
  double s = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double u = y[i] - center_[i];
    s += u * u;
  }
  s /= r2;
  if (s >= 1.0) {
    value = 0.0;
    std::fill(grad.begin(), grad.begin() + static_cast<std::ptrdiff_t>(d), 0.0);
    std::fill(hess.begin(), hess.begin() + static_cast<std::ptrdiff_t>(d * d), 0.0);
    return;
  }
  const double q = 1.0 - s;
  const double phi = std::exp(-1.0 / q);
  // phi = h(s): h' = -phi / q^2, h'' = phi (1/q^4 - 2/q^3); ds/dy = 2u / r^2
  const double h1 = -phi / (q * q);
  const double h2 = phi * (1.0 / (q * q * q * q) - 2.0 / (q * q * q));
  value = phi;
  for (std::size_t i = 0; i < d; ++i) {
    const double ui = y[i] - center_[i];
    grad[i] = h1 * 2.0 * ui / r2;
    for (std::size_t j = 0; j < d; ++j) {
      const double uj = y[j] - center_[j];
      hess[i * d + j] = (i == j ? h1 * 2.0 / r2 : 0.0) + h2 * 4.0 * ui * uj / (r2 * r2);
    }
  }
}

Estimate integrate(const EmpiricalMeasure& m, const std::function<double(std::span<const double>)>& f) {
  const std::size_t n_alive = m.n_alive();
  if (n_alive == 0) throw PreconditionError("integrate: no alive paths");
  std::vector<double> values;
  values.reserve(n_alive);
  double sum = 0.0;
  for (std::size_t p = 0; p < m.n_paths(); ++p) {
    if (!m.alive(p)) continue;
    const double v = f(m.position(p));
    if (!std::isfinite(v)) throw DomainError("integrate: integrand is not finite");
    values.push_back(v);
    sum += v;
  }
  const double mean = sum / static_cast<double>(n_alive);
  double sum_sq = 0.0;
  for (double v : values) sum_sq += (v - mean) * (v - mean);
  const double frac = m.alive_fraction();
  Estimate e;
  e.value = mean * frac;
  if (n_alive > 1) {
    const double sd = std::sqrt(sum_sq / static_cast<double>(n_alive - 1));
    e.std_error = frac * sd / std::sqrt(static_cast<double>(n_alive));
  }
  return e;
}

Estimate integrate(const EmpiricalMeasure& m, const SmoothFunction& f) {
  return integrate(m, [&f](std::span<const double> y) { return f.value(y); });
}

MomentSummary moments(const EmpiricalMeasure& m) {
  const std::size_t n = m.n_alive();
  if (n < 2) throw PreconditionError("moments: need at least 2 alive paths");
  const std::size_t d = m.dim();
  MomentSummary out;
  out.n_alive = n;
  out.alive_fraction = m.alive_fraction();
  out.mean.assign(d, 0.0);
  for (std::size_t p = 0; p < m.n_paths(); ++p) {
    if (!m.alive(p)) continue;
    const auto x = m.position(p);
    for (std::size_t i = 0; i < d; ++i) out.mean[i] += x[i];
  }
  for (double& v : out.mean) v /= static_cast<double>(n);
  out.covariance = Matrix(d);
  for (std::size_t p = 0; p < m.n_paths(); ++p) {
    if (!m.alive(p)) continue;
    const auto x = m.position(p);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j)
        out.covariance(i, j) += (x[i] - out.mean[i]) * (x[j] - out.mean[j]);
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      out.covariance(i, j) /= static_cast<double>(n - 1);
      out.covariance(j, i) = out.covariance(i, j);
    }
  out.std_error.resize(d);
  for (std::size_t i = 0; i < d; ++i) out.std_error[i] = std::sqrt(out.covariance(i, i) / static_cast<double>(n));
  return out;
}

double ks_distance(std::vector<double> a, std::vector<double> b) {
  if (a.empty() || b.empty()) throw PreconditionError("ks_distance: empty sample");
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  std::size_t i = 0, j = 0;
  double best = 0.0;
  while (i < a.size() && j < b.size()) {
    const double v = std::min(a[i], b[j]);
    while (i < a.size() && a[i] == v) ++i;
    while (j < b.size() && b[j] == v) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double ks_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b, std::size_t axis) {
  if (axis >= a.dim() || axis >= b.dim()) throw PreconditionError("ks_distance: axis out of range");
  auto column = [axis](const EmpiricalMeasure& m) {
    std::vector<double> v;
    v.reserve(m.n_alive());
    for (std::size_t p = 0; p < m.n_paths(); ++p)
      if (m.alive(p)) v.push_back(m.position(p)[axis]);
    return v;
  };
  return ks_distance(column(a), column(b));
}

std::vector<Bump> default_bank(std::size_t dim, double scale) {
  if (!(scale > 0.0)) throw PreconditionError("default_bank: scale must be positive");
  std::vector<Bump> bank;
  for (double r : {scale, 2.0 * scale}) bank.emplace_back(Point(dim, 0.0), r);
  for (std::size_t i = 0; i < dim; ++i)
    for (double sgn : {1.0, -1.0})
      for (double r : {scale, 2.0 * scale}) {
        Point c(dim, 0.0);
        c[i] = sgn * scale;
        bank.emplace_back(std::move(c), r);
      }
  return bank;
}

}  // namespace fpk
