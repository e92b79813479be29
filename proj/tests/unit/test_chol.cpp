#include <algorithm>
#include <cmath>
#include <string>
#include <random>

#include "doctest.h"
#include "fpk/chol.hpp"
#include "fpk/errors.hpp"
#include "support.hpp"

using namespace fpk;

namespace {

Matrix random_spd(std::mt19937_64& gen, std::size_t d) {
  std::normal_distribution<double> z;
  Matrix b(d);
  for (auto& v : b.data()) v = z(gen);
  Matrix a = b * b.transpose();
  for (std::size_t i = 0; i < d; ++i) a(i, i) += 0.5;
  return a;
}

// Row-by-row (Banachiewicz) order, written independently of the library kernel.
Matrix naive_cholesky(const Matrix& a) {
  const std::size_t d = a.size();
  Matrix l(d);
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) {
      double s = a(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = i == j ? std::sqrt(s) : s / l(j, j);
    }
  return l;
}

}  // namespace

TEST_CASE("hand cases") {
  CHECK(cholesky_point(Matrix::identity(3)).matrix() == Matrix::identity(3));
  const SigmaFactor s = cholesky_point(Matrix(2, {4, 2, 2, 5}));
  CHECK(s(0, 0) == doctest::Approx(2).epsilon(1e-15));
  CHECK(s(1, 0) == doctest::Approx(1).epsilon(1e-15));
  CHECK(s(1, 1) == doctest::Approx(2).epsilon(1e-15));
  CHECK(s(0, 1) == 0.0);
  CHECK(s.reconstruct() == Matrix(2, {4, 2, 2, 5}));
}

TEST_CASE("indefinite input reports the failing column") {
  try {
    cholesky_point(Matrix(2, {1, 2, 2, 1}));
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.column() == 2);
    CHECK(e.pivot() == doctest::Approx(-3));
  }
  CHECK_THROWS_AS(cholesky_point(Matrix(2, {1, 0.5, 0.4, 1})), PreconditionError);
}

TEST_CASE("monotone failure: failing minor is not positive definite") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> z;
  std::size_t failures = 0;
  for (int k = 0; k < 500; ++k) {
    const std::size_t d = 2 + k % 5;
    Matrix a(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = z(gen) + (i == j ? 1.0 : 0.0);
    try {
      cholesky_point(a);
    } catch (const NotPositiveDefinite& e) {
      ++failures;
      double maxdiag = 0;
      for (std::size_t i = 0; i < d; ++i) maxdiag = std::max(maxdiag, std::abs(a(i, i)));
      const auto eig = sym_eigs(a.leading_minor(e.column()));
      CHECK(eig.front() <= kPivotTolerance * maxdiag);
    }
  }
  CHECK(failures > 100);
}

TEST_CASE("reconstruction, triangularity and agreement with a naive factorization") {
  std::mt19937_64 gen(2024);
  for (std::size_t d = 2; d <= 8; ++d)
    for (int k = 0; k < 1000; ++k) {
      const Matrix a = random_spd(gen, d);
      const SigmaFactor s = cholesky_point(a);
      const Matrix naive = naive_cholesky(a);
      double worst = 0.0;
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j < d; ++j) {
          if (j > i) REQUIRE(s(i, j) == 0.0);
          worst = std::max(worst, std::abs(s(i, j) - naive(i, j)));
        }
      for (std::size_t i = 0; i < d; ++i) REQUIRE(s(i, i) > 0.0);
      REQUIRE((s.reconstruct() - a).frobenius() <= 1e-12 * a.frobenius());
      REQUIRE(worst <= 1e-13);
    }
}

TEST_CASE("sigma fields") {
  const auto ou = fpk::test::catalog("ou");
  const SigmaField sou = cholesky_field(ou);
  CHECK(sou.constant());
  const Matrix want = Matrix::identity(2, std::sqrt(2.0));
  CHECK(sou.at(Point{3, -1}).matrix() == want);

  const SigmaField demo = cholesky_field(fpk::test::catalog("dim2_demo"));
  CHECK_FALSE(demo.constant());
  const SigmaFactor s = demo.at(Point{1, 0});
  CHECK(s(0, 0) == 1.0);
  CHECK(s(1, 1) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
  CHECK(s(1, 0) == 0.0);

  // A(x) = I + B(x) B(x)^T with B affine in x through seeded weights.
  std::mt19937_64 gen(99);
  std::normal_distribution<double> z;
  const std::size_t d = 4;
  std::vector<double> w(d * d * (d + 1));
  for (auto& v : w) v = z(gen);
  auto b_of = [w, d](std::span<const double> x) {
    Matrix b(d);
    for (std::size_t i = 0; i < d; ++i)
      for (std::size_t j = 0; j < d; ++j) {
        const double* c = &w[(i * d + j) * (d + 1)];
        double v = c[d];
        for (std::size_t k = 0; k < d; ++k) v += c[k] * x[k];
        b(i, j) = v;
      }
    return b;
  };
  CoefficientField field(
      d,
      [b_of, d](std::span<const double> x, std::span<double> a) {
        const Matrix b = b_of(x);
        const Matrix m = b * b.transpose();
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j <= i; ++j) a[i * d + j] = m(i, j) + (i == j ? 1.0 : 0.0);
      },
      [d](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); },
      FieldSource{});
  const SigmaField sigma = cholesky_field(field);
  for (int k = 0; k < 100; ++k) {
    const Point x = fpk::test::uniform_point(gen, d, -2, 2);
    const Matrix a = field.diffusion(x);
    CHECK((sigma.at(x).reconstruct() - a).frobenius() <= 1e-12 * a.frobenius());
  }
}

TEST_CASE("failures inside a sigma field carry the point") {
  const auto f = fpk::test::expression(2, {{"a11", "1"}, {"a21", "x1"}, {"a22", "1"}}, {"0", "0"});
  const SigmaField sigma = cholesky_field(f);
  CHECK_NOTHROW(sigma.at(Point{0.5, 0}));
  try {
    sigma.at(Point{2, 7});
    FAIL("expected NotPositiveDefinite");
  } catch (const NotPositiveDefinite& e) {
    CHECK(e.column() == 2);
    CHECK(e.point() == std::vector<double>{2, 7});
  }
}

TEST_CASE("symmetric eigenvalues") {
  const auto e3 = sym_eigs(Matrix(3, {3, 0, 0, 0, 1, 0, 0, 0, 2}));
  CHECK(e3 == std::vector<double>{1, 2, 3});
  const Matrix m(2, {3, 1, 1, 1});
  const auto closed = sym_eigs(m);
  const auto jac = jacobi_eigs(m);
  CHECK(closed[0] == doctest::Approx(2 - std::sqrt(2.0)).epsilon(1e-15));
  CHECK(closed[1] == doctest::Approx(2 + std::sqrt(2.0)).epsilon(1e-15));
  CHECK(jac[0] == doctest::Approx(closed[0]).epsilon(1e-13));
  CHECK(jac[1] == doctest::Approx(closed[1]).epsilon(1e-13));

  std::mt19937_64 gen(31);
  std::normal_distribution<double> z;
  for (std::size_t d = 2; d <= 6; ++d)
    for (int k = 0; k < 200; ++k) {
      Matrix a(d);
      for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = 0; j <= i; ++j) a(i, j) = a(j, i) = z(gen);
      const auto ev = sym_eigs(a);
      REQUIRE(std::is_sorted(ev.begin(), ev.end()));
      double sum = 0, prod = 1;
      for (double v : ev) sum += v, prod *= v;
      // Determinant by Gaussian elimination with partial pivoting as the oracle.
      Matrix u = a;
      double det = 1;
      for (std::size_t c = 0; c < d; ++c) {
        std::size_t p = c;
        for (std::size_t r = c + 1; r < d; ++r)
          if (std::abs(u(r, c)) > std::abs(u(p, c))) p = r;
        if (p != c) {
          for (std::size_t j = 0; j < d; ++j) std::swap(u(p, j), u(c, j));
          det = -det;
        }
        det *= u(c, c);
        for (std::size_t r = c + 1; r < d; ++r) {
          const double f = u(r, c) / u(c, c);
          for (std::size_t j = c; j < d; ++j) u(r, j) -= f * u(c, j);
        }
      }
      double scale = 0;
      for (double v : ev) scale = std::max(scale, std::abs(v));
      CHECK(std::abs(sum - a.trace()) <= 1e-10 * std::max(1.0, a.frobenius()));
      CHECK(std::abs(prod - det) <= 1e-10 * std::max(std::abs(det), std::pow(scale, double(d)) * 1e-3));
    }
}

TEST_CASE("spectral gap in two dimensions") {
  auto g = spectral_gap_2d(Matrix::identity(2, 2.0));
  CHECK(g.gap == 0.0);
  CHECK(g.bound == 0.0);
  g = spectral_gap_2d(Matrix(2, {3, 1, 1, 1}));
  CHECK(g.gap == doctest::Approx(2 * std::sqrt(2.0)).epsilon(1e-15));
  CHECK(g.bound == 4.0);

  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> u(-5, 5);
  for (int k = 0; k < 1000; ++k) {
    const double a = u(gen), b = u(gen), c = u(gen);
    const Matrix m(2, {a, b, b, c});
    const auto gap = spectral_gap_2d(m);
    const auto ev = jacobi_eigs(m);
    REQUIRE(std::abs(gap.gap - (ev[1] - ev[0])) <= 1e-12 * std::max(1.0, gap.gap));
    REQUIRE(gap.gap <= gap.bound * (1 + 1e-15));
  }
}

TEST_CASE("regularity probe") {
  const auto constant = fpk::test::expression(2, {{"a11", "4"}, {"a21", "2"}, {"a22", "5"}}, {"0", "0"});
  const auto probe = regularity_probe(cholesky_field(constant), Ball{{0, 0}, 1}, 1e-4, 50);
  CHECK(probe.max_modulus == 0.0);
  CHECK(probe.max_gradient.frobenius() == 0.0);
  CHECK_FALSE(probe.suspicious);

  // sigma_22 = sqrt(1 + x1^2), so d/dx1 at (1, 0) is 1/sqrt(2).
  const SigmaField demo = cholesky_field(fpk::test::catalog("dim2_demo"));
  CHECK(std::abs(probe_partial(demo, Point{1, 0}, 1, 1, 0, 1e-4) - 1 / std::sqrt(2.0)) <= 1e-4);

  // sigma_11 = sqrt(|x1| + eps): the quotient near 0 is about 1/(2 sqrt(eps)).
  double previous = 0.0;
  for (const char* eps : {"0.1", "0.01", "0.001"}) {
    const auto f = fpk::test::expression(2, {{"a11", std::string("abs(x1) + ") + eps}, {"a21", "0"}, {"a22", "1"}},
                                         {"0", "0"});
    const double q = std::abs(probe_partial(cholesky_field(f), Point{1e-4, 0}, 0, 0, 0, 1e-5));
    const double e = std::stod(eps);
    const double x = 1e-4;
    // Closed form of the central quotient.
    const double want = (std::sqrt(x + 1e-5 + e) - std::sqrt(x - 1e-5 + e)) / 2e-5;
    CHECK(q == doctest::Approx(want).epsilon(1e-6));
    CHECK(std::isfinite(q));
    CHECK(q > previous);
    previous = q;
  }
}
