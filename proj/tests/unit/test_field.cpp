#include <cmath>
#include <cstring>
#include <random>

#include "doctest.h"
#include "fpk/errors.hpp"
#include "fpk/field.hpp"
#include "fpk/measure.hpp"
#include "support.hpp"

using namespace fpk;
using fpk::test::catalog;
using fpk::test::expression;

namespace {

// f(x) = x1
struct FirstCoordinate final : SmoothFunction {
  std::size_t d;
  explicit FirstCoordinate(std::size_t dim) : d(dim) {}
  std::size_t dim() const noexcept override { return d; }
  double value(std::span<const double> x) const override { return x[0]; }
  void jet(std::span<const double> x, double& v, std::span<double> g, std::span<double> h) const override {
    v = x[0];
    std::fill(g.begin(), g.end(), 0.0);
    std::fill(h.begin(), h.end(), 0.0);
    g[0] = 1.0;
  }
};

// f(x) = |x|^2 / 2
struct HalfNormSq final : SmoothFunction {
  std::size_t d;
  explicit HalfNormSq(std::size_t dim) : d(dim) {}
  std::size_t dim() const noexcept override { return d; }
  double value(std::span<const double> x) const override { return 0.5 * norm_sq(x); }
  void jet(std::span<const double> x, double& v, std::span<double> g, std::span<double> h) const override {
    v = value(x);
    std::fill(h.begin(), h.end(), 0.0);
    for (std::size_t i = 0; i < d; ++i) {
      g[i] = x[i];
      h[i * d + i] = 1.0;
    }
  }
};

}  // namespace

TEST_CASE("catalog definitions") {
  const auto ou = catalog("ou");
  const Point x{0.7, -1.3};
  CHECK(ou.diffusion(x) == Matrix::identity(2, 2.0));
  CHECK(ou.drift(x) == Point{-0.7, 1.3});
  CHECK(ou.source().claimed.contains("invariant"));

  const auto bm = catalog("bm", 3);
  CHECK(bm.diffusion(Point{1, 2, 3}) == Matrix::identity(3));
  CHECK(bm.drift(Point{1, 2, 3}) == Point{0, 0, 0});
  CHECK_FALSE(bm.source().claimed.contains("invariant"));

  const auto demo = catalog("dim2_demo");
  const Matrix a = demo.diffusion(Point{1, 0});
  CHECK(a(0, 0) == 1.0);
  CHECK(a(1, 1) == 2.0);
  CHECK(a(0, 1) == 0.0);
  CHECK_THROWS_AS(catalog("dim2_demo", 3), ConfigError);

  const auto cubic = catalog("cubic_blowup");
  CHECK(cubic.drift(Point{2, -1}) == Point{8, -1});
}

TEST_CASE("expression field with a constant matrix") {
  const auto f = expression(2, {{"a11", "4"}, {"a21", "2"}, {"a22", "5"}}, {"0", "0"});
  CHECK(f.diffusion(Point{3, 4}) == Matrix(2, {4, 2, 2, 5}));
  CHECK(f.constant_diffusion());
}

TEST_CASE("field configuration errors") {
  CHECK_THROWS_AS(expression(2, {{"a11", "1"}, {"a22", "1"}}, {"0"}), ConfigError);
  CHECK_THROWS_AS(expression(2, {{"a11", "1"}, {"a22", "1"}, {"a12", "0"}}, {"0", "0"}), ConfigError);
  CHECK_THROWS_AS(expression(2, {{"a11", "1"}}, {"0", "0"}), ConfigError);
  CHECK_THROWS_AS(expression(2, {{"a11", "x3"}, {"a21", "0"}, {"a22", "1"}}, {"0", "0"}), ConfigError);
  CHECK_THROWS_AS(catalog("bm", 1), ConfigError);
  CHECK_THROWS_AS(catalog("nope"), ConfigError);
  CHECK_THROWS_AS(catalog("bm", 2, {{"rate", 1.0}}), ConfigError);
}

TEST_CASE("symmetry and purity") {
  const auto f = expression(3,
                            {{"a11", "2 + sin(x1)"}, {"a21", "0.3*x2"}, {"a22", "3 + x3^2"},
                             {"a31", "0.1*x1*x3"}, {"a32", "cos(x2)/4"}, {"a33", "1 + normsq"}},
                            {"-x1", "x2 - x3", "exp(-normsq)"});
  std::mt19937_64 gen(3);
  for (int k = 0; k < 50; ++k) {
    const Point x = fpk::test::uniform_point(gen, 3, -2, 2);
    const Matrix a = f.diffusion(x);
    CHECK(a == a.transpose());
    const Matrix b = f.diffusion(x);
    CHECK(std::memcmp(a.data().data(), b.data().data(), 9 * sizeof(double)) == 0);
    const Point g1 = f.drift(x), g2 = f.drift(x);
    CHECK(std::memcmp(g1.data(), g2.data(), 3 * sizeof(double)) == 0);
  }
}

TEST_CASE("non-finite coefficients are domain errors") {
  const auto f = expression(2, {{"a11", "1/x1"}, {"a21", "0"}, {"a22", "1"}}, {"0", "0"});
  CHECK_THROWS_AS(f.diffusion(Point{0, 1}), DomainError);
}

TEST_CASE("ellipticity on balls") {
  const auto bm = catalog("bm");
  auto est = check_ellipticity(bm, Ball{{5, -2}, 3}, 200, 1);
  CHECK(est.passed);
  CHECK(est.lambda_min == doctest::Approx(1).epsilon(1e-15));
  CHECK(est.lambda_max == doctest::Approx(1).epsilon(1e-15));

  const auto diag = expression(2, {{"a11", "1"}, {"a21", "0"}, {"a22", "4"}}, {"0", "0"});
  est = check_ellipticity(diag, Ball{{0, 0}, 1}, 50, 1);
  CHECK(est.lambda_min == doctest::Approx(1).epsilon(1e-15));
  CHECK(est.lambda_max == doctest::Approx(4).epsilon(1e-15));

  // (1 + |x|^2) I on the unit ball: extremes 1 at the center, 2 on the boundary.
  const auto radial = expression(2, {{"a11", "1 + normsq"}, {"a21", "0"}, {"a22", "1 + normsq"}}, {"0", "0"});
  est = check_ellipticity(radial, Ball{{0, 0}, 1}, 10000, 9);
  // Closed form: 1 at the center, 2 on the boundary sphere.
  const double lo = 1.0, hi = 2.0;
  CHECK(est.lambda_min >= lo);
  CHECK(est.lambda_min <= lo + 1e-3);
  CHECK(est.lambda_max <= hi);
  CHECK(est.lambda_max >= hi - 1e-2);

  const auto degenerate = expression(2, {{"a11", "x1^2"}, {"a21", "0"}, {"a22", "1"}}, {"0", "0"});
  est = check_ellipticity(degenerate, Ball{{0, 0}, 1}, 10, 1);
  CHECK_FALSE(est.passed);
  CHECK_FALSE(est.message.empty());
  CHECK_THROWS_AS(check_ellipticity(bm, Ball{{0, 0}, 0}, 10, 1), PreconditionError);
  CHECK_THROWS_AS(check_ellipticity(bm, Ball{{0, 0}, 1}, 0, 1), PreconditionError);
}

TEST_CASE("generator on simple functions") {
  const auto f = expression(2, {{"a11", "1 + x2^2"}, {"a21", "x1"}, {"a22", "3"}}, {"sin(x1)", "x1*x2"});
  const Point x{0.4, -0.9};
  CHECK(apply_L(f, FirstCoordinate(2), x) == std::sin(0.4));

  const auto bm = catalog("bm", 4);
  std::mt19937_64 gen(11);
  for (int k = 0; k < 10; ++k) CHECK(apply_L(bm, HalfNormSq(4), fpk::test::uniform_point(gen, 4, -3, 3)) == 2.0);
}

TEST_CASE("bump generator against finite differences on ou") {
  const auto ou = catalog("ou");
  const Bump phi({0.5, -0.25}, 2.0);
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> rad(0.0, 1.5), ang(0.0, 2 * M_PI);
  for (int k = 0; k < 20; ++k) {
    const double r = rad(gen), th = ang(gen);
    const Point x{0.5 + r * std::cos(th), -0.25 + r * std::sin(th)};
    const double exact = apply_L(ou, phi, x);
    const double fd = fpk::test::fd_generator(ou, [&](const Point& y) { return phi.value(y); }, x, 1e-4);
    INFO("x = ", x[0], ",", x[1]);
    CHECK(fpk::test::rel_err(exact, fd, std::abs(exact) + 1e-3) <= 1e-6);
  }
}

TEST_CASE("generator is linear in f") {
  const auto ou = catalog("ou");
  const Bump p({0, 0}, 2.0), q({1, 0}, 1.5);
  const Point x{0.3, 0.2};
  Generator gen(ou);
  const double lp = gen.apply(p, x), lq = gen.apply(q, x);
  // Combine jets by hand and push them through the same generator.
  double vp, vq;
  std::vector<double> gp(2), gq(2), hp(4), hq(4), g(2), h(4);
  p.jet(x, vp, gp, hp);
  q.jet(x, vq, gq, hq);
  for (int i = 0; i < 2; ++i) g[i] = 2 * gp[i] - 3 * gq[i];
  for (int i = 0; i < 4; ++i) h[i] = 2 * hp[i] - 3 * hq[i];
  CHECK(gen.apply(x, g, h) == doctest::Approx(2 * lp - 3 * lq).epsilon(1e-14));
}
