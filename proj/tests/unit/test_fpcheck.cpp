#include <cmath>

#include "doctest.h"
#include "fpk/errors.hpp"
#include "fpk/fpcheck.hpp"
#include "fpk/measure.hpp"
#include "fpk/sde.hpp"
#include "support.hpp"

using namespace fpk;
using fpk::test::catalog;

namespace {

SimConfig sim(Point x0, double t, double dt, std::size_t n, std::uint64_t seed = 1) {
  SimConfig c;
  c.x0 = std::move(x0);
  c.horizon = t;
  c.dt = dt;
  c.n_paths = n;
  c.seed = seed;
  return c;
}

const SimResult& bm_from_origin() {
  static const SimResult r = euler_maruyama(catalog("bm"), sim({0, 0}, 1, 1e-3, 100000, 21));
  return r;
}

}  // namespace

TEST_CASE("residual at t = 0 is exactly zero") {
  for (const char* name : {"bm", "ou", "dim2_demo", "cubic_blowup"}) {
    const auto f = catalog(name);
    const auto res = euler_maruyama(f, sim({0.5, 0.2}, 1, 1e-2, 200));
    for (const auto& phi : default_bank(2, 1.0)) {
      const auto r = fp_residual(f, res, phi, 0.0);
      CHECK(r.estimate == 0.0);
      CHECK(r.std_error == 0.0);
      CHECK(r.passed);
    }
  }
}

TEST_CASE("residual requirements") {
  const auto ou = catalog("ou");
  auto cfg = sim({1, 0}, 1, 1e-2, 100);
  cfg.snapshot_times = {0, 0.25, 0.5, 0.75, 1};
  const auto coarse = euler_maruyama(ou, cfg);
  CHECK_THROWS_AS(fp_residual(ou, coarse, Bump({0, 0}, 2), 1.0), PreconditionError);
  const auto fine = euler_maruyama(ou, sim({1, 0}, 1, 1e-2, 100));
  CHECK_THROWS_AS(fp_residual(ou, fine, Bump({0, 0}, 2), 0.33), PreconditionError);
  CHECK_THROWS_AS(fp_residual(ou, fine, Bump({0, 0, 0}, 2), 1.0), PreconditionError);
}

TEST_CASE("test function far from the reachable region") {
  const auto ou = catalog("ou");
  auto cfg = sim({1, 0}, 0.1, 1e-3, 20000, 4);
  const auto res = euler_maruyama(ou, cfg);
  const Bump far({21, 0}, 1);
  CHECK(integrate(res.at(0.1), far).value == 0.0);
  const auto r = fp_residual(ou, res, far, 0.1);
  CHECK(r.estimate == 0.0);
  CHECK(r.passed);
}

TEST_CASE("weak identity on Brownian motion from the origin") {
  const auto& res = bm_from_origin();
  const auto r = fp_residual(catalog("bm"), res, Bump({0, 0}, 2), 1.0);
  INFO("R = ", r.estimate, " se = ", r.std_error);
  CHECK(r.passed);
  CHECK(std::abs(r.estimate) <= 0.01);
  CHECK(r.n_nodes == 21);
  REQUIRE(r.snapshot_std_error.has_value());
}

TEST_CASE("weak identity on ou from (1, 0)") {
  const auto ou = catalog("ou");
  const auto res = euler_maruyama(ou, sim({1, 0}, 1, 1e-3, 30000, 22));
  for (const auto& phi : default_bank(2, 2.0)) {
    const auto r = fp_residual(ou, res, phi, 1.0);
    INFO("phi center ", phi.center()[0], ",", phi.center()[1], " r ", phi.radius(), ": R = ", r.estimate);
    CHECK(r.passed);
  }
}

TEST_CASE("residual does not grow as dt shrinks") {
  for (const char* name : {"ou", "bm"}) {
    const auto f = catalog(name);
    const Bump phi({0, 0}, 2);
    const auto coarse = fp_residual(f, euler_maruyama(f, sim({1, 0}, 1, 2e-2, 40000, 31)), phi, 1.0);
    const auto fine = fp_residual(f, euler_maruyama(f, sim({1, 0}, 1, 1e-2, 40000, 31)), phi, 1.0);
    const double se = std::hypot(coarse.std_error, fine.std_error);
    INFO(name, ": coarse ", coarse.estimate, " fine ", fine.estimate, " se ", se);
    CHECK(std::abs(fine.estimate) <= std::abs(coarse.estimate) + 3 * se);
  }
}

TEST_CASE("martingale residual") {
  const auto bm = catalog("bm");
  const auto& res = bm_from_origin();
  const Bump f({0, 0}, 2);
  const auto zero = martingale_residual(bm, res, f, 0.25, 1.0, [](std::span<const double>) { return 0.0; });
  CHECK(zero.estimate == 0.0);
  CHECK(zero.passed);

  const Bump h({0, 0}, 1);
  const auto r = martingale_residual(bm, res, f, 0.25, 1.0, [&](std::span<const double> x) { return h.value(x); });
  INFO("R = ", r.estimate, " se = ", r.std_error);
  CHECK(r.passed);
  REQUIRE(r.s.has_value());
  CHECK(*r.s == 0.25);

  CHECK_THROWS_AS(martingale_residual(bm, res, f, 1.0, 0.25, [](std::span<const double>) { return 1.0; }),
                  PreconditionError);
  CHECK_THROWS_AS(martingale_residual(bm, res, f, 0.9, 1.0, [](std::span<const double>) { return 1.0; }),
                  PreconditionError);

  const auto bank = martingale_weight_bank(res.at(0.25));
  CHECK(bank.size() == 3);
  for (const auto& b : bank) CHECK(b.radius() >= 0.1);
}

TEST_CASE("uniqueness comparison basics") {
  const auto ou = catalog("ou");
  const auto cfg = sim({1, 0}, 1, 1e-2, 3000, 5);
  const auto bank = default_bank(2, 1.0);
  const auto same = uniqueness_compare(ou, cfg, cfg, bank, {0.25, 0.5, 1.0});
  CHECK(same.passed);
  for (const auto& t : same.times) {
    for (const auto& b : t.bank) CHECK(b.delta == 0.0);
    for (double k : t.ks) CHECK(k == 0.0);
  }

  auto other = cfg;
  other.seed = 6;
  other.dt = 5e-3;
  const auto ab = uniqueness_compare(ou, cfg, other, bank, {0.5, 1.0});
  const auto ba = uniqueness_compare(ou, other, cfg, bank, {0.5, 1.0});
  for (std::size_t k = 0; k < ab.times.size(); ++k) {
    for (std::size_t j = 0; j < bank.size(); ++j) {
      CHECK(ab.times[k].bank[j].delta == -ba.times[k].bank[j].delta);
      CHECK(ab.times[k].bank[j].std_error == ba.times[k].bank[j].std_error);
    }
    CHECK(ab.times[k].ks == ba.times[k].ks);
  }
  CHECK(ab.passed == ba.passed);

  auto moved = cfg;
  moved.x0 = {0, 1};
  CHECK_THROWS_AS(uniqueness_compare(ou, cfg, moved, bank, {1.0}), PreconditionError);
}

TEST_CASE("mismatched laws are rejected") {
  const auto ou = catalog("ou");
  const auto bm = catalog("bm");
  const auto a = euler_maruyama(ou, sim({1, 0}, 1, 1e-3, 20000, 1));
  const auto b = euler_maruyama(bm, sim({1, 0}, 1, 1e-3, 20000, 2));
  const auto cmp = compare_marginals(a.at(1.0), b.at(1.0), default_bank(2, 2.0), 1e-3 * kDiscretizationC);
  CHECK_FALSE(cmp.passed);
  CHECK(cmp.ks[0] >= 0.15);
}

TEST_CASE("ergodic behaviour on ou") {
  const auto ou = catalog("ou");
  const auto bank = default_bank(2, 1.0);
  const std::vector<BallSpec> unit{{{0, 0}, 1}};
  const auto a = ergodic_check(ou, sim({3, 3}, 10, 1e-2, 5000, 7), bank, unit);
  const auto b = ergodic_check(ou, sim({-3, 0}, 10, 1e-2, 5000, 8), bank, unit);
  CHECK_FALSE(a.invariance_advisory.has_value());
  CHECK(a.stationarity_passed);
  CHECK(a.converged_all);
  // EM with dt = 1e-2 has stationary variance 2 / (2 - dt); mass of B_1 under that law.
  const double mass = 1 - std::exp(-1 / (2 * 2 / (2 - 1e-2)));
  CHECK(std::abs(a.limit_mass[0].value - mass) <= 3 * a.limit_mass[0].std_error);
  CHECK(compare_stationary(a, b).passed);
  CHECK(a.window_times.front() >= 8.0 - 1e-9);
}

TEST_CASE("Brownian motion has no invariant probability") {
  const auto bm = catalog("bm");
  CHECK(invariance_advisory(bm).has_value());
  const auto r = ergodic_check(bm, sim({0, 0}, 10, 1e-2, 100000, 9), default_bank(2, 1.0), {{{0, 0}, 1}});
  CHECK(r.invariance_advisory.has_value());
  // The mass of B_1 decays like 1 - exp(-1/(2t)) and keeps drifting inside the window.
  CHECK_FALSE(r.converged[0]);
  CHECK_FALSE(r.passed);
  for (std::size_t k = 1; k + 1 < r.times.size(); ++k) CHECK(r.masses[k + 1][0] <= r.masses[k][0] + 0.01);
}
