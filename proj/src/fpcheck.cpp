#include "fpk/fpcheck.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/errors.hpp"

namespace fpk {

namespace {

constexpr double kTimeTol = 1e-9;

bool same_time(double a, double b, double horizon) { return std::abs(a - b) <= kTimeTol * std::max(1.0, horizon); }

// Snapshots with time in [lo, hi], in order; throws unless both endpoints are present.
std::vector<const EmpiricalMeasure*> nodes_between(const SimResult& sim, double lo, double hi) {
  const double horizon = sim.run.config.horizon;
  std::vector<const EmpiricalMeasure*> out;
  for (const auto& m : sim.snapshots) {
    if (m.time() < lo && !same_time(m.time(), lo, horizon)) continue;
    if (m.time() > hi && !same_time(m.time(), hi, horizon)) continue;
    out.push_back(&m);
  }
  if (out.empty() || !same_time(out.front()->time(), lo, horizon))
    throw PreconditionError("no snapshot at t = " + std::to_string(lo));
  if (!same_time(out.back()->time(), hi, horizon))
    throw PreconditionError("no snapshot at t = " + std::to_string(hi));
  return out;
}

std::vector<double> trapezoid_weights(const std::vector<const EmpiricalMeasure*>& nodes) {
  std::vector<double> w(nodes.size(), 0.0);
  for (std::size_t k = 0; k + 1 < nodes.size(); ++k) {
    const double h = nodes[k + 1]->time() - nodes[k]->time();
    w[k] += 0.5 * h;
    w[k + 1] += 0.5 * h;
  }
  return w;
}

// Per-path values, 0 on dead paths.
template <class Fn>
std::vector<double> per_path(const EmpiricalMeasure& m, Fn&& fn) {
  std::vector<double> v(m.n_paths(), 0.0);
  for (std::size_t p = 0; p < m.n_paths(); ++p) {
    if (!m.alive(p)) continue;
    v[p] = fn(m.position(p));
    if (!std::isfinite(v[p])) throw DomainError("integrand is not finite on an alive path");
  }
  return v;
}

// Same convention as integrate(): alive mean times alive fraction.
Estimate sub_probability(const EmpiricalMeasure& m, const std::vector<double>& v) {
  const std::size_t n_alive = m.n_alive();
  if (n_alive == 0) throw PreconditionError("no alive paths at t = " + std::to_string(m.time()));
  double sum = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p)
    if (m.alive(p)) sum += v[p];
  const double mean = sum / static_cast<double>(n_alive);
  double ss = 0.0;
  for (std::size_t p = 0; p < v.size(); ++p)
    if (m.alive(p)) ss += (v[p] - mean) * (v[p] - mean);
  const double frac = m.alive_fraction();
  Estimate e{mean * frac, 0.0};
  if (n_alive > 1) e.std_error = frac * std::sqrt(ss / static_cast<double>(n_alive - 1)) / std::sqrt(static_cast<double>(n_alive));
  return e;
}

// Plain mean over all entries with its standard error.
Estimate sample_mean(const std::vector<double>& v) {
  const double n = static_cast<double>(v.size());
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / n;
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  Estimate e{mean, 0.0};
  if (v.size() > 1) e.std_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  return e;
}

double sim_dt(const SimResult& sim) { return sim.run.dt; }

}  // namespace

bool ResidualReport::verdict() const noexcept { return std::abs(estimate) <= 3.0 * std_error + allowance; }

ResidualReport fp_residual(const CoefficientField& field, const SimResult& sim, const Bump& phi, double t,
                           double c) {
  if (phi.dim() != field.dim()) throw PreconditionError("fp_residual: test function dimension mismatch");
  ResidualReport rep;
  rep.test_id = "fp";
  rep.t = t;
  rep.c = c;
  rep.dt = sim_dt(sim);
  rep.allowance = c * rep.dt;
  if (t == 0.0) {
    rep.n_nodes = 1;
    rep.snapshot_std_error = 0.0;
    rep.max_increment = 0.0;
    rep.passed = rep.verdict();
    return rep;
  }
  if (!(t > 0.0)) throw PreconditionError("fp_residual: t must be >= 0");
  const auto nodes = nodes_between(sim, 0.0, t);
  if (nodes.size() < 9)
    throw PreconditionError("fp_residual: need at least 9 snapshot nodes on [0, t], have " +
                            std::to_string(nodes.size()));
  const auto w = trapezoid_weights(nodes);
  const std::size_t n = sim.run.config.n_paths;

  Generator gen(field);
  double integral = 0.0, integral_var = 0.0;
  std::vector<double> pathwise(n, 0.0);
  double prev_phi = 0.0, max_inc = 0.0;
  Estimate phi_t;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const auto lphi = per_path(*nodes[k], [&](std::span<const double> y) { return gen.apply(phi, y); });
    const Estimate e = sub_probability(*nodes[k], lphi);
    integral += w[k] * e.value;
    integral_var += w[k] * w[k] * e.std_error * e.std_error;
    for (std::size_t p = 0; p < n; ++p) pathwise[p] -= w[k] * lphi[p];

    const auto phis = per_path(*nodes[k], [&](std::span<const double> y) { return phi.value(y); });
    const Estimate ep = sub_probability(*nodes[k], phis);
    if (k > 0) max_inc = std::max(max_inc, std::abs(ep.value - prev_phi));
    prev_phi = ep.value;
    if (k + 1 == nodes.size()) {
      phi_t = ep;
      for (std::size_t p = 0; p < n; ++p) pathwise[p] += phis[p];
    }
  }
  const double phi0 = phi.value(sim.run.config.x0);
  for (double& v : pathwise) v -= phi0;

  rep.estimate = phi_t.value - phi0 - integral;
  rep.std_error = sample_mean(pathwise).std_error;
  rep.snapshot_std_error = std::sqrt(phi_t.std_error * phi_t.std_error + integral_var);
  rep.n_nodes = nodes.size();
  rep.max_increment = max_inc;
  rep.passed = rep.verdict();
  return rep;
}

ResidualReport martingale_residual(const CoefficientField& field, const SimResult& sim, const SmoothFunction& f,
                                   double s, double t, const WeightFn& h, double c) {
  if (!(s < t)) throw PreconditionError("martingale_residual: need s < t");
  if (s < 0.0) throw PreconditionError("martingale_residual: s must be >= 0");
  if (f.dim() != field.dim()) throw PreconditionError("martingale_residual: test function dimension mismatch");
  const auto nodes = nodes_between(sim, s, t);
  if (nodes.size() < 5)
    throw PreconditionError("martingale_residual: need at least 5 snapshot nodes on [s, t], have " +
                            std::to_string(nodes.size()));
  const auto w = trapezoid_weights(nodes);
  const std::size_t n = sim.run.config.n_paths;
  const EmpiricalMeasure& at_s = *nodes.front();
  const EmpiricalMeasure& at_t = *nodes.back();

  Generator gen(field);
  std::vector<double> incr(n, 0.0);
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    const EmpiricalMeasure& m = *nodes[k];
    for (std::size_t p = 0; p < n; ++p) {
      if (!at_t.alive(p)) continue;
      incr[p] -= w[k] * gen.apply(f, m.position(p));
    }
  }
  std::vector<double> v(n, 0.0);
  for (std::size_t p = 0; p < n; ++p) {
    if (!at_t.alive(p)) continue;
    const double weight = h(at_s.position(p));
    if (!std::isfinite(weight)) throw DomainError("martingale_residual: weight is not finite");
    v[p] = weight * (f.value(at_t.position(p)) - f.value(at_s.position(p)) + incr[p]);
  }
  const Estimate e = sample_mean(v);
  ResidualReport rep;
  rep.test_id = "martingale";
  rep.t = t;
  rep.s = s;
  rep.estimate = e.value;
  rep.std_error = e.std_error;
  rep.c = c;
  rep.dt = sim_dt(sim);
  rep.allowance = c * rep.dt;
  rep.n_nodes = nodes.size();
  rep.passed = rep.verdict();
  return rep;
}

std::vector<Bump> martingale_weight_bank(const EmpiricalMeasure& at_s) {
  const std::size_t d = at_s.dim();
  if (at_s.n_alive() == 0) throw PreconditionError("martingale_weight_bank: no alive paths");
  std::vector<Point> q(3, Point(d));
  double iqr = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    std::vector<double> col;
    col.reserve(at_s.n_alive());
    for (std::size_t p = 0; p < at_s.n_paths(); ++p)
      if (at_s.alive(p)) col.push_back(at_s.position(p)[i]);
    std::sort(col.begin(), col.end());
    auto quantile = [&](double a) {
      return col[static_cast<std::size_t>(std::llround(a * static_cast<double>(col.size() - 1)))];
    };
    q[0][i] = quantile(0.25);
    q[1][i] = quantile(0.5);
    q[2][i] = quantile(0.75);
    iqr += q[2][i] - q[0][i];
  }
  const double radius = std::max(0.1, 2.0 * iqr / static_cast<double>(d));
  std::vector<Bump> bank;
  for (auto& center : q) bank.emplace_back(std::move(center), radius);
  return bank;
}

MarginalComparison compare_marginals(const EmpiricalMeasure& a, const EmpiricalMeasure& b,
                                     const std::vector<Bump>& bank, double allowance, double ks_threshold) {
  if (a.dim() != b.dim()) throw PreconditionError("compare_marginals: dimension mismatch");
  MarginalComparison out;
  out.t = a.time();
  out.allowance = allowance;
  out.ks_threshold = ks_threshold;
  out.bank_passed = true;
  for (const auto& phi : bank) {
    const Estimate ea = integrate(a, phi);
    const Estimate eb = integrate(b, phi);
    BankDelta bd;
    bd.delta = ea.value - eb.value;
    bd.std_error = std::hypot(ea.std_error, eb.std_error);
    bd.passed = std::abs(bd.delta) <= 3.0 * bd.std_error + allowance;
    out.bank_passed = out.bank_passed && bd.passed;
    out.max_abs_delta = std::max(out.max_abs_delta, std::abs(bd.delta));
    out.bank.push_back(bd);
  }
  out.ks_passed = true;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    out.ks.push_back(ks_distance(a, b, i));
    out.ks_passed = out.ks_passed && out.ks.back() <= ks_threshold;
  }
  out.passed = out.bank_passed && out.ks_passed;
  return out;
}

namespace {

SimConfig with_times(SimConfig cfg, const std::vector<double>& t_list) {
  std::vector<double> times = cfg.snapshot_times;
  times.insert(times.end(), t_list.begin(), t_list.end());
  std::sort(times.begin(), times.end());
  std::vector<double> unique;
  for (double t : times)
    if (unique.empty() || !same_time(unique.back(), t, cfg.horizon)) unique.push_back(t);
  cfg.snapshot_times = unique;
  return cfg;
}

}  // namespace

UniquenessReport uniqueness_compare(const SimResult& a, const SimResult& b, const std::vector<Bump>& bank,
                                    const std::vector<double>& t_list, double c, double ks_threshold) {
  if (a.run.config.x0 != b.run.config.x0)
    throw PreconditionError("uniqueness_compare: runs start from different x0");
  if (a.run.config.horizon != b.run.config.horizon)
    throw PreconditionError("uniqueness_compare: runs have different horizons");
  if (t_list.empty()) throw PreconditionError("uniqueness_compare: empty time list");
  UniquenessReport rep;
  rep.dt_a = a.run.dt;
  rep.dt_b = b.run.dt;
  rep.c = c;
  rep.passed = true;
  const double allowance = c * std::max(rep.dt_a, rep.dt_b);
  for (double t : t_list) {
    rep.times.push_back(compare_marginals(a.at(t), b.at(t), bank, allowance, ks_threshold));
    rep.passed = rep.passed && rep.times.back().passed;
  }
  return rep;
}

UniquenessReport uniqueness_compare(const CoefficientField& field, const SimConfig& a, const SimConfig& b,
                                    const std::vector<Bump>& bank, const std::vector<double>& t_list, double c,
                                    double ks_threshold, std::size_t threads) {
  if (a.x0 != b.x0) throw PreconditionError("uniqueness_compare: configs start from different x0");
  if (a.horizon != b.horizon) throw PreconditionError("uniqueness_compare: configs have different T");
  const SimResult ra = euler_maruyama(field, with_times(a, t_list), threads);
  const SimResult rb = euler_maruyama(field, with_times(b, t_list), threads);
  return uniqueness_compare(ra, rb, bank, t_list, c, ks_threshold);
}

std::optional<std::string> invariance_advisory(const CoefficientField& field) {
  GridSpec grid;
  grid.n0 = 4.0;
  grid.r_max = 100.0;
  constexpr double m = 1e-6;
  const bool v1 = check_invariant_sprin(field, 1, m, grid).passed;
  const bool v2 = check_invariant_sprin(field, 2, m, grid).passed;
  if (v1 || v2) return std::nullopt;
  return "neither invariant-measure growth condition holds on the grid (M = 1e-6, N0 = 4, R_max = 100); "
         "a finite invariant measure is not indicated";
}

namespace {

bool in_ball(std::span<const double> x, const BallSpec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += (x[i] - b.center[i]) * (x[i] - b.center[i]);
  return std::sqrt(s) <= b.radius;
}

double ball_mass(const EmpiricalMeasure& m, const BallSpec& b) {
  std::size_t inside = 0;
  for (std::size_t p = 0; p < m.n_paths(); ++p)
    if (m.alive(p) && in_ball(m.position(p), b)) ++inside;
  return static_cast<double>(inside) / static_cast<double>(m.n_paths());
}

}  // namespace

ErgodicReport ergodic_check(const CoefficientField& field, const SimResult& sim, const std::vector<Bump>& bank,
                            const std::vector<BallSpec>& balls, double window, double c) {
  if (!(window > 0.0 && window <= 1.0)) throw PreconditionError("ergodic_check: window must lie in (0, 1]");
  const std::size_t d = field.dim();
  for (const auto& b : balls) {
    if (b.center.size() != d) throw PreconditionError("ergodic_check: ball center dimension mismatch");
    if (!(b.radius > 0.0)) throw PreconditionError("ergodic_check: ball radius must be positive");
  }
  const double horizon = sim.run.config.horizon;
  const std::size_t n = sim.run.config.n_paths;
  ErgodicReport rep;
  rep.balls = balls;
  rep.window = window;
  rep.c = c;
  rep.dt = sim.run.dt;
  rep.allowance = c * rep.dt;

  std::vector<const EmpiricalMeasure*> win;
  const double start = horizon * (1.0 - window);
  for (const auto& m : sim.snapshots) {
    rep.times.push_back(m.time());
    std::vector<double> bi, ms;
    for (const auto& phi : bank) bi.push_back(m.n_alive() ? integrate(m, phi).value : 0.0);
    for (const auto& b : balls) ms.push_back(ball_mass(m, b));
    rep.bank_integrals.push_back(std::move(bi));
    rep.masses.push_back(std::move(ms));
    if (m.time() >= start || same_time(m.time(), start, horizon)) win.push_back(&m);
  }
  if (win.empty()) throw PreconditionError("ergodic_check: no snapshot in the tail window");
  for (const auto* m : win) rep.window_times.push_back(m->time());
  const EmpiricalMeasure& last = *win.back();
  if (last.n_alive() == 0) throw PreconditionError("ergodic_check: every path is dead");
  rep.alive_fraction = last.alive_fraction();

  const double inv_w = 1.0 / static_cast<double>(win.size());
  Generator gen(field);
  rep.stationarity_passed = true;
  for (const auto& phi : bank) {
    std::vector<double> v(n, 0.0), lv(n, 0.0);
    for (const auto* m : win)
      for (std::size_t p = 0; p < n; ++p) {
        if (!m->alive(p)) continue;
        v[p] += inv_w * phi.value(m->position(p));
        lv[p] += inv_w * gen.apply(phi, m->position(p));
      }
    rep.limit_bank.push_back(sample_mean(v));
    rep.stationarity.push_back(sample_mean(lv));
    const Estimate& s = rep.stationarity.back();
    rep.stationarity_passed = rep.stationarity_passed && std::abs(s.value) <= 3.0 * s.std_error + rep.allowance;
  }

  const std::size_t half = win.size() / 2;
  rep.converged_all = true;
  for (const auto& b : balls) {
    std::vector<double> v(n, 0.0), drift(n, 0.0);
    for (std::size_t k = 0; k < win.size(); ++k)
      for (std::size_t p = 0; p < n; ++p) {
        if (!win[k]->alive(p) || !in_ball(win[k]->position(p), b)) continue;
        v[p] += inv_w;
        if (half > 0 && k < half) drift[p] += 1.0 / static_cast<double>(half);
        if (half > 0 && k >= win.size() - half) drift[p] -= 1.0 / static_cast<double>(half);
      }
    rep.limit_mass.push_back(sample_mean(v));
    const Estimate dr = half > 0 ? sample_mean(drift) : Estimate{};
    rep.window_drift.push_back(dr);
    const bool stable = half == 0 || std::abs(dr.value) <= 3.0 * dr.std_error;
    rep.converged.push_back(stable);
    rep.converged_all = rep.converged_all && stable;
  }
  for (const auto& ms : rep.masses) {
    std::vector<double> row;
    for (std::size_t j = 0; j < balls.size(); ++j) row.push_back(ms[j] - rep.limit_mass[j].value);
    rep.deltas.push_back(std::move(row));
  }
  rep.passed = rep.stationarity_passed && rep.converged_all;
  return rep;
}

ErgodicReport ergodic_check(const CoefficientField& field, const SimConfig& cfg, const std::vector<Bump>& bank,
                            const std::vector<BallSpec>& balls, double window, double c, std::size_t threads) {
  const SimResult sim = euler_maruyama(field, cfg, threads);
  ErgodicReport rep = ergodic_check(field, sim, bank, balls, window, c);
  rep.invariance_advisory = invariance_advisory(field);
  return rep;
}

StationaryComparison compare_stationary(const ErgodicReport& a, const ErgodicReport& b) {
  if (a.limit_bank.size() != b.limit_bank.size())
    throw PreconditionError("compare_stationary: banks differ in size");
  StationaryComparison out;
  out.passed = true;
  for (std::size_t k = 0; k < a.limit_bank.size(); ++k) {
    BankDelta bd;
    bd.delta = a.limit_bank[k].value - b.limit_bank[k].value;
    bd.std_error = std::hypot(a.limit_bank[k].std_error, b.limit_bank[k].std_error);
    bd.passed = std::abs(bd.delta) <= 3.0 * bd.std_error;
    out.passed = out.passed && bd.passed;
    out.bank.push_back(bd);
  }
  return out;
}

}  // namespace fpk
