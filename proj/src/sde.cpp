#include "fpk/sde.hpp"

#include <algorithm>
#include <cmath>

#include "fpk/errors.hpp"
#include "fpk/parallel.hpp"
#include "fpk/rng.hpp"

namespace fpk {

std::size_t EmpiricalMeasure::n_alive() const noexcept {
  std::size_t n = 0;
  for (auto a : alive_) n += a;
  return n;
}

double EmpiricalMeasure::alive_fraction() const noexcept {
  return n_paths() == 0 ? 0.0 : static_cast<double>(n_alive()) / static_cast<double>(n_paths());
}

EmpiricalMeasure EmpiricalMeasure::from_samples(double t, std::size_t dim, std::span<const double> rows) {
  if (dim == 0 || rows.size() % dim != 0) throw PreconditionError("from_samples: size is not a multiple of dim");
  EmpiricalMeasure m(t, dim, rows.size() / dim);
  std::copy(rows.begin(), rows.end(), m.positions_.begin());
  return m;
}

const EmpiricalMeasure& SimResult::at(double t) const {
  const double tol = 1e-9 * std::max(1.0, run.config.horizon);
  for (const auto& s : snapshots)
    if (std::abs(s.time() - t) <= tol) return s;
  throw PreconditionError("no snapshot at t = " + std::to_string(t));
}

ResolvedSim resolve_sim(const SimConfig& cfg, std::size_t dim) {
  if (cfg.x0.size() != dim)
    throw PreconditionError("x0 has dimension " + std::to_string(cfg.x0.size()) + ", field has " +
                            std::to_string(dim));
  for (double v : cfg.x0)
    if (!std::isfinite(v)) throw PreconditionError("x0 must be finite");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon)) throw PreconditionError("T must be positive");
  if (!(cfg.dt > 0.0)) throw PreconditionError("dt must be positive");
  if (cfg.dt > cfg.horizon) throw PreconditionError("dt must not exceed T");
  if (cfg.n_paths == 0) throw PreconditionError("n_paths must be at least 1");
  if (!(cfg.r_explode > 0.0)) throw PreconditionError("R_explode must be positive");
  if (norm(cfg.x0) > cfg.r_explode) throw PreconditionError("x0 lies outside the explosion radius");

  ResolvedSim r;
  r.config = cfg;
  const double ratio = cfg.horizon / cfg.dt;
  r.n_steps = static_cast<std::size_t>(std::ceil(ratio - 1e-9 * ratio));
  r.n_steps = std::max<std::size_t>(1, r.n_steps);
  r.dt = cfg.horizon / static_cast<double>(r.n_steps);
  r.dt_adjusted = r.dt != cfg.dt;

  if (r.config.snapshot_times.empty()) {
    for (int k = 0; k <= 20; ++k) r.config.snapshot_times.push_back(cfg.horizon * k / 20.0);
  }
  const double tol = 1e-9 * cfg.horizon;
  for (double& t : r.config.snapshot_times) {
    if (!(t >= -tol && t <= cfg.horizon + tol))
      throw PreconditionError("snapshot time " + std::to_string(t) + " lies outside [0, T]");
    const auto step = static_cast<std::size_t>(std::llround(std::clamp(t, 0.0, cfg.horizon) / r.dt));
    if (!r.snapshot_steps.empty() && step <= r.snapshot_steps.back())
      throw PreconditionError("snapshot times must be strictly increasing on the step grid");
    r.snapshot_steps.push_back(step);
    t = static_cast<double>(step) * r.dt;
  }
  return r;
}

namespace {

struct PathKernel {
  const CoefficientField& field;
  const SigmaField& sigma;
  std::size_t d;
  std::vector<double> g, s, scratch, z, next;

  PathKernel(const CoefficientField& f, const SigmaField& sg)
      : field(f), sigma(sg), d(f.dim()), g(d), s(d * d), scratch(d * d), z(d), next(d) {}

  // One Euler-Maruyama step with Brownian increment dw (already scaled). Returns false on exit.
  bool step(std::span<double> x, std::span<const double> dw, double dt, double r_explode) {
    field.drift(x, g);
    sigma.evaluate(x, s, scratch);
    double r2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double noise = 0.0;
      for (std::size_t j = 0; j <= i; ++j) noise += s[i * d + j] * dw[j];
      next[i] = x[i] + g[i] * dt + noise;
      r2 += next[i] * next[i];
    }
    if (!std::isfinite(r2) || std::sqrt(r2) > r_explode) return false;
    std::copy(next.begin(), next.end(), x.begin());
    return true;
  }

  // Same step on the displacement y = x - x0. Dyadic increments then add exactly whatever x0 is.
  bool step_from(std::span<const double> x0, std::span<double> y, std::span<const double> dw, double dt,
                 double r_explode) {
    for (std::size_t i = 0; i < d; ++i) z[i] = x0[i] + y[i];
    field.drift(z, g);
    sigma.evaluate(z, s, scratch);
    double r2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      double noise = 0.0;
      for (std::size_t j = 0; j <= i; ++j) noise += s[i * d + j] * dw[j];
      next[i] = y[i] + (g[i] * dt + noise);
      const double xi = x0[i] + next[i];
      r2 += xi * xi;
    }
    if (!std::isfinite(r2) || std::sqrt(r2) > r_explode) return false;
    std::copy(next.begin(), next.end(), y.begin());
    return true;
  }
};

}  // namespace

SimResult euler_maruyama(const CoefficientField& field, const SigmaField& sigma, const SimConfig& cfg,
                         std::size_t threads) {
  const std::size_t d = field.dim();
  if (sigma.dim() != d) throw PreconditionError("sigma field dimension mismatch");
  SimResult out;
  out.run = resolve_sim(cfg, d);
  const ResolvedSim& run = out.run;
  for (double t : run.config.snapshot_times) out.snapshots.emplace_back(t, d, run.config.n_paths);

  const rng::NormalStream stream(run.config.seed);
  const double dt = run.dt;
  const double sqrt_dt = std::sqrt(dt);
  const double r_explode = run.config.r_explode;

  parallel_for(run.config.n_paths, thread_count(threads), [&](std::size_t begin, std::size_t end) {
    PathKernel kernel(field, sigma);
    std::vector<double> x(d), dw(d);
    for (std::size_t p = begin; p < end; ++p) {
      std::copy(run.config.x0.begin(), run.config.x0.end(), x.begin());
      bool alive = true;
      std::size_t snap = 0;
      auto record = [&] {
        auto& m = out.snapshots[snap];
        std::copy(x.begin(), x.end(), m.position(p).begin());
        m.set_alive(p, alive);
        ++snap;
      };
      while (snap < run.snapshot_steps.size() && run.snapshot_steps[snap] == 0) record();
      for (std::size_t n = 0; n < run.n_steps && snap < run.snapshot_steps.size(); ++n) {
        if (alive) {
          stream.normals(p, n, dw);
          for (double& w : dw) w *= sqrt_dt;
          alive = kernel.step(x, dw, dt, r_explode);
        }
        while (snap < run.snapshot_steps.size() && run.snapshot_steps[snap] == n + 1) record();
      }
    }
  });
  return out;
}

SimResult euler_maruyama(const CoefficientField& field, const SimConfig& cfg, std::size_t threads) {
  const SigmaField sigma = cholesky_field(field);
  return euler_maruyama(field, sigma, cfg, threads);
}

RefinementTable refine_shared_noise(const CoefficientField& field, const SigmaField& sigma,
                                    const SimConfig& cfg, std::size_t n_levels, std::size_t threads) {
  if (n_levels < 2) throw PreconditionError("refine_shared_noise: need at least 2 levels");
  if (n_levels > 20) throw PreconditionError("refine_shared_noise: at most 20 levels");
  const std::size_t d = field.dim();
  SimConfig base = cfg;
  base.snapshot_times = {cfg.horizon};
  const ResolvedSim run = resolve_sim(base, d);
  const std::size_t n_paths = run.config.n_paths;
  const std::size_t fine_per_coarse = std::size_t{1} << (n_levels - 1);
  const std::size_t fine_steps = run.n_steps * fine_per_coarse;
  const double dt_fine = run.dt / static_cast<double>(fine_per_coarse);
  const double sqrt_fine = std::sqrt(dt_fine);
  const rng::NormalStream stream(run.config.seed);

  // terminal[l * n_paths + p], alive flags likewise
  std::vector<double> terminal(n_levels * n_paths * d);
  std::vector<std::uint8_t> alive_at_end(n_levels * n_paths);

  parallel_for(n_paths, thread_count(threads), [&](std::size_t begin, std::size_t end) {
    PathKernel kernel(field, sigma);
    std::vector<double> x(n_levels * d), acc(n_levels * d), w(d);  // x holds displacements from x0
    std::vector<std::uint8_t> alive(n_levels);
    for (std::size_t p = begin; p < end; ++p) {
      std::fill(x.begin(), x.end(), 0.0);
      std::fill(acc.begin(), acc.end(), 0.0);
      std::fill(alive.begin(), alive.end(), 1);
      for (std::size_t k = 0; k < fine_steps; ++k) {
        stream.normals(p, k, w);
        for (double& v : w) v = std::ldexp(std::nearbyint(std::ldexp(v * sqrt_fine, 40)), -40);
        for (std::size_t l = 0; l < n_levels; ++l) {
          double* a = acc.data() + l * d;
          for (std::size_t i = 0; i < d; ++i) a[i] += w[i];
          const std::size_t stride = std::size_t{1} << (n_levels - 1 - l);
          if ((k + 1) % stride == 0) {
            if (alive[l]) {
              const double dt_l = dt_fine * static_cast<double>(stride);
              alive[l] = kernel.step_from(run.config.x0, {x.data() + l * d, d}, {a, d}, dt_l, run.config.r_explode);
            }
            std::fill(a, a + d, 0.0);
          }
        }
      }
      for (std::size_t l = 0; l < n_levels; ++l) {
        for (std::size_t i = 0; i < d; ++i) terminal[(l * n_paths + p) * d + i] = run.config.x0[i] + x[l * d + i];
        alive_at_end[l * n_paths + p] = alive[l];
      }
    }
  });

  RefinementTable table;
  for (std::size_t l = 0; l < n_levels; ++l) {
    RefinementLevel lev;
    lev.level = l;
    lev.dt = run.dt / static_cast<double>(std::size_t{1} << l);
    lev.n_steps = run.n_steps << l;
    std::size_t dead = 0;
    for (std::size_t p = 0; p < n_paths; ++p) dead += alive_at_end[l * n_paths + p] ? 0 : 1;
    lev.dead_fraction = static_cast<double>(dead) / static_cast<double>(n_paths);
    table.levels.push_back(lev);
  }
  for (std::size_t l = 0; l + 1 < n_levels; ++l) {
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t p = 0; p < n_paths; ++p) {
      if (!alive_at_end[l * n_paths + p] || !alive_at_end[(l + 1) * n_paths + p]) continue;
      const double* a = terminal.data() + (l * n_paths + p) * d;
      const double* b = terminal.data() + ((l + 1) * n_paths + p) * d;
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
      sum += std::sqrt(s);
      ++count;
    }
    table.strong_error.push_back(count ? sum / static_cast<double>(count) : 0.0);
    table.n_compared.push_back(count);
  }
  return table;
}

double mass_in_ball(const EmpiricalMeasure& m, double radius) {
  if (!(radius > 0.0)) throw PreconditionError("mass_in_ball: radius must be positive");
  if (m.n_paths() == 0) return 0.0;
  std::size_t inside = 0;
  for (std::size_t p = 0; p < m.n_paths(); ++p)
    if (m.alive(p) && norm(m.position(p)) <= radius) ++inside;
  return static_cast<double>(inside) / static_cast<double>(m.n_paths());
}

}  // namespace fpk
