#include "fpk/lyapunov.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "fpk/chol.hpp"
#include "fpk/errors.hpp"
#include "fpk/qmc.hpp"

namespace fpk {

LyapunovFn::LyapunovFn(LyapunovKind kind, std::size_t dim, double n0) : kind_(kind), dim_(dim), n0_(n0) {
  if (!(n0 > 0.0)) throw PreconditionError("LyapunovFn: N0 must be positive");
}

std::string LyapunovFn::tag() const {
  switch (kind_) {
    case LyapunovKind::log1p: return "V_log1p";
    case LyapunovKind::log_outer: return "g_log_outer";
    case LyapunovKind::half_log_outer: return "g_half_log_outer";
    case LyapunovKind::quadratic: return "g_quad";
  }
  return "?";
}

LyapunovKind parse_lyapunov_kind(const std::string& tag) {
  if (tag == "V_log1p") return LyapunovKind::log1p;
  if (tag == "g_log_outer") return LyapunovKind::log_outer;
  if (tag == "g_half_log_outer") return LyapunovKind::half_log_outer;
  if (tag == "g_quad") return LyapunovKind::quadratic;
  throw PreconditionError("unknown Lyapunov function '" + tag + "'");
}

double LyapunovFn::value(std::span<const double> x) const {
  const double r2 = norm_sq(x);
  switch (kind_) {
    case LyapunovKind::log1p: return std::log1p(r2);
    case LyapunovKind::log_outer: return std::log(std::max(r2, n0_ * n0_)) + 2.0;
    case LyapunovKind::half_log_outer: return 0.5 * std::log(std::max(r2, n0_ * n0_)) + 1.0;
    case LyapunovKind::quadratic: return 0.5 * r2;
  }
  return 0.0;
}

void LyapunovFn::jet(std::span<const double> x, double& value, std::span<double> grad,
                     std::span<double> hess) const {
  const std::size_t d = dim_;
  const double r2 = norm_sq(x);
  value = this->value(x);
  // f = h(|x|^2): grad = 2 h' x, hess = 2 h' I + 4 h'' x x^T
  double h1 = 0.0, h2 = 0.0;
  switch (kind_) {
    case LyapunovKind::log1p:
      h1 = 1.0 / (1.0 + r2);
      h2 = -h1 * h1;
      break;
    case LyapunovKind::log_outer:
    case LyapunovKind::half_log_outer: {
      const double c = kind_ == LyapunovKind::log_outer ? 1.0 : 0.5;
      if (r2 > n0_ * n0_) {
        h1 = c / r2;
        h2 = -c / (r2 * r2);
      }
      break;
    }
    case LyapunovKind::quadratic:
      h1 = 0.5;
      break;
  }
  for (std::size_t i = 0; i < d; ++i) {
    grad[i] = 2.0 * h1 * x[i];
    for (std::size_t j = 0; j < d; ++j)
      hess[i * d + j] = (i == j ? 2.0 * h1 : 0.0) + 4.0 * h2 * x[i] * x[j];
  }
}

double LV(const CoefficientField& field, std::span<const double> y) {
  const std::size_t d = field.dim();
  std::vector<double> a(d * d), g(d);
  field.diffusion(y, a);
  field.drift(y, g);
  double tr = 0.0;
  for (std::size_t i = 0; i < d; ++i) tr += a[i * d + i];
  const double s = 1.0 + norm_sq(y);
  return tr / s - 2.0 * quadratic_form(a, y) / (s * s) + 2.0 * dot(g, y) / s;
}

Point ConditionReport::point(const ConditionSample& s) const {
  Point x(dim, 0.0);
  if (s.direction == std::numeric_limits<std::uint32_t>::max()) return x;
  const auto& dir = directions[s.direction];
  for (std::size_t i = 0; i < dim; ++i) x[i] = s.radius * dir[i];
  return x;
}

std::vector<ConditionSample> ConditionReport::worst(std::size_t n) const {
  std::vector<ConditionSample> out = samples;
  n = std::min(n, out.size());
  std::partial_sort(out.begin(), out.begin() + static_cast<std::ptrdiff_t>(n), out.end(),
                    [](const ConditionSample& a, const ConditionSample& b) { return a.margin < b.margin; });
  out.resize(n);
  return out;
}

double ConditionReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : samples) m = std::min(m, s.margin);
  return m;
}

namespace {

struct Grid {
  std::vector<double> radii;
  std::vector<std::vector<double>> directions;
};

Grid make_grid(std::size_t d, const GridSpec& spec) {
  if (!(spec.n0 > 0.0)) throw PreconditionError("grid: N0 must be positive");
  if (!(spec.r_max > spec.n0)) throw PreconditionError("grid: R_max must exceed N0");
  if (spec.shells_per_n0 == 0) throw PreconditionError("grid: shells_per_n0 must be positive");
  Grid g;
  const double per = static_cast<double>(spec.shells_per_n0);
  const auto n_shells = static_cast<std::size_t>(std::floor(per * (spec.r_max / spec.n0 - 1.0) + 1e-9));
  if (n_shells == 0) throw PreconditionError("grid: no shell fits in (N0, R_max]");
  for (std::size_t k = 1; k <= n_shells; ++k) g.radii.push_back(spec.n0 * (1.0 + static_cast<double>(k) / per));
  const std::size_t nd = spec.directions ? spec.directions : 64 * d;
  g.directions = qmc::sphere_directions(d, nd, spec.seed);
  return g;
}

// Growth of the per-shell constant across the outer three shells, expressed per radius doubling.
bool diverges(const std::vector<double>& radii, const std::vector<double>& c, double factor) {
  if (c.size() < 3) return false;
  const std::size_t n = c.size();
  const double c1 = c[n - 3], c2 = c[n - 2], c3 = c[n - 1];
  if (!(c1 > 0.0 && c1 < c2 && c2 < c3)) return false;
  const double per_doubling = std::pow(c3 / c1, std::log(2.0) / std::log(radii[n - 1] / radii[n - 3]));
  return per_doubling > factor;
}

struct Evaluation {
  double lhs;
  double shape;  // rhs = +-constant * shape
  double gap_half = 0.0;
  double bound_half = 0.0;
};

using Evaluator = std::function<Evaluation(std::span<const double> x, double r)>;

ConditionReport run_shell_check(const CoefficientField& field, const GridSpec& spec, std::string id,
                                std::string description, ConstantSense sense, double m,
                                const Evaluator& eval, double kink_radius = 0.0) {
  if (!(m > 0.0)) throw PreconditionError(id + ": constant M must be positive");
  const std::size_t d = field.dim();
  const Grid grid = make_grid(d, spec);

  ConditionReport rep;
  rep.id = std::move(id);
  rep.description = std::move(description);
  rep.grid = spec;
  rep.dim = d;
  rep.n_shells = grid.radii.size();
  rep.directions = grid.directions;
  rep.constant_name = "M";
  rep.sense = sense;
  rep.constant_used = m;
  rep.samples.reserve(grid.radii.size() * grid.directions.size());

  const double sign = sense == ConstantSense::minimal ? 1.0 : -1.0;
  double feasible = sense == ConstantSense::minimal ? -std::numeric_limits<double>::infinity()
                                                    : std::numeric_limits<double>::infinity();
  Point x(d);
  for (std::size_t s = 0; s < grid.radii.size(); ++s) {
    double r = grid.radii[s];
    if (kink_radius > 0.0 && std::abs(r - kink_radius) <= 1e-6 * kink_radius) {
      r = kink_radius * (1.0 + 2e-6);
      ++rep.resampled;
    }
    double shell_c = sense == ConstantSense::minimal ? -std::numeric_limits<double>::infinity()
                                                     : std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < grid.directions.size(); ++k) {
      for (std::size_t i = 0; i < d; ++i) x[i] = r * grid.directions[k][i];
      const Evaluation e = eval(x, r);
      ConditionSample smp;
      smp.shell = static_cast<std::uint32_t>(s);
      smp.direction = static_cast<std::uint32_t>(k);
      smp.radius = r;
      smp.lhs = e.lhs;
      smp.rhs = sign * m * e.shape;
      smp.margin = smp.rhs - smp.lhs;
      smp.gap_half = e.gap_half;
      smp.bound_half = e.bound_half;
      rep.samples.push_back(smp);
      // minimal: constant >= lhs / shape; maximal: constant <= -lhs / shape
      const double c = sense == ConstantSense::minimal ? e.lhs / e.shape : -e.lhs / e.shape;
      shell_c = sense == ConstantSense::minimal ? std::max(shell_c, c) : std::min(shell_c, c);
    }
    rep.shell_constants.push_back(shell_c);
    feasible = sense == ConstantSense::minimal ? std::max(feasible, shell_c) : std::min(feasible, shell_c);
  }
  rep.feasible_constant = feasible;
  if (sense == ConstantSense::minimal)
    rep.divergent = diverges(grid.radii, rep.shell_constants, spec.growth_flag_factor);
  rep.passed = rep.min_margin() >= -spec.margin_tolerance && !rep.divergent;
  if (sense == ConstantSense::maximal && !(feasible > 0.0)) rep.passed = false;
  return rep;
}

struct PointTerms {
  double quad_over_r2;  // <A x, x> / |x|^2
  double half_trace;
  double g_dot_x;
};

class TermEvaluator {
 public:
  explicit TermEvaluator(const CoefficientField& f) : field_(f), a_(f.dim() * f.dim()), g_(f.dim()) {}
  PointTerms operator()(std::span<const double> x) {
    field_.diffusion(x, a_);
    field_.drift(x, g_);
    const std::size_t d = field_.dim();
    double tr = 0.0;
    for (std::size_t i = 0; i < d; ++i) tr += a_[i * d + i];
    return {quadratic_form(a_, x) / norm_sq(x), 0.5 * tr, dot(g_, x)};
  }
  std::span<const double> a() const { return a_; }

 private:
  const CoefficientField& field_;
  std::vector<double> a_, g_;
};

double log_growth_shape(double r) { return r * r * (std::log(r) + 1.0); }

}  // namespace

ConditionReport check_H2(const CoefficientField& field, const GridSpec& spec, std::optional<double> k) {
  if (k && !(*k > 0.0)) throw PreconditionError("check_H2: K must be positive");
  const std::size_t d = field.dim();
  const Grid grid = make_grid(d, spec);
  ConditionReport rep;
  rep.id = "h2";
  rep.description = "||A(x)|| <= K + K|x|^2 ln(1+|x|^2) on R^d; <G(x),x> <= K + K|x|^2 ln(1+|x|^2) outside B_N0";
  rep.grid = spec;
  rep.dim = d;
  rep.n_shells = grid.radii.size();
  rep.directions = grid.directions;
  rep.constant_name = "K";
  rep.sense = ConstantSense::minimal;

  std::vector<double> g(d);
  Matrix am(d);
  auto shape = [](double r) { return 1.0 + r * r * std::log1p(r * r); };
  auto op_norm = [&](std::span<const double> x) {
    field.diffusion(x, am.data());
    return sym_eigs(am).back();
  };

  double k_min = 0.0;
  // inner region: origin and sub-shells up to N0, norm bound only
  {
    Point origin(d, 0.0);
    ConditionSample s;
    s.direction = std::numeric_limits<std::uint32_t>::max();
    s.part = 'A';
    s.lhs = op_norm(origin);
    s.rhs = shape(0.0);  // scaled by K below
    rep.samples.push_back(s);
    k_min = std::max(k_min, s.lhs / s.rhs);
    Point x(d);
    for (std::size_t j = 1; j <= spec.shells_per_n0; ++j) {
      const double r = spec.n0 * static_cast<double>(j) / static_cast<double>(spec.shells_per_n0);
      for (std::size_t dir = 0; dir < grid.directions.size(); ++dir) {
        for (std::size_t i = 0; i < d; ++i) x[i] = r * grid.directions[dir][i];
        ConditionSample t;
        t.shell = std::numeric_limits<std::uint32_t>::max();
        t.direction = static_cast<std::uint32_t>(dir);
        t.part = 'A';
        t.radius = r;
        t.lhs = op_norm(x);
        t.rhs = shape(r);
        rep.samples.push_back(t);
        k_min = std::max(k_min, t.lhs / t.rhs);
      }
    }
  }
  Point x(d);
  for (std::size_t s = 0; s < grid.radii.size(); ++s) {
    const double r = grid.radii[s];
    double shell_k = -std::numeric_limits<double>::infinity();
    for (std::size_t dir = 0; dir < grid.directions.size(); ++dir) {
      for (std::size_t i = 0; i < d; ++i) x[i] = r * grid.directions[dir][i];
      field.drift(x, g);
      ConditionSample sa;
      sa.shell = static_cast<std::uint32_t>(s);
      sa.direction = static_cast<std::uint32_t>(dir);
      sa.part = 'A';
      sa.radius = r;
      sa.lhs = op_norm(x);
      sa.rhs = shape(r);
      ConditionSample sg = sa;
      sg.part = 'G';
      sg.lhs = dot(g, x);
      shell_k = std::max({shell_k, sa.lhs / sa.rhs, sg.lhs / sg.rhs});
      rep.samples.push_back(sa);
      rep.samples.push_back(sg);
    }
    rep.shell_constants.push_back(shell_k);
    k_min = std::max(k_min, shell_k);
  }
  rep.feasible_constant = k_min;
  const double k_used = k ? *k : k_min;
  rep.constant_used = k_used;
  for (auto& s : rep.samples) {
    s.rhs *= k_used;
    s.margin = s.rhs - s.lhs;
  }
  rep.divergent = diverges(grid.radii, rep.shell_constants, spec.growth_flag_factor);
  rep.passed = !rep.divergent && rep.min_margin() >= -spec.margin_tolerance;
  return rep;
}

ConditionReport check_conservative_sprin(const CoefficientField& field, double m, const GridSpec& grid) {
  TermEvaluator terms(field);
  return run_shell_check(
      field, grid, "cons", "-<Ax,x>/|x|^2 + 1/2 trace A + <G,x> <= M|x|^2(ln|x| + 1) outside B_N0",
      ConstantSense::minimal, m, [&](std::span<const double> x, double r) {
        const PointTerms t = terms(x);
        return Evaluation{-t.quad_over_r2 + t.half_trace + t.g_dot_x, log_growth_shape(r)};
      });
}

ConditionReport check_invariant_sprin(const CoefficientField& field, int variant, double m,
                                      const GridSpec& grid) {
  TermEvaluator terms(field);
  if (variant == 1)
    return run_shell_check(field, grid, "inv1", "-<Ax,x>/|x|^2 + 1/2 trace A + <G,x> <= -M|x|^2 outside B_N0",
                           ConstantSense::maximal, m, [&](std::span<const double> x, double r) {
                             const PointTerms t = terms(x);
                             return Evaluation{-t.quad_over_r2 + t.half_trace + t.g_dot_x, r * r};
                           });
  if (variant == 2)
    return run_shell_check(field, grid, "inv2", "1/2 trace A + <G,x> <= -M outside B_N0",
                           ConstantSense::maximal, m, [&](std::span<const double> x, double) {
                             const PointTerms t = terms(x);
                             return Evaluation{t.half_trace + t.g_dot_x, 1.0};
                           });
  throw PreconditionError("check_invariant_sprin: variant must be 1 or 2");
}

ConditionReport check_lyapunov(const CoefficientField& field, const LyapunovFn& g, LyapunovMode mode,
                               double m, const GridSpec& grid) {
  if (g.dim() != field.dim()) throw PreconditionError("check_lyapunov: dimension mismatch");
  Generator gen(field);
  const bool outer = g.kind() == LyapunovKind::log_outer || g.kind() == LyapunovKind::half_log_outer;
  const GridSpec& spec = grid;
  const std::string id = "lyap:" + g.tag();
  if (mode == LyapunovMode::conservative)
    return run_shell_check(field, spec, id, "L g <= M g outside B_N0 (" + g.tag() + ")",
                           ConstantSense::minimal, m,
                           [&](std::span<const double> x, double) {
                             return Evaluation{gen.apply(g, x), g.value(x)};
                           },
                           outer ? g.n0() : 0.0);
  return run_shell_check(field, spec, id, "L g <= -M outside B_N0 (" + g.tag() + ")",
                         ConstantSense::maximal, m,
                         [&](std::span<const double> x, double) { return Evaluation{gen.apply(g, x), 1.0}; },
                         outer ? g.n0() : 0.0);
}

ConditionReport check_dim2(const CoefficientField& field, LyapunovMode mode, double m, const GridSpec& grid) {
  if (field.dim() != 2) throw PreconditionError("check_dim2: field dimension must be 2");
  std::vector<double> g(2);
  Matrix am(2);
  auto eval = [&](std::span<const double> x, double r, bool conservative) {
    field.diffusion(x, am.data());
    field.drift(x, g);
    const SpectralGap2d sg = spectral_gap_2d(am);
    const double lhs = 0.5 * std::abs(am(0, 0) - am(1, 1)) + std::abs(am(0, 1)) + dot(g, x);
    Evaluation e{lhs, conservative ? log_growth_shape(r) : r * r};
    e.gap_half = 0.5 * sg.gap;
    e.bound_half = 0.5 * sg.bound;
    return e;
  };
  ConditionReport rep =
      mode == LyapunovMode::conservative
          ? run_shell_check(field, grid, "dim2",
                            "|a11-a22|/2 + |a12| + <G,x> <= M|x|^2(ln|x| + 1) outside B_N0",
                            ConstantSense::minimal, m,
                            [&](std::span<const double> x, double r) { return eval(x, r, true); })
          : run_shell_check(field, grid, "dim2", "|a11-a22|/2 + |a12| + <G,x> <= -M|x|^2 outside B_N0",
                            ConstantSense::maximal, m,
                            [&](std::span<const double> x, double r) { return eval(x, r, false); });
  double max_gap = 0.0, max_bound = 0.0, max_excess = -std::numeric_limits<double>::infinity();
  for (const auto& s : rep.samples) {
    max_gap = std::max(max_gap, s.gap_half);
    max_bound = std::max(max_bound, s.bound_half);
    max_excess = std::max(max_excess, s.gap_half - s.bound_half);
  }
  rep.diagnostics["max_gap_half"] = max_gap;
  rep.diagnostics["max_bound_half"] = max_bound;
  rep.diagnostics["max_gap_minus_bound"] = max_excess;
  return rep;
}

}  // namespace fpk
