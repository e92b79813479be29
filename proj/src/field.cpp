#include "fpk/field.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "fpk/chol.hpp"
#include "fpk/errors.hpp"
#include "fpk/qmc.hpp"

namespace fpk {

CoefficientField::CoefficientField(std::size_t dim, LowerFn lower, DriftFn drift, FieldSource source,
                                   bool constant_diffusion)
    : dim_(dim),
      lower_(std::move(lower)),
      drift_(std::move(drift)),
      source_(std::move(source)),
      constant_diffusion_(constant_diffusion) {}

void CoefficientField::check_point(std::span<const double> x) const {
  if (x.size() != dim_)
    throw PreconditionError("point has dimension " + std::to_string(x.size()) + ", field has " +
                            std::to_string(dim_));
}

void CoefficientField::diffusion(std::span<const double> x, std::span<double> a) const {
  check_point(x);
  const std::size_t d = dim_;
  lower_(x, a);
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (!std::isfinite(a[i * d + j])) throw DomainError("non-finite diffusion coefficient");
      a[j * d + i] = a[i * d + j];
    }
    if (!std::isfinite(a[i * d + i])) throw DomainError("non-finite diffusion coefficient");
  }
}

Matrix CoefficientField::diffusion(std::span<const double> x) const {
  Matrix a(dim_);
  diffusion(x, a.data());
  return a;
}

void CoefficientField::drift(std::span<const double> x, std::span<double> g) const {
  check_point(x);
  drift_(x, g);
  for (std::size_t i = 0; i < dim_; ++i)
    if (!std::isfinite(g[i])) throw DomainError("non-finite drift coefficient");
}

Point CoefficientField::drift(std::span<const double> x) const {
  Point g(dim_);
  drift(x, g);
  return g;
}

Generator::Generator(const CoefficientField& field)
    : field_(&field),
      a_(field.dim() * field.dim()),
      g_(field.dim()),
      grad_(field.dim()),
      hess_(field.dim() * field.dim()) {}

double Generator::apply(std::span<const double> x, std::span<const double> grad,
                        std::span<const double> hess) {
  const std::size_t d = field_->dim();
  field_->diffusion(x, a_);
  field_->drift(x, g_);
  double second = 0.0;
  for (std::size_t k = 0; k < d * d; ++k) second += a_[k] * hess[k];
  double first = 0.0;
  for (std::size_t i = 0; i < d; ++i) first += g_[i] * grad[i];
  return 0.5 * second + first;
}

double Generator::apply(const SmoothFunction& f, std::span<const double> x) {
  double value = 0.0;
  f.jet(x, value, grad_, hess_);
  return apply(x, grad_, hess_);
}

double apply_L(const CoefficientField& field, const SmoothFunction& f, std::span<const double> x) {
  Generator gen(field);
  return gen.apply(f, x);
}

namespace {

using Params = std::map<std::string, double>;

void fill_diagonal(std::span<double> a, std::size_t d, double c) {
  for (std::size_t i = 0; i < d; ++i) {
    for (std::size_t j = 0; j < i; ++j) a[i * d + j] = 0.0;
    a[i * d + i] = c;
  }
}

Params resolve_params(const std::string& name, const Params& given, const Params& defaults) {
  Params out = defaults;
  for (const auto& [k, v] : given) {
    if (!defaults.contains(k))
      throw ConfigError("/params/" + k, "unknown parameter for catalog entry '" + name + "'");
    if (!std::isfinite(v)) throw ConfigError("/params/" + k, "parameter must be finite");
    out[k] = v;
  }
  return out;
}

CoefficientField catalog_field(const FieldConfig& cfg) {
  const std::string& name = *cfg.catalog;
  const std::size_t d = cfg.dim;
  FieldSource src;
  src.catalog = name;
  src.integrability_p = cfg.integrability_p;

  if (name == "bm") {
    src.params = resolve_params(name, cfg.params, {{"diffusion", 1.0}});
    src.claimed = {"H1", "H2", "conservative"};
    const double c = src.params.at("diffusion");
    return CoefficientField(
        d, [d, c](std::span<const double>, std::span<double> a) { fill_diagonal(a, d, c); },
        [](std::span<const double>, std::span<double> g) { std::fill(g.begin(), g.end(), 0.0); },
        std::move(src), true);
  }
  if (name == "ou") {
    src.params = resolve_params(name, cfg.params, {{"diffusion", 2.0}, {"rate", 1.0}});
    src.claimed = {"H1", "H2", "conservative", "invariant"};
    const double c = src.params.at("diffusion");
    const double rate = src.params.at("rate");
    return CoefficientField(
        d, [d, c](std::span<const double>, std::span<double> a) { fill_diagonal(a, d, c); },
        [rate](std::span<const double> x, std::span<double> g) {
          for (std::size_t i = 0; i < x.size(); ++i) g[i] = -rate * x[i];
        },
        std::move(src), true);
  }
  if (name == "dim2_demo") {
    if (d != 2) throw ConfigError("/dim", "catalog entry 'dim2_demo' requires dim = 2");
    src.params = resolve_params(name, cfg.params, {});
    src.claimed = {"H1", "H2", "conservative", "invariant"};
    return CoefficientField(
        d,
        [](std::span<const double> x, std::span<double> a) {
          a[0] = 1.0 + x[1] * x[1];
          a[2] = 0.0;
          a[3] = 1.0 + x[0] * x[0];
        },
        [](std::span<const double> x, std::span<double> g) {
          g[0] = -x[0];
          g[1] = -x[1];
        },
        std::move(src));
  }
  if (name == "cubic_blowup") {
    src.params = resolve_params(name, cfg.params, {});
    src.claimed = {"H1"};
    return CoefficientField(
        d, [d](std::span<const double>, std::span<double> a) { fill_diagonal(a, d, 1.0); },
        [](std::span<const double> x, std::span<double> g) {
          for (std::size_t i = 0; i < x.size(); ++i) g[i] = x[i] * x[i] * x[i];
        },
        std::move(src), true);
  }
  throw ConfigError("/catalog", "unknown catalog entry '" + name + "'");
}

// "a21" (single digits) or "a2_1".
bool parse_entry_key(const std::string& key, std::size_t& i, std::size_t& j) {
  if (key.size() < 3 || key[0] != 'a') return false;
  const char* b = key.data() + 1;
  const char* e = key.data() + key.size();
  if (auto us = key.find('_'); us != std::string::npos) {
    auto r1 = std::from_chars(b, key.data() + us, i);
    auto r2 = std::from_chars(key.data() + us + 1, e, j);
    return r1.ec == std::errc() && r1.ptr == key.data() + us && r2.ec == std::errc() && r2.ptr == e;
  }
  if (key.size() != 3 || !std::isdigit(static_cast<unsigned char>(key[1])) ||
      !std::isdigit(static_cast<unsigned char>(key[2])))
    return false;
  i = static_cast<std::size_t>(key[1] - '0');
  j = static_cast<std::size_t>(key[2] - '0');
  return true;
}

std::string entry_key(std::size_t i, std::size_t j, std::size_t d) {
  if (d < 10) return "a" + std::to_string(i) + std::to_string(j);
  return "a" + std::to_string(i) + "_" + std::to_string(j);
}

CoefficientField expression_field(const FieldConfig& cfg) {
  const std::size_t d = cfg.dim;
  if (!cfg.params.empty()) throw ConfigError("/params", "params apply to catalog entries only");
  // lower[i*d + j] for i >= j
  std::vector<Expr> lower(d * d);
  std::vector<bool> have(d * d, false);
  FieldSource src;
  src.integrability_p = cfg.integrability_p;

  for (const auto& [key, text] : cfg.a_entries) {
    std::size_t i = 0, j = 0;
    if (!parse_entry_key(key, i, j) || i == 0 || j == 0)
      throw ConfigError("/A/" + key, "entry keys look like a21 (row 2, column 1)");
    if (i > d || j > d) throw ConfigError("/A/" + key, "entry index exceeds dimension");
    if (i < j)
      throw ConfigError("/A/" + key, "upper-triangle entry; supply a" + std::to_string(j) +
                                         std::to_string(i) + " instead (A is symmetric)");
    const std::size_t slot = (i - 1) * d + (j - 1);
    if (have[slot]) throw ConfigError("/A/" + key, "entry given twice");
    try {
      lower[slot] = parse_expr(text, d);
    } catch (const ParseError& e) {
      throw ConfigError("/A/" + key, e.what());
    }
    have[slot] = true;
  }
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j)
      if (!have[i * d + j]) throw ConfigError("/A/" + entry_key(i + 1, j + 1, d), "missing entry");
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) src.a_entries[entry_key(i + 1, j + 1, d)] = lower[i * d + j].to_string();

  if (cfg.g_entries.size() != d)
    throw ConfigError("/G", "expected " + std::to_string(d) + " drift entries, got " +
                                std::to_string(cfg.g_entries.size()));
  std::vector<Expr> drift(d);
  for (std::size_t i = 0; i < d; ++i) {
    try {
      drift[i] = parse_expr(cfg.g_entries[i], d);
    } catch (const ParseError& e) {
      throw ConfigError("/G/" + std::to_string(i), e.what());
    }
    src.g_entries.push_back(drift[i].to_string());
  }

  bool constant = true;
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j <= i; ++j) constant = constant && lower[i * d + j].is_constant();

  return CoefficientField(
      d,
      [d, lower = std::move(lower)](std::span<const double> x, std::span<double> a) {
        for (std::size_t i = 0; i < d; ++i)
          for (std::size_t j = 0; j <= i; ++j) a[i * d + j] = lower[i * d + j].eval(x);
      },
      [drift = std::move(drift)](std::span<const double> x, std::span<double> g) {
        for (std::size_t i = 0; i < drift.size(); ++i) g[i] = drift[i].eval(x);
      },
      std::move(src), constant);
}

}  // namespace

std::vector<std::string> catalog_names() { return {"bm", "ou", "dim2_demo", "cubic_blowup"}; }

CoefficientField build_field(const FieldConfig& cfg) {
  if (cfg.dim < 2) throw ConfigError("/dim", "dimension must be at least 2 (d >= 2 is a standing assumption)");
  if (cfg.dim > 64) throw ConfigError("/dim", "dimension above 64 is not supported");
  const bool has_expr = !cfg.a_entries.empty() || !cfg.g_entries.empty();
  if (cfg.catalog && has_expr) throw ConfigError("", "give either a catalog entry or A/G expressions, not both");
  if (cfg.catalog) return catalog_field(cfg);
  if (!has_expr) throw ConfigError("", "missing field definition: need \"catalog\" or \"A\" and \"G\"");
  return expression_field(cfg);
}

EllipticityEstimate check_ellipticity(const CoefficientField& field, const Ball& ball,
                                      std::size_t n_samples, std::uint64_t seed, double pd_tolerance) {
  if (n_samples == 0) throw PreconditionError("check_ellipticity: n_samples must be >= 1");
  if (!(ball.radius > 0.0)) throw PreconditionError("check_ellipticity: radius must be positive");
  if (ball.center.size() != field.dim()) throw PreconditionError("check_ellipticity: ball dimension mismatch");

  EllipticityEstimate est;
  est.ball = ball;
  est.n_samples = n_samples;
  est.pd_tolerance = pd_tolerance;
  est.lambda_min = std::numeric_limits<double>::infinity();
  est.lambda_max = -std::numeric_limits<double>::infinity();

  for (const auto& x : qmc::ball_points(ball.center, ball.radius, n_samples, seed)) {
    const auto eig = sym_eigs(field.diffusion(x));
    if (eig.front() < est.lambda_min) {
      est.lambda_min = eig.front();
      est.argmin = x;
    }
    if (eig.back() > est.lambda_max) {
      est.lambda_max = eig.back();
      est.argmax = x;
    }
  }
  est.passed = est.lambda_min > pd_tolerance;
  if (!est.passed)
    est.message = "smallest sampled eigenvalue " + std::to_string(est.lambda_min) +
                  " is not above the tolerance";
  return est;
}

}  // namespace fpk
