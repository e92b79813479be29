#include "fpk/report.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <system_error>

#include "fpk/errors.hpp"

namespace fpk {

std::string format_double(double v) {
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

Json to_json(const Matrix& m) {
  Json rows = Json::array();
  for (std::size_t i = 0; i < m.size(); ++i) {
    Json row = Json::array();
    for (std::size_t j = 0; j < m.size(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

Json to_json(const SigmaFactor& s) { return to_json(s.matrix()); }

Json to_json(const EllipticityEstimate& e) {
  return Json{{"center", e.ball.center},     {"radius", e.ball.radius},   {"lambda_min", e.lambda_min},
              {"lambda_max", e.lambda_max},  {"n_samples", e.n_samples},  {"argmin", e.argmin},
              {"argmax", e.argmax},          {"pd_tolerance", e.pd_tolerance}, {"passed", e.passed},
              {"message", e.message}};
}

Json to_json(const RegularityProbe& p) {
  Json j{{"center", p.ball.center}, {"radius", p.ball.radius}, {"n_points", p.n_points},
         {"max_gradient", to_json(p.max_gradient)}, {"max_modulus", p.max_modulus},
         {"suspicious", p.suspicious}};
  if (p.step) j["h"] = *p.step;
  else j["h"] = "1e-4 * (1 + |x|)";
  return j;
}

Json to_json(const Estimate& e) { return Json{{"value", e.value}, {"std_error", e.std_error}}; }

Json to_json(const MomentSummary& m) {
  return Json{{"mean", m.mean}, {"covariance", to_json(m.covariance)}, {"std_error", m.std_error},
              {"alive_fraction", m.alive_fraction}, {"n_alive", m.n_alive}};
}

namespace {

Json sample_json(const ConditionReport& r, const ConditionSample& s) {
  Json j{{"shell", s.shell == UINT32_MAX ? Json(nullptr) : Json(s.shell)}, {"radius", s.radius}, {"x", r.point(s)},
         {"lhs", s.lhs},     {"rhs", s.rhs},       {"margin", s.margin}};
  if (s.part != ' ') j["part"] = std::string(1, s.part);
  if (r.id == "dim2") {
    j["gap_half"] = s.gap_half;
    j["bound_half"] = s.bound_half;
  }
  return j;
}

}  // namespace

Json to_json(const ConditionReport& r) {
  Json grid{{"N0", r.grid.n0},
            {"R_max", r.grid.r_max},
            {"directions", r.directions.size()},
            {"shells", r.n_shells},
            {"shells_per_N0", r.grid.shells_per_n0},
            {"seed", r.grid.seed},
            {"margin_tolerance", r.grid.margin_tolerance},
            {"growth_flag_factor", r.grid.growth_flag_factor}};
  Json j{{"id", r.id},
         {"description", r.description},
         {"verdict", r.passed ? "PASS" : "FAIL"},
         {"grid", grid},
         {"n_samples", r.samples.size()},
         {"min_margin", r.samples.empty() ? 0.0 : r.min_margin()},
         {"constant", r.constant_name},
         {"constant_sense", r.sense == ConstantSense::minimal ? "minimal" : "maximal"},
         {"feasible_constant", r.feasible_constant},
         {"divergent", r.divergent},
         {"resampled", r.resampled}};
  if (r.constant_used) j["constant_used"] = *r.constant_used;
  const std::size_t tail = std::min<std::size_t>(3, r.shell_constants.size());
  j["outer_shell_constants"] =
      std::vector<double>(r.shell_constants.end() - static_cast<std::ptrdiff_t>(tail), r.shell_constants.end());
  if (!r.diagnostics.empty()) j["diagnostics"] = r.diagnostics;
  Json worst = Json::array();
  for (const auto& s : r.worst(10)) worst.push_back(sample_json(r, s));
  j["worst"] = std::move(worst);
  return j;
}

Json to_json(const ResidualReport& r) {
  Json j{{"test", r.test_id},       {"t", r.t},         {"estimate", r.estimate},
         {"std_error", r.std_error}, {"C", r.c},         {"dt", r.dt},
         {"allowance", r.allowance}, {"n_nodes", r.n_nodes}, {"verdict", r.passed ? "PASS" : "FAIL"}};
  if (r.s) j["s"] = *r.s;
  if (r.snapshot_std_error) j["snapshot_std_error"] = *r.snapshot_std_error;
  if (r.max_increment) j["max_increment"] = *r.max_increment;
  return j;
}

Json to_json(const MarginalComparison& c) {
  Json bank = Json::array();
  for (const auto& b : c.bank)
    bank.push_back(Json{{"delta", b.delta}, {"std_error", b.std_error}, {"passed", b.passed}});
  return Json{{"t", c.t},
              {"bank", std::move(bank)},
              {"max_abs_delta", c.max_abs_delta},
              {"allowance", c.allowance},
              {"ks", c.ks},
              {"ks_threshold", c.ks_threshold},
              {"bank_passed", c.bank_passed},
              {"ks_passed", c.ks_passed},
              {"verdict", c.passed ? "PASS" : "FAIL"},
              {"note", "agreement on bank"}};
}

Json to_json(const UniquenessReport& r) {
  Json times = Json::array();
  for (const auto& c : r.times) times.push_back(to_json(c));
  return Json{{"dt_a", r.dt_a}, {"dt_b", r.dt_b}, {"C", r.c}, {"times", std::move(times)},
              {"verdict", r.passed ? "PASS" : "FAIL"}};
}

Json to_json(const ErgodicReport& r) {
  Json balls = Json::array();
  for (const auto& b : r.balls) balls.push_back(Json{{"center", b.center}, {"radius", b.radius}});
  auto estimates = [](const std::vector<Estimate>& v) {
    Json a = Json::array();
    for (const auto& e : v) a.push_back(to_json(e));
    return a;
  };
  Json j{{"times", r.times},
         {"balls", std::move(balls)},
         {"window", r.window},
         {"window_times", r.window_times},
         {"limit_bank", estimates(r.limit_bank)},
         {"limit_mass", estimates(r.limit_mass)},
         {"stationarity", estimates(r.stationarity)},
         {"window_drift", estimates(r.window_drift)},
         {"converged", r.converged},
         {"deltas", r.deltas},
         {"alive_fraction", r.alive_fraction},
         {"C", r.c},
         {"dt", r.dt},
         {"allowance", r.allowance},
         {"stationarity_passed", r.stationarity_passed},
         {"converged_all", r.converged_all},
         {"verdict", r.passed ? "PASS" : "FAIL"}};
  j["invariance_advisory"] = r.invariance_advisory ? Json(*r.invariance_advisory) : Json(nullptr);
  return j;
}

Json to_json(const RefinementTable& t) {
  Json levels = Json::array();
  for (const auto& l : t.levels)
    levels.push_back(Json{{"level", l.level}, {"dt", l.dt}, {"n_steps", l.n_steps}, {"dead_fraction", l.dead_fraction}});
  return Json{{"levels", std::move(levels)}, {"strong_error", t.strong_error}, {"n_compared", t.n_compared}};
}

std::string margins_csv(const std::vector<ConditionReport>& reports) {
  std::size_t d = 0;
  bool any_dim2 = false;
  for (const auto& r : reports) {
    d = std::max(d, r.dim);
    any_dim2 = any_dim2 || r.id == "dim2";
  }
  std::string out = "condition,shell,direction,part,radius";
  for (std::size_t i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
  out += ",lhs,rhs,margin";
  if (any_dim2) out += ",gap_half,bound_half";
  out += '\n';
  for (const auto& r : reports)
    for (const auto& s : r.samples) {
      out += r.id;
      out += ',' + (s.shell == UINT32_MAX ? std::string("inner") : std::to_string(s.shell));
      out += ',' + (s.direction == UINT32_MAX ? std::string("origin") : std::to_string(s.direction));
      out += ',' + (s.part == ' ' ? std::string() : std::string(1, s.part));
      out += ',' + format_double(s.radius);
      const Point x = r.point(s);
      for (std::size_t i = 0; i < d; ++i) out += ',' + (i < x.size() ? format_double(x[i]) : std::string());
      out += ',' + format_double(s.lhs) + ',' + format_double(s.rhs) + ',' + format_double(s.margin);
      if (any_dim2) {
        if (r.id == "dim2") out += ',' + format_double(s.gap_half) + ',' + format_double(s.bound_half);
        else out += ",,";
      }
      out += '\n';
    }
  return out;
}

std::string particles_csv(const SimResult& sim) {
  const std::size_t d = sim.snapshots.empty() ? 0 : sim.snapshots.front().dim();
  std::string out = "snapshot_t,path_id,alive";
  for (std::size_t i = 1; i <= d; ++i) out += ",x" + std::to_string(i);
  out += '\n';
  for (const auto& m : sim.snapshots) {
    const std::string t = format_double(m.time());
    for (std::size_t p = 0; p < m.n_paths(); ++p) {
      out += t;
      out += ',' + std::to_string(p);
      out += m.alive(p) ? ",1" : ",0";
      for (double v : m.position(p)) out += ',' + format_double(v);
      out += '\n';
    }
  }
  return out;
}

std::string ergodic_csv(const ErgodicReport& r) {
  std::string out = "t";
  const std::size_t nb = r.bank_integrals.empty() ? 0 : r.bank_integrals.front().size();
  for (std::size_t k = 0; k < nb; ++k) out += ",bank_" + std::to_string(k);
  for (std::size_t k = 0; k < r.balls.size(); ++k) out += ",mass_" + std::to_string(k);
  for (std::size_t k = 0; k < r.balls.size(); ++k) out += ",delta_" + std::to_string(k);
  out += '\n';
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    out += format_double(r.times[i]);
    for (double v : r.bank_integrals[i]) out += ',' + format_double(v);
    for (double v : r.masses[i]) out += ',' + format_double(v);
    for (double v : r.deltas[i]) out += ',' + format_double(v);
    out += '\n';
  }
  return out;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw Error("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw Error("cannot move " + tmp.string() + " to " + path.string());
  }
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace fpk
