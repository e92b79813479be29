#include "fpk/cli.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <ctime>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "fpk/chol.hpp"
#include "fpk/config.hpp"
#include "fpk/errors.hpp"
#include "fpk/fpcheck.hpp"
#include "fpk/lyapunov.hpp"
#include "fpk/measure.hpp"
#include "fpk/report.hpp"
#include "fpk/sde.hpp"

#ifndef FPK_VERSION
#define FPK_VERSION "0.0.0"
#endif

namespace fpk::cli {

std::vector<double> parse_point(const std::string& text) {
  std::vector<double> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    std::string tok = text.substr(pos, comma - pos);
    tok.erase(0, tok.find_first_not_of(" \t"));
    tok.erase(tok.find_last_not_of(" \t") + 1);
    double v = 0.0;
    const auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (tok.empty() || r.ec != std::errc() || r.ptr != tok.data() + tok.size())
      throw ConfigError("", "cannot read '" + text + "' as a comma-separated point");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

namespace {

struct Flags {
  std::string config, sim, manifest, manifest_out, report, csv, out;
  std::optional<std::uint64_t> seed;
  std::size_t threads = 0;

  std::string point, probe;
  std::size_t ellipticity_samples = 256;

  std::string conditions = "h2,cons,inv1,inv2";
  double m = 1.0, n0 = 4.0, rmax = 1000.0;
  std::size_t directions = 0;
  std::optional<double> k;
  std::string lyap_g = "g_log_outer", lyap_mode = "conservative", dim2_mode = "conservative";

  std::size_t refine_levels = 0;

  std::string tests = "fp,martingale,uniqueness";
  std::optional<double> bank_scale, fp_t, mart_s, dt_b;
  std::optional<std::uint64_t> seed_b;
  std::string t_list;
  double c = kDiscretizationC, ks = 0.02;

  std::string balls;
  double window = 0.2;
};

struct Outcome {
  Json report;
  std::string csv;
  std::string particles;
  Json verdicts = Json::object();
  bool passed = true;
};

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) {
    cur.erase(0, cur.find_first_not_of(" \t"));
    cur.erase(cur.find_last_not_of(" \t") + 1);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

const char* verdict(bool ok) { return ok ? "PASS" : "FAIL"; }

std::vector<double> default_times(double horizon) {
  std::vector<double> t;
  for (int k = 0; k <= 20; ++k) t.push_back(horizon * k / 20.0);
  return t;
}

std::vector<double> merged_times(std::vector<double> base, const std::vector<double>& extra, double horizon) {
  base.insert(base.end(), extra.begin(), extra.end());
  std::sort(base.begin(), base.end());
  std::vector<double> out;
  for (double t : base)
    if (out.empty() || std::abs(out.back() - t) > 1e-9 * std::max(1.0, horizon)) out.push_back(t);
  return out;
}

// ---- resolution: flags -> fully explicit run description -------------------------------

Json resolve_probe(const std::string& path, std::size_t dim) {
  const Json j = load_json(path);
  if (!j.is_object()) throw ConfigError("", "probe file must hold an object");
  for (const auto& [k, v] : j.items())
    if (k != "center" && k != "radius" && k != "h" && k != "n_points" && k != "seed")
      throw ConfigError("/" + k, "unknown key");
  if (!j.contains("center") || !j.contains("radius")) throw ConfigError("", "probe needs center and radius");
  const auto center = j.at("center").get<std::vector<double>>();
  if (center.size() != dim) throw ConfigError("/center", "dimension does not match the field");
  Json out{{"center", center},
           {"radius", j.at("radius").get<double>()},
           {"h", j.contains("h") ? j.at("h") : Json(nullptr)},
           {"n_points", j.value("n_points", 64)},
           {"seed", j.value("seed", 0)}};
  if (!(out["radius"].get<double>() > 0.0)) throw ConfigError("/radius", "radius must be positive");
  return out;
}

Json resolve(const std::string& command, const Flags& f) {
  Json run;
  run["command"] = command;
  if (f.config.empty()) throw ConfigError("", "--config is required (or --manifest)");
  const FieldBundle field = load_field(load_json(f.config));
  const std::size_t d = field.field.dim();
  run["field"] = field.resolved;
  Json opt = Json::object();

  std::optional<SimConfig> sim;
  if (command == "simulate" || command == "verify" || command == "ergodic") {
    if (f.sim.empty()) throw ConfigError("", "--sim is required for " + command);
    sim = sim_config_from_json(load_json(f.sim));
    if (f.seed) sim->seed = *f.seed;
    if (sim->x0.size() != d) throw ConfigError("/x0", "dimension does not match the field");
    if (sim->snapshot_times.empty()) sim->snapshot_times = default_times(sim->horizon);
  }

  if (command == "factor") {
    if (f.point.empty()) throw ConfigError("", "--point is required");
    const auto x = parse_point(f.point);
    if (x.size() != d) throw ConfigError("", "--point has the wrong dimension");
    opt["point"] = x;
    opt["probe"] = f.probe.empty() ? Json(nullptr) : resolve_probe(f.probe, d);
    if (f.seed && !f.probe.empty()) opt["probe"]["seed"] = *f.seed;
    opt["ellipticity_samples"] = f.ellipticity_samples;
  } else if (command == "check") {
    opt["conditions"] = split(f.conditions, ',');
    if (opt["conditions"].empty()) throw ConfigError("", "--conditions is empty");
    opt["M"] = f.m;
    opt["N0"] = f.n0;
    opt["R_max"] = f.rmax;
    opt["directions"] = f.directions == 0 ? 64 * d : f.directions;
    opt["seed"] = f.seed.value_or(0);
    opt["K"] = f.k ? Json(*f.k) : Json(nullptr);
    opt["lyap_g"] = f.lyap_g;
    opt["lyap_mode"] = f.lyap_mode;
    opt["dim2_mode"] = f.dim2_mode;
  } else if (command == "simulate") {
    opt["refine_levels"] = f.refine_levels;
  } else if (command == "verify") {
    const double horizon = sim->horizon;
    opt["tests"] = split(f.tests, ',');
    opt["bank_scale"] = f.bank_scale.value_or(2.0);
    opt["fp_t"] = f.fp_t.value_or(horizon);
    opt["martingale_s"] = f.mart_s.value_or(horizon / 4.0);
    opt["dt_b"] = f.dt_b.value_or(sim->dt / 2.0);
    opt["seed_b"] = f.seed_b.value_or(sim->seed + 1);
    opt["t_list"] = f.t_list.empty() ? std::vector<double>{horizon / 4.0, horizon / 2.0, horizon}
                                     : parse_point(f.t_list);
    opt["C"] = f.c;
    opt["ks_threshold"] = f.ks;
    std::vector<double> extra = opt["t_list"].get<std::vector<double>>();
    extra.push_back(opt["fp_t"].get<double>());
    extra.push_back(opt["martingale_s"].get<double>());
    sim->snapshot_times = merged_times(sim->snapshot_times, extra, horizon);
  } else if (command == "ergodic") {
    Json balls = Json::array();
    if (f.balls.empty()) {
      balls.push_back(Json{{"center", std::vector<double>(d, 0.0)}, {"radius", 1.0}});
    } else {
      for (const auto& spec : split(f.balls, ';')) {
        const auto colon = spec.find(':');
        if (colon == std::string::npos) throw ConfigError("", "ball '" + spec + "' must look like 0,0:1");
        const auto c = parse_point(spec.substr(0, colon));
        const auto r = parse_point(spec.substr(colon + 1));
        if (c.size() != d || r.size() != 1 || !(r[0] > 0.0))
          throw ConfigError("", "ball '" + spec + "' has the wrong dimension or radius");
        balls.push_back(Json{{"center", c}, {"radius", r[0]}});
      }
    }
    opt["balls"] = balls;
    opt["window"] = f.window;
    opt["bank_scale"] = f.bank_scale.value_or(1.0);
    opt["C"] = f.c;
  }
  if (sim) run["sim"] = sim_config_to_json(*sim);
  run["options"] = opt;
  return run;
}

// ---- execution ---------------------------------------------------------------------------

GridSpec grid_from(const Json& opt) {
  GridSpec g;
  g.n0 = opt.at("N0").get<double>();
  g.r_max = opt.at("R_max").get<double>();
  g.directions = opt.at("directions").get<std::size_t>();
  g.seed = opt.at("seed").get<std::uint64_t>();
  if (!(g.n0 >= 1.0)) throw ConfigError("/options/N0", "N0 must be at least 1");
  if (!(g.r_max > g.n0)) throw ConfigError("/options/R_max", "R_max must exceed N0");
  return g;
}

LyapunovMode mode_from(const std::string& s, const std::string& where) {
  if (s == "conservative") return LyapunovMode::conservative;
  if (s == "invariant") return LyapunovMode::invariant;
  throw ConfigError(where, "mode must be conservative or invariant");
}

Outcome exec_factor(const CoefficientField& field, const Json& opt) {
  Outcome o;
  const auto x = opt.at("point").get<std::vector<double>>();
  Json r;
  r["point"] = x;
  const Matrix a = field.diffusion(x);
  r["A"] = to_json(a);
  bool ok = true;
  try {
    const SigmaFactor s = cholesky_point(a);
    r["sigma"] = to_json(s);
    r["reconstruction_error"] = (s.reconstruct() - a).frobenius() / std::max(a.frobenius(), 1e-300);
  } catch (const NotPositiveDefinite& e) {
    ok = false;
    r["sigma"] = nullptr;
    r["error"] = Json{{"kind", "NotPositiveDefinite"}, {"column", e.column()}, {"pivot", e.pivot()}};
  }
  o.verdicts["factor"] = verdict(ok);
  if (!opt.at("probe").is_null()) {
    const Json& p = opt.at("probe");
    Ball ball{p.at("center").get<std::vector<double>>(), p.at("radius").get<double>()};
    const auto seed = p.at("seed").get<std::uint64_t>();
    const EllipticityEstimate ell = check_ellipticity(field, ball, opt.at("ellipticity_samples").get<std::size_t>(), seed);
    r["ellipticity"] = to_json(ell);
    o.verdicts["ellipticity"] = verdict(ell.passed);
    ok = ok && ell.passed;
    if (ell.passed) {
      const SigmaField sigma = cholesky_field(field);
      std::optional<double> h;
      if (!p.at("h").is_null()) h = p.at("h").get<double>();
      const RegularityProbe probe = regularity_probe(sigma, ball, h, p.at("n_points").get<std::size_t>(), seed);
      r["probe"] = to_json(probe);
    }
  }
  r["verdict"] = verdict(ok);
  o.report = std::move(r);
  o.passed = ok;
  return o;
}

Outcome exec_check(const CoefficientField& field, const Json& opt) {
  Outcome o;
  const GridSpec grid = grid_from(opt);
  const double m = opt.at("M").get<double>();
  if (!(m > 0.0)) throw ConfigError("/options/M", "M must be positive");
  std::vector<ConditionReport> reports;
  for (const auto& c : opt.at("conditions").get<std::vector<std::string>>()) {
    if (c == "h2") {
      std::optional<double> k;
      if (!opt.at("K").is_null()) k = opt.at("K").get<double>();
      reports.push_back(check_H2(field, grid, k));
    } else if (c == "cons") {
      reports.push_back(check_conservative_sprin(field, m, grid));
    } else if (c == "inv1" || c == "inv2") {
      reports.push_back(check_invariant_sprin(field, c == "inv1" ? 1 : 2, m, grid));
    } else if (c == "lyap") {
      const LyapunovFn g(parse_lyapunov_kind(opt.at("lyap_g").get<std::string>()), field.dim(), grid.n0);
      reports.push_back(check_lyapunov(field, g, mode_from(opt.at("lyap_mode").get<std::string>(), "/options/lyap_mode"), m, grid));
    } else if (c == "dim2") {
      if (field.dim() != 2) throw ConfigError("/options/conditions", "dim2 needs a 2-dimensional field");
      reports.push_back(check_dim2(field, mode_from(opt.at("dim2_mode").get<std::string>(), "/options/dim2_mode"), m, grid));
    } else {
      throw ConfigError("/options/conditions", "unknown condition '" + c + "' (h2, cons, inv1, inv2, lyap, dim2)");
    }
  }
  Json arr = Json::array();
  for (const auto& r : reports) {
    arr.push_back(to_json(r));
    o.verdicts[r.id] = verdict(r.passed);
    o.passed = o.passed && r.passed;
  }
  o.report = Json{{"conditions", std::move(arr)}};
  o.csv = margins_csv(reports);
  return o;
}

Outcome exec_simulate(const CoefficientField& field, const SimConfig& cfg, const Json& opt, std::size_t threads) {
  Outcome o;
  const SimResult sim = euler_maruyama(field, cfg, threads);
  Json snaps = Json::array();
  for (const auto& m : sim.snapshots) {
    Json s{{"t", m.time()}, {"n_alive", m.n_alive()}, {"n_dead", m.n_dead()}};
    if (m.n_alive() >= 2) s["moments"] = to_json(moments(m));
    snaps.push_back(std::move(s));
  }
  o.report = Json{{"resolved_sim", resolved_sim_to_json(sim.run)}, {"snapshots", std::move(snaps)}};
  const std::size_t levels = opt.at("refine_levels").get<std::size_t>();
  if (levels >= 2) o.report["refinement"] = to_json(refine_shared_noise(field, cholesky_field(field), cfg, levels, threads));
  if (sim.snapshots.back().n_alive() == 0) o.report["warning"] = "every path is dead at T";
  o.particles = particles_csv(sim);
  o.verdicts["simulate"] = "PASS";
  return o;
}

Outcome exec_verify(const CoefficientField& field, const SimConfig& cfg, const Json& opt, std::size_t threads) {
  Outcome o;
  const auto tests = opt.at("tests").get<std::vector<std::string>>();
  for (const auto& t : tests)
    if (t != "fp" && t != "martingale" && t != "uniqueness")
      throw ConfigError("/options/tests", "unknown test '" + t + "' (fp, martingale, uniqueness)");
  const double c = opt.at("C").get<double>();
  const auto bank = default_bank(field.dim(), opt.at("bank_scale").get<double>());
  const SimResult sim = euler_maruyama(field, cfg, threads);
  Json r{{"resolved_sim", resolved_sim_to_json(sim.run)}};

  auto has = [&](const char* name) { return std::find(tests.begin(), tests.end(), name) != tests.end(); };
  if (has("fp")) {
    Json arr = Json::array();
    bool ok = true;
    for (const auto& phi : bank) {
      const ResidualReport rep = fp_residual(field, sim, phi, opt.at("fp_t").get<double>(), c);
      Json j = to_json(rep);
      j["phi"] = Json{{"center", phi.center()}, {"radius", phi.radius()}};
      arr.push_back(std::move(j));
      ok = ok && rep.passed;
    }
    r["fp"] = std::move(arr);
    o.verdicts["fp"] = verdict(ok);
    o.passed = o.passed && ok;
  }
  if (has("martingale")) {
    const double s = opt.at("martingale_s").get<double>();
    const double t = opt.at("fp_t").get<double>();
    const auto weights = martingale_weight_bank(sim.at(s));
    Json arr = Json::array();
    bool ok = true;
    for (const auto& f : bank)
      for (const auto& h : weights) {
        const ResidualReport rep =
            martingale_residual(field, sim, f, s, t, [&h](std::span<const double> y) { return h.value(y); }, c);
        Json j = to_json(rep);
        j["f"] = Json{{"center", f.center()}, {"radius", f.radius()}};
        j["h"] = Json{{"center", h.center()}, {"radius", h.radius()}};
        arr.push_back(std::move(j));
        ok = ok && rep.passed;
      }
    r["martingale"] = std::move(arr);
    o.verdicts["martingale"] = verdict(ok);
    o.passed = o.passed && ok;
  }
  if (has("uniqueness")) {
    SimConfig b = cfg;
    b.dt = opt.at("dt_b").get<double>();
    b.seed = opt.at("seed_b").get<std::uint64_t>();
    const SimResult sim_b = euler_maruyama(field, b, threads);
    const UniquenessReport u = uniqueness_compare(sim, sim_b, bank, opt.at("t_list").get<std::vector<double>>(), c,
                                                  opt.at("ks_threshold").get<double>());
    r["uniqueness"] = to_json(u);
    r["uniqueness"]["resolved_sim_b"] = resolved_sim_to_json(sim_b.run);
    o.verdicts["uniqueness"] = verdict(u.passed);
    o.passed = o.passed && u.passed;
  }
  o.report = std::move(r);

  std::string csv = "t";
  for (std::size_t k = 0; k < bank.size(); ++k) csv += ",bank_" + std::to_string(k);
  csv += ",alive_fraction\n";
  for (const auto& m : sim.snapshots) {
    csv += format_double(m.time());
    for (const auto& phi : bank) csv += ',' + format_double(m.n_alive() ? integrate(m, phi).value : 0.0);
    csv += ',' + format_double(m.alive_fraction()) + '\n';
  }
  o.csv = std::move(csv);
  return o;
}

Outcome exec_ergodic(const CoefficientField& field, const SimConfig& cfg, const Json& opt, std::size_t threads) {
  Outcome o;
  std::vector<BallSpec> balls;
  for (const auto& b : opt.at("balls")) balls.push_back(BallSpec{b.at("center").get<Point>(), b.at("radius").get<double>()});
  const auto bank = default_bank(field.dim(), opt.at("bank_scale").get<double>());
  const ErgodicReport rep =
      ergodic_check(field, cfg, bank, balls, opt.at("window").get<double>(), opt.at("C").get<double>(), threads);
  o.report = to_json(rep);
  o.csv = ergodic_csv(rep);
  o.verdicts["stationarity"] = verdict(rep.stationarity_passed);
  o.verdicts["convergence"] = verdict(rep.converged_all);
  o.passed = rep.passed;
  return o;
}

std::string wall_clock() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void emit(const std::string& path, const std::string& content, std::ostream& out) {
  if (path.empty() || path == "-") out << content;
  else write_atomic(path, content);
}

int execute(const std::string& command, const Flags& f, std::ostream& out, std::ostream& err) {
  Json run;
  if (!f.manifest.empty()) {
    const Json manifest = load_json(f.manifest);
    if (!manifest.contains("resolved")) throw ConfigError("/resolved", "manifest has no resolved run");
    run = manifest.at("resolved");
    if (run.value("command", "") != command)
      throw ConfigError("/resolved/command", "manifest was written by '" + run.value("command", "") + "'");
    if (f.seed) {
      if (run.contains("sim")) run["sim"]["seed"] = *f.seed;
      if (run["options"].contains("seed")) run["options"]["seed"] = *f.seed;
    }
  } else {
    run = resolve(command, f);
  }

  const FieldBundle field = load_field(run.at("field"));
  std::optional<SimConfig> sim;
  if (run.contains("sim")) sim = sim_config_from_json(run.at("sim"));
  const Json& opt = run.at("options");

  Outcome o;
  if (command == "factor") o = exec_factor(field.field, opt);
  else if (command == "check") o = exec_check(field.field, opt);
  else if (command == "simulate") o = exec_simulate(field.field, *sim, opt, f.threads);
  else if (command == "verify") o = exec_verify(field.field, *sim, opt, f.threads);
  else o = exec_ergodic(field.field, *sim, opt, f.threads);

  Json report{{"tool", "fpk"}, {"version", FPK_VERSION}, {"command", command}, {"resolved", run}};
  for (auto& [k, v] : o.report.items()) report[k] = v;
  report["verdicts"] = o.verdicts;
  report["verdict"] = verdict(o.passed);

  emit(f.report, dump(report), out);
  if (!f.csv.empty() && !o.csv.empty()) write_atomic(f.csv, o.csv);
  if (command == "simulate") {
    if (f.out.empty()) err << "note: no --out given; particles not written\n";
    else write_atomic(f.out, o.particles);
  }
  if (!f.manifest_out.empty()) {
    Json outputs{{"report", f.report.empty() ? "-" : f.report}};
    if (!f.csv.empty()) outputs["csv"] = f.csv;
    if (!f.out.empty()) outputs["particles"] = f.out;
    Json seed = nullptr;
    if (run.contains("sim")) seed = run["sim"]["seed"];
    else if (run["options"].contains("seed")) seed = run["options"]["seed"];
    else if (run["options"].contains("probe") && !run["options"]["probe"].is_null()) seed = run["options"]["probe"]["seed"];
    Json manifest{{"tool", "fpk"},          {"version", FPK_VERSION}, {"command", command},
                  {"resolved", run},        {"seed", seed},           {"wall_clock", wall_clock()},
                  {"verdicts", o.verdicts}, {"verdict", verdict(o.passed)}, {"outputs", outputs}};
    write_atomic(f.manifest_out, dump(manifest));
  }
  return o.passed ? kExitPass : kExitFail;
}

void add_common(CLI::App* sub, Flags& f, bool needs_sim) {
  sub->add_option("--config", f.config, "field config (JSON)");
  if (needs_sim) sub->add_option("--sim", f.sim, "simulation config (JSON)");
  sub->add_option("--report", f.report, "report JSON path (default: stdout)");
  sub->add_option("--seed", f.seed, "override the config seed");
  sub->add_option("--threads", f.threads, "worker threads (default: FPK_THREADS or hardware count)");
  sub->add_option("--manifest", f.manifest, "replay a run from its manifest");
  sub->add_option("--manifest-out", f.manifest_out, "write a run manifest");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fokker-Planck well-posedness toolkit: factor, check, simulate, verify, ergodic", "fpk"};
  app.set_version_flag("--version", FPK_VERSION);
  app.require_subcommand(1);
  Flags f;

  auto* factor = app.add_subcommand("factor", "Cholesky factor of A at a point, optional regularity probe");
  add_common(factor, f, false);
  factor->add_option("--point", f.point, "point, e.g. \"1,0\"");
  factor->add_option("--probe", f.probe, "ball JSON {center, radius, h, n_points, seed}");
  factor->add_option("--ellipticity-samples", f.ellipticity_samples, "ellipticity samples in the probe ball");

  auto* check = app.add_subcommand("check", "growth and Lyapunov conditions on shell grids");
  add_common(check, f, false);
  check->add_option("--csv", f.csv, "per-sample margins CSV");
  check->add_option("--conditions", f.conditions, "comma list of h2,cons,inv1,inv2,lyap,dim2");
  check->add_option("--M", f.m, "constant M");
  check->add_option("--N0", f.n0, "inner radius N0");
  check->add_option("--rmax", f.rmax, "outer radius R_max");
  check->add_option("--directions", f.directions, "directions per shell (default 64 d)");
  check->add_option("--K", f.k, "evaluate h2 margins at this K (default: minimal feasible K)");
  check->add_option("--lyap-g", f.lyap_g, "V_log1p, g_log_outer, g_half_log_outer, g_quad");
  check->add_option("--lyap-mode", f.lyap_mode, "conservative or invariant");
  check->add_option("--dim2-mode", f.dim2_mode, "conservative or invariant");

  auto* simulate = app.add_subcommand("simulate", "Euler-Maruyama ensemble");
  add_common(simulate, f, true);
  simulate->add_option("--out", f.out, "particles CSV (snapshot_t,path_id,alive,x1..xd)");
  simulate->add_option("--refine-levels", f.refine_levels, "also run shared-noise refinement with this many levels");

  auto* verify = app.add_subcommand("verify", "weak identity, martingale, and cross-run agreement tests");
  add_common(verify, f, true);
  verify->add_option("--csv", f.csv, "bank integrals over time CSV");
  verify->add_option("--tests", f.tests, "comma list of fp,martingale,uniqueness");
  verify->add_option("--bank-scale", f.bank_scale, "test bump bank scale (default 2)");
  verify->add_option("--t", f.fp_t, "residual time (default T)");
  verify->add_option("--s", f.mart_s, "martingale start time (default T/4)");
  verify->add_option("--dt-b", f.dt_b, "second run step (default dt/2)");
  verify->add_option("--seed-b", f.seed_b, "second run seed (default seed + 1)");
  verify->add_option("--t-list", f.t_list, "comparison times (default T/4,T/2,T)");
  verify->add_option("--C", f.c, "discretization allowance constant");
  verify->add_option("--ks", f.ks, "KS threshold");

  auto* ergodic = app.add_subcommand("ergodic", "long-time behaviour and stationarity");
  add_common(ergodic, f, true);
  ergodic->add_option("--csv", f.csv, "time series CSV");
  ergodic->add_option("--balls", f.balls, "balls E, e.g. \"0,0:1;0,0:2\" (default unit ball at 0)");
  ergodic->add_option("--window", f.window, "tail window fraction");
  ergodic->add_option("--bank-scale", f.bank_scale, "test bump bank scale (default 1)");
  ergodic->add_option("--C", f.c, "discretization allowance constant");

  if (!args.empty() && !args.front().empty() && args.front()[0] != '-') {
    const auto subs = app.get_subcommands([](CLI::App*) { return true; });
    const bool known = std::any_of(subs.begin(), subs.end(), [&](CLI::App* s) { return s->get_name() == args.front(); });
    if (!known) {
      err << "error: unknown subcommand '" << args.front() << "'\n\n" << app.help();
      return kExitUsage;
    }
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      out << (dynamic_cast<const CLI::CallForVersion*>(&e) ? std::string(FPK_VERSION) + "\n" : app.help());
      return kExitPass;
    }
    err << "error: " << e.what() << "\n\n" << app.help();
    return kExitUsage;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return execute(command, f, out, err);
  } catch (const NotPositiveDefinite& e) {
    err << "error: " << e.what() << "\n";
    return kExitFail;
  } catch (const Json::exception& e) {
    err << "error: malformed manifest or config: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  }
}

int run(int argc, const char* const* argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, std::cout, std::cerr);
}

}  // namespace fpk::cli
