#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "fpk/chol.hpp"
#include "fpk/cli.hpp"
#include "fpk/config.hpp"
#include "fpk/errors.hpp"
#include "fpk/fpcheck.hpp"
#include "fpk/lyapunov.hpp"
#include "fpk/measure.hpp"
#include "fpk/report.hpp"
#include "fpk/sde.hpp"

namespace py = pybind11;
using namespace fpk;

namespace {

Matrix to_matrix(const std::vector<std::vector<double>>& rows) {
  const std::size_t n = rows.size();
  Matrix m(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (rows[i].size() != n) throw PreconditionError("matrix must be square");
    for (std::size_t j = 0; j < n; ++j) m(i, j) = rows[i][j];
  }
  return m;
}

std::vector<std::vector<double>> to_rows(const Matrix& m) {
  std::vector<std::vector<double>> rows(m.size(), std::vector<double>(m.size()));
  for (std::size_t i = 0; i < m.size(); ++i)
    for (std::size_t j = 0; j < m.size(); ++j) rows[i][j] = m(i, j);
  return rows;
}

struct PyField {
  FieldBundle bundle;
  explicit PyField(const std::string& config_json) : bundle(load_field(parse_json(config_json))) {}
  const CoefficientField& field() const { return bundle.field; }
};

GridSpec grid(double n0, double r_max, std::size_t directions) {
  GridSpec g;
  g.n0 = n0;
  g.r_max = r_max;
  g.directions = directions;
  return g;
}

SimConfig sim_from(const std::string& sim_json) { return sim_config_from_json(parse_json(sim_json)); }

py::tuple simulate(const PyField& f, const std::string& sim_json, std::size_t threads) {
  SimResult res;
  {
    py::gil_scoped_release release;
    res = euler_maruyama(f.field(), sim_from(sim_json), threads);
  }
  const std::size_t n_snap = res.snapshots.size(), n = res.run.config.n_paths, d = f.field().dim();
  py::array_t<double> times(static_cast<py::ssize_t>(n_snap));
  py::array_t<double> pos({n_snap, n, d});
  py::array_t<bool> alive({n_snap, n});
  auto t = times.mutable_unchecked<1>();
  auto x = pos.mutable_unchecked<3>();
  auto a = alive.mutable_unchecked<2>();
  for (std::size_t k = 0; k < n_snap; ++k) {
    const auto& m = res.snapshots[k];
    t(k) = m.time();
    for (std::size_t p = 0; p < n; ++p) {
      a(k, p) = m.alive(p);
      const auto xp = m.position(p);
      for (std::size_t i = 0; i < d; ++i) x(k, p, i) = xp[i];
    }
  }
  return py::make_tuple(times, pos, alive);
}

}  // namespace

PYBIND11_MODULE(_fpk, m) {
  m.doc() = "Fokker-Planck-Kolmogorov verification toolkit (native core)";

  static py::exception<Error> base(m, "Error");
  static py::exception<ConfigError> config_error(m, "ConfigError", base.ptr());
  static py::exception<NotPositiveDefinite> npd(m, "NotPositiveDefinite", base.ptr());
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      config_error(e.what());
    } catch (const NotPositiveDefinite& e) {
      npd(e.what());
    } catch (const Error& e) {
      base(e.what());
    }
  });

  m.def("cholesky", [](const std::vector<std::vector<double>>& a) { return to_rows(cholesky_point(to_matrix(a)).matrix()); },
        "Lower-triangular sigma with sigma sigma^T = A (columnwise).");
  m.def("sym_eigs", [](const std::vector<std::vector<double>>& a) { return sym_eigs(to_matrix(a)); });
  m.def("spectral_gap_2d", [](const std::vector<std::vector<double>>& a) {
    const auto g = spectral_gap_2d(to_matrix(a));
    return py::make_tuple(g.gap, g.bound);
  });

  py::class_<PyField>(m, "Field")
      .def(py::init<const std::string&>(), py::arg("config_json"))
      .def_property_readonly("dim", [](const PyField& f) { return f.field().dim(); })
      .def_property_readonly("resolved", [](const PyField& f) { return f.bundle.resolved.dump(); })
      .def("diffusion", [](const PyField& f, const Point& x) { return to_rows(f.field().diffusion(x)); })
      .def("drift", [](const PyField& f, const Point& x) { return f.field().drift(x); })
      .def("sigma", [](const PyField& f, const Point& x) { return to_rows(cholesky_field(f.field()).at(x).matrix()); })
      .def("lv", [](const PyField& f, const Point& y) { return LV(f.field(), y); })
      .def("apply_bump", [](const PyField& f, const Point& center, double radius, const Point& x) {
        return apply_L(f.field(), Bump(center, radius), x);
      });

  m.def(
      "check",
      [](const PyField& f, const std::string& condition, double m_const, double n0, double r_max,
         std::size_t directions) {
        const GridSpec g = grid(n0, r_max, directions);
        ConditionReport r;
        if (condition == "h2") r = check_H2(f.field(), g);
        else if (condition == "cons") r = check_conservative_sprin(f.field(), m_const, g);
        else if (condition == "inv1") r = check_invariant_sprin(f.field(), 1, m_const, g);
        else if (condition == "inv2") r = check_invariant_sprin(f.field(), 2, m_const, g);
        else throw PreconditionError("condition must be h2, cons, inv1 or inv2");
        return to_json(r).dump();
      },
      py::arg("field"), py::arg("condition"), py::arg("M") = 1.0, py::arg("N0") = 4.0, py::arg("R_max") = 1000.0,
      py::arg("directions") = 0);

  m.def("simulate", &simulate, py::arg("field"), py::arg("sim_json"), py::arg("threads") = 0,
        "Returns (times, positions[snapshot, path, coord], alive[snapshot, path]).");

  m.def(
      "fp_residuals",
      [](const PyField& f, const std::string& sim_json, double bank_scale, double t, std::size_t threads) {
        SimConfig cfg = sim_from(sim_json);
        Json out = Json::array();
        {
          py::gil_scoped_release release;
          const SimResult res = euler_maruyama(f.field(), cfg, threads);
          for (const auto& phi : default_bank(f.field().dim(), bank_scale))
            out.push_back(to_json(fp_residual(f.field(), res, phi, t < 0 ? res.run.config.horizon : t)));
        }
        return out.dump();
      },
      py::arg("field"), py::arg("sim_json"), py::arg("bank_scale") = 2.0, py::arg("t") = -1.0, py::arg("threads") = 0);

  m.def(
      "run_cli",
      [](const std::vector<std::string>& args) {
        std::ostringstream out, err;
        int code;
        {
          py::gil_scoped_release release;
          code = cli::run(args, out, err);
        }
        return py::make_tuple(code, out.str(), err.str());
      },
      py::arg("args"), "Runs the fpk command line in-process; returns (exit_code, stdout, stderr).");

  m.attr("discretization_c") = kDiscretizationC;
}
