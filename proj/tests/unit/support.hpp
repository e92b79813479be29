#pragma once

#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "fpk/field.hpp"

namespace fpk::test {

inline CoefficientField catalog(const std::string& name, std::size_t d = 2,
                                std::map<std::string, double> params = {}) {
  FieldConfig cfg;
  cfg.dim = d;
  cfg.catalog = name;
  cfg.params = std::move(params);
  return build_field(cfg);
}

inline CoefficientField expression(std::size_t d, std::map<std::string, std::string> a,
                                   std::vector<std::string> g) {
  FieldConfig cfg;
  cfg.dim = d;
  cfg.a_entries = std::move(a);
  cfg.g_entries = std::move(g);
  return build_field(cfg);
}

/// L f from values of f only: central differences for gradient and Hessian.
inline double fd_generator(const CoefficientField& field, const std::function<double(const Point&)>& f,
                           const Point& x, double h) {
  const std::size_t d = x.size();
  const Matrix a = field.diffusion(x);
  const Point g = field.drift(x);
  auto shifted = [&](std::size_t i, double si, std::size_t j, double sj) {
    Point y = x;
    y[i] += si;
    y[j] += sj;
    return f(y);
  };
  const double f0 = f(x);
  double out = 0.0;
  for (std::size_t i = 0; i < d; ++i) {
    const double grad = (shifted(i, h, i, 0) - shifted(i, -h, i, 0)) / (2 * h);
    out += g[i] * grad;
    for (std::size_t j = 0; j < d; ++j) {
      double hij;
      if (i == j) {
        hij = (shifted(i, h, i, 0) - 2 * f0 + shifted(i, -h, i, 0)) / (h * h);
      } else {
        hij = (shifted(i, h, j, h) - shifted(i, h, j, -h) - shifted(i, -h, j, h) + shifted(i, -h, j, -h)) /
              (4 * h * h);
      }
      out += 0.5 * a(i, j) * hij;
    }
  }
  return out;
}

inline Point uniform_point(std::mt19937_64& gen, std::size_t d, double lo, double hi) {
  std::uniform_real_distribution<double> u(lo, hi);
  Point x(d);
  for (auto& v : x) v = u(gen);
  return x;
}

inline double rel_err(double got, double want, double floor = 1.0) {
  return std::abs(got - want) / std::max(floor, std::abs(want));
}

}  // namespace fpk::test
