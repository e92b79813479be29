#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "fpk/errors.hpp"
#include "fpk/expr.hpp"

using fpk::parse_expr;

namespace {

double at(const std::string& src, std::vector<double> x) { return parse_expr(src, x.size()).eval(x); }

struct Template {
  std::string text;
  std::function<double(double, double, double)> closed;  // (x1, x2, coefficient)
};

std::string lit(double c) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", c);
  return buf;
}

}  // namespace

TEST_CASE("polynomial and normsq examples") {
  CHECK(at("x1*x1 + 1", {2, 0}) == 5.0);
  CHECK(at("2*(1+normsq)", {1, 1, 1}) == 8.0);
  CHECK(at("ln(1+normsq)", {0, 0}) == 0.0);
}

TEST_CASE("precedence and associativity") {
  CHECK(at("1 - 2 - 3", {0, 0}) == -4.0);
  CHECK(at("8 / 4 / 2", {0, 0}) == 1.0);
  CHECK(at("2 ^ 3 ^ 2", {0, 0}) == 512.0);
  CHECK(at("-2 ^ 2", {0, 0}) == -4.0);
  CHECK(at("2 * -x1", {3, 0}) == -6.0);
  CHECK(at("1 + 2 * 3 ^ 2", {0, 0}) == 19.0);
  CHECK(at("(1 + 2) * 3", {0, 0}) == 9.0);
  CHECK(at("1.5e2 + .5", {0, 0}) == 150.5);
}

TEST_CASE("parse errors carry a position") {
  CHECK_THROWS_AS(parse_expr("x3", 2), fpk::ParseError);
  CHECK_THROWS_AS(parse_expr("", 2), fpk::ParseError);
  CHECK_THROWS_AS(parse_expr("foo(x1)", 2), fpk::ParseError);
  CHECK_THROWS_AS(parse_expr("x0", 2), fpk::ParseError);
  CHECK_THROWS_AS(parse_expr("(1 + x1", 2), fpk::ParseError);
  try {
    parse_expr("1 + * 2", 2);
    FAIL("expected a parse error");
  } catch (const fpk::ParseError& e) {
    CHECK(e.position() == 4);
  }
}

TEST_CASE("domain errors") {
  CHECK_THROWS_AS(at("1/x1", {0, 1}), fpk::DomainError);
  CHECK_THROWS_AS(at("ln(x1)", {0, 1}), fpk::DomainError);
  CHECK_THROWS_AS(at("ln(x1)", {-1, 1}), fpk::DomainError);
  CHECK_THROWS_AS(at("sqrt(x1)", {-1, 1}), fpk::DomainError);
  CHECK_THROWS_AS(at("exp(x1)", {1000, 0}), fpk::DomainError);
  CHECK(at("sqrt(x1)", {0, 1}) == 0.0);
}

TEST_CASE("constants and referenced variables") {
  CHECK(parse_expr("4", 2).is_constant());
  CHECK(parse_expr("exp(2) * 3", 2).is_constant());
  CHECK_FALSE(parse_expr("normsq", 2).is_constant());
  CHECK(parse_expr("x2 + x1", 3).max_variable() == 2);
  CHECK(parse_expr("1", 3).max_variable() == 0);
}

TEST_CASE("evaluation is bit-reproducible") {
  const auto e = parse_expr("sin(x1)*exp(-normsq) + sqrt(1 + x2^2)/3", 2);
  const std::vector<double> x{0.3721, -1.25};
  const double a = e.eval(x);
  const double b = e.eval(x);
  CHECK(std::memcmp(&a, &b, sizeof a) == 0);
}

TEST_CASE("random catalog expressions against closed forms") {
  const std::vector<Template> templates = {
      {"C*x1 + x2", [](double a, double b, double c) { return c * a + b; }},
      {"C*(1 + normsq)", [](double a, double b, double c) { return c * (1 + a * a + b * b); }},
      {"-C*x1", [](double a, double, double c) { return -c * a; }},
      {"x1^3 + C", [](double a, double, double c) { return a * a * a + c; }},
      {"1 + x2^2", [](double, double b, double) { return 1 + b * b; }},
      {"ln(1 + normsq) * C", [](double a, double b, double c) { return std::log(1 + a * a + b * b) * c; }},
      {"exp(-C*normsq)", [](double a, double b, double c) { return std::exp(-c * (a * a + b * b)); }},
      {"sqrt(C + x1^2)", [](double a, double, double c) { return std::sqrt(c + a * a); }},
      {"sin(C*x1)*cos(x2)", [](double a, double b, double c) { return std::sin(c * a) * std::cos(b); }},
      {"abs(x1 - C) + x2/C", [](double a, double b, double c) { return std::abs(a - c) + b / c; }},
      {"normsq^2 / (C + normsq)",
       [](double a, double b, double c) {
         const double r2 = a * a + b * b;
         return r2 * r2 / (c + r2);
       }},
      {"C - x1*x2", [](double a, double b, double c) { return c - a * b; }},
  };
  std::mt19937_64 gen(20240611);
  std::uniform_real_distribution<double> coord(-2.0, 2.0);
  std::uniform_real_distribution<double> coef(0.25, 3.0);
  std::uniform_int_distribution<std::size_t> pick(0, templates.size() - 1);
  for (int k = 0; k < 100; ++k) {
    const auto& t = templates[pick(gen)];
    const double c = coef(gen);
    std::string src = t.text;
    for (std::size_t p; (p = src.find('C')) != std::string::npos;) src.replace(p, 1, lit(c));
    const std::vector<double> x{coord(gen), coord(gen)};
    const double want = t.closed(x[0], x[1], c);
    const double got = parse_expr(src, 2).eval(x);
    INFO(src);
    CHECK(std::abs(got - want) <= 1e-12 * std::max(1.0, std::abs(want)));
  }
}

TEST_CASE("printing is a fixed point on canonical forms") {
  const std::vector<std::string> sources = {
      "x1*x1 + 1", "2*(1+normsq)", "-x1", "x1 - (x2 - 3)", "(x1 - x2) - 3", "2^3^2", "(2^3)^2",
      "-(x1 + x2)", "exp(-normsq/2)", "1/(1 + x1^2)", "abs(x1)*sqrt(1 + x2)", "0.1 + 1e-7*x2",
      "(-x1)^2", "x1/(x2*3)", "ln(1 + normsq) - 2*x1*x2"};
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> coord(0.1, 1.5);
  for (const auto& s : sources) {
    const auto once = parse_expr(s, 2).to_string();
    const auto twice = parse_expr(once, 2).to_string();
    INFO(s, " -> ", once);
    CHECK(once == twice);
    for (int k = 0; k < 5; ++k) {
      const std::vector<double> x{coord(gen), coord(gen)};
      CHECK(parse_expr(s, 2).eval(x) == parse_expr(once, 2).eval(x));
    }
  }
}
