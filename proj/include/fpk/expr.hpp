#pragma once

// Coefficient DSL: arithmetic over x1..xd, normsq, and a fixed set of functions.

#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <string_view>

namespace fpk {

enum class Func { exp, ln, sqrt, sin, cos, abs };

struct ExprNode;

/// Immutable expression tree. Copies share the tree; evaluation is reentrant.
class Expr {
 public:
  Expr() = default;

  /// Largest coordinate index referenced (x3 -> 3), 0 if none.
  std::size_t max_variable() const noexcept;
  /// True when the value does not depend on x (no coordinates, no normsq).
  bool is_constant() const noexcept;
  /// Dimension the expression was parsed against.
  std::size_t dim() const noexcept { return dim_; }
  bool empty() const noexcept { return root_ == nullptr; }

  /// Raises DomainError on ln/sqrt of a negative (or ln of 0), division by zero, non-finite result.
  double eval(std::span<const double> x) const;

  /// Canonical text form: minimal parentheses, shortest round-trip literals.
  std::string to_string() const;

  const ExprNode* root() const noexcept { return root_.get(); }

 private:
  friend Expr parse_expr(std::string_view, std::size_t);
  Expr(std::shared_ptr<const ExprNode> root, std::size_t dim) : root_(std::move(root)), dim_(dim) {}

  std::shared_ptr<const ExprNode> root_;
  std::size_t dim_ = 0;
};

struct ExprNode {
  enum class Kind { number, variable, normsq, negate, add, sub, mul, div, pow, call };
  Kind kind = Kind::number;
  double value = 0.0;     // number
  std::size_t index = 0;  // variable, 0-based
  Func func = Func::exp;  // call
  std::unique_ptr<ExprNode> lhs;
  std::unique_ptr<ExprNode> rhs;
};

/// Precedence: ^ (right-assoc) > unary minus > * / > + -; same-level binary ops are left-assoc.
/// Throws ParseError for syntax errors, unknown identifiers, and variable indices above `dim`.
Expr parse_expr(std::string_view src, std::size_t dim);

double eval_expr(const Expr& e, std::span<const double> x);

}  // namespace fpk
