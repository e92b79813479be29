#include "fpk/expr.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <system_error>

#include "fpk/errors.hpp"

namespace fpk {
namespace {

using Kind = ExprNode::Kind;
using NodePtr = std::unique_ptr<ExprNode>;

NodePtr make(Kind k) {
  auto n = std::make_unique<ExprNode>();
  n->kind = k;
  return n;
}

NodePtr make_binary(Kind k, NodePtr lhs, NodePtr rhs) {
  auto n = make(k);
  n->lhs = std::move(lhs);
  n->rhs = std::move(rhs);
  return n;
}

class Parser {
 public:
  Parser(std::string_view src, std::size_t dim) : src_(src), dim_(dim) {}

  NodePtr parse() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("empty expression", pos_);
    auto root = parse_sum();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return root;
  }

 private:
  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_sum() {
    auto lhs = parse_product();
    for (;;) {
      if (accept('+'))
        lhs = make_binary(Kind::add, std::move(lhs), parse_product());
      else if (accept('-'))
        lhs = make_binary(Kind::sub, std::move(lhs), parse_product());
      else
        return lhs;
    }
  }

  NodePtr parse_product() {
    auto lhs = parse_unary();
    for (;;) {
      if (accept('*'))
        lhs = make_binary(Kind::mul, std::move(lhs), parse_unary());
      else if (accept('/'))
        lhs = make_binary(Kind::div, std::move(lhs), parse_unary());
      else
        return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) {
      auto n = make(Kind::negate);
      n->lhs = parse_unary();
      return n;
    }
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    auto base = parse_primary();
    if (accept('^')) return make_binary(Kind::pow, std::move(base), parse_unary());
    return base;
  }

  NodePtr parse_primary() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of expression", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      auto inner = parse_sum();
      if (!accept(')')) throw ParseError("expected ')'", pos_);
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(std::string("unexpected '") + c + "'", pos_);
  }

  NodePtr parse_number() {
    const std::size_t start = pos_;
    auto digits = [&] {
      while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    };
    digits();
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      digits();
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < src_.size() && (src_[pos_] == '+' || src_[pos_] == '-')) ++pos_;
      if (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
        digits();
      else
        pos_ = save;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (ec != std::errc() || ptr != src_.data() + pos_) throw ParseError("malformed number", start);
    auto n = make(Kind::number);
    n->value = v;
    return n;
  }

  NodePtr parse_identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);

    if (name == "normsq") return make(Kind::normsq);

    if (name.size() >= 2 && name[0] == 'x') {
      std::size_t idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc() && ptr == name.data() + name.size()) {
        if (idx == 0) throw ParseError("coordinate indices start at x1", start);
        if (idx > dim_)
          throw ParseError("variable index exceeds dimension: " + std::string(name) + " with d=" +
                               std::to_string(dim_),
                           start);
        auto n = make(Kind::variable);
        n->index = idx - 1;
        return n;
      }
    }

    static constexpr std::pair<std::string_view, Func> kFuncs[] = {
        {"exp", Func::exp}, {"ln", Func::ln},   {"sqrt", Func::sqrt},
        {"sin", Func::sin}, {"cos", Func::cos}, {"abs", Func::abs}};
    for (auto [fname, f] : kFuncs) {
      if (name == fname) {
        if (!accept('(')) throw ParseError("expected '(' after " + std::string(name), pos_);
        auto n = make(Kind::call);
        n->func = f;
        n->lhs = parse_sum();
        if (!accept(')')) throw ParseError("expected ')'", pos_);
        return n;
      }
    }
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view src_;
  std::size_t dim_;
  std::size_t pos_ = 0;
};

double checked(double v) {
  if (!std::isfinite(v)) throw DomainError("expression evaluated to a non-finite value");
  return v;
}

double eval_node(const ExprNode& n, std::span<const double> x) {
  switch (n.kind) {
    case Kind::number:
      return n.value;
    case Kind::variable:
      return x[n.index];
    case Kind::normsq: {
      double s = 0.0;
      for (double v : x) s += v * v;
      return checked(s);
    }
    case Kind::negate:
      return -eval_node(*n.lhs, x);
    case Kind::add:
      return checked(eval_node(*n.lhs, x) + eval_node(*n.rhs, x));
    case Kind::sub:
      return checked(eval_node(*n.lhs, x) - eval_node(*n.rhs, x));
    case Kind::mul:
      return checked(eval_node(*n.lhs, x) * eval_node(*n.rhs, x));
    case Kind::div: {
      const double num = eval_node(*n.lhs, x);
      const double den = eval_node(*n.rhs, x);
      if (den == 0.0) throw DomainError("division by zero");
      return checked(num / den);
    }
    case Kind::pow:
      return checked(std::pow(eval_node(*n.lhs, x), eval_node(*n.rhs, x)));
    case Kind::call: {
      const double a = eval_node(*n.lhs, x);
      switch (n.func) {
        case Func::exp:
          return checked(std::exp(a));
        case Func::ln:
          if (a <= 0.0) throw DomainError("ln of non-positive argument");
          return std::log(a);
        case Func::sqrt:
          if (a < 0.0) throw DomainError("sqrt of negative argument");
          return std::sqrt(a);
        case Func::sin:
          return std::sin(a);
        case Func::cos:
          return std::cos(a);
        case Func::abs:
          return std::abs(a);
      }
    }
  }
  throw DomainError("corrupt expression node");
}

int precedence(const ExprNode& n) {
  switch (n.kind) {
    case Kind::add:
    case Kind::sub:
      return 1;
    case Kind::mul:
    case Kind::div:
      return 2;
    case Kind::negate:
      return 3;
    case Kind::pow:
      return 4;
    default:
      return 5;
  }
}

const char* func_name(Func f) {
  switch (f) {
    case Func::exp: return "exp";
    case Func::ln: return "ln";
    case Func::sqrt: return "sqrt";
    case Func::sin: return "sin";
    case Func::cos: return "cos";
    case Func::abs: return "abs";
  }
  return "?";
}

void print(const ExprNode& n, std::string& out);

void print_wrapped(const ExprNode& n, bool parens, std::string& out) {
  if (parens) out += '(';
  print(n, out);
  if (parens) out += ')';
}

void print(const ExprNode& n, std::string& out) {
  const int p = precedence(n);
  switch (n.kind) {
    case Kind::number: {
      char buf[32];
      auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, n.value);
      out.append(buf, ptr);
      return;
    }
    case Kind::variable:
      out += 'x';
      out += std::to_string(n.index + 1);
      return;
    case Kind::normsq:
      out += "normsq";
      return;
    case Kind::negate:
      out += '-';
      print_wrapped(*n.lhs, precedence(*n.lhs) < 3, out);
      return;
    case Kind::pow:
      print_wrapped(*n.lhs, precedence(*n.lhs) <= 4, out);
      out += '^';
      print_wrapped(*n.rhs, precedence(*n.rhs) < 3, out);
      return;
    case Kind::call:
      out += func_name(n.func);
      out += '(';
      print(*n.lhs, out);
      out += ')';
      return;
    default: {
      const char op = n.kind == Kind::add ? '+' : n.kind == Kind::sub ? '-' : n.kind == Kind::mul ? '*' : '/';
      print_wrapped(*n.lhs, precedence(*n.lhs) < p, out);
      out += ' ';
      out += op;
      out += ' ';
      print_wrapped(*n.rhs, precedence(*n.rhs) <= p, out);
      return;
    }
  }
}

std::size_t max_var(const ExprNode* n) {
  if (!n) return 0;
  std::size_t m = n->kind == Kind::variable ? n->index + 1 : 0;
  return std::max({m, max_var(n->lhs.get()), max_var(n->rhs.get())});
}

bool depends_on_x(const ExprNode* n) {
  if (!n) return false;
  if (n->kind == Kind::variable || n->kind == Kind::normsq) return true;
  return depends_on_x(n->lhs.get()) || depends_on_x(n->rhs.get());
}

}  // namespace

Expr parse_expr(std::string_view src, std::size_t dim) {
  Parser p(src, dim);
  std::shared_ptr<const ExprNode> root = p.parse();
  return Expr(std::move(root), dim);
}

std::size_t Expr::max_variable() const noexcept { return max_var(root_.get()); }

bool Expr::is_constant() const noexcept { return !depends_on_x(root_.get()); }

double Expr::eval(std::span<const double> x) const {
  if (!root_) throw PreconditionError("evaluating an empty expression");
  if (x.size() != dim_)
    throw PreconditionError("point dimension " + std::to_string(x.size()) +
                            " does not match expression dimension " + std::to_string(dim_));
  return checked(eval_node(*root_, x));
}

std::string Expr::to_string() const {
  std::string out;
  if (root_) print(*root_, out);
  return out;
}

double eval_expr(const Expr& e, std::span<const double> x) { return e.eval(x); }

}  // namespace fpk
