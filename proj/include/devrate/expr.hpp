#pragma once

// Small arithmetic expression language over state coordinates:
//   expr   := term (('+' | '-') term)*
//   term   := unary (('*' | '/') unary)*
//   unary  := '-' unary | power
//   power  := atom ('^' unary)?
//   atom   := number | name | name '(' expr ')' | '(' expr ')'
// Functions: exp log sqrt sin cos tanh sinh cosh abs. Derivatives are symbolic.

#include "devrate/error.hpp"
#include "devrate/types.hpp"

#include <cctype>
#include <cmath>
#include <map>
#include <memory>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>

namespace devrate::expr {

enum class Op { constant, variable, neg, add, sub, mul, div, pow, exp, log, sqrt, sin, cos, tanh, sinh, cosh, abs };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Node {
  Op op;
  double value = 0.0;  // constant
  int index = -1;      // variable
  NodePtr lhs, rhs;
};

inline NodePtr constant(double v) { return std::make_shared<const Node>(Node{Op::constant, v, -1, nullptr, nullptr}); }
inline NodePtr variable(int i) { return std::make_shared<const Node>(Node{Op::variable, 0.0, i, nullptr, nullptr}); }

inline bool is_const(const NodePtr& n, double v) { return n->op == Op::constant && n->value == v; }
inline bool is_const(const NodePtr& n) { return n->op == Op::constant; }

inline double apply_unary(Op op, double a) {
  switch (op) {
    case Op::neg: return -a;
    case Op::exp: return std::exp(a);
    case Op::log: return std::log(a);
    case Op::sqrt: return std::sqrt(a);
    case Op::sin: return std::sin(a);
    case Op::cos: return std::cos(a);
    case Op::tanh: return std::tanh(a);
    case Op::sinh: return std::sinh(a);
    case Op::cosh: return std::cosh(a);
    case Op::abs: return std::abs(a);
    default: return 0.0;
  }
}

inline double apply_binary(Op op, double a, double b) {
  switch (op) {
    case Op::add: return a + b;
    case Op::sub: return a - b;
    case Op::mul: return a * b;
    case Op::div: return a / b;
    case Op::pow:
      if (b == 2.0) return a * a;
      return std::pow(a, b);
    default: return 0.0;
  }
}

inline NodePtr unary(Op op, NodePtr a) {
  if (is_const(a)) return constant(apply_unary(op, a->value));
  if (op == Op::neg && a->op == Op::neg) return a->lhs;
  return std::make_shared<const Node>(Node{op, 0.0, -1, std::move(a), nullptr});
}

// Builders fold constants and drop neutral elements so derivative trees stay small.
inline NodePtr binary(Op op, NodePtr a, NodePtr b) {
  if (is_const(a) && is_const(b)) return constant(apply_binary(op, a->value, b->value));
  switch (op) {
    case Op::add:
      if (is_const(a, 0.0)) return b;
      if (is_const(b, 0.0)) return a;
      break;
    case Op::sub:
      if (is_const(b, 0.0)) return a;
      if (is_const(a, 0.0)) return unary(Op::neg, b);
      break;
    case Op::mul:
      if (is_const(a, 0.0) || is_const(b, 0.0)) return constant(0.0);
      if (is_const(a, 1.0)) return b;
      if (is_const(b, 1.0)) return a;
      break;
    case Op::div:
      if (is_const(a, 0.0)) return constant(0.0);
      if (is_const(b, 1.0)) return a;
      break;
    case Op::pow:
      if (is_const(b, 0.0)) return constant(1.0);
      if (is_const(b, 1.0)) return a;
      break;
    default: break;
  }
  return std::make_shared<const Node>(Node{op, 0.0, -1, std::move(a), std::move(b)});
}

inline NodePtr operator+(NodePtr a, NodePtr b) { return binary(Op::add, std::move(a), std::move(b)); }
inline NodePtr operator-(NodePtr a, NodePtr b) { return binary(Op::sub, std::move(a), std::move(b)); }
inline NodePtr operator*(NodePtr a, NodePtr b) { return binary(Op::mul, std::move(a), std::move(b)); }
inline NodePtr operator/(NodePtr a, NodePtr b) { return binary(Op::div, std::move(a), std::move(b)); }

inline double evaluate(const Node& n, const Vec& x) {
  switch (n.op) {
    case Op::constant: return n.value;
    case Op::variable: return x[n.index];
    case Op::add: case Op::sub: case Op::mul: case Op::div: case Op::pow:
      return apply_binary(n.op, evaluate(*n.lhs, x), evaluate(*n.rhs, x));
    default:
      return apply_unary(n.op, evaluate(*n.lhs, x));
  }
}

inline bool depends_on(const NodePtr& n, int var) {
  if (!n) return false;
  if (n->op == Op::variable) return n->index == var;
  return depends_on(n->lhs, var) || depends_on(n->rhs, var);
}

inline NodePtr derivative(const NodePtr& n, int var) {
  if (!depends_on(n, var)) return constant(0.0);
  const NodePtr& a = n->lhs;
  const NodePtr& b = n->rhs;
  switch (n->op) {
    case Op::constant: return constant(0.0);
    case Op::variable: return constant(n->index == var ? 1.0 : 0.0);
    case Op::neg: return unary(Op::neg, derivative(a, var));
    case Op::add: return derivative(a, var) + derivative(b, var);
    case Op::sub: return derivative(a, var) - derivative(b, var);
    case Op::mul: return derivative(a, var) * b + a * derivative(b, var);
    case Op::div: return (derivative(a, var) * b - a * derivative(b, var)) / binary(Op::mul, b, b);
    case Op::pow:
      if (!depends_on(b, var)) {
        // d(a^c) = c a^(c-1) a'
        return b * binary(Op::pow, a, b - constant(1.0)) * derivative(a, var);
      }
      // a^b = exp(b log a)
      return n * (derivative(b, var) * unary(Op::log, a) + b * derivative(a, var) / a);
    case Op::exp: return n * derivative(a, var);
    case Op::log: return derivative(a, var) / a;
    case Op::sqrt: return derivative(a, var) / (constant(2.0) * n);
    case Op::sin: return unary(Op::cos, a) * derivative(a, var);
    case Op::cos: return unary(Op::neg, unary(Op::sin, a)) * derivative(a, var);
    case Op::tanh: return (constant(1.0) - n * n) * derivative(a, var);
    case Op::sinh: return unary(Op::cosh, a) * derivative(a, var);
    case Op::cosh: return unary(Op::sinh, a) * derivative(a, var);
    case Op::abs: return (a / n) * derivative(a, var);
  }
  return constant(0.0);
}

inline std::string to_string(const NodePtr& n) {
  std::ostringstream os;
  os.precision(17);
  switch (n->op) {
    case Op::constant: os << n->value; break;
    case Op::variable: os << "x" << n->index; break;
    case Op::neg: os << "(-" << to_string(n->lhs) << ")"; break;
    case Op::add: os << "(" << to_string(n->lhs) << "+" << to_string(n->rhs) << ")"; break;
    case Op::sub: os << "(" << to_string(n->lhs) << "-" << to_string(n->rhs) << ")"; break;
    case Op::mul: os << "(" << to_string(n->lhs) << "*" << to_string(n->rhs) << ")"; break;
    case Op::div: os << "(" << to_string(n->lhs) << "/" << to_string(n->rhs) << ")"; break;
    case Op::pow: os << "(" << to_string(n->lhs) << "^" << to_string(n->rhs) << ")"; break;
    default: {
      static const std::map<Op, const char*> names = {
          {Op::exp, "exp"}, {Op::log, "log"}, {Op::sqrt, "sqrt"}, {Op::sin, "sin"}, {Op::cos, "cos"},
          {Op::tanh, "tanh"}, {Op::sinh, "sinh"}, {Op::cosh, "cosh"}, {Op::abs, "abs"}};
      os << names.at(n->op) << "(" << to_string(n->lhs) << ")";
    }
  }
  return os.str();
}

/// Names visible to an expression: coordinates map to indices, parameters to constants.
struct Symbols {
  std::map<std::string, int, std::less<>> variables;
  std::map<std::string, double, std::less<>> parameters;

  /// x0..x{d-1}; plus x, y, z aliases when d <= 3.
  static Symbols cartesian(int dim) {
    Symbols s;
    for (int i = 0; i < dim; ++i) s.variables["x" + std::to_string(i)] = i;
    static constexpr const char* alias[] = {"x", "y", "z"};
    if (dim <= 3)
      for (int i = 0; i < dim; ++i) s.variables[alias[i]] = i;
    return s;
  }

  /// Phase space (q, p) with q0.., p0..; plain q and p when the position dimension is 1.
  static Symbols phase_space(int position_dim) {
    Symbols s;
    for (int i = 0; i < position_dim; ++i) {
      s.variables["q" + std::to_string(i)] = i;
      s.variables["p" + std::to_string(i)] = position_dim + i;
    }
    if (position_dim == 1) {
      s.variables["q"] = 0;
      s.variables["p"] = 1;
    }
    return s;
  }
};

class Parser {
 public:
  Parser(std::string_view text, const Symbols& symbols) : text_(text), symbols_(symbols) {}

  NodePtr parse() {
    NodePtr out = parse_expr();
    skip_ws();
    if (pos_ != text_.size()) error("unexpected character '" + std::string(1, text_[pos_]) + "'");
    return out;
  }

 private:
  std::string_view text_;
  const Symbols& symbols_;
  std::size_t pos_ = 0;

  [[noreturn]] void error(const std::string& what) const {
    fail(ErrorKind::expression, what + " at column " + std::to_string(pos_ + 1) + " in '" + std::string(text_) + "'");
  }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  NodePtr parse_expr() {
    NodePtr lhs = parse_term();
    for (;;) {
      if (accept('+')) lhs = lhs + parse_term();
      else if (accept('-')) lhs = lhs - parse_term();
      else return lhs;
    }
  }

  NodePtr parse_term() {
    NodePtr lhs = parse_unary();
    for (;;) {
      if (accept('*')) lhs = lhs * parse_unary();
      else if (accept('/')) lhs = lhs / parse_unary();
      else return lhs;
    }
  }

  NodePtr parse_unary() {
    if (accept('-')) return unary(Op::neg, parse_unary());
    if (accept('+')) return parse_unary();
    return parse_power();
  }

  NodePtr parse_power() {
    NodePtr base = parse_atom();
    if (accept('^')) return binary(Op::pow, base, parse_unary());
    return base;
  }

  NodePtr parse_atom() {
    skip_ws();
    if (pos_ >= text_.size()) error("unexpected end of expression");
    const char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      NodePtr inner = parse_expr();
      if (!accept(')')) error("expected ')'");
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_name();
    error("unexpected character '" + std::string(1, c) + "'");
  }

  NodePtr parse_number() {
    const char* begin = text_.data() + pos_;
    char* end = nullptr;
    const std::string buf(begin, text_.size() - pos_);
    const double v = std::strtod(buf.c_str(), &end);
    const std::size_t used = static_cast<std::size_t>(end - buf.c_str());
    if (used == 0) error("malformed number");
    pos_ += used;
    return constant(v);
  }

  NodePtr parse_name() {
    const std::size_t start = pos_;
    while (pos_ < text_.size() &&
           (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    const std::string_view name = text_.substr(start, pos_ - start);
    static const std::map<std::string, Op, std::less<>> functions = {
        {"exp", Op::exp}, {"log", Op::log}, {"sqrt", Op::sqrt}, {"sin", Op::sin}, {"cos", Op::cos},
        {"tanh", Op::tanh}, {"sinh", Op::sinh}, {"cosh", Op::cosh}, {"abs", Op::abs}};
    if (auto f = functions.find(name); f != functions.end()) {
      if (!accept('(')) error("expected '(' after function " + std::string(name));
      NodePtr arg = parse_expr();
      if (!accept(')')) error("expected ')'");
      return unary(f->second, arg);
    }
    if (auto v = symbols_.variables.find(name); v != symbols_.variables.end()) return variable(v->second);
    if (auto p = symbols_.parameters.find(name); p != symbols_.parameters.end()) return constant(p->second);
    if (name == "pi") return constant(3.14159265358979323846);
    pos_ = start;
    error("unknown name '" + std::string(name) + "'");
  }
};

inline NodePtr parse(std::string_view text, const Symbols& symbols) { return Parser(text, symbols).parse(); }

}  // namespace devrate::expr
