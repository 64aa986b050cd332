#pragma once

#include "devrate/error.hpp"
#include "devrate/expr.hpp"
#include "devrate/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace devrate {

/// Growth metadata attached to fields; informational only.
enum class Growth { unknown, bounded, polynomial, exponential };

/// Real-valued function on state space with optional analytic gradient and Hessian.
///
/// Derivatives are exact when analytic evaluators are present. A field may opt into
/// central finite differences (step 1e-4 (1 + |x_i|)) through with_finite_differences();
/// otherwise asking for a missing derivative raises derivative_unavailable.
class ScalarField {
 public:
  using ValueFn = std::function<double(const Vec&)>;
  using GradientFn = std::function<Vec(const Vec&)>;
  using HessianFn = std::function<Mat(const Vec&)>;

  ScalarField() = default;
  explicit ScalarField(ValueFn value, GradientFn gradient = {}, HessianFn hessian = {}, std::string name = {},
                       Growth growth = Growth::unknown)
      : value_(std::move(value)),
        gradient_(std::move(gradient)),
        hessian_(std::move(hessian)),
        name_(std::move(name)),
        growth_(growth) {}

  static ScalarField constant(double c, std::string name = {}) {
    return ScalarField([c](const Vec&) { return c; }, [](const Vec& x) -> Vec { return Vec::Zero(x.size()); },
                       [](const Vec& x) -> Mat { return Mat::Zero(x.size(), x.size()); },
                       name.empty() ? std::to_string(c) : std::move(name), Growth::bounded);
  }

  /// Field compiled from an expression, with symbolic first and second derivatives.
  static ScalarField from_expression(std::string_view text, const expr::Symbols& symbols, int dim) {
    auto root = expr::parse(text, symbols);
    return from_tree(root, dim, std::string(text));
  }

  static ScalarField from_tree(const expr::NodePtr& root, int dim, std::string name) {
    auto grads = std::make_shared<std::vector<expr::NodePtr>>();
    auto hess = std::make_shared<std::vector<expr::NodePtr>>();
    for (int i = 0; i < dim; ++i) grads->push_back(expr::derivative(root, i));
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) hess->push_back(j < i ? (*hess)[j * dim + i] : expr::derivative((*grads)[i], j));
    return ScalarField(
        [root](const Vec& x) { return expr::evaluate(*root, x); },
        [grads](const Vec& x) -> Vec {
          Vec g(x.size());
          for (int i = 0; i < x.size(); ++i) g[i] = expr::evaluate(*(*grads)[i], x);
          return g;
        },
        [hess, dim](const Vec& x) -> Mat {
          Mat h(dim, dim);
          for (int i = 0; i < dim; ++i)
            for (int j = 0; j < dim; ++j) h(i, j) = expr::evaluate(*(*hess)[i * dim + j], x);
          return h;
        },
        std::move(name));
  }

  double operator()(const Vec& x) const { return value_(x); }

  bool has_analytic_gradient() const { return static_cast<bool>(gradient_); }
  bool has_analytic_hessian() const { return static_cast<bool>(hessian_); }
  bool has_gradient() const { return has_analytic_gradient() || finite_differences_; }
  bool has_hessian() const { return has_analytic_hessian() || finite_differences_; }

  Vec gradient(const Vec& x) const {
    if (gradient_) return gradient_(x);
    if (!finite_differences_) fail(ErrorKind::derivative_unavailable, "field '" + name_ + "' has no gradient");
    Vec g(x.size());
    Vec y = x;
    for (int i = 0; i < x.size(); ++i) {
      const double h = fd_step(x[i]);
      y[i] = x[i] + h;
      const double fp = value_(y);
      y[i] = x[i] - h;
      const double fm = value_(y);
      y[i] = x[i];
      g[i] = (fp - fm) / (2.0 * h);
    }
    return g;
  }

  Mat hessian(const Vec& x) const {
    if (hessian_) return hessian_(x);
    if (!finite_differences_) fail(ErrorKind::derivative_unavailable, "field '" + name_ + "' has no Hessian");
    const int d = static_cast<int>(x.size());
    Mat H(d, d);
    Vec y = x;
    const double f0 = value_(x);
    for (int i = 0; i < d; ++i) {
      const double hi = fd_step(x[i]);
      y[i] = x[i] + hi;
      const double fp = value_(y);
      y[i] = x[i] - hi;
      const double fm = value_(y);
      y[i] = x[i];
      H(i, i) = (fp - 2.0 * f0 + fm) / (hi * hi);
      for (int j = 0; j < i; ++j) {
        const double hj = fd_step(x[j]);
        auto at = [&](double si, double sj) {
          y[i] = x[i] + si * hi;
          y[j] = x[j] + sj * hj;
          const double v = value_(y);
          y[i] = x[i];
          y[j] = x[j];
          return v;
        };
        H(i, j) = H(j, i) = (at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1)) / (4.0 * hi * hj);
      }
    }
    return H;
  }

  /// Copy that falls back to central differences for any missing derivative.
  ScalarField with_finite_differences() const {
    ScalarField out = *this;
    out.finite_differences_ = true;
    return out;
  }

  /// Copy with analytic derivatives dropped (testing the fallback and error paths).
  ScalarField value_only() const { return ScalarField(value_, {}, {}, name_, growth_); }

  const std::string& name() const { return name_; }
  Growth growth() const { return growth_; }
  ScalarField named(std::string name) const {
    ScalarField out = *this;
    out.name_ = std::move(name);
    return out;
  }

  static double fd_step(double xi) { return 1e-4 * (1.0 + std::abs(xi)); }

 private:
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::string name_;
  Growth growth_ = Growth::unknown;
  bool finite_differences_ = false;
};

/// Field algebra. Derivatives compose analytically when both operands carry them.
inline ScalarField operator+(const ScalarField& a, const ScalarField& b) {
  ScalarField::GradientFn g;
  ScalarField::HessianFn h;
  if (a.has_gradient() && b.has_gradient()) g = [a, b](const Vec& x) -> Vec { return a.gradient(x) + b.gradient(x); };
  if (a.has_hessian() && b.has_hessian()) h = [a, b](const Vec& x) -> Mat { return a.hessian(x) + b.hessian(x); };
  return ScalarField([a, b](const Vec& x) { return a(x) + b(x); }, g, h, "(" + a.name() + ")+(" + b.name() + ")");
}

inline ScalarField operator*(double c, const ScalarField& a) {
  ScalarField::GradientFn g;
  ScalarField::HessianFn h;
  if (a.has_gradient()) g = [a, c](const Vec& x) -> Vec { return c * a.gradient(x); };
  if (a.has_hessian()) h = [a, c](const Vec& x) -> Mat { return c * a.hessian(x); };
  return ScalarField([a, c](const Vec& x) { return c * a(x); }, g, h, std::to_string(c) + "*(" + a.name() + ")");
}

inline ScalarField operator*(const ScalarField& a, const ScalarField& b) {
  ScalarField::GradientFn g;
  ScalarField::HessianFn h;
  if (a.has_gradient() && b.has_gradient())
    g = [a, b](const Vec& x) -> Vec { return b(x) * a.gradient(x) + a(x) * b.gradient(x); };
  if (a.has_hessian() && b.has_hessian())
    h = [a, b](const Vec& x) -> Mat {
      const Vec ga = a.gradient(x), gb = b.gradient(x);
      return b(x) * a.hessian(x) + a(x) * b.hessian(x) + ga * gb.transpose() + gb * ga.transpose();
    };
  return ScalarField([a, b](const Vec& x) { return a(x) * b(x); }, g, h, "(" + a.name() + ")*(" + b.name() + ")");
}

/// e^{u}.
inline ScalarField exp(const ScalarField& u) {
  ScalarField::GradientFn g;
  ScalarField::HessianFn h;
  if (u.has_gradient()) g = [u](const Vec& x) -> Vec { return std::exp(u(x)) * u.gradient(x); };
  if (u.has_hessian())
    h = [u](const Vec& x) -> Mat {
      const Vec gu = u.gradient(x);
      return std::exp(u(x)) * (u.hessian(x) + gu * gu.transpose());
    };
  return ScalarField([u](const Vec& x) { return std::exp(u(x)); }, g, h, "exp(" + u.name() + ")", Growth::exponential);
}

/// Vector field on state space with optional analytic divergence.
class VectorField {
 public:
  using ValueFn = std::function<Vec(const Vec&)>;
  using DivergenceFn = std::function<double(const Vec&)>;

  VectorField() = default;
  explicit VectorField(ValueFn value, DivergenceFn divergence = {}, std::string name = {})
      : value_(std::move(value)), divergence_(std::move(divergence)), name_(std::move(name)) {}

  static VectorField zero(int dim) {
    return VectorField([dim](const Vec&) -> Vec { return Vec::Zero(dim); }, [](const Vec&) { return 0.0; }, "0");
  }

  /// Components from expressions; the divergence is assembled symbolically.
  static VectorField from_expressions(const std::vector<std::string>& components, const expr::Symbols& symbols) {
    const int dim = static_cast<int>(components.size());
    auto nodes = std::make_shared<std::vector<expr::NodePtr>>();
    expr::NodePtr div = expr::constant(0.0);
    std::string name = "(";
    for (int i = 0; i < dim; ++i) {
      nodes->push_back(expr::parse(components[i], symbols));
      div = div + expr::derivative(nodes->back(), i);
      name += (i ? ", " : "") + components[i];
    }
    name += ")";
    return VectorField(
        [nodes](const Vec& x) -> Vec {
          Vec out(static_cast<int>(nodes->size()));
          for (std::size_t i = 0; i < nodes->size(); ++i) out[i] = expr::evaluate(*(*nodes)[i], x);
          return out;
        },
        [div](const Vec& x) { return expr::evaluate(*div, x); }, name);
  }

  Vec operator()(const Vec& x) const { return value_(x); }
  bool has_divergence() const { return static_cast<bool>(divergence_); }
  double divergence(const Vec& x) const {
    if (!divergence_) fail(ErrorKind::derivative_unavailable, "vector field '" + name_ + "' has no divergence");
    return divergence_(x);
  }
  const std::string& name() const { return name_; }

 private:
  ValueFn value_;
  DivergenceFn divergence_;
  std::string name_;
};

}  // namespace devrate
