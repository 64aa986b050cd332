#pragma once

#include "devrate/decompose.hpp"
#include "devrate/error.hpp"
#include "devrate/grid.hpp"
#include "devrate/scgf.hpp"
#include "devrate/types.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace devrate {

namespace detail {

/// C^1 cubic Hermite interpolant through (t_k, y_k) with three-point derivative estimates,
/// exact for quadratics.
class HermiteCurve {
 public:
  HermiteCurve(std::vector<double> t, std::vector<double> y) : t_(std::move(t)), y_(std::move(y)) {
    const std::size_t n = t_.size();
    s_.assign(n, 0.0);
    if (n == 1) return;
    if (n == 2) {
      s_[0] = s_[1] = (y_[1] - y_[0]) / (t_[1] - t_[0]);
      return;
    }
    auto three_point = [&](std::size_t a, std::size_t b, std::size_t c, double at) {
      // Derivative at `at` of the parabola through points a, b, c.
      const double ta = t_[a], tb = t_[b], tc = t_[c];
      return y_[a] * ((at - tb) + (at - tc)) / ((ta - tb) * (ta - tc)) +
             y_[b] * ((at - ta) + (at - tc)) / ((tb - ta) * (tb - tc)) +
             y_[c] * ((at - ta) + (at - tb)) / ((tc - ta) * (tc - tb));
    };
    s_[0] = three_point(0, 1, 2, t_[0]);
    for (std::size_t k = 1; k + 1 < n; ++k) s_[k] = three_point(k - 1, k, k + 1, t_[k]);
    s_[n - 1] = three_point(n - 3, n - 2, n - 1, t_[n - 1]);
  }

  double front() const { return t_.front(); }
  double back() const { return t_.back(); }
  double slope_at(std::size_t k) const { return s_[k]; }
  std::size_t size() const { return t_.size(); }
  double node(std::size_t k) const { return t_[k]; }
  double value_at(std::size_t k) const { return y_[k]; }

  double operator()(double t) const {
    if (t_.size() == 1) return y_[0];
    auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t k = it == t_.begin() ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    k = std::min(k, t_.size() - 2);
    const double h = t_[k + 1] - t_[k];
    const double u = (t - t_[k]) / h;
    const double h00 = (1 + 2 * u) * (1 - u) * (1 - u), h10 = u * (1 - u) * (1 - u);
    const double h01 = u * u * (3 - 2 * u), h11 = u * u * (u - 1);
    return h00 * y_[k] + h10 * h * s_[k] + h01 * y_[k + 1] + h11 * h * s_[k + 1];
  }

 private:
  std::vector<double> t_, y_, s_;
};

/// Maximizes g on [lo, hi] by golden-section search (g concave there up to interpolation error).
template <class G>
double golden_max(G&& g, double lo, double hi, double* arg = nullptr) {
  constexpr double r = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - r * (b - a), d = a + r * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 200 && b - a > 1e-12 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
    if (gc >= gd) {
      b = d;
      d = c;
      gd = gc;
      c = b - r * (b - a);
      gc = g(c);
    } else {
      a = c;
      c = d;
      gc = gd;
      d = a + r * (b - a);
      gd = g(d);
    }
  }
  const double x = 0.5 * (a + b);
  if (arg) *arg = x;
  return g(x);
}

}  // namespace detail

struct RateCurve {
  std::vector<double> a;
  std::vector<double> I;
  std::vector<bool> infinite;  // +infinity sentinel; I holds 0 there
  std::vector<double> argmax_theta;
  double a_star = 0.0;      // zero of I: slope of lambda at theta = 0
  double slope_min = 0.0;   // slopes of lambda at the ends of the theta range
  double slope_max = 0.0;
  double fenchel_young_defect = 0.0;  // max over samples of (theta a - lambda(theta)) - I(a), should be <= 0
  ScgfCurve source;

  /// Value with the sentinel mapped to +inf.
  double value(std::size_t k) const { return infinite[k] ? kInfinity : I[k]; }
};

inline detail::HermiteCurve interpolant(const ScgfCurve& c) { return detail::HermiteCurve(c.thetas(), c.lambdas()); }

/// I(a) = sup_theta { theta a - lambda(theta) } over the curve's theta range; a beyond the end
/// slopes is +infinity.
inline RateCurve legendre_transform(const ScgfCurve& curve, const std::vector<double>& a_grid, double convexity_tol = 1e-9) {
  if (curve.points.size() < 2) fail(ErrorKind::parameter, "Legendre transform needs at least two curve points");
  const ConvexityDefect cd = check_convexity(curve, convexity_tol);
  if (!cd.convex) {
    const auto& p = curve.points;
    const std::size_t i = cd.index;
    fail(ErrorKind::domain, "curve is not convex at theta = (" + std::to_string(p[i - 1].theta) + ", " +
                                std::to_string(p[i].theta) + ", " + std::to_string(p[i + 1].theta) + "), excess " +
                                std::to_string(cd.worst));
  }
  const detail::HermiteCurve lam = interpolant(curve);
  const std::size_t n = lam.size();
  RateCurve out;
  out.source = curve;
  out.slope_min = lam.slope_at(0);
  out.slope_max = lam.slope_at(n - 1);
  {
    // Slope at theta = 0 (always a sample).
    std::size_t z = 0;
    while (z < n && lam.node(z) != 0.0) ++z;
    out.a_star = z < n ? lam.slope_at(z) : lam.slope_at(0);
  }
  const double slack = 1e-12 * std::max(1.0, std::max(std::abs(out.slope_min), std::abs(out.slope_max)));
  for (double a : a_grid) {
    out.a.push_back(a);
    if (a < out.slope_min - slack || a > out.slope_max + slack) {
      out.I.push_back(0.0);
      out.infinite.push_back(true);
      out.argmax_theta.push_back(a < out.slope_min ? lam.front() : lam.back());
      continue;
    }
    std::size_t best = 0;
    double best_val = -kInfinity;
    for (std::size_t k = 0; k < n; ++k) {
      const double v = lam.node(k) * a - lam.value_at(k);
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    double arg = lam.node(best);
    const double lo = lam.node(best == 0 ? 0 : best - 1);
    const double hi = lam.node(std::min(best + 1, n - 1));
    double refined_arg;
    const double refined = detail::golden_max([&](double t) { return t * a - lam(t); }, lo, hi, &refined_arg);
    if (refined > best_val) {
      best_val = refined;
      arg = refined_arg;
    }
    out.I.push_back(std::max(best_val, 0.0));
    out.infinite.push_back(false);
    out.argmax_theta.push_back(arg);
  }
  for (std::size_t j = 0; j < out.a.size(); ++j) {
    if (out.infinite[j]) continue;
    for (std::size_t k = 0; k < n; ++k)
      out.fenchel_young_defect = std::max(out.fenchel_young_defect, lam.node(k) * out.a[j] - lam.value_at(k) - out.I[j]);
  }
  return out;
}

struct DoubleConjugate {
  double max_deviation = 0.0;
  double worst_theta = 0.0;
  std::vector<double> theta;
  std::vector<double> lambda_star_star;
};

/// lambda**(theta) = sup_a { theta a - I(a) } over the finite samples, refined by golden section on
/// the piecewise-linear I; compared with the source curve.
inline DoubleConjugate double_conjugate_check(const RateCurve& rate, const std::vector<double>& theta_grid) {
  std::vector<double> a, I;
  for (std::size_t k = 0; k < rate.a.size(); ++k)
    if (!rate.infinite[k]) {
      a.push_back(rate.a[k]);
      I.push_back(rate.I[k]);
    }
  if (a.empty()) fail(ErrorKind::parameter, "rate curve has no finite samples");
  const detail::HermiteCurve lam = interpolant(rate.source);
  auto I_lin = [&](double x) {
    auto it = std::upper_bound(a.begin(), a.end(), x);
    std::size_t k = it == a.begin() ? 0 : static_cast<std::size_t>(it - a.begin()) - 1;
    if (k + 1 >= a.size()) return I.back();
    const double w = (x - a[k]) / (a[k + 1] - a[k]);
    return (1 - w) * I[k] + w * I[k + 1];
  };
  DoubleConjugate out;
  for (double t : theta_grid) {
    std::size_t best = 0;
    double best_val = -kInfinity;
    for (std::size_t k = 0; k < a.size(); ++k) {
      const double v = t * a[k] - I[k];
      if (v > best_val) {
        best_val = v;
        best = k;
      }
    }
    if (a.size() > 1) {
      const double lo = a[best == 0 ? 0 : best - 1], hi = a[std::min(best + 1, a.size() - 1)];
      best_val = std::max(best_val, detail::golden_max([&](double x) { return t * x - I_lin(x); }, lo, hi));
    }
    out.theta.push_back(t);
    out.lambda_star_star.push_back(best_val);
    const double dev = std::abs(best_val - lam(t));
    if (dev > out.max_deviation) {
      out.max_deviation = dev;
      out.worst_theta = t;
    }
  }
  return out;
}

struct DonskerVaradhan {
  double value = 0.0;
  double excluded_mass = 0.0;  // nu-mass on boundary rows, left out of the sum
};

/// -sum over interior nodes of nu (L u) / u, with u given through log u (no overflow).
inline DonskerVaradhan donsker_varadhan_log(const SparseGenerator& g, const Vector& log_u, const Vector& nu) {
  const Eigen::Index N = g.L.rows();
  if (log_u.size() != N || nu.size() != N) fail(ErrorKind::parameter, "size mismatch in the Donsker-Varadhan functional");
  if (!log_u.allFinite()) fail(ErrorKind::domain, "u must be positive and finite on the mesh");
  if (nu.minCoeff() < 0.0 || std::abs(nu.sum() - 1.0) > 1e-9) fail(ErrorKind::measure, "nu must be a probability vector");
  DonskerVaradhan out;
  for (Eigen::Index i = 0; i < N; ++i) {
    if (g.mesh.is_boundary(static_cast<std::size_t>(i))) {
      out.excluded_mass += nu[i];
      continue;
    }
    double r = 0.0;
    for (SparseMatrix::InnerIterator it(g.L, i); it; ++it) r += it.value() * std::exp(log_u[it.col()] - log_u[i]);
    out.value -= nu[i] * r;
  }
  return out;
}

inline DonskerVaradhan donsker_varadhan_value(const SparseGenerator& g, const Vector& u, const Vector& nu) {
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (!(u[i] > 0.0)) fail(ErrorKind::domain, "u must be positive on the mesh (node " + std::to_string(i) + ")");
  return donsker_varadhan_log(g, u.array().log().matrix(), nu);
}

struct VariationalBound {
  double value = -kInfinity;
  std::size_t best = 0;
  std::vector<double> values;  // nu_k(f) - I(nu_k) per member
  std::vector<double> rates;   // I(nu_k)
};

/// max over the family of nu(f) - I(nu), with I = I_S + I_A from the decomposition.
inline VariationalBound variational_scgf_bound(const DecompositionContext& ctx, const Vector& f,
                                               const std::vector<Perturbation>& family, const PoissonOptions& opts = {}) {
  if (family.empty()) fail(ErrorKind::empty_family, "measure family is empty");
  VariationalBound out;
  for (std::size_t k = 0; k < family.size(); ++k) {
    const DecompositionResult r = decompose(ctx, family[k], opts);
    const double v = family[k].nu.dot(f) - r.I();
    out.values.push_back(v);
    out.rates.push_back(r.I());
    if (v > out.value) {
      out.value = v;
      out.best = k;
    }
  }
  return out;
}

}  // namespace devrate
