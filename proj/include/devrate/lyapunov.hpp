#pragma once

#include "devrate/error.hpp"
#include "devrate/field.hpp"
#include "devrate/model.hpp"
#include "devrate/types.hpp"

#include <optional>
#include <random>
#include <string>
#include <vector>

namespace devrate {

/// W and the auxiliary function of the restriction conditions. When the log forms are set,
/// Psi is computed from U = log W without forming W (W = e^{theta V} overflows quickly).
struct LyapunovSpec {
  ScalarField W;
  ScalarField aux;
  std::optional<ScalarField> log_W;
  std::optional<ScalarField> log_aux;
  double theta = 0.5;
  double epsilon = 0.1;

  /// W = e^{theta (V - V0)}, aux = e^{eps (V - V0)} with V0 the minimum of V on the probe box,
  /// so both are >= 1 there.
  static LyapunovSpec exponential(const ScalarField& V, double theta, double epsilon, int dim, double box = 8.0) {
    if (!(theta > 0.0 && theta < 1.0)) fail(ErrorKind::parameter, "theta must lie in (0, 1)");
    if (!(epsilon > 0.0)) fail(ErrorKind::parameter, "epsilon must be positive");
    double v0 = kInfinity;
    for (const Vec& x : box_probes(dim, -box, box, 1000)) v0 = std::min(v0, V(x));
    v0 = std::min(v0, V(Vec::Zero(dim)));
    const ScalarField shifted = V + ScalarField::constant(-v0);
    LyapunovSpec s;
    s.log_W = theta * shifted;
    s.log_aux = epsilon * shifted;
    s.W = exp(*s.log_W);
    s.aux = exp(*s.log_aux);
    s.theta = theta;
    s.epsilon = epsilon;
    return s;
  }
};

namespace detail {

/// -L e^U / e^U = -L U - grad U . S grad U.
inline ScalarField log_witten_potential(const DiffusionModel& model, const ScalarField& U) {
  return ScalarField([model, U](const Vec& x) { return -apply_generator(model, U, x) - carre_du_champ(model, U, U, x); },
                     {}, {}, "Psi[" + U.name() + "]");
}

}  // namespace detail

/// Psi = -L W / W. Raises invalid_lyapunov when W <= 0 on the probe box.
inline ScalarField witten_potential(const DiffusionModel& model, const ScalarField& W, double box = 8.0,
                                    std::size_t probes = 200) {
  for (const Vec& x : box_probes(model.dimension(), -box, box, probes)) {
    const double w = W(x);
    if (!(w > 0.0)) fail(ErrorKind::invalid_lyapunov, "W is not positive at a probe point (value " + std::to_string(w) + ")");
  }
  return ScalarField([model, W](const Vec& x) { return -apply_generator(model, W, x) / W(x); }, {}, {},
                     "Psi[" + W.name() + "]");
}

inline ScalarField witten_potential(const DiffusionModel& model, const LyapunovSpec& spec) {
  if (spec.log_W) return detail::log_witten_potential(model, *spec.log_W);
  return witten_potential(model, spec.W);
}

/// theta (1 - theta) |grad V|^2 - theta Laplacian V, the reversible closed form for W = e^{theta V}.
inline ScalarField reversible_witten_potential(const ScalarField& V, double theta) {
  return ScalarField(
      [V, theta](const Vec& x) { return theta * (1.0 - theta) * V.gradient(x).squaredNorm() - theta * V.hessian(x).trace(); },
      {}, {}, "Psi_rev");
}

/// Radii and sampling directions of a ray window.
struct RadiusWindow {
  double r_min = 2.0;
  double r_max = 64.0;
  int directions = 64;  // used when d >= 2

  /// Dyadic radii 2^k inside [r_min, r_max].
  std::vector<double> dyadic() const {
    std::vector<double> out;
    for (int k = static_cast<int>(std::ceil(std::log2(r_min) - 1e-12)); std::ldexp(1.0, k) <= r_max * (1 + 1e-12); ++k)
      out.push_back(std::ldexp(1.0, k));
    return out;
  }

  /// count geometrically spaced radii covering the window.
  std::vector<double> geometric(int count) const {
    std::vector<double> out;
    for (int i = 0; i < count; ++i) out.push_back(r_min * std::pow(r_max / r_min, static_cast<double>(i) / (count - 1)));
    return out;
  }
};

/// Unit directions: +-1 in d = 1, equally spaced angles in d = 2, a Fibonacci sphere in d = 3,
/// normalized Gaussians from a fixed seed otherwise.
inline std::vector<Vec> ray_directions(int dim, int count) {
  std::vector<Vec> out;
  if (dim == 1) {
    out.push_back(Vec::Constant(1, 1.0));
    out.push_back(Vec::Constant(1, -1.0));
    return out;
  }
  if (dim == 2) {
    for (int k = 0; k < count; ++k) {
      const double a = 2.0 * M_PI * k / count;
      Vec u(2);
      u << std::cos(a), std::sin(a);
      out.push_back(u);
    }
    return out;
  }
  if (dim == 3) {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
      const double z = 1.0 - 2.0 * (k + 0.5) / count;
      const double rho = std::sqrt(1.0 - z * z);
      Vec u(3);
      u << rho * std::cos(golden * k), rho * std::sin(golden * k), z;
      out.push_back(u);
    }
    return out;
  }
  std::mt19937_64 rng(20240917);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < count; ++k) {
    Vec u(dim);
    for (int i = 0; i < dim; ++i) u[i] = gauss(rng);
    out.push_back(u / u.norm());
  }
  return out;
}

/// Field sampled on rays: values(k, j) at radius k, direction j.
struct RaySamples {
  std::vector<double> radii;
  Eigen::MatrixXd values;

  double min_at(int k) const { return values.row(k).minCoeff(); }
  double max_at(int k) const { return values.row(k).maxCoeff(); }
};

inline RaySamples sample_rays(const ScalarField& f, int dim, const std::vector<double>& radii, int directions,
                              int threads = 1) {
  const auto dirs = ray_directions(dim, directions);
  RaySamples out{radii, Eigen::MatrixXd(radii.size(), dirs.size())};
  parallel_for(radii.size() * dirs.size(), threads, [&](std::size_t idx) {
    const std::size_t k = idx / dirs.size(), j = idx % dirs.size();
    out.values(k, j) = f(Vec(radii[k] * dirs[j]));
  });
  return out;
}

/// Least-squares slope of log g against log r.
struct GrowthFit {
  double exponent = 0.0;
  double standard_error = 0.0;
  double intercept = 0.0;
  double last_octave = 0.0;  // local exponent between the two outermost radii
  std::vector<double> radii;
  std::vector<double> values;
  bool valid = false;  // false when some sample is not positive
};

inline GrowthFit fit_growth(const std::vector<double>& radii, const std::vector<double>& values) {
  if (radii.size() < 4)
    fail(ErrorKind::insufficient_window,
         "growth fit needs at least 4 radii in the window, got " + std::to_string(radii.size()));
  GrowthFit fit;
  fit.radii = radii;
  fit.values = values;
  for (double v : values)
    if (!(v > 0.0) || !std::isfinite(v)) return fit;
  const std::size_t n = radii.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double lx = std::log(radii[i]), ly = std::log(values[i]);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  const double mx = sx / n, my = sy / n;
  const double vxx = sxx - n * mx * mx;
  fit.exponent = (sxy - n * mx * my) / vxx;
  fit.intercept = my - fit.exponent * mx;
  double rss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double e = std::log(values[i]) - fit.intercept - fit.exponent * std::log(radii[i]);
    rss += e * e;
  }
  fit.standard_error = std::sqrt(rss / (n - 2) / vxx);
  fit.last_octave = std::log(values[n - 1] / values[n - 2]) / std::log(radii[n - 1] / radii[n - 2]);
  fit.valid = true;
  return fit;
}

/// Growth of the minimum over ray directions of f (the confinement profile).
inline GrowthFit radial_growth(const ScalarField& f, int dim, const RadiusWindow& window, int threads = 1) {
  const auto s = sample_rays(f, dim, window.dyadic(), window.directions, threads);
  std::vector<double> mins;
  for (int k = 0; k < static_cast<int>(s.radii.size()); ++k) mins.push_back(s.min_at(k));
  return fit_growth(s.radii, mins);
}

/// Finite coercivity proxy: the minimum over directions increases with r across the window, at the
/// outer radius exceeds every sample taken at the inner radius, and still grows (log-log slope above
/// 0.05) over the last step.
struct CoercivityCheck {
  bool pass = false;
  std::vector<double> radii;
  std::vector<double> min_profile;
};

inline CoercivityCheck check_compact_level_sets(const ScalarField& f, int dim, const RadiusWindow& window,
                                                int radii_count = 12, int threads = 1) {
  const auto s = sample_rays(f, dim, window.geometric(radii_count), window.directions, threads);
  CoercivityCheck out;
  out.radii = s.radii;
  bool increasing = true;
  for (int k = 0; k < static_cast<int>(s.radii.size()); ++k) {
    out.min_profile.push_back(s.min_at(k));
    if (k > 0 && !(out.min_profile[k] > out.min_profile[k - 1])) increasing = false;
  }
  const std::size_t n = out.min_profile.size();
  const double a = out.min_profile[n - 2], b = out.min_profile[n - 1];
  const bool growing = a > 0.0 && std::log(b / a) / std::log(out.radii[n - 1] / out.radii[n - 2]) > 0.05;
  out.pass = increasing && growing && out.min_profile.back() > s.max_at(0);
  return out;
}

/// Ratio bounds of the nonlinear condition for one theta.
struct NonlinearBounds {
  double theta = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  bool pass = false;
};

struct NonlinearReport {
  bool pass = false;
  bool potential_coercive = false;
  bool gradient_coercive = false;
  std::vector<NonlinearBounds> bounds;
  std::string message;
};

/// Checks -L V - (theta/2)|sigma^T grad V|^2 ~ |sigma^T grad V|^2 on the window. The ratio
/// (-L V - (theta/2)|sigma^T grad V|^2) / |sigma^T grad V|^2 must stay in a positive band and
/// must not drift by more than a factor 2 across the outer half of the window.
inline NonlinearReport check_nonlinear_condition(const DiffusionModel& model, const ScalarField& V,
                                                 const std::vector<double>& thetas, const RadiusWindow& window,
                                                 int threads = 1) {
  const int d = model.dimension();
  NonlinearReport rep;
  const ScalarField grad_norm([model, V](const Vec& x) { return (model.sigma(x).transpose() * V.gradient(x)).norm(); });
  rep.potential_coercive = check_compact_level_sets(V, d, window, 12, threads).pass;
  rep.gradient_coercive = check_compact_level_sets(grad_norm, d, window, 12, threads).pass;
  const auto radii = window.geometric(16);
  const auto dirs = ray_directions(d, window.directions);
  rep.pass = rep.potential_coercive && rep.gradient_coercive;
  for (double theta : thetas) {
    const ScalarField ratio([model, V, theta](const Vec& x) {
      const double g2 = (model.sigma(x).transpose() * V.gradient(x)).squaredNorm();
      return (-apply_generator(model, V, x) - 0.5 * theta * g2) / g2;
    });
    const auto s = sample_rays(ratio, d, radii, window.directions, threads);
    NonlinearBounds b{theta, s.values.minCoeff(), s.values.maxCoeff(), false};
    const int half = static_cast<int>(radii.size()) / 2;
    const Eigen::MatrixXd outer = s.values.bottomRows(radii.size() - half);
    const bool finite = s.values.allFinite();
    b.pass = finite && b.lower > 0.0 && outer.maxCoeff() <= 2.0 * outer.minCoeff();
    rep.pass = rep.pass && b.pass;
    rep.bounds.push_back(b);
  }
  if (!rep.potential_coercive) rep.message = "V does not grow along all rays (no compact level sets)";
  else if (!rep.gradient_coercive) rep.message = "|sigma^T grad V| does not grow along all rays";
  else if (!rep.pass) rep.message = "ratio leaves a positive band on the window";
  else rep.message = "ok";
  return rep;
}

/// Witnessed constants of the restriction conditions on the probe box.
struct RestrictionCheck {
  double C1 = 0.0;            // max aux^2 / W
  double ratio_lower = 0.0;   // Psi / (-L aux / aux) on the window rays
  double ratio_upper = 0.0;
  double C2 = 0.0;            // max (-2 L aux / aux - Psi)
  bool W_at_least_one = true;
  bool aux_at_least_one = true;
  bool pass = false;
};

inline RestrictionCheck check_restriction(const DiffusionModel& model, const LyapunovSpec& spec, const RadiusWindow& window,
                                          double box = 8.0, std::size_t probes = 1000) {
  const int d = model.dimension();
  const ScalarField psi = witten_potential(model, spec);
  LyapunovSpec aux_as_main;
  aux_as_main.W = spec.aux;
  aux_as_main.log_W = spec.log_aux;
  const ScalarField psi_aux = witten_potential(model, aux_as_main);
  RestrictionCheck out;
  out.C1 = 0.0;
  out.C2 = -kInfinity;
  auto log_w = [&](const Vec& x) { return spec.log_W ? (*spec.log_W)(x) : std::log(spec.W(x)); };
  auto log_a = [&](const Vec& x) { return spec.log_aux ? (*spec.log_aux)(x) : std::log(spec.aux(x)); };
  for (const Vec& x : box_probes(d, -box, box, probes)) {
    const double lw = log_w(x), la = log_a(x);
    if (lw < -1e-12) out.W_at_least_one = false;
    if (la < -1e-12) out.aux_at_least_one = false;
    out.C1 = std::max(out.C1, std::exp(2.0 * la - lw));
    out.C2 = std::max(out.C2, 2.0 * psi_aux(x) - psi(x));
  }
  const auto s = sample_rays(ScalarField([psi, psi_aux](const Vec& x) { return psi(x) / psi_aux(x); }), d,
                             window.geometric(12), window.directions);
  out.ratio_lower = s.values.minCoeff();
  out.ratio_upper = s.values.maxCoeff();
  out.pass = out.W_at_least_one && out.aux_at_least_one && std::isfinite(out.C1) && std::isfinite(out.C2) &&
             s.values.allFinite() && out.ratio_lower > 0.0;
  return out;
}

/// Verdict on an observable kappa.
struct KappaVerdict {
  bool admissible = false;
  bool bounded = false;
  bool heavy_tail = false;
  GrowthFit psi_fit;    // min over directions of Psi
  GrowthFit kappa_fit;  // max over directions of kappa
  GrowthFit ratio_fit;  // min over directions of Psi / kappa
  double generator_ratio_sup = 0.0;   // sup L kappa / kappa on the rays
  double log_gradient_sup = 0.0;      // sup |sigma^T grad log kappa|
  bool generator_ratio_bounded = true;
  bool log_gradient_bounded = true;
  std::string reason;
};

namespace detail {

/// Profile of per-radius maxima does not grow: the outer value stays below the inner maxima,
/// or its local exponent over the last octave is below 0.1.
inline bool profile_bounded_above(const std::vector<double>& m) {
  const std::size_t n = m.size();
  double inner = -kInfinity;
  for (std::size_t k = 0; k + 1 < n; ++k) inner = std::max(inner, m[k]);
  if (m[n - 1] <= inner + 1e-9 * std::max(1.0, std::abs(inner))) return true;
  if (m[n - 2] > 0.0 && m[n - 1] > 0.0) return std::log(m[n - 1] / m[n - 2]) / std::log(2.0) < 0.1;
  return false;
}

}  // namespace detail

/// kappa << Psi on rays, with the bound kappa condition when kappa is bounded. For unbounded kappa
/// the growth of Psi / kappa must be positive by at least two fit standard errors over the whole
/// window and over its last octave, and L kappa / kappa, |sigma^T grad log kappa| must stay bounded
/// above. heavy_tail is set when the growth exponent of Psi is below 1.
inline KappaVerdict check_kappa_admissible(const DiffusionModel& model, const ScalarField& psi, const ScalarField& kappa,
                                           const RadiusWindow& window, int threads = 1) {
  const int d = model.dimension();
  const auto radii = window.dyadic();
  if (radii.size() < 4)
    fail(ErrorKind::insufficient_window, "window [" + std::to_string(window.r_min) + ", " + std::to_string(window.r_max) +
                                             "] holds fewer than 4 dyadic radii");
  const auto sp = sample_rays(psi, d, radii, window.directions, threads);
  const auto sk = sample_rays(kappa, d, radii, window.directions, threads);
  if (sk.values.minCoeff() < 1.0 - 1e-12) fail(ErrorKind::invalid_lyapunov, "kappa must be >= 1 on the window");
  const int K = static_cast<int>(radii.size());
  std::vector<double> psi_min(K), kappa_max(K), ratio_min(K), gen_max(K), grad_max(K);
  const ScalarField gen([model, kappa](const Vec& x) { return apply_generator(model, kappa, x) / kappa(x); });
  const ScalarField lg([model, kappa](const Vec& x) { return (model.sigma(x).transpose() * kappa.gradient(x)).norm() / kappa(x); });
  KappaVerdict v;
  bool has_derivs = kappa.has_gradient() && kappa.has_hessian();
  RaySamples sg, sl;
  if (has_derivs) {
    sg = sample_rays(gen, d, radii, window.directions, threads);
    sl = sample_rays(lg, d, radii, window.directions, threads);
  }
  for (int k = 0; k < K; ++k) {
    psi_min[k] = sp.min_at(k);
    kappa_max[k] = sk.max_at(k);
    ratio_min[k] = (sp.values.row(k).array() / sk.values.row(k).array()).minCoeff();
    if (has_derivs) {
      gen_max[k] = sg.max_at(k);
      grad_max[k] = sl.max_at(k);
    }
  }
  v.psi_fit = fit_growth(radii, psi_min);
  v.kappa_fit = fit_growth(radii, kappa_max);
  v.ratio_fit = fit_growth(radii, ratio_min);
  v.heavy_tail = v.psi_fit.valid && v.psi_fit.exponent < 1.0;
  v.bounded = detail::profile_bounded_above(kappa_max);
  if (has_derivs) {
    v.generator_ratio_sup = *std::max_element(gen_max.begin(), gen_max.end());
    v.log_gradient_sup = *std::max_element(grad_max.begin(), grad_max.end());
    v.generator_ratio_bounded = detail::profile_bounded_above(gen_max);
    v.log_gradient_bounded = detail::profile_bounded_above(grad_max);
  }
  if (v.bounded) {
    v.admissible = true;
    v.reason = "kappa bounded";
    return v;
  }
  const auto& r = v.ratio_fit;
  const bool dominated = r.valid && r.exponent > 2.0 * r.standard_error && r.last_octave > 2.0 * r.standard_error;
  if (!dominated) {
    v.reason = "Psi / kappa does not grow on the window";
  } else if (!has_derivs) {
    v.reason = "kappa has no derivatives; L kappa <= C kappa cannot be sampled";
  } else if (!v.generator_ratio_bounded) {
    v.reason = "L kappa / kappa unbounded above";
  } else if (!v.log_gradient_bounded) {
    v.reason = "|sigma^T grad log kappa| unbounded";
  } else {
    v.admissible = true;
    v.reason = "kappa << Psi";
  }
  return v;
}

enum class TailRegime { super_gaussian, gaussian, sub_gaussian };

inline std::string_view to_string(TailRegime r) {
  switch (r) {
    case TailRegime::super_gaussian: return "super_gaussian";
    case TailRegime::gaussian: return "gaussian";
    case TailRegime::sub_gaussian: return "sub_gaussian";
  }
  return "unknown";
}

/// V ~ |x|^q: Cramer admits observables up to |x|^q, the Witten condition up to |x|^{2(q-1)}.
struct CramerComparison {
  double cramer_exponent_bound = 0.0;
  double witten_exponent_bound = 0.0;
  TailRegime regime = TailRegime::gaussian;
  bool heavy_tail_linear = false;  // linear observables are not dominated by Psi
};

inline CramerComparison cramer_comparison(double q) {
  if (!(q > 1.0)) fail(ErrorKind::out_of_theory, "cramer comparison needs q > 1, got " + std::to_string(q));
  CramerComparison c;
  c.cramer_exponent_bound = q;
  c.witten_exponent_bound = 2.0 * (q - 1.0);
  c.regime = q > 2.0 ? TailRegime::super_gaussian : (q == 2.0 ? TailRegime::gaussian : TailRegime::sub_gaussian);
  c.heavy_tail_linear = c.witten_exponent_bound <= 1.0;
  return c;
}

/// Constants of -L W / W >= a|q|^2 + b|p|^2 - C for W = e^{theta H + eps q.p}.
struct LangevinLyapunovParams {
  double c_V = 0.0;
  double C_V = 0.0;
  double gamma = 0.0;
  double theta = 0.0;
  int dim = 1;
  double eta = 0.0;
  double epsilon = 0.0;
  double a = 0.0;
  double b = 0.0;
  double C = 0.0;
};

inline LangevinLyapunovParams langevin_lyapunov_constants(double c_V, double C_V, double gamma, double theta, int dim,
                                                          double eta, double epsilon) {
  LangevinLyapunovParams p{c_V, C_V, gamma, theta, dim, eta, epsilon};
  p.a = epsilon * (c_V - eta * gamma / 2.0) - gamma * epsilon * epsilon;
  p.b = theta * (1.0 - theta) * gamma - epsilon - gamma * epsilon / (2.0 * eta);
  p.C = theta * gamma * dim + epsilon * C_V;
  return p;
}

/// eta = c_V / gamma and the largest dyadic eps = 2^{-k} with a > 0 and b > 0.
inline LangevinLyapunovParams langevin_lyapunov_params(double c_V, double C_V, double gamma, double theta, int dim) {
  if (!(theta > 0.0 && theta < 1.0)) fail(ErrorKind::parameter, "theta must lie in (0, 1)");
  if (!(c_V > 0.0)) fail(ErrorKind::parameter, "c_V must be positive");
  if (!(gamma > 0.0)) fail(ErrorKind::parameter, "gamma must be positive");
  if (dim < 1) fail(ErrorKind::parameter, "dimension must be positive");
  const double eta = c_V / gamma;
  for (int k = 1; k < 200; ++k) {
    const auto p = langevin_lyapunov_constants(c_V, C_V, gamma, theta, dim, eta, std::ldexp(1.0, -k));
    if (p.a > 0.0 && p.b > 0.0) return p;
  }
  fail(ErrorKind::convergence, "no dyadic epsilon satisfies a > 0 and b > 0");
}

/// log W = theta H + eps q.p on phase space.
inline ScalarField langevin_log_lyapunov(const DiffusionModel& model, double theta, double epsilon) {
  const Langevin* lv = model.langevin();
  if (!lv) fail(ErrorKind::parameter, "langevin Lyapunov function requires a Langevin model");
  const int d = lv->position_dim;
  Mat J = Mat::Zero(2 * d, 2 * d);
  J.topRightCorner(d, d) = Mat::Identity(d, d);
  J.bottomLeftCorner(d, d) = Mat::Identity(d, d);
  const ScalarField qp([d](const Vec& x) { return x.head(d).dot(x.tail(d)); },
                       [J](const Vec& x) -> Vec { return J * x; }, [J](const Vec&) -> Mat { return J; }, "q.p");
  return (theta * hamiltonian(model) + epsilon * qp).named("thetaH+eps q.p");
}

/// Full Lyapunov report for a model and spec.
struct LyapunovReport {
  ScalarField psi;
  GrowthFit psi_fit;
  CoercivityCheck psi_coercive;
  RestrictionCheck restriction;
  std::vector<std::pair<std::string, KappaVerdict>> kappas;
  std::optional<CramerComparison> cramer;
};

inline LyapunovReport lyapunov_report(const DiffusionModel& model, const LyapunovSpec& spec, const RadiusWindow& window,
                                      const std::vector<std::pair<std::string, ScalarField>>& kappas,
                                      std::optional<double> tail_exponent = std::nullopt, int threads = 1) {
  LyapunovReport rep;
  rep.psi = witten_potential(model, spec);
  rep.psi_fit = radial_growth(rep.psi, model.dimension(), window, threads);
  rep.psi_coercive = check_compact_level_sets(rep.psi, model.dimension(), window, 12, threads);
  rep.restriction = check_restriction(model, spec, window);
  for (const auto& [name, k] : kappas) rep.kappas.emplace_back(name, check_kappa_admissible(model, rep.psi, k, window, threads));
  if (tail_exponent) rep.cramer = cramer_comparison(*tail_exponent);
  return rep;
}

}  // namespace devrate
