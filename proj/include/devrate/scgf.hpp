#pragma once

#include "devrate/error.hpp"
#include "devrate/grid.hpp"
#include "devrate/lyapunov.hpp"
#include "devrate/model.hpp"
#include "devrate/rng.hpp"
#include "devrate/simulate.hpp"
#include "devrate/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace devrate {

enum class ScgfMethod { spectral, mc, cloning };

inline std::string_view to_string(ScgfMethod m) {
  switch (m) {
    case ScgfMethod::spectral: return "spectral";
    case ScgfMethod::mc: return "mc";
    case ScgfMethod::cloning: return "cloning";
  }
  return "?";
}

struct ScgfPoint {
  double theta = 0.0;
  double lambda = 0.0;
  double standard_error = 0.0;
  ScgfMethod method = ScgfMethod::spectral;
  double box_sensitivity = kNaN;  // |lambda on the doubled box - lambda|, spectral only
};

struct ScgfCurve {
  std::string observable;
  std::string model_id;
  std::optional<Mesh> mesh;
  std::vector<ScgfPoint> points;  // ordered by theta

  std::vector<double> thetas() const {
    std::vector<double> t;
    for (const auto& p : points) t.push_back(p.theta);
    return t;
  }
  std::vector<double> lambdas() const {
    std::vector<double> l;
    for (const auto& p : points) l.push_back(p.lambda);
    return l;
  }
};

struct ConvexityDefect {
  bool convex = true;
  double worst = 0.0;  // largest violation of the chord inequality
  std::size_t index = 0;  // middle point of the worst triple
};

/// Chord test on consecutive triples: lambda(t1) <= interpolation of the neighbours + tolerance.
inline ConvexityDefect check_convexity(const ScgfCurve& c, double tolerance) {
  ConvexityDefect out;
  for (std::size_t i = 1; i + 1 < c.points.size(); ++i) {
    const auto& a = c.points[i - 1];
    const auto& m = c.points[i];
    const auto& b = c.points[i + 1];
    const double w = (m.theta - a.theta) / (b.theta - a.theta);
    const double chord = (1.0 - w) * a.lambda + w * b.lambda;
    const double tol = tolerance + 2.0 * (a.standard_error + m.standard_error + b.standard_error);
    const double excess = m.lambda - chord - tol;
    if (excess > out.worst) {
      out.worst = excess;
      out.index = i;
      out.convex = false;
    }
  }
  return out;
}

struct SpectralScgfOptions {
  EigenOptions eigen;
  DriftScheme scheme = DriftScheme::automatic;
  bool box_sensitivity = false;
  int threads = 1;
  /// Witten potential of a Lyapunov function for the admissibility check 1 + |theta f| << Psi;
  /// without one the check is skipped.
  std::optional<ScalarField> witten;
  bool override_admissibility = false;
  RadiusWindow window;
};

/// lambda at one theta on a mesh and on its doubled box (same spacing).
inline double box_sensitivity(const DiffusionModel& model, const ScalarField& f, double theta, const Mesh& mesh,
                              const SpectralScgfOptions& opts = {}) {
  const SparseGenerator g = assemble_generator(model, mesh, opts.scheme, opts.threads);
  const double base = principal_eigenpair(g, theta * sample(f, mesh, opts.threads), opts.eigen).lambda;
  const Mesh big = mesh.doubled();
  const SparseGenerator g2 = assemble_generator(model, big, opts.scheme, opts.threads);
  const double wide = principal_eigenpair(g2, theta * sample(f, big, opts.threads), opts.eigen).lambda;
  return std::abs(wide - base);
}

inline ScgfCurve scgf_spectral(const DiffusionModel& model, const ScalarField& f, std::vector<double> thetas,
                               const Mesh& mesh, const SpectralScgfOptions& opts = {}) {
  if (opts.witten && !opts.override_admissibility) {
    double tmax = 0.0;
    for (double t : thetas) tmax = std::max(tmax, std::abs(t));
    // Smooth stand-in for 1 + |theta f| (equivalent up to a factor 2).
    const ScalarField kappa =
        ScalarField([f, tmax](const Vec& x) { return std::hypot(1.0, tmax * f(x)); }, {}, {}, "sqrt(1+(theta f)^2)")
            .with_finite_differences();
    const KappaVerdict v = check_kappa_admissible(model, *opts.witten, kappa, opts.window, opts.threads);
    if (!v.admissible)
      fail(ErrorKind::out_of_theory, "observable " + f.name() + " is not admissible: " + v.reason +
                                         " (set override_admissibility to solve anyway)");
  }
  if (std::find(thetas.begin(), thetas.end(), 0.0) == thetas.end()) thetas.push_back(0.0);
  std::sort(thetas.begin(), thetas.end());
  thetas.erase(std::unique(thetas.begin(), thetas.end()), thetas.end());

  const SparseGenerator g = assemble_generator(model, mesh, opts.scheme, opts.threads);
  const Vector fs = sample(f, mesh, opts.threads);
  std::optional<SparseGenerator> g2;
  Vector fs2;
  if (opts.box_sensitivity) {
    g2 = assemble_generator(model, mesh.doubled(), opts.scheme, opts.threads);
    fs2 = sample(f, g2->mesh, opts.threads);
  }
  ScgfCurve curve;
  curve.observable = f.name();
  curve.model_id = model.id();
  curve.mesh = mesh;
  curve.points.resize(thetas.size());
  EigenOptions eo = opts.eigen;
  eo.left = false;
  parallel_for(thetas.size(), opts.threads, [&](std::size_t k) {
    ScgfPoint& p = curve.points[k];
    p.theta = thetas[k];
    p.method = ScgfMethod::spectral;
    if (thetas[k] == 0.0) {
      p.lambda = 0.0;
      if (g2) p.box_sensitivity = 0.0;
      return;
    }
    try {
      p.lambda = principal_eigenpair(g, thetas[k] * fs, eo).lambda;
      if (g2) p.box_sensitivity = std::abs(principal_eigenpair(*g2, thetas[k] * fs2, eo).lambda - p.lambda);
    } catch (const Error& e) {
      fail(e.kind(), std::string(e.what()) + " [theta = " + std::to_string(thetas[k]) + "]");
    }
  });
  return curve;
}

struct MonteCarloOptions {
  int replicas = 10000;
  double T = 20.0;
  double dt = 1e-2;
  /// Window [0, burn_in] excluded: the estimate becomes
  /// log(E[e^{theta A_T}] / E[e^{theta A_burn}]) / (T - burn_in), removing the O(1/T) start-up bias.
  double burn_in = 0.0;
  std::uint64_t seed = 0;
  Vec x0;  // empty: origin
  int threads = 1;
  double safety_box = 1e6;
};

struct MonteCarloEstimate {
  double lambda = 0.0;
  double standard_error = 0.0;
  double ess = 0.0;           // (sum w)^2 / sum w^2 over replicas
  double ess_fraction = 0.0;  // ess / replicas
  int replicas = 0;
};

namespace detail {

inline Vec start_state(const DiffusionModel& model, const Vec& x0) {
  if (x0.size() == 0) return Vec::Zero(model.dimension());
  if (x0.size() != model.dimension()) fail(ErrorKind::parameter, "initial state has the wrong dimension");
  return x0;
}

/// Integral of f over one path segment of `steps` steps (midpoint rule), advancing x.
inline double advance(const Integrator& integ, const ScalarField& f, Vec& x, long steps, Gaussian& noise, double box) {
  double acc = 0.0;
  for (long n = 0; n < steps; ++n) {
    const Vec prev = x;
    integ.step(x, noise);
    if (outside_box(x, box)) fail(ErrorKind::blow_up, "walker left the safety box");
    acc += integ.dt() * f(0.5 * (prev + x));
  }
  return acc;
}

}  // namespace detail

/// (1/T) log of the replica mean of e^{theta int f}. The variance of the weights grows
/// exponentially in theta^2 T; ess reports the collapse. Standard error by the delta method.
inline MonteCarloEstimate scgf_monte_carlo(const DiffusionModel& model, const ScalarField& f, double theta,
                                           const MonteCarloOptions& opts) {
  if (opts.replicas < 100) fail(ErrorKind::parameter, "Monte Carlo needs at least 100 replicas");
  if (!(opts.dt > 0.0) || !(opts.T >= opts.dt)) fail(ErrorKind::parameter, "need dt > 0 and T >= dt");
  if (!(opts.burn_in >= 0.0) || !(opts.burn_in < opts.T)) fail(ErrorKind::parameter, "need 0 <= burn_in < T");
  MonteCarloEstimate est;
  est.replicas = opts.replicas;
  if (theta == 0.0) {
    est.ess = opts.replicas;
    est.ess_fraction = 1.0;
    return est;
  }
  const Vec x0 = detail::start_state(model, opts.x0);
  const Integrator integ(model, opts.dt);
  const long burn_steps = std::lround(opts.burn_in / opts.dt);
  const long steps = std::lround(opts.T / opts.dt);
  const double span = (steps - burn_steps) * opts.dt;
  const std::size_t N = static_cast<std::size_t>(opts.replicas);
  std::vector<double> l0(N, 0.0), l1(N);
  parallel_for(N, opts.threads, [&](std::size_t r) {
    Gaussian noise(make_stream(opts.seed, r));
    Vec x = x0;
    const double a0 = detail::advance(integ, f, x, burn_steps, noise, opts.safety_box);
    l0[r] = theta * a0;
    l1[r] = l0[r] + theta * detail::advance(integ, f, x, steps - burn_steps, noise, opts.safety_box);
  });
  const double top1 = *std::max_element(l1.begin(), l1.end());
  const double top0 = *std::max_element(l0.begin(), l0.end());
  if (!std::isfinite(top1) || !std::isfinite(top0)) fail(ErrorKind::numeric_range, "replica weights overflow; use cloning");
  const double n = static_cast<double>(N);
  double m0 = 0.0, m1 = 0.0, q0 = 0.0, q1 = 0.0, c01 = 0.0;
  for (std::size_t r = 0; r < N; ++r) {
    const double w0 = std::exp(l0[r] - top0), w1 = std::exp(l1[r] - top1);
    m0 += w0;
    m1 += w1;
    q0 += w0 * w0;
    q1 += w1 * w1;
    c01 += w0 * w1;
  }
  est.ess = m1 * m1 / q1;
  est.ess_fraction = est.ess / n;
  m0 /= n;
  m1 /= n;
  if (!(m1 > 0.0) || !(m0 > 0.0)) fail(ErrorKind::numeric_range, "replica mean underflows; use cloning");
  const double v0 = std::max(0.0, q0 / n - m0 * m0) * n / (n - 1.0);
  const double v1 = std::max(0.0, q1 / n - m1 * m1) * n / (n - 1.0);
  const double cov = (c01 / n - m0 * m1) * n / (n - 1.0);
  double var_log = v1 / (m1 * m1);
  if (burn_steps > 0) var_log += v0 / (m0 * m0) - 2.0 * cov / (m0 * m1);
  est.lambda = ((top1 + std::log(m1)) - (top0 + std::log(m0))) / span;
  est.standard_error = std::sqrt(std::max(0.0, var_log) / n) / span;
  return est;
}

struct CloningOptions {
  int walkers = 2000;
  double T = 50.0;
  double dt = 1e-2;
  double epoch = 0.5;
  double burn_in = -1.0;  // < 0: 10% of T, rounded to whole epochs
  int batches = 10;
  std::uint64_t seed = 0;
  Vec x0;
  int threads = 1;
  double safety_box = 1e6;
};

struct CloningEstimate {
  double lambda = 0.0;
  double standard_error = 0.0;
  double min_ess = 0.0;  // smallest effective sample size over epochs
  int epochs = 0;
  int burn_in_epochs = 0;
  std::vector<double> epoch_log_means;
};

/// Population dynamics: walkers evolve for an epoch, carry weights e^{theta int f}, then the
/// population is resampled systematically; log mean weights telescope into the estimate.
inline CloningEstimate scgf_cloning(const DiffusionModel& model, const ScalarField& f, double theta,
                                    const CloningOptions& opts) {
  if (opts.walkers < 100) fail(ErrorKind::parameter, "cloning needs at least 100 walkers");
  if (!(opts.dt > 0.0) || !(opts.epoch >= opts.dt)) fail(ErrorKind::parameter, "need dt > 0 and epoch >= dt");
  const long epoch_steps = std::lround(opts.epoch / opts.dt);
  if (std::abs(epoch_steps * opts.dt - opts.epoch) > 1e-9 * opts.epoch)
    fail(ErrorKind::parameter, "resampling epoch must be a multiple of dt");
  const double tau = epoch_steps * opts.dt;
  const int epochs = static_cast<int>(std::lround(opts.T / tau));
  const double burn = opts.burn_in < 0.0 ? 0.1 * opts.T : opts.burn_in;
  const int burn_epochs = static_cast<int>(std::lround(burn / tau));
  if (epochs - burn_epochs < std::max(2, opts.batches))
    fail(ErrorKind::parameter, "too few epochs after burn-in for the batch error estimate");

  CloningEstimate est;
  est.epochs = epochs;
  est.burn_in_epochs = burn_epochs;
  est.min_ess = opts.walkers;
  const std::size_t N = static_cast<std::size_t>(opts.walkers);
  const Vec x0 = detail::start_state(model, opts.x0);
  const Integrator integ(model, opts.dt);
  std::vector<Vec> walkers(N, x0), next(N);
  std::vector<double> logw(N);
  for (int e = 0; e < epochs; ++e) {
    parallel_for(N, opts.threads, [&](std::size_t i) {
      Gaussian noise(make_stream(opts.seed, static_cast<std::uint64_t>(e) * N + i, 1));
      logw[i] = theta * detail::advance(integ, f, walkers[i], epoch_steps, noise, opts.safety_box);
    });
    const double top = *std::max_element(logw.begin(), logw.end());
    if (!std::isfinite(top)) fail(ErrorKind::numeric_range, "walker weights are not finite");
    std::vector<double> cum(N);
    double s1 = 0.0, s2 = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      const double w = std::exp(logw[i] - top);
      s1 += w;
      s2 += w * w;
      cum[i] = s1;
    }
    const double ess = s1 * s1 / s2;
    est.min_ess = std::min(est.min_ess, ess);
    if (ess < 2.0)
      fail(ErrorKind::degeneracy, "effective sample size " + std::to_string(ess) + " at epoch " + std::to_string(e) +
                                      "; shorten the resampling epoch");
    est.epoch_log_means.push_back(top + std::log(s1 / N));
    Gaussian u(make_stream(opts.seed, static_cast<std::uint64_t>(e), 2));
    const double start = u.uniform();
    std::size_t j = 0;
    for (std::size_t i = 0; i < N; ++i) {
      const double target = (start + static_cast<double>(i)) / N * s1;
      while (j + 1 < N && cum[j] < target) ++j;
      next[i] = walkers[j];
    }
    walkers.swap(next);
  }
  const int used = epochs - burn_epochs;
  double total = 0.0;
  for (int e = burn_epochs; e < epochs; ++e) total += est.epoch_log_means[e];
  est.lambda = total / (used * tau);
  const int B = opts.batches;
  std::vector<double> rates;
  for (int b = 0; b < B; ++b) {
    const int lo = burn_epochs + used * b / B;
    const int hi = burn_epochs + used * (b + 1) / B;
    double s = 0.0;
    for (int e = lo; e < hi; ++e) s += est.epoch_log_means[e];
    rates.push_back(s / ((hi - lo) * tau));
  }
  double m = 0.0, v = 0.0;
  for (double r : rates) m += r / B;
  for (double r : rates) v += (r - m) * (r - m) / (B - 1);
  est.standard_error = std::sqrt(v / B);
  return est;
}

}  // namespace devrate
