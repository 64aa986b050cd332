#pragma once

#include "devrate/error.hpp"
#include "devrate/field.hpp"
#include "devrate/grid.hpp"
#include "devrate/model.hpp"
#include "devrate/rng.hpp"
#include "devrate/simulate.hpp"
#include "devrate/spectral.hpp"
#include "devrate/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

namespace devrate {

/// nu = e^v mu_h / Z. v keeps the caller's additive constant; log_normalizer = log Z.
struct Perturbation {
  Vector v;
  Vector nu;
  double log_normalizer = 0.0;

  static Perturbation from_values(const Vector& v, const Vector& mu) {
    if (v.size() != mu.size()) fail(ErrorKind::parameter, "perturbation size does not match the measure");
    if (!v.allFinite()) fail(ErrorKind::domain, "perturbation has non-finite values");
    detail::require_positive_measure(mu, static_cast<std::size_t>(mu.size()));
    Perturbation p;
    p.v = v;
    const double vmax = v.maxCoeff();
    Vector w = (v.array() - vmax).exp().matrix().cwiseProduct(mu);
    const double z = w.sum();
    p.nu = w / z;
    p.log_normalizer = vmax + std::log(z);
    for (Eigen::Index i = 0; i < p.nu.size(); ++i)
      if (!(p.nu[i] > 0.0)) fail(ErrorKind::measure, "perturbed measure underflows at node " + std::to_string(i));
    return p;
  }

  static Perturbation from_field(const ScalarField& v, const Mesh& mesh, const Vector& mu, int threads = 1) {
    return from_values(sample(v, mesh, threads), mu);
  }

  /// log(d nu / d mu_h) = v - log Z.
  Vector log_density() const { return v.array() - log_normalizer; }
};

/// Forward differences on mesh edges with the diffusion coefficient S_kk averaged over the two ends.
/// Edges with zero coefficient are dropped; their absence defines the null space of the stiffness matrix.
class EdgeGradient {
 public:
  struct Edge {
    Eigen::Index i;
    Eigen::Index j;
    double inv_h;
    double s;
  };

  EdgeGradient(const DiffusionModel& model, const Mesh& mesh, int threads = 1) : n_(static_cast<Eigen::Index>(mesh.size())) {
    const int d = mesh.dimension();
    Eigen::MatrixXd diag(mesh.size(), d);
    parallel_for(mesh.size(), threads, [&](std::size_t i) {
      const Mat S = model.diffusion_matrix(mesh.point(i));
      for (int k = 0; k < d; ++k) diag(static_cast<Eigen::Index>(i), k) = S(k, k);
    });
    for (std::size_t i = 0; i < mesh.size(); ++i)
      for (int k = 0; k < d; ++k)
        if (auto j = mesh.neighbor(i, k, +1)) {
          const double s = 0.5 * (diag(static_cast<Eigen::Index>(i), k) + diag(static_cast<Eigen::Index>(*j), k));
          if (s > 0.0)
            edges_.push_back({static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(*j), 1.0 / mesh.axis(k).h(), s});
        }
    // Connected components of the edge graph.
    std::vector<Eigen::Index> parent(static_cast<std::size_t>(n_));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](Eigen::Index a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    for (const Edge& e : edges_) {
      const Eigen::Index a = find(e.i), b = find(e.j);
      if (a != b) parent[std::max(a, b)] = std::min(a, b);
    }
    component_.resize(static_cast<std::size_t>(n_));
    std::vector<int> label(static_cast<std::size_t>(n_), -1);
    for (Eigen::Index i = 0; i < n_; ++i) {
      const Eigen::Index r = find(i);
      if (label[r] < 0) label[r] = components_++;
      component_[i] = label[r];
    }
  }

  Eigen::Index size() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int components() const { return components_; }
  int component(Eigen::Index i) const { return component_[i]; }

  /// (1/4) sum_e S_e (nu_i + nu_j)/2 (G u)_e^2.
  double quarter_energy(const Vector& u, const Vector& nu) const { return 0.25 * energy(u, nu); }

  double energy(const Vector& u, const Vector& nu) const {
    double acc = 0.0;
    for (const Edge& e : edges_) {
      const double g = (u[e.j] - u[e.i]) * e.inv_h;
      acc += e.s * 0.5 * (nu[e.i] + nu[e.j]) * g * g;
    }
    return acc;
  }

  /// M = G^T diag(S_e (nu_i + nu_j)/2) G.
  SparseMatrix stiffness(const Vector& nu) const {
    std::vector<Triplet> t;
    t.reserve(edges_.size() * 4);
    for (const Edge& e : edges_) {
      const double w = e.s * 0.5 * (nu[e.i] + nu[e.j]) * e.inv_h * e.inv_h;
      t.emplace_back(e.i, e.i, w);
      t.emplace_back(e.j, e.j, w);
      t.emplace_back(e.i, e.j, -w);
      t.emplace_back(e.j, e.i, -w);
    }
    SparseMatrix M(n_, n_);
    M.setFromTriplets(t.begin(), t.end());
    M.makeCompressed();
    return M;
  }

  /// Per-component sums.
  Vector component_sums(const Vector& x) const {
    Vector s = Vector::Zero(components_);
    for (Eigen::Index i = 0; i < n_; ++i) s[component_[i]] += x[i];
    return s;
  }

  /// Removes the per-component Euclidean mean (orthogonal projection onto the range of M).
  void project(Vector& x) const {
    Vector s = component_sums(x);
    Vector c = component_sums(Vector::Ones(n_));
    for (Eigen::Index i = 0; i < n_; ++i) x[i] -= s[component_[i]] / c[component_[i]];
  }

  /// Shifts x by a constant per component so its nu-weighted mean vanishes there.
  void center(Vector& x, const Vector& nu) const {
    Vector s = component_sums(x.cwiseProduct(nu));
    Vector m = component_sums(nu);
    for (Eigen::Index i = 0; i < n_; ++i) x[i] -= s[component_[i]] / m[component_[i]];
  }

 private:
  Eigen::Index n_;
  std::vector<Edge> edges_;
  std::vector<int> component_;
  int components_ = 0;
};

struct PoissonOptions {
  double tolerance = 1e-10;         // relative residual of the projected system
  double compatibility_tolerance = 1e-3;  // sum_c |sum_c b| / sum |b|
  int max_iterations = 0;           // 0: 20 N
  double reversible_chop = 1e-9;    // |L_A|_max <= chop |L|_max is treated as L_A = 0
};

struct PoissonSolution {
  Vector psi;  // nu-mean zero on every component
  Vector rhs;  // nu * (L_A v), before projection
  double residual = 0.0;  // |M psi - P b| / |P b|
  double compatibility_defect = 0.0;
  int iterations = 0;
  std::vector<double> residual_history;
  bool reversible = false;
};

struct DecompositionResult {
  double IS = 0.0;
  double IA = 0.0;
  double fisher_IS = 0.0;  // node-based Fisher form, a cross-check on IS
  Vector psi;
  double poisson_residual = 0.0;
  double compatibility_defect = 0.0;
  int iterations = 0;
  bool reversible = false;

  double I() const { return IS + IA; }
};

/// (1/4) sum_x mu(x) grad rho . S grad rho / rho with central differences (one-sided at edges).
inline double fisher_information(const DiffusionModel& model, const Mesh& mesh, const Vector& mu, const Perturbation& p) {
  const Vector rho = p.nu.cwiseQuotient(mu);
  const int d = mesh.dimension();
  double acc = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const Mat S = model.diffusion_matrix(mesh.point(i));
    for (int k = 0; k < d; ++k) {
      if (S(k, k) == 0.0) continue;
      const auto up = mesh.neighbor(i, k, +1);
      const auto dn = mesh.neighbor(i, k, -1);
      const double h = mesh.axis(k).h();
      double g;
      if (up && dn) g = (rho[static_cast<Eigen::Index>(*up)] - rho[static_cast<Eigen::Index>(*dn)]) / (2 * h);
      else if (up) g = (rho[static_cast<Eigen::Index>(*up)] - rho[static_cast<Eigen::Index>(i)]) / h;
      else g = (rho[static_cast<Eigen::Index>(i)] - rho[static_cast<Eigen::Index>(*dn)]) / h;
      acc += mu[static_cast<Eigen::Index>(i)] * S(k, k) * g * g / rho[static_cast<Eigen::Index>(i)];
    }
  }
  return 0.25 * acc;
}

/// I_S = (1/4) |v|^2_{H^1(nu)} in the edge form shared with the Poisson stiffness matrix.
inline double symmetric_part(const EdgeGradient& G, const Perturbation& p) { return G.quarter_energy(p.v, p.nu); }

/// Same quadrature with the weights held fixed, for any v.
inline double symmetric_part(const EdgeGradient& G, const Vector& v, const Vector& nu) { return G.quarter_energy(v, nu); }

/// Projected Jacobi-preconditioned conjugate gradients for M psi = b on the range of M.
inline PoissonSolution solve_poisson(const EdgeGradient& G, const SparseMatrix& L, const SparseMatrix& LA, const Perturbation& p,
                                     const PoissonOptions& opts = {}, double generator_scale = 1.0) {
  PoissonSolution out;
  const Eigen::Index N = G.size();
  out.psi = Vector::Zero(N);
  if (max_abs(LA) <= opts.reversible_chop * generator_scale) {
    out.reversible = true;
    out.rhs = Vector::Zero(N);
    return out;
  }
  out.rhs = p.nu.cwiseProduct(LA * p.v);
  const Vector sums = G.component_sums(out.rhs);
  const Vector abs_sums = G.component_sums(out.rhs.cwiseAbs());
  const double scale = p.nu.cwiseProduct(L * p.v).cwiseAbs().sum() + abs_sums.sum();
  if (scale > 0.0) out.compatibility_defect = sums.cwiseAbs().sum() / scale;
  if (out.compatibility_defect > opts.compatibility_tolerance)
    fail(ErrorKind::incompatible_rhs, "nu (L_A v) has a component sum of relative size " +
                                          std::to_string(out.compatibility_defect) + "; L_A v is not in H^-1(nu)");
  Vector b = out.rhs;
  // Subtract a nu-weighted constant per component: the right-hand side of (L_A v - c) nu.
  {
    const Vector m = G.component_sums(p.nu);
    for (Eigen::Index i = 0; i < N; ++i) b[i] -= p.nu[i] * sums[G.component(i)] / m[G.component(i)];
  }
  const SparseMatrix M = G.stiffness(p.nu);
  Vector dinv = M.diagonal();
  for (Eigen::Index i = 0; i < N; ++i) dinv[i] = dinv[i] > 0.0 ? 1.0 / dinv[i] : 0.0;
  const double bnorm = b.norm();
  if (bnorm == 0.0) return out;
  const int max_iters = opts.max_iterations > 0 ? opts.max_iterations : static_cast<int>(20 * N);
  Vector x = Vector::Zero(N);
  Vector r = b;
  Vector z = dinv.cwiseProduct(r);
  G.project(z);
  Vector dir = z;
  double rz = r.dot(z);
  double best = 1.0;
  int since_best = 0;
  int it = 0;
  for (; it < max_iters; ++it) {
    const Vector Md = M * dir;
    const double alpha = rz / dir.dot(Md);
    x += alpha * dir;
    r -= alpha * Md;
    const double rel = r.norm() / bnorm;
    if (it % 10 == 0) out.residual_history.push_back(rel);
    if (rel <= opts.tolerance) {
      ++it;
      break;
    }
    if (rel < 0.999 * best) {
      best = rel;
      since_best = 0;
    } else if (++since_best > std::max<Eigen::Index>(1000, N)) {
      fail(ErrorKind::solver, "conjugate gradients stagnated at relative residual " + std::to_string(rel));
    }
    z = dinv.cwiseProduct(r);
    G.project(z);
    const double rz_new = r.dot(z);
    dir = z + (rz_new / rz) * dir;
    rz = rz_new;
  }
  out.iterations = it;
  out.residual = (M * x - b).norm() / bnorm;
  if (out.residual > std::max(opts.tolerance * 10.0, 1e-8))
    fail(ErrorKind::solver, "conjugate gradients did not converge; relative residual " + std::to_string(out.residual));
  G.center(x, p.nu);
  out.psi = x;
  return out;
}

/// I_A = (1/4) |grad psi|^2_{S, nu}.
inline double antisymmetric_part(const EdgeGradient& G, const Perturbation& p, const Vector& psi) {
  return G.quarter_energy(psi, p.nu);
}

/// (1/2) b . psi - (1/4) psi^T M psi with b = nu (L_A v); maximized by the Poisson solution, where it equals I_A.
inline double variational_objective(const EdgeGradient& G, const Perturbation& p, const Vector& rhs, const Vector& psi) {
  return 0.5 * rhs.dot(psi) - 0.25 * G.energy(psi, p.nu);
}

/// Reusable state for decompositions relative to one generator and invariant measure.
struct DecompositionContext {
  const DiffusionModel* model;
  SparseGenerator generator;
  Vector mu;
  GeneratorSplit split;
  EdgeGradient gradient;
  double generator_scale;

  DecompositionContext(const DiffusionModel& m, SparseGenerator g, Vector mu_h, int threads = 1)
      : model(&m),
        generator(std::move(g)),
        mu(std::move(mu_h)),
        split(split_generator(generator.L, mu)),
        gradient(m, generator.mesh, threads),
        generator_scale(max_abs(generator.L)) {}

  static DecompositionContext build(const DiffusionModel& m, const Mesh& mesh, DriftScheme scheme = DriftScheme::automatic,
                                    int threads = 1) {
    SparseGenerator g = assemble_generator(m, mesh, scheme, threads);
    Vector mu = reference_measure(g);
    return DecompositionContext(m, std::move(g), std::move(mu), threads);
  }

  Perturbation perturbation(const ScalarField& v, int threads = 1) const {
    return Perturbation::from_field(v, generator.mesh, mu, threads);
  }
};

inline DecompositionResult decompose(const DecompositionContext& ctx, const Perturbation& p, const PoissonOptions& opts = {}) {
  DecompositionResult r;
  r.IS = symmetric_part(ctx.gradient, p);
  r.fisher_IS = fisher_information(*ctx.model, ctx.generator.mesh, ctx.mu, p);
  const PoissonSolution sol = solve_poisson(ctx.gradient, ctx.generator.L, ctx.split.antisymmetric, p, opts, ctx.generator_scale);
  r.psi = sol.psi;
  r.IA = sol.reversible ? 0.0 : antisymmetric_part(ctx.gradient, p, sol.psi);
  r.poisson_residual = sol.residual;
  r.compatibility_defect = sol.compatibility_defect;
  r.iterations = sol.iterations;
  r.reversible = sol.reversible;
  return r;
}

struct SweepMember {
  std::string name;
  /// Perturbation field on phase space for a given Langevin model (the model carries gamma).
  std::function<ScalarField(const DiffusionModel&)> field;
};

/// Member parsed from an expression over q, p (q0.., p0..) with the parameter `gamma`.
inline SweepMember sweep_member(std::string name, std::string text) {
  return {std::move(name), [text](const DiffusionModel& m) {
            expr::Symbols s = m.symbols();
            s.parameters["gamma"] = m.langevin()->gamma;
            return ScalarField::from_expression(text, s, m.dimension());
          }};
}

struct SweepRow {
  double gamma = 0.0;
  std::string member;
  double IS = 0.0;
  double IA = 0.0;
  double I = 0.0;
  double gamma_times_I = 0.0;
  double I_over_gamma = 0.0;
  double poisson_residual = 0.0;
};

struct SweepTable {
  std::vector<SweepRow> rows;
  bool spans_decade = false;  // gammas reach 1/10 and 10
};

/// I_gamma = I_S + I_A for Langevin dynamics with potential V at each gamma and family member.
inline SweepTable friction_sweep(const ScalarField& V, int position_dim, const std::vector<SweepMember>& family,
                                 std::vector<double> gammas, const Mesh& mesh, DriftScheme scheme = DriftScheme::automatic,
                                 int threads = 1, const PoissonOptions& opts = {}) {
  if (family.empty()) fail(ErrorKind::empty_family, "sweep family is empty");
  if (gammas.empty()) fail(ErrorKind::parameter, "gamma list is empty");
  std::sort(gammas.begin(), gammas.end());
  if (!(gammas.front() > 0.0)) fail(ErrorKind::parameter, "friction values must be positive");
  if (!(gammas.front() < 1.0 && gammas.back() > 1.0))
    fail(ErrorKind::parameter, "gamma list must have values on both sides of 1");
  SweepTable table;
  table.spans_decade = gammas.front() <= 0.1 && gammas.back() >= 10.0;
  table.rows.resize(gammas.size() * family.size());
  parallel_for(gammas.size(), threads, [&](std::size_t k) {
    const double gamma = gammas[k];
    const DiffusionModel m = langevin(V, gamma, position_dim);
    const DecompositionContext ctx = DecompositionContext::build(m, mesh, scheme);
    for (std::size_t j = 0; j < family.size(); ++j) {
      const DecompositionResult r = decompose(ctx, ctx.perturbation(family[j].field(m)), opts);
      SweepRow& row = table.rows[k * family.size() + j];
      row.gamma = gamma;
      row.member = family[j].name;
      row.IS = r.IS;
      row.IA = r.IA;
      row.I = r.I();
      row.gamma_times_I = gamma * row.I;
      row.I_over_gamma = row.I / gamma;
      row.poisson_residual = r.poisson_residual;
    }
  });
  return table;
}

struct AutocorrelationOptions {
  double T = 8.0;          // truncation of the time integral
  double window = 40.0;    // time origins per trajectory span [0, window]
  int trajectories = 400;
  double dt = 1e-2;
  int batches = 20;
  int lags = 40;           // resolution of the reported correlation curve
  std::uint64_t seed = 0;
  int threads = 1;
  double safety_box = 1e6;
};

struct AutocorrelationEstimate {
  double IA = 0.0;
  double standard_error = 0.0;
  bool truncation_warning = false;
  double tail_ratio = 0.0;  // |C(T)| / C(0)
  std::vector<double> times;
  std::vector<double> correlation;
};

/// I_A = (1/4) int_0^T E_nu[g(X_0) g(X_t)] dt with g = L_A v centred under nu, along the nu-reversible
/// dynamics dX = S grad log nu dt + div S dt + sigma dB (log nu gridded, gradient interpolated).
/// Every trajectory starts from nu and averages over time origins in [0, window].
inline AutocorrelationEstimate autocorrelation_ia(const DecompositionContext& ctx, const Perturbation& p,
                                                  const AutocorrelationOptions& opts = {}) {
  if (!(opts.dt > 0.0) || !(opts.T >= opts.dt) || !(opts.window >= opts.dt))
    fail(ErrorKind::parameter, "need dt > 0, T >= dt and window >= dt");
  if (opts.trajectories < opts.batches || opts.batches < 2) fail(ErrorKind::parameter, "need trajectories >= batches >= 2");
  const DiffusionModel& model = *ctx.model;
  const Mesh& mesh = ctx.generator.mesh;
  const int d = mesh.dimension();
  const Eigen::Index N = static_cast<Eigen::Index>(mesh.size());
  AutocorrelationEstimate out;
  Vector g = ctx.split.antisymmetric * p.v;
  if (max_abs(ctx.split.antisymmetric) <= PoissonOptions{}.reversible_chop * ctx.generator_scale) g.setZero();
  g.array() -= p.nu.dot(g);
  if (g.cwiseAbs().maxCoeff() == 0.0) {
    out.times = {0.0, opts.T};
    out.correlation = {0.0, 0.0};
    return out;
  }

  // Gradient of log nu at the nodes: central differences, one-sided at edges.
  const Vector lognu = p.nu.array().log();
  Eigen::MatrixXd grad(N, d);
  for (Eigen::Index i = 0; i < N; ++i)
    for (int k = 0; k < d; ++k) {
      const auto up = mesh.neighbor(static_cast<std::size_t>(i), k, +1);
      const auto dn = mesh.neighbor(static_cast<std::size_t>(i), k, -1);
      const double h = mesh.axis(k).h();
      const Eigen::Index a = up ? static_cast<Eigen::Index>(*up) : i;
      const Eigen::Index b = dn ? static_cast<Eigen::Index>(*dn) : i;
      grad(i, k) = (lognu[a] - lognu[b]) / (h * ((up ? 1 : 0) + (dn ? 1 : 0)));
    }
  auto div_S = [&](const Vec& x) {
    Vec div = Vec::Zero(d);
    for (int j = 0; j < d; ++j) {
      const double e = 1e-5 * std::max(1.0, std::abs(x[j]));
      Vec xp = x, xm = x;
      xp[j] += e;
      xm[j] -= e;
      div += (model.diffusion_matrix(xp).col(j) - model.diffusion_matrix(xm).col(j)) / (2 * e);
    }
    return div;
  };
  auto drift = [&](const Vec& x) {
    Vec gl = Vec::Zero(d);
    multilinear_weights(mesh, x, [&](std::size_t i, double w) { gl += w * grad.row(static_cast<Eigen::Index>(i)).transpose(); });
    return Vec(model.diffusion_matrix(x) * gl + div_S(x));
  };

  std::vector<double> cdf(static_cast<std::size_t>(N));
  std::partial_sum(p.nu.data(), p.nu.data() + N, cdf.begin());
  const long K = std::lround(opts.T / opts.dt);
  const long W = std::lround(opts.window / opts.dt);
  const long steps = K + W;
  const int L = std::max(1, opts.lags);
  const std::size_t M = static_cast<std::size_t>(opts.trajectories);
  std::vector<double> est(M);
  std::vector<std::vector<double>> corr(M, std::vector<double>(static_cast<std::size_t>(L) + 1));
  parallel_for(M, opts.threads, [&](std::size_t r) {
    Gaussian noise(make_stream(opts.seed, r, 3));
    // Start: node drawn from nu, jittered uniformly within its cell.
    const double u = noise.uniform() * cdf.back();
    const std::size_t node = std::min<std::size_t>(std::lower_bound(cdf.begin(), cdf.end(), u) - cdf.begin(), N - 1);
    Vec x = mesh.point(node);
    for (int k = 0; k < d; ++k) {
      const Axis& a = mesh.axis(k);
      x[k] = std::clamp(x[k] + (noise.uniform() - 0.5) * a.h(), a.lo, a.hi);
    }
    std::vector<double> gs(static_cast<std::size_t>(steps) + 1);
    const double sq = std::sqrt(opts.dt);
    for (long n = 0; n <= steps; ++n) {
      gs[n] = interpolate(mesh, g, x);
      if (n == steps) break;
      const Mat s = model.sigma(x);
      x += opts.dt * drift(x) + sq * (s * noise.vector(static_cast<int>(s.cols())));
      if (outside_box(x, opts.safety_box)) fail(ErrorKind::blow_up, "auxiliary dynamics left the safety box");
    }
    std::vector<double> P(gs.size(), 0.0);
    for (std::size_t n = 1; n < gs.size(); ++n) P[n] = P[n - 1] + 0.5 * opts.dt * (gs[n - 1] + gs[n]);
    double acc = 0.0;
    for (long n = 0; n <= W; ++n) acc += gs[n] * (P[n + K] - P[n]);
    est[r] = 0.25 * acc / static_cast<double>(W + 1);
    for (int l = 0; l <= L; ++l) {
      const long lag = K * l / L;
      double c = 0.0;
      for (long n = 0; n <= W; ++n) c += gs[n] * gs[n + lag];
      corr[r][l] = c / static_cast<double>(W + 1);
    }
  });
  const int B = opts.batches;
  std::vector<double> batch(B, 0.0);
  for (std::size_t r = 0; r < M; ++r) batch[r * B / M] += est[r];
  for (int b = 0; b < B; ++b) {
    const std::size_t lo = (static_cast<std::size_t>(b) * M + B - 1) / B, hi = ((b + 1) * M + B - 1) / B;
    batch[b] /= static_cast<double>(hi - lo);
  }
  double mean = 0.0, var = 0.0;
  for (double v : batch) mean += v / B;
  for (double v : batch) var += (v - mean) * (v - mean) / (B - 1);
  out.IA = mean;
  out.standard_error = std::sqrt(var / B);
  for (int l = 0; l <= L; ++l) {
    double c = 0.0;
    for (std::size_t r = 0; r < M; ++r) c += corr[r][l];
    out.times.push_back(opts.T * l / L);
    out.correlation.push_back(c / static_cast<double>(M));
  }
  out.tail_ratio = std::abs(out.correlation.back()) / out.correlation.front();
  out.truncation_warning = out.tail_ratio > 0.05;
  return out;
}

}  // namespace devrate
