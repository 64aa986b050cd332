#pragma once

#include "devrate/error.hpp"
#include "devrate/grid.hpp"
#include "devrate/types.hpp"

#include <Eigen/SparseLU>

#include <limits>
#include <string>
#include <vector>

namespace devrate {

/// shift_invert: inverse iteration on (sigma I - Q), sigma tracking the Rayleigh quotient from above.
/// power: power iteration on the nonnegative shift Q + cI.
enum class EigenMethod { shift_invert, power };

inline std::string_view to_string(EigenMethod m) { return m == EigenMethod::shift_invert ? "shift_invert" : "power"; }

struct EigenOptions {
  EigenMethod method = EigenMethod::shift_invert;
  double tolerance = 1e-10;  // on the bracket width and residual, relative to the operator scale
  int max_iterations = 0;    // 0: 500 for shift_invert, 200000 for power
  bool left = true;          // also compute the left vector
};

struct SpectralSolution {
  double lambda = 0.0;
  Vector h;  // right vector, max 1
  Vector l;  // left vector, sum 1
  double lower = 0.0;  // Collatz-Wielandt bracket of the final right iterate (diagnostic)
  double upper = 0.0;
  double residual = 0.0;       // |Q h - lambda h|_inf
  double left_residual = 0.0;  // |Q^T l - lambda l|_inf / |l|_inf
  double scale = 1.0;          // max |Q_ii| + 1
  int iterations = 0;
  EigenMethod method = EigenMethod::shift_invert;

  /// Tilted stationary density l * h, normalized.
  Vector tilted_density() const {
    Vector p = l.cwiseProduct(h);
    return p / p.sum();
  }
};

namespace detail {

inline double operator_scale(const SparseMatrix& Q) { return Q.diagonal().cwiseAbs().maxCoeff() + 1.0; }

struct Bracket {
  double lower;
  double upper;
};

inline Bracket collatz_wielandt(const Vector& Qh, const Vector& h) {
  Bracket b{kInfinity, -kInfinity};
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    const double r = Qh[i] / h[i];
    b.lower = std::min(b.lower, r);
    b.upper = std::max(b.upper, r);
  }
  return b;
}

inline void require_positive(const Vector& h, const char* which) {
  for (Eigen::Index i = 0; i < h.size(); ++i)
    if (!(h[i] > 0.0))
      fail(ErrorKind::positivity_violation,
           std::string(which) + " Perron vector has a nonpositive entry at node " + std::to_string(i) + " (" +
               std::to_string(h[i]) + ")");
}

/// Entries below the round-off level of the largest one carry no sign information; they are
/// replaced by their magnitude (or the smallest normal number) before the positivity check.
inline void clean_roundoff(Vector& v) {
  const double top = v.cwiseAbs().maxCoeff();
  const double floor = 1e-12 * top;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (v[i] <= 0.0 && -v[i] <= floor) v[i] = std::max(-v[i], std::numeric_limits<double>::min());
}

using LU = Eigen::SparseLU<Eigen::SparseMatrix<double>>;

inline void factor(LU& lu, const SparseMatrix& Q, double sigma) {
  Eigen::SparseMatrix<double> A = -Q;
  for (Eigen::Index i = 0; i < A.rows(); ++i) A.coeffRef(i, i) += sigma;
  A.makeCompressed();
  lu.compute(A);
  if (lu.info() != Eigen::Success) fail(ErrorKind::solver, "sparse LU of the shifted operator failed");
}

/// Inverse iteration for the Perron vector of Q (or Q^T). Returns the iterate and its bracket.
struct PerronRun {
  Vector v;
  Bracket bracket;
  int iterations;
  double sigma;
};

inline PerronRun shift_invert_perron(const SparseMatrix& Q, Vector v, double tol, int max_iters, double scale,
                                     const char* which, std::optional<double> fixed_sigma = std::nullopt) {
  LU lu;
  Vector Qv = Q * v;
  Bracket b = collatz_wielandt(Qv, v);
  double sigma = fixed_sigma ? *fixed_sigma : b.upper + std::max(b.upper - b.lower, 1e-8 * scale);
  double factored = kInfinity;
  double rq_prev = b.upper;
  double best = kInfinity;
  int stagnant = 0;
  for (int it = 1; it <= max_iters; ++it) {
    if (sigma != factored) {
      factor(lu, Q, sigma);
      factored = sigma;
    }
    Vector y = lu.solve(v);
    Eigen::Index k;
    y.cwiseAbs().maxCoeff(&k);
    if (!y.allFinite() || y[k] == 0.0) fail(ErrorKind::solver, std::string(which) + " inverse iteration produced a singular iterate");
    v = y / y[k];
    Qv = Q * v;
    const double rq = v.dot(Qv) / v.squaredNorm();
    const double res = (Qv - rq * v).cwiseAbs().maxCoeff();
    if (res <= tol * scale) {
      // Polish until the residual stops shrinking (rounding floor).
      if (res < 0.5 * best) {
        best = res;
        stagnant = 0;
      } else if (++stagnant >= 2) {
        return {v, collatz_wielandt(Qv, v), it, sigma};
      }
    }
    if (!fixed_sigma) {
      const double next = rq + std::max(10.0 * std::abs(rq - rq_prev), 1e-8 * scale);
      if (next < sigma) sigma = next;
    }
    rq_prev = rq;
  }
  if (best > tol * scale)
    fail(ErrorKind::convergence, std::string(which) + " inverse iteration did not converge in " +
                                     std::to_string(max_iters) + " iterations");
  return {v, collatz_wielandt(Qv, v), max_iters, sigma};
}

inline PerronRun power_perron(const SparseMatrix& Q, Vector v, double tol, int max_iters, double c, double scale,
                              const char* which) {
  Bracket b{};
  for (int it = 1; it <= max_iters; ++it) {
    Vector y = Q * v + c * v;
    const double m = y.maxCoeff();
    if (!(m > 0.0)) fail(ErrorKind::positivity_violation, std::string(which) + " power iterate lost positivity");
    b = collatz_wielandt(Q * v, v);
    v = y / m;
    if (b.upper - b.lower <= tol * scale) {
      require_positive(v, which);
      b = collatz_wielandt(Q * v, v);
      return {v, b, it, c};
    }
  }
  fail(ErrorKind::convergence, std::string(which) + " power iteration did not converge in " + std::to_string(max_iters) +
                                   " iterations; bracket width " + std::to_string(b.upper - b.lower));
}

}  // namespace detail

/// Principal eigenpair of Q = L + diag(f).
inline SpectralSolution principal_eigenpair(const SparseMatrix& L, const Vector& f, const EigenOptions& opts = {}) {
  const Eigen::Index N = L.rows();
  if (f.size() != N) fail(ErrorKind::parameter, "tilt size does not match the operator");
  if (!f.allFinite()) fail(ErrorKind::parameter, "tilt has non-finite entries");
  SparseMatrix Q = L;
  Q.diagonal() += f;
  SpectralSolution sol;
  sol.method = opts.method;
  sol.scale = detail::operator_scale(Q);
  const Vector ones = Vector::Ones(N);
  detail::PerronRun right;
  if (opts.method == EigenMethod::shift_invert) {
    const int iters = opts.max_iterations > 0 ? opts.max_iterations : 500;
    right = detail::shift_invert_perron(Q, ones, opts.tolerance, iters, sol.scale, "right");
  } else {
    const int iters = opts.max_iterations > 0 ? opts.max_iterations : 200000;
    const double c = Q.diagonal().cwiseAbs().maxCoeff() + f.maxCoeff() - f.minCoeff();
    right = detail::power_perron(Q, ones, opts.tolerance, iters, c, sol.scale, "right");
  }
  detail::clean_roundoff(right.v);
  detail::require_positive(right.v, "right");
  sol.h = right.v;
  sol.lower = right.bracket.lower;
  sol.upper = right.bracket.upper;
  const Vector Qh = Q * sol.h;
  sol.lambda = sol.h.dot(Qh) / sol.h.squaredNorm();
  sol.iterations = right.iterations;
  if (opts.left) {
    const SparseMatrix Qt = Q.transpose();
    detail::PerronRun left;
    if (opts.method == EigenMethod::shift_invert) {
      const double sigma = sol.lambda + 1e-8 * sol.scale;
      left = detail::shift_invert_perron(Qt, ones, opts.tolerance, opts.max_iterations > 0 ? opts.max_iterations : 500,
                                         sol.scale, "left", sigma);
    } else {
      const double c = Q.diagonal().cwiseAbs().maxCoeff() + f.maxCoeff() - f.minCoeff();
      left = detail::power_perron(Qt, ones, opts.tolerance, opts.max_iterations > 0 ? opts.max_iterations : 200000, c,
                                  sol.scale, "left");
    }
    detail::clean_roundoff(left.v);
    detail::require_positive(left.v, "left");
    sol.l = left.v / left.v.sum();
    // Two-sided Rayleigh quotient: second order in both vector errors.
    sol.lambda = sol.l.dot(Qh) / sol.l.dot(sol.h);
    sol.left_residual = (Qt * sol.l - sol.lambda * sol.l).cwiseAbs().maxCoeff() / sol.l.cwiseAbs().maxCoeff();
  }
  sol.residual = (Qh - sol.lambda * sol.h).cwiseAbs().maxCoeff();
  return sol;
}

inline SpectralSolution principal_eigenpair(const SparseGenerator& g, const Vector& f, const EigenOptions& opts = {}) {
  return principal_eigenpair(g.L, f, opts);
}

/// diag(h)^{-1} (L + diag(f) - lambda I) diag(h). The diagonal is set to minus the off-diagonal row
/// sum so the result is an exact generator; max_diagonal_defect records how far that is from
/// L_ii + f_i - lambda.
struct DoobTransform {
  SparseMatrix generator;
  double max_diagonal_defect = 0.0;
};

inline DoobTransform doob_transform(const SparseMatrix& L, const Vector& f, const SpectralSolution& sol) {
  detail::require_positive(sol.h, "right");
  DoobTransform out;
  out.generator = L;
  SparseMatrix& G = out.generator;
  for (Eigen::Index r = 0; r < G.outerSize(); ++r) {
    double off = 0.0;
    double* diag = nullptr;
    for (SparseMatrix::InnerIterator it(G, r); it; ++it) {
      if (it.col() == r) {
        diag = &it.valueRef();
      } else {
        it.valueRef() *= sol.h[it.col()] / sol.h[r];
        off += it.value();
      }
    }
    const double literal = L.coeff(r, r) + f[r] - sol.lambda;
    if (diag) *diag = -off;
    else if (off != 0.0) fail(ErrorKind::mesh, "generator row without diagonal entry");
    out.max_diagonal_defect = std::max(out.max_diagonal_defect, std::abs(literal + off));
  }
  return out;
}

/// Stationary law of the generator (left Perron vector at f = 0), summing to 1.
inline Vector invariant_measure(const SparseMatrix& L, const EigenOptions& opts = {}) {
  return principal_eigenpair(L, Vector::Zero(L.rows()), opts).l;
}

inline Vector invariant_measure(const SparseGenerator& g, const EigenOptions& opts = {}) {
  return invariant_measure(g.L, opts);
}

/// The closed-form Gibbs measure when the scheme preserves one (accurate to round-off relative to each
/// entry, also deep in the tails), otherwise the computed invariant measure.
inline Vector reference_measure(const SparseGenerator& g, const EigenOptions& opts = {}) {
  if (g.gibbs_measure) return *g.gibbs_measure;
  return invariant_measure(g.L, opts);
}

/// Weighted distance sum_i W_i |nu_i - mu_i|.
inline double weighted_distance(const Vector& W, const Vector& nu, const Vector& mu) {
  return W.dot((nu - mu).cwiseAbs());
}

struct DecayFit {
  std::vector<double> times;
  std::vector<double> distances;
  double rate = 0.0;
  double prefactor = 0.0;
  bool decays = false;
};

/// Evolves nu0 by implicit-Euler steps of L^T and fits log d_W(nu_t, mu) against t.
inline DecayFit ergodicity_decay(const SparseMatrix& L, const Vector& W, const Vector& nu0, const Vector& mu,
                                 const std::vector<double>& times, double dt = 1e-3) {
  for (Eigen::Index i = 0; i < W.size(); ++i)
    if (!(W[i] >= 1.0)) fail(ErrorKind::parameter, "weight W must be >= 1 on the mesh");
  const Eigen::Index N = L.rows();
  Eigen::SparseMatrix<double> A = -dt * SparseMatrix(L.transpose());
  for (Eigen::Index i = 0; i < N; ++i) A.coeffRef(i, i) += 1.0;
  A.makeCompressed();
  detail::LU lu(A);
  if (lu.info() != Eigen::Success) fail(ErrorKind::solver, "implicit Euler factorization failed");
  DecayFit out;
  Vector nu = nu0;
  double t = 0.0;
  for (double target : times) {
    const long steps = std::lround((target - t) / dt);
    for (long s = 0; s < steps; ++s) nu = lu.solve(nu);
    t += steps * dt;
    out.times.push_back(t);
    out.distances.push_back(weighted_distance(W, nu, mu));
  }
  std::vector<double> ts, ys;
  for (std::size_t k = 0; k < out.times.size(); ++k)
    if (out.distances[k] > 0.0) {
      ts.push_back(out.times[k]);
      ys.push_back(std::log(out.distances[k]));
    }
  if (ts.size() >= 2) {
    const double n = static_cast<double>(ts.size());
    double st = 0, sy = 0, stt = 0, sty = 0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
      st += ts[k];
      sy += ys[k];
      stt += ts[k] * ts[k];
      sty += ts[k] * ys[k];
    }
    const double slope = (n * sty - st * sy) / (n * stt - st * st);
    out.rate = -slope;
    out.prefactor = std::exp((sy - slope * st) / n);
    out.decays = out.rate > 0.0;
  }
  return out;
}

}  // namespace devrate
