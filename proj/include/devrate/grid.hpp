#pragma once

#include "devrate/error.hpp"
#include "devrate/field.hpp"
#include "devrate/model.hpp"
#include "devrate/types.hpp"

#include <Eigen/SparseLU>

#include <array>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace devrate {

enum class Boundary { truncated, periodic };

inline std::string_view to_string(Boundary b) { return b == Boundary::truncated ? "truncated" : "periodic"; }

struct Axis {
  double lo = -8.0;
  double hi = 8.0;
  int n = 401;
  Boundary mode = Boundary::truncated;

  double h() const { return mode == Boundary::truncated ? (hi - lo) / (n - 1) : (hi - lo) / n; }
  double node(int i) const { return lo + i * h(); }
};

/// Tensor grid. Linear index runs fastest along axis 0.
class Mesh {
 public:
  static constexpr std::size_t kMaxNodes = 4'000'000;

  Mesh() = default;
  explicit Mesh(std::vector<Axis> axes) : axes_(std::move(axes)) {
    if (axes_.empty() || static_cast<int>(axes_.size()) > kMaxDim) fail(ErrorKind::mesh, "mesh dimension must be in [1, 6]");
    std::size_t n = 1;
    for (const Axis& a : axes_) {
      if (a.n < 8) fail(ErrorKind::mesh, "mesh needs at least 8 nodes per dimension, got " + std::to_string(a.n));
      if (!(a.hi > a.lo)) fail(ErrorKind::mesh, "mesh axis bounds must satisfy lo < hi");
      strides_.push_back(n);
      n *= static_cast<std::size_t>(a.n);
      if (n > kMaxNodes) fail(ErrorKind::mesh, "mesh exceeds the node budget of " + std::to_string(kMaxNodes));
    }
    size_ = n;
  }

  static Mesh uniform(int dim, double lo, double hi, int n, Boundary mode = Boundary::truncated) {
    return Mesh(std::vector<Axis>(dim, Axis{lo, hi, n, mode}));
  }

  /// Box [-8, 8] per dimension; 401 nodes in 1D, 161 per axis in 2D, 41 per axis beyond.
  static Mesh default_for(int dim) { return uniform(dim, -8.0, 8.0, dim == 1 ? 401 : (dim == 2 ? 161 : 41)); }

  int dimension() const { return static_cast<int>(axes_.size()); }
  std::size_t size() const { return size_; }
  const Axis& axis(int k) const { return axes_[k]; }
  const std::vector<Axis>& axes() const { return axes_; }
  std::size_t stride(int k) const { return strides_[k]; }

  int coordinate(std::size_t i, int k) const { return static_cast<int>((i / strides_[k]) % axes_[k].n); }

  std::array<int, kMaxDim> multi_index(std::size_t i) const {
    std::array<int, kMaxDim> m{};
    for (int k = 0; k < dimension(); ++k) m[k] = coordinate(i, k);
    return m;
  }

  std::size_t linear_index(const std::array<int, kMaxDim>& m) const {
    std::size_t i = 0;
    for (int k = 0; k < dimension(); ++k) i += static_cast<std::size_t>(m[k]) * strides_[k];
    return i;
  }

  Vec point(std::size_t i) const {
    Vec x(dimension());
    for (int k = 0; k < dimension(); ++k) x[k] = axes_[k].node(coordinate(i, k));
    return x;
  }

  /// Neighbor one step along axis k (dir = +1 or -1); wraps on periodic axes, empty past a truncated edge.
  std::optional<std::size_t> neighbor(std::size_t i, int k, int dir) const {
    const int c = coordinate(i, k);
    const int n = axes_[k].n;
    const int t = c + dir;
    if (t < 0 || t >= n) {
      if (axes_[k].mode == Boundary::truncated) return std::nullopt;
      const int w = (t + n) % n;
      return i + static_cast<std::size_t>(w) * strides_[k] - static_cast<std::size_t>(c) * strides_[k];
    }
    return dir > 0 ? i + strides_[k] : i - strides_[k];
  }

  /// Node sits on the edge of some truncated axis.
  bool is_boundary(std::size_t i) const {
    for (int k = 0; k < dimension(); ++k) {
      if (axes_[k].mode == Boundary::periodic) continue;
      const int c = coordinate(i, k);
      if (c == 0 || c == axes_[k].n - 1) return true;
    }
    return false;
  }

  double cell_volume() const {
    double v = 1.0;
    for (const Axis& a : axes_) v *= a.h();
    return v;
  }

  /// Same spacing on a box doubled about its centre (truncated axes only).
  Mesh doubled() const {
    std::vector<Axis> out = axes_;
    for (Axis& a : out) {
      if (a.mode == Boundary::periodic) continue;
      const double c = 0.5 * (a.lo + a.hi), w = a.hi - a.lo;
      a.lo = c - w;
      a.hi = c + w;
      a.n = 2 * (a.n - 1) + 1;
    }
    return Mesh(out);
  }

  bool operator==(const Mesh& o) const {
    if (axes_.size() != o.axes_.size()) return false;
    for (std::size_t k = 0; k < axes_.size(); ++k)
      if (axes_[k].lo != o.axes_[k].lo || axes_[k].hi != o.axes_[k].hi || axes_[k].n != o.axes_[k].n ||
          axes_[k].mode != o.axes_[k].mode)
        return false;
    return true;
  }

 private:
  std::vector<Axis> axes_;
  std::vector<std::size_t> strides_;
  std::size_t size_ = 0;
};

/// Samples of a field at the mesh nodes.
inline Vector sample(const ScalarField& f, const Mesh& mesh, int threads = 1) {
  Vector out(static_cast<Eigen::Index>(mesh.size()));
  parallel_for(mesh.size(), threads, [&](std::size_t i) { out[static_cast<Eigen::Index>(i)] = f(mesh.point(i)); });
  return out;
}

/// Multilinear (cloud-in-cell) weights of x over the 2^d surrounding nodes; x is clamped to
/// truncated axes and wrapped on periodic ones. Calls fn(node, weight) for nonzero weights.
template <class Fn>
void multilinear_weights(const Mesh& mesh, const Vec& x, Fn&& fn) {
  const int d = mesh.dimension();
  std::array<int, kMaxDim> base{};
  std::array<double, kMaxDim> frac{};
  for (int k = 0; k < d; ++k) {
    const Axis& a = mesh.axis(k);
    double u = (x[k] - a.lo) / a.h();
    if (a.mode == Boundary::periodic) {
      u = std::fmod(u, static_cast<double>(a.n));
      if (u < 0.0) u += a.n;
      base[k] = std::min(static_cast<int>(std::floor(u)), a.n - 1);
    } else {
      u = std::clamp(u, 0.0, static_cast<double>(a.n - 1));
      base[k] = std::min(static_cast<int>(std::floor(u)), a.n - 2);
    }
    frac[k] = u - base[k];
  }
  for (int corner = 0; corner < (1 << d); ++corner) {
    double w = 1.0;
    std::array<int, kMaxDim> m{};
    for (int k = 0; k < d; ++k) {
      const int bit = (corner >> k) & 1;
      w *= bit ? frac[k] : 1.0 - frac[k];
      m[k] = base[k] + bit;
      if (m[k] == mesh.axis(k).n) m[k] = 0;
    }
    if (w != 0.0) fn(mesh.linear_index(m), w);
  }
}

inline double interpolate(const Mesh& mesh, const Vector& values, const Vec& x) {
  double out = 0.0;
  multilinear_weights(mesh, x, [&](std::size_t i, double w) { out += w * values[static_cast<Eigen::Index>(i)]; });
  return out;
}

/// hybrid: central differences where 2 S_kk >= |b_k| h_k (off-diagonals stay nonnegative),
/// upwind elsewhere. upwind: first-order upwind everywhere.
/// gibbs: flux form for b = (A - S) grad U that keeps e^{-U} at the nodes exactly invariant;
/// Scharfetter-Gummel conductances S B(U_j - U_i) / h^2, transport fluxes from a corner stream function,
/// upwinded only where the conductance cannot absorb them. automatic: gibbs when the model has a GibbsForm, else hybrid.
enum class DriftScheme { hybrid, upwind, gibbs, automatic };

inline std::string_view to_string(DriftScheme s) {
  switch (s) {
    case DriftScheme::hybrid: return "hybrid";
    case DriftScheme::upwind: return "upwind";
    case DriftScheme::gibbs: return "gibbs";
    case DriftScheme::automatic: return "automatic";
  }
  return "?";
}

inline DriftScheme parse_drift_scheme(std::string_view s) {
  for (DriftScheme d : {DriftScheme::hybrid, DriftScheme::upwind, DriftScheme::gibbs, DriftScheme::automatic})
    if (to_string(d) == s) return d;
  fail(ErrorKind::config, "unknown drift scheme '" + std::string(s) + "'");
}

struct SparseGenerator {
  SparseMatrix L;
  Mesh mesh;
  std::string model_id;
  DriftScheme scheme = DriftScheme::hybrid;
  std::optional<Vector> gibbs_measure;  // e^{-U} at the nodes, normalized; exactly invariant for the gibbs scheme

  std::size_t size() const { return mesh.size(); }
};

/// Finite-difference Markov generator: second-order central diffusion, drift per DriftScheme,
/// outflow past truncated edges dropped (reflecting closure), periodic wrap, diagonal = -sum of the row.
namespace detail {

inline void check_axis_aligned(const Mat& S) {
  const double scale = S.cwiseAbs().maxCoeff();
  for (int k = 0; k < S.rows(); ++k)
    for (int l = 0; l < S.cols(); ++l)
      if (k != l && std::abs(S(k, l)) > 1e-14 * std::max(1.0, scale))
        fail(ErrorKind::unsupported_diffusion, "diffusion matrix has cross terms; only axis-aligned S is supported");
}

inline SparseMatrix from_rows(std::size_t N, int width, const std::vector<Eigen::Index>& cols, const std::vector<double>& vals) {
  std::vector<Triplet> trips;
  trips.reserve(N * width);
  for (std::size_t i = 0; i < N; ++i)
    for (int s = 0; s < width; ++s)
      if (cols[i * width + s] >= 0) trips.emplace_back(static_cast<Eigen::Index>(i), cols[i * width + s], vals[i * width + s]);
  SparseMatrix L(static_cast<Eigen::Index>(N), static_cast<Eigen::Index>(N));
  L.setFromTriplets(trips.begin(), trips.end());
  L.makeCompressed();
  return L;
}

/// Flux of pi (A grad U) from node m to m + e_k, divided by pi at node `ref`.
/// The corner stream function vanishes unless all four nodes around the corner exist, so fluxes
/// through the outer faces are zero and the discrete divergence telescopes to zero at every node.
inline double gibbs_flux(const Mesh& mesh, const Vector& U, const Mat& A, std::size_t m, int k, double Uref) {
  const auto mk = mesh.neighbor(m, k, +1);
  if (!mk) return 0.0;
  double flux = 0.0;
  for (int l = 0; l < mesh.dimension(); ++l) {
    if (l == k || A(k, l) == 0.0) continue;
    double corner[2] = {0.0, 0.0};
    for (int side = 0; side < 2; ++side) {
      const int dir = side == 0 ? +1 : -1;
      const auto a = mesh.neighbor(m, l, dir);
      const auto b = mesh.neighbor(*mk, l, dir);
      if (!a || !b) continue;
      double acc = 0.0;
      for (std::size_t n : {m, *mk, *a, *b}) acc += std::exp(Uref - U[static_cast<Eigen::Index>(n)]);
      corner[side] = 0.25 * acc;
    }
    flux -= A(k, l) * (corner[0] - corner[1]) / mesh.axis(l).h();
  }
  return flux / mesh.axis(k).h();
}

/// x / (e^x - 1), the Scharfetter-Gummel weight; B(-x) = e^x B(x).
inline double bernoulli(double x) {
  if (std::abs(x) < 1e-4) return 1.0 - 0.5 * x + x * x / 12.0;
  return x / std::expm1(x);
}

inline SparseMatrix assemble_gibbs(const DiffusionModel& model, const GibbsForm& form, const Mesh& mesh, int threads) {
  const int d = mesh.dimension();
  const std::size_t N = mesh.size();
  const int width = 2 * d + 1;
  const Vector U = sample(form.energy, mesh, threads);
  if (!U.allFinite()) fail(ErrorKind::domain, "energy is not finite on the mesh");
  Eigen::MatrixXd diag(N, d);
  std::vector<int> bad(N, 0);
  parallel_for(N, threads, [&](std::size_t i) {
    const Mat S = model.diffusion_matrix(mesh.point(i));
    try {
      check_axis_aligned(S);
    } catch (const Error&) {
      bad[i] = 1;
    }
    for (int k = 0; k < d; ++k) diag(static_cast<Eigen::Index>(i), k) = S(k, k);
  });
  for (std::size_t i = 0; i < N; ++i)
    if (bad[i]) fail(ErrorKind::unsupported_diffusion, "diffusion matrix has cross terms; only axis-aligned S is supported");
  std::vector<Eigen::Index> cols(N * width, -1);
  std::vector<double> vals(N * width, 0.0);
  parallel_for(N, threads, [&](std::size_t i) {
    const Eigen::Index ii = static_cast<Eigen::Index>(i);
    const double Ui = U[ii];
    double total = 0.0;
    for (int k = 0; k < d; ++k) {
      const double h = mesh.axis(k).h();
      for (int side = 0; side < 2; ++side) {
        const int dir = side == 0 ? +1 : -1;
        const auto j = mesh.neighbor(i, k, dir);
        if (!j) continue;
        const Eigen::Index jj = static_cast<Eigen::Index>(*j);
        const double s = 0.5 * (diag(ii, k) + diag(jj, k));
        const double conductance = s / (h * h) * bernoulli(U[jj] - Ui);
        const double flux = dir > 0 ? gibbs_flux(mesh, U, form.transport, i, k, Ui)
                                    : -gibbs_flux(mesh, U, form.transport, *j, k, Ui);
        const double rate = std::max(conductance, 0.5 * std::abs(flux)) + 0.5 * flux;
        if (rate == 0.0) continue;
        cols[i * width + 2 * k + side] = jj;
        vals[i * width + 2 * k + side] = rate;
        total += rate;
      }
    }
    cols[i * width + 2 * d] = ii;
    vals[i * width + 2 * d] = -total;
  });
  return from_rows(N, width, cols, vals);
}

}  // namespace detail

inline SparseGenerator assemble_generator(const DiffusionModel& model, const Mesh& mesh,
                                          DriftScheme scheme = DriftScheme::automatic, int threads = 1) {
  const int d = mesh.dimension();
  if (d != model.dimension())
    fail(ErrorKind::mesh, "mesh dimension " + std::to_string(d) + " does not match model dimension " +
                              std::to_string(model.dimension()));
  const std::optional<GibbsForm> form = gibbs_form(model);
  if (scheme == DriftScheme::automatic) scheme = form ? DriftScheme::gibbs : DriftScheme::hybrid;
  if (scheme == DriftScheme::gibbs) {
    if (!form) fail(ErrorKind::parameter, "gibbs scheme needs a reversible, Langevin or rotational model");
    SparseGenerator g;
    g.L = detail::assemble_gibbs(model, *form, mesh, threads);
    const Vector U = sample(form->energy, mesh, threads);
    Vector pi = (U.minCoeff() - U.array()).exp().matrix();
    g.gibbs_measure = pi / pi.sum();
    g.mesh = mesh;
    g.model_id = model.id();
    g.scheme = scheme;
    return g;
  }
  const std::size_t N = mesh.size();
  const int width = 2 * d + 1;
  std::vector<Eigen::Index> cols(N * width, -1);
  std::vector<double> vals(N * width, 0.0);
  std::vector<int> bad(N, 0);
  parallel_for(N, threads, [&](std::size_t i) {
    const Vec x = mesh.point(i);
    const Vec b = model.drift(x);
    const Mat S = model.diffusion_matrix(x);
    const double scale = S.cwiseAbs().maxCoeff();
    for (int k = 0; k < d; ++k)
      for (int l = 0; l < d; ++l)
        if (k != l && std::abs(S(k, l)) > 1e-14 * std::max(1.0, scale)) bad[i] = 1;
    double diag = 0.0;
    for (int k = 0; k < d; ++k) {
      const double h = mesh.axis(k).h();
      const double diff = S(k, k) / (h * h);
      double up, down;
      if (scheme == DriftScheme::hybrid && 2.0 * S(k, k) >= std::abs(b[k]) * h) {
        up = std::max(0.0, diff + b[k] / (2.0 * h));
        down = std::max(0.0, diff - b[k] / (2.0 * h));
      } else {
        up = diff + std::max(b[k], 0.0) / h;
        down = diff + std::max(-b[k], 0.0) / h;
      }
      if (auto j = mesh.neighbor(i, k, +1); j && up != 0.0) {
        cols[i * width + 2 * k] = static_cast<Eigen::Index>(*j);
        vals[i * width + 2 * k] = up;
        diag -= up;
      }
      if (auto j = mesh.neighbor(i, k, -1); j && down != 0.0) {
        cols[i * width + 2 * k + 1] = static_cast<Eigen::Index>(*j);
        vals[i * width + 2 * k + 1] = down;
        diag -= down;
      }
    }
    cols[i * width + 2 * d] = static_cast<Eigen::Index>(i);
    vals[i * width + 2 * d] = diag;
  });
  for (std::size_t i = 0; i < N; ++i)
    if (bad[i]) fail(ErrorKind::unsupported_diffusion, "diffusion matrix has cross terms; only axis-aligned S is supported");
  SparseGenerator g;
  g.L = detail::from_rows(N, width, cols, vals);
  g.mesh = mesh;
  g.model_id = model.id();
  g.scheme = scheme;
  return g;
}

/// Largest |row sum| and smallest off-diagonal entry.
struct GeneratorDefects {
  double max_row_sum = 0.0;
  double min_off_diagonal = 0.0;
  double max_entry = 0.0;
};

inline GeneratorDefects generator_defects(const SparseMatrix& L) {
  GeneratorDefects d;
  d.min_off_diagonal = kInfinity;
  for (Eigen::Index r = 0; r < L.outerSize(); ++r) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(L, r); it; ++it) {
      s += it.value();
      d.max_entry = std::max(d.max_entry, std::abs(it.value()));
      if (it.col() != r) d.min_off_diagonal = std::min(d.min_off_diagonal, it.value());
    }
    d.max_row_sum = std::max(d.max_row_sum, std::abs(s));
  }
  if (d.min_off_diagonal == kInfinity) d.min_off_diagonal = 0.0;
  return d;
}

inline double max_abs(const SparseMatrix& A) {
  double m = 0.0;
  for (Eigen::Index r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) m = std::max(m, std::abs(it.value()));
  return m;
}

namespace detail {

inline void require_positive_measure(const Vector& mu, std::size_t n) {
  if (static_cast<std::size_t>(mu.size()) != n) fail(ErrorKind::measure, "measure size does not match the operator");
  for (Eigen::Index i = 0; i < mu.size(); ++i)
    if (!(mu[i] > 0.0)) fail(ErrorKind::measure, "measure has a nonpositive entry at node " + std::to_string(i));
}

}  // namespace detail

/// L_S and L_A relative to the discrete measure mu: L* = D^{-1} L^T D.
struct GeneratorSplit {
  SparseMatrix symmetric;
  SparseMatrix antisymmetric;
};

inline SparseMatrix adjoint(const SparseMatrix& L, const Vector& mu) {
  detail::require_positive_measure(mu, static_cast<std::size_t>(L.rows()));
  SparseMatrix Lt = L.transpose();
  for (Eigen::Index r = 0; r < Lt.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(Lt, r); it; ++it) it.valueRef() *= mu[it.col()] / mu[r];
  return Lt;
}

inline GeneratorSplit split_generator(const SparseMatrix& L, const Vector& mu) {
  const SparseMatrix Ls = adjoint(L, mu);
  GeneratorSplit out;
  out.symmetric = 0.5 * (L + Ls);
  out.antisymmetric = 0.5 * (L - Ls);
  return out;
}

/// D^{1/2} L D^{-1/2}.
inline SparseMatrix witten_similarity(const SparseMatrix& L, const Vector& mu) {
  detail::require_positive_measure(mu, static_cast<std::size_t>(L.rows()));
  const Vector s = mu.cwiseSqrt();
  SparseMatrix T = L;
  for (Eigen::Index r = 0; r < T.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(T, r); it; ++it) it.valueRef() *= s[r] / s[it.col()];
  return T;
}

/// Coordinate-list export, one "row col value" triple per line.
inline void write_coo(std::ostream& os, const SparseMatrix& A) {
  os.precision(17);
  for (Eigen::Index r = 0; r < A.outerSize(); ++r)
    for (SparseMatrix::InnerIterator it(A, r); it; ++it) os << r << ' ' << it.col() << ' ' << it.value() << '\n';
}

/// One implicit-Euler step y = (I - delta (L + diag f))^{-1} W checked against
/// y <= e^{-a delta} W + c 1_K with K = [-box_half, box_half]^d.
struct DriftInequality {
  double a = 0.0;
  double c = 0.0;
  double max_ratio_outside = 0.0;
  bool pass = false;
};

inline DriftInequality check_drift_inequality(const SparseMatrix& L, const Mesh& mesh, const Vector& f, const Vector& W,
                                              double delta, double box_half) {
  const Eigen::Index N = L.rows();
  SparseMatrix A(N, N);
  A.setIdentity();
  SparseMatrix Q = L;
  Q.diagonal() += f;
  A = A - delta * Q;
  Eigen::SparseMatrix<double> Ac = A;
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu(Ac);
  if (lu.info() != Eigen::Success) fail(ErrorKind::solver, "implicit Euler factorization failed");
  const Vector y = lu.solve(W);
  DriftInequality out;
  auto inside = [&](std::size_t i) {
    const Vec x = mesh.point(i);
    return x.cwiseAbs().maxCoeff() <= box_half;
  };
  out.max_ratio_outside = 0.0;
  for (Eigen::Index i = 0; i < N; ++i)
    if (!inside(static_cast<std::size_t>(i))) out.max_ratio_outside = std::max(out.max_ratio_outside, y[i] / W[i]);
  out.a = -std::log(out.max_ratio_outside) / delta;
  const double decay = std::exp(-out.a * delta);
  out.c = 0.0;
  for (Eigen::Index i = 0; i < N; ++i)
    if (inside(static_cast<std::size_t>(i))) out.c = std::max(out.c, y[i] - decay * W[i]);
  out.pass = out.a > 0.0 && std::isfinite(out.c);
  return out;
}

}  // namespace devrate
