#pragma once

#include "devrate/error.hpp"
#include "devrate/field.hpp"
#include "devrate/types.hpp"

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace devrate {

/// b = -grad V, sigma = sqrt(2) I.
struct ReversibleGradient {
  ScalarField potential;
};

/// b = -grad V + F with div(F e^{-V}) = 0, sigma = sqrt(2) I.
struct NonreversibleGradient {
  ScalarField potential;
  VectorField force;
  double divergence_residual = 0.0;  // max |div(F e^{-V})| over the certificate probes
  std::optional<Mat> rotation;       // set when F = A grad V for a constant antisymmetric A
};

/// State (q, p); dq = p dt, dp = (-grad V(q) - gamma p) dt + sqrt(2 gamma) dB.
struct Langevin {
  ScalarField potential;  // defined on position space
  double gamma = 1.0;
  int position_dim = 1;
};

struct Custom {};

using Structure = std::variant<ReversibleGradient, NonreversibleGradient, Langevin, Custom>;

/// Diffusion dX = b(X) dt + sigma(X) dB with generator b.grad + S : Hess, S = sigma sigma^T / 2.
/// Immutable after construction; evaluators are safe to call concurrently.
class DiffusionModel {
 public:
  using DriftFn = std::function<Vec(const Vec&)>;
  using SigmaFn = std::function<Mat(const Vec&)>;

  /// `diffusion` may supply S exactly; otherwise S = sigma sigma^T / 2 is formed on demand.
  DiffusionModel(int dim, int brownian_dim, DriftFn drift, SigmaFn sigma, Structure structure, std::string id,
                 expr::Symbols symbols, SigmaFn diffusion = {})
      : dim_(dim),
        brownian_dim_(brownian_dim),
        drift_(std::move(drift)),
        sigma_(std::move(sigma)),
        diffusion_(std::move(diffusion)),
        structure_(std::move(structure)),
        id_(std::move(id)),
        symbols_(std::move(symbols)) {
    if (dim <= 0 || dim > kMaxDim) fail(ErrorKind::parameter, "state dimension must be in [1, " + std::to_string(kMaxDim) + "]");
    if (brownian_dim <= 0 || brownian_dim > kMaxDim) fail(ErrorKind::parameter, "brownian dimension must be in [1, 6]");
  }

  int dimension() const { return dim_; }
  int brownian_dimension() const { return brownian_dim_; }
  Vec drift(const Vec& x) const { return drift_(x); }
  Mat sigma(const Vec& x) const { return sigma_(x); }
  Mat diffusion_matrix(const Vec& x) const {
    if (diffusion_) return diffusion_(x);
    const Mat s = sigma_(x);
    return 0.5 * s * s.transpose();
  }
  const Structure& structure() const { return structure_; }
  const std::string& id() const { return id_; }
  const expr::Symbols& symbols() const { return symbols_; }

  bool is_reversible() const { return std::holds_alternative<ReversibleGradient>(structure_); }
  bool is_langevin() const { return std::holds_alternative<Langevin>(structure_); }
  const Langevin* langevin() const { return std::get_if<Langevin>(&structure_); }

  /// Field over the model's state parsed with the model's coordinate names.
  ScalarField field(std::string_view text) const { return ScalarField::from_expression(text, symbols_, dim_); }

 private:
  int dim_;
  int brownian_dim_;
  DriftFn drift_;
  SigmaFn sigma_;
  SigmaFn diffusion_;
  Structure structure_;
  std::string id_;
  expr::Symbols symbols_;
};

/// b(x).grad phi(x) + S(x) : Hess phi(x).
inline double apply_generator(const DiffusionModel& model, const ScalarField& phi, const Vec& x) {
  const Vec g = phi.gradient(x);
  const Mat H = phi.hessian(x);
  const Mat S = model.diffusion_matrix(x);
  return model.drift(x).dot(g) + (S.array() * H.array()).sum();
}

/// grad phi . S grad psi.
inline double carre_du_champ(const DiffusionModel& model, const ScalarField& phi, const ScalarField& psi, const Vec& x) {
  return phi.gradient(x).dot(model.diffusion_matrix(x) * psi.gradient(x));
}

/// x -> -L W / W assembled point-wise; used where a closed form is not available.
inline ScalarField generator_field(const DiffusionModel& model, const ScalarField& phi) {
  return ScalarField([model, phi](const Vec& x) { return apply_generator(model, phi, x); }, {}, {},
                     "L(" + phi.name() + ")");
}

namespace detail {

inline Mat sqrt2_identity(int d) { return std::sqrt(2.0) * Mat::Identity(d, d); }
inline DiffusionModel::SigmaFn unit_diffusion(int d) {
  return [d](const Vec&) -> Mat { return Mat::Identity(d, d); };
}

}  // namespace detail

/// dX = -grad V dt + sqrt(2) dB.
inline DiffusionModel overdamped(const ScalarField& potential, int dim, std::string id = {}) {
  return DiffusionModel(
      dim, dim, [potential](const Vec& x) -> Vec { return -potential.gradient(x); },
      [dim](const Vec&) -> Mat { return detail::sqrt2_identity(dim); }, ReversibleGradient{potential},
      id.empty() ? "overdamped[" + potential.name() + "]" : std::move(id), expr::Symbols::cartesian(dim),
      detail::unit_diffusion(dim));
}

/// Ornstein-Uhlenbeck dX = -alpha X dt + sqrt(2) dB, i.e. V = alpha |x|^2 / 2.
inline DiffusionModel ornstein_uhlenbeck(double alpha = 1.0, int dim = 1) {
  if (!(alpha > 0.0)) fail(ErrorKind::parameter, "OU rate alpha must be positive");
  ScalarField V(
      [alpha](const Vec& x) { return 0.5 * alpha * x.squaredNorm(); }, [alpha](const Vec& x) -> Vec { return alpha * x; },
      [alpha](const Vec& x) -> Mat { return alpha * Mat::Identity(x.size(), x.size()); }, "alpha|x|^2/2",
      Growth::polynomial);
  return overdamped(V, dim, "ou(alpha=" + std::to_string(alpha) + ")");
}

/// Overdamped dynamics in V = x^4 / 4 (d = 1).
inline DiffusionModel quartic_overdamped() {
  ScalarField V([](const Vec& x) { return 0.25 * std::pow(x[0], 4); },
                [](const Vec& x) -> Vec { return Vec::Constant(1, x[0] * x[0] * x[0]); },
                [](const Vec& x) -> Mat { return Mat::Constant(1, 1, 3.0 * x[0] * x[0]); }, "x^4/4", Growth::polynomial);
  return overdamped(V, 1, "quartic");
}

/// Smooth potential V = (1 + |x|^2)^{q/2}, behaving as |x|^q at infinity.
inline ScalarField power_potential(double q, int dim = 1) {
  const auto sym = expr::Symbols::cartesian(dim);
  std::string r2 = "1";
  for (int i = 0; i < dim; ++i) r2 += "+x" + std::to_string(i) + "^2";
  return ScalarField::from_expression("(" + r2 + ")^(" + std::to_string(q / 2.0) + ")", sym, dim);
}

struct NonequilibriumOptions {
  double box = 8.0;           // probes in [-box, box]^d
  std::size_t probes = 1000;  // quasi-random probe count
  double tolerance = 1e-8;
};

/// dX = (-grad V + F) dt + sqrt(2) dB, after certifying div(F e^{-V}) = e^{-V}(div F - F.grad V) = 0
/// on quasi-random probes.
inline DiffusionModel make_nonreversible_overdamped(const ScalarField& potential, const VectorField& force, int dim,
                                                    NonequilibriumOptions opts = {}, std::optional<Mat> rotation = {}) {
  if (!force.has_divergence())
    fail(ErrorKind::derivative_unavailable, "nonequilibrium force needs a divergence evaluator");
  double worst = 0.0;
  for (const Vec& x : box_probes(dim, -opts.box, opts.box, opts.probes)) {
    const double r = std::exp(-potential(x)) * (force.divergence(x) - force(x).dot(potential.gradient(x)));
    worst = std::max(worst, std::abs(r));
  }
  if (!(worst <= opts.tolerance))
    fail(ErrorKind::invalid_nonequilibrium_force,
         "div(F e^{-V}) residual " + std::to_string(worst) + " exceeds " + std::to_string(opts.tolerance));
  return DiffusionModel(
      dim, dim, [potential, force](const Vec& x) -> Vec { return force(x) - potential.gradient(x); },
      [dim](const Vec&) -> Mat { return detail::sqrt2_identity(dim); },
      NonreversibleGradient{potential, force, worst, std::move(rotation)}, "nonreversible[" + potential.name() + ";" + force.name() + "]",
      expr::Symbols::cartesian(dim), detail::unit_diffusion(dim));
}

/// F = A grad V for an antisymmetric matrix A; div F = tr(A Hess V).
inline VectorField rotational_force(const ScalarField& potential, const Mat& A) {
  return VectorField([potential, A](const Vec& x) -> Vec { return A * potential.gradient(x); },
                     [potential, A](const Vec& x) { return (A.array() * potential.hessian(x).transpose().array()).sum(); },
                     "A.gradV");
}

/// Built-in d = 2 nonreversible model: V = |x|^2 / 2, F = A grad V with A = [[0, 1], [-1, 0]].
inline DiffusionModel rotational_overdamped(double strength = 1.0) {
  ScalarField V([](const Vec& x) { return 0.5 * x.squaredNorm(); }, [](const Vec& x) -> Vec { return x; },
                [](const Vec& x) -> Mat { return Mat::Identity(x.size(), x.size()); }, "|x|^2/2", Growth::polynomial);
  Mat A(2, 2);
  A << 0.0, strength, -strength, 0.0;
  return make_nonreversible_overdamped(V, rotational_force(V, A), 2, {}, A);
}

/// Langevin dynamics on (q, p) in R^{2d}.
inline DiffusionModel langevin(const ScalarField& potential, double gamma, int position_dim = 1, std::string id = {}) {
  if (!(gamma > 0.0)) fail(ErrorKind::parameter, "friction gamma must be positive");
  const int d = position_dim;
  auto drift = [potential, gamma, d](const Vec& x) -> Vec {
    Vec out(2 * d);
    const Vec q = x.head(d);
    out.head(d) = x.tail(d);
    out.tail(d) = -potential.gradient(q) - gamma * x.tail(d);
    return out;
  };
  auto sigma = [gamma, d](const Vec&) -> Mat {
    Mat s = Mat::Zero(2 * d, d);
    s.bottomRows(d) = std::sqrt(2.0 * gamma) * Mat::Identity(d, d);
    return s;
  };
  auto diffusion = [gamma, d](const Vec&) -> Mat {
    Mat S = Mat::Zero(2 * d, 2 * d);
    S.bottomRightCorner(d, d) = gamma * Mat::Identity(d, d);
    return S;
  };
  return DiffusionModel(2 * d, d, drift, sigma, Langevin{potential, gamma, d},
                        id.empty() ? "langevin[" + potential.name() + ";gamma=" + std::to_string(gamma) + "]" : std::move(id),
                        expr::Symbols::phase_space(d), diffusion);
}

/// Position-space symbols for Langevin potentials: q0.. (and q, x when d = 1).
inline expr::Symbols position_symbols(int d) {
  expr::Symbols s = expr::Symbols::cartesian(d);
  for (int i = 0; i < d; ++i) s.variables["q" + std::to_string(i)] = i;
  if (d == 1) s.variables["q"] = 0;
  return s;
}

/// Harmonic Langevin potential V = |q|^2 / 2.
inline ScalarField harmonic_potential(int d = 1) {
  return ScalarField([](const Vec& q) { return 0.5 * q.squaredNorm(); }, [](const Vec& q) -> Vec { return q; },
                     [](const Vec& q) -> Mat { return Mat::Identity(q.size(), q.size()); }, "|q|^2/2",
                     Growth::polynomial);
}

/// H(q, p) = V(q) + |p|^2 / 2 on phase space.
inline ScalarField hamiltonian(const DiffusionModel& model) {
  const Langevin* lv = model.langevin();
  if (!lv) fail(ErrorKind::parameter, "hamiltonian requires a Langevin model");
  const ScalarField V = lv->potential;
  const int d = lv->position_dim;
  return ScalarField(
      [V, d](const Vec& x) { return V(Vec(x.head(d))) + 0.5 * x.tail(d).squaredNorm(); },
      [V, d](const Vec& x) -> Vec {
        Vec g(2 * d);
        g.head(d) = V.gradient(Vec(x.head(d)));
        g.tail(d) = x.tail(d);
        return g;
      },
      [V, d](const Vec& x) -> Mat {
        Mat h = Mat::Zero(2 * d, 2 * d);
        h.topLeftCorner(d, d) = V.hessian(Vec(x.head(d)));
        h.bottomRightCorner(d, d) = Mat::Identity(d, d);
        return h;
      },
      "H");
}

/// Arbitrary drift and diffusion factor.
inline DiffusionModel custom_model(int dim, int brownian_dim, DiffusionModel::DriftFn drift, DiffusionModel::SigmaFn sigma,
                                   std::string id = "custom") {
  return DiffusionModel(dim, brownian_dim, std::move(drift), std::move(sigma), Custom{}, std::move(id),
                        expr::Symbols::cartesian(dim));
}

/// Potential of a gradient-type or Langevin model, if any.
inline std::optional<ScalarField> potential_of(const DiffusionModel& model) {
  return std::visit(
      [](const auto& s) -> std::optional<ScalarField> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, Custom>) return std::nullopt;
        else return s.potential;
      },
      model.structure());
}

/// Drift written as b = (A - S) grad U with constant antisymmetric A, so e^{-U} is invariant.
struct GibbsForm {
  ScalarField energy;
  Mat transport;
};

/// Available for reversible and Langevin models, and nonreversible ones built from F = A grad V.
inline std::optional<GibbsForm> gibbs_form(const DiffusionModel& model) {
  const int n = model.dimension();
  return std::visit(
      [&](const auto& s) -> std::optional<GibbsForm> {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, ReversibleGradient>) {
          return GibbsForm{s.potential, Mat::Zero(n, n)};
        } else if constexpr (std::is_same_v<T, NonreversibleGradient>) {
          if (!s.rotation) return std::nullopt;
          return GibbsForm{s.potential, *s.rotation};
        } else if constexpr (std::is_same_v<T, Langevin>) {
          const int d = s.position_dim;
          Mat A = Mat::Zero(n, n);
          A.topRightCorner(d, d) = Mat::Identity(d, d);
          A.bottomLeftCorner(d, d) = -Mat::Identity(d, d);
          return GibbsForm{hamiltonian(model), A};
        } else {
          return std::nullopt;
        }
      },
      model.structure());
}

}  // namespace devrate
