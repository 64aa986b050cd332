#include "devrate/decompose.hpp"
#include "devrate/ratefn.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace devrate;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

bool is_kind(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

const DecompositionContext& ou_ctx() {
  static const DiffusionModel m = ornstein_uhlenbeck(1.0);
  static const DecompositionContext ctx = DecompositionContext::build(m, Mesh::uniform(1, -8, 8, 401));
  return ctx;
}

const DecompositionContext& langevin_ctx() {
  static const DiffusionModel m = langevin(harmonic_potential(), 1.0);
  static const DecompositionContext ctx = DecompositionContext::build(m, Mesh::uniform(2, -8, 8, 161));
  return ctx;
}

/// E[g(Z)] for Z ~ N(0, 1) by trapezoid quadrature on [-12, 12].
double gaussian_expectation(const std::function<double(double)>& g) {
  const int n = 24000;
  const double h = 24.0 / n;
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double z = -12.0 + k * h;
    acc += (k == 0 || k == n ? 0.5 : 1.0) * g(z) * std::exp(-0.5 * z * z);
  }
  return acc * h / std::sqrt(2.0 * M_PI);
}

}  // namespace

TEST_CASE("perturbation normalization") {
  const DecompositionContext& ctx = ou_ctx();
  const Perturbation p = ctx.perturbation(ctx.model->field("2*x"));
  CHECK_THAT(p.nu.sum(), WithinAbs(1.0, 1e-14));
  CHECK(p.nu.minCoeff() > 0.0);
  const Vector back = p.log_density().array().exp().matrix().cwiseProduct(ctx.mu);
  CHECK((back - p.nu).cwiseAbs().maxCoeff() <= 1e-14);
  CHECK_THAT(p.log_normalizer, WithinAbs(2.0, 1e-3));  // log E[e^{2x}] = 2
  CHECK(is_kind([&] { Perturbation::from_values(Vector::Zero(3), ctx.mu); }, ErrorKind::parameter));
}

TEST_CASE("symmetric part on OU") {
  const DecompositionContext& ctx = ou_ctx();
  const DecompositionResult zero = decompose(ctx, ctx.perturbation(ScalarField::constant(0.0)));
  CHECK(zero.IS == 0.0);
  CHECK(zero.IA == 0.0);

  const Perturbation p = ctx.perturbation(ctx.model->field("2*x - 2"));
  const DecompositionResult r = decompose(ctx, p);
  CHECK_THAT(r.IS, WithinAbs(1.0, 1e-2));
  CHECK_THAT(r.fisher_IS, WithinAbs(r.IS, 1e-2));
  CHECK(r.reversible);
  CHECK(r.IA == 0.0);
  CHECK(r.psi.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("scaling of the symmetric part at fixed weights") {
  const DecompositionContext& ctx = ou_ctx();
  const Perturbation p = ctx.perturbation(ctx.model->field("sin(x) + 0.3*x"));
  const double one = symmetric_part(ctx.gradient, p.v, p.nu);
  CHECK_THAT(symmetric_part(ctx.gradient, Vector(2.0 * p.v), p.nu), WithinRel(4.0 * one, 1e-14));
  const Perturbation twice = Perturbation::from_values(2.0 * p.v, ctx.mu);
  CHECK(std::isfinite(decompose(ctx, twice).I()));
}

TEST_CASE("reversible built-ins have no antisymmetric part") {
  const std::vector<std::pair<DiffusionModel, Mesh>> cases = {
      {ornstein_uhlenbeck(1.0), Mesh::uniform(1, -8, 8, 201)},
      {quartic_overdamped(), Mesh::uniform(1, -4, 4, 201)},
      {ornstein_uhlenbeck(2.0, 2), Mesh::uniform(2, -6, 6, 61)},
  };
  for (const auto& [m, mesh] : cases) {
    INFO(m.id());
    const DecompositionContext ctx = DecompositionContext::build(m, mesh);
    const DecompositionResult r = decompose(ctx, ctx.perturbation(m.field("0.5*x0 + 0.2*sin(x0)")));
    CHECK(r.reversible);
    CHECK(r.IA == 0.0);
    CHECK(r.IS > 0.0);
  }
}

TEST_CASE("Langevin position perturbation") {
  const DecompositionContext& ctx = langevin_ctx();
  const Perturbation p = ctx.perturbation(ctx.model->field("q - 0.5"));
  const DecompositionResult r = decompose(ctx, p);
  CHECK_FALSE(r.reversible);
  CHECK(r.IS <= 1e-12);
  CHECK_THAT(r.IA, WithinAbs(0.25, 2e-2));
  CHECK(r.compatibility_defect <= 1e-8);
  CHECK(r.poisson_residual <= 1e-9);

  // psi = s p + c(q) on the bulk with |s| = 1; the sign is whatever the solver produces.
  const Mesh& mesh = ctx.generator.mesh;
  const Eigen::Index a = static_cast<Eigen::Index>(mesh.linear_index({80, 90})), b = static_cast<Eigen::Index>(mesh.linear_index({80, 70}));
  const double slope = (r.psi[a] - r.psi[b]) / (mesh.point(a)[1] - mesh.point(b)[1]);
  CHECK_THAT(std::abs(slope), WithinAbs(1.0, 2e-2));
  double worst = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const Vec x = mesh.point(i);
    if (x.cwiseAbs().maxCoeff() > 2.0) continue;
    const auto centre = static_cast<Eigen::Index>(mesh.linear_index({mesh.coordinate(i, 0), 80}));
    worst = std::max(worst, std::abs(r.psi[static_cast<Eigen::Index>(i)] - r.psi[centre] - slope * x[1]));
  }
  CHECK(worst <= 2e-2);
}

TEST_CASE("Langevin Hamiltonian perturbation") {
  const DecompositionContext& ctx = langevin_ctx();
  const Perturbation p = ctx.perturbation(0.5 * hamiltonian(*ctx.model));
  const DecompositionResult r = decompose(ctx, p);
  CHECK_THAT(r.IS, WithinRel(0.125, 2e-2));
  CHECK(r.IA <= 1e-3);
}

TEST_CASE("variational optimality of the Poisson solution") {
  const DecompositionContext& ctx = langevin_ctx();
  const Perturbation p = ctx.perturbation(ctx.model->field("q - 0.5 + 0.2*sin(q)"));
  const PoissonSolution sol = solve_poisson(ctx.gradient, ctx.generator.L, ctx.split.antisymmetric, p, {}, ctx.generator_scale);
  const double best = variational_objective(ctx.gradient, p, sol.rhs, sol.psi);
  CHECK_THAT(best, WithinRel(antisymmetric_part(ctx.gradient, p, sol.psi), 1e-8));
  const Mesh& mesh = ctx.generator.mesh;
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> coef(-1.0, 1.0), freq(0.2, 1.5);
  for (int trial = 0; trial < 20; ++trial) {
    const double a = coef(rng), b = coef(rng), wq = freq(rng), wp = freq(rng), eps = 0.1 * coef(rng);
    Vector delta(sol.psi.size());
    for (std::size_t i = 0; i < mesh.size(); ++i) {
      const Vec x = mesh.point(i);
      delta[static_cast<Eigen::Index>(i)] = eps * (a * std::sin(wq * x[0]) * std::cos(wp * x[1]) + b * std::tanh(x[1]));
    }
    CHECK(variational_objective(ctx.gradient, p, sol.rhs, Vector(sol.psi + delta)) <= best + 1e-8 * std::max(1.0, std::abs(best)));
  }
}

TEST_CASE("decomposition agrees with the Donsker-Varadhan functional") {
  const DecompositionContext& ctx = langevin_ctx();
  for (const char* v : {"q - 0.5", "0.5*q + 0.2*sin(q)"}) {
    INFO(v);
    const Perturbation p = ctx.perturbation(ctx.model->field(v));
    const DecompositionResult r = decompose(ctx, p);
    // Transport edges are upwinded, so the gap is first order in h (about 0.01 here, halving with h).
    const DonskerVaradhan dv = donsker_varadhan_log(ctx.generator, 0.5 * (p.v + r.psi), p.nu);
    CHECK_THAT(dv.value, WithinAbs(r.I(), 2e-2));
    CHECK(donsker_varadhan_log(ctx.generator, 0.5 * (p.v - r.psi), p.nu).value < 0.0);
  }
}

TEST_CASE("incompatible right-hand side") {
  const DecompositionContext& ctx = langevin_ctx();
  const Perturbation p = ctx.perturbation(ctx.model->field("q - 0.5 + 0.1*tanh(p)"));
  CHECK(is_kind([&] { decompose(ctx, p); }, ErrorKind::incompatible_rhs));
}

TEST_CASE("nonreversible drift adds entropy") {
  const DiffusionModel rot = rotational_overdamped();
  const DiffusionModel rev = ornstein_uhlenbeck(1.0, 2);
  const Mesh mesh = Mesh::uniform(2, -6, 6, 81);
  const DecompositionContext a = DecompositionContext::build(rot, mesh);
  const DecompositionContext b = DecompositionContext::build(rev, mesh);
  for (const char* v : {"x0 - 0.5", "0.5*x0 + 0.3*x1", "x1 - 0.2*x0^2", "sin(x0) + 0.5*x1", "0.4*x0*x1"}) {
    INFO(v);
    const DecompositionResult ra = decompose(a, a.perturbation(rot.field(v)));
    const DecompositionResult rb = decompose(b, b.perturbation(rev.field(v)));
    CHECK(ra.IA > 1e-3);
    CHECK(rb.IA == 0.0);
    CHECK_THAT(ra.IS, WithinRel(rb.IS, 1e-12));
    CHECK(ra.I() >= rb.I());
  }
}

TEST_CASE("friction sweep") {
  const Mesh mesh = Mesh::uniform(2, -8, 8, 161);
  const std::vector<SweepMember> family = {sweep_member("position", "q - 0.5"), sweep_member("hamiltonian", "(q^2 + p^2)/4")};
  const SweepTable t = friction_sweep(harmonic_potential(), 1, family, {4.0, 0.25, 1.0}, mesh);
  REQUIRE(t.rows.size() == 6);
  CHECK_FALSE(t.spans_decade);
  CHECK(t.rows[0].gamma == 0.25);
  for (const SweepRow& row : t.rows) {
    INFO(row.member << " gamma=" << row.gamma);
    CHECK_THAT(row.I, WithinRel(row.IS + row.IA, 1e-14));
    if (row.member == "position") CHECK_THAT(row.gamma_times_I, WithinRel(0.25, 5e-2));
    else CHECK_THAT(row.I_over_gamma, WithinRel(0.125, 5e-2));
  }
  CHECK(is_kind([&] { friction_sweep(harmonic_potential(), 1, family, {2.0, 4.0}, mesh); }, ErrorKind::parameter));
  CHECK(is_kind([&] { friction_sweep(harmonic_potential(), 1, {}, {0.5, 2.0}, mesh); }, ErrorKind::empty_family));
}

TEST_CASE("mixed perturbation approaches the overdamped limit") {
  // v_gamma = q - 1/2 + 0.1 tanh(p)^2 / gamma; gamma I_gamma -> (1/4)(E|d_p vt|^2 + E|v'|^2).
  const double limit =
      0.25 * (gaussian_expectation([](double p) {
                const double d = 0.2 * std::tanh(p) / std::pow(std::cosh(p), 2);
                return d * d;
              }) +
              1.0);
  const Mesh mesh = Mesh::uniform(2, -8, 8, 161);
  const SweepTable t =
      friction_sweep(harmonic_potential(), 1, {sweep_member("mixed", "q - 0.5 + 0.1*tanh(p)^2/gamma")}, {0.5, 16.0}, mesh);
  CHECK_THAT(t.rows.back().gamma_times_I, WithinRel(limit, 0.1));
}

TEST_CASE("autocorrelation route") {
  {
    const DecompositionContext& ctx = ou_ctx();
    const AutocorrelationEstimate e = autocorrelation_ia(ctx, ctx.perturbation(ctx.model->field("x")));
    CHECK(e.IA == 0.0);
    CHECK(e.standard_error == 0.0);
  }
  const DecompositionContext& ctx = langevin_ctx();
  const Perturbation p = ctx.perturbation(ctx.model->field("q - 0.5"));
  AutocorrelationOptions o;
  o.seed = 4;
  const AutocorrelationEstimate e = autocorrelation_ia(ctx, p, o);
  CHECK(e.standard_error > 0.0);
  CHECK(std::abs(e.IA - decompose(ctx, p).IA) <= 3.0 * e.standard_error);
  CHECK_FALSE(e.truncation_warning);
  CHECK_THAT(e.correlation.front(), WithinRel(1.0, 0.1));  // E[p^2]

  o.T = 0.5;
  o.window = 5.0;
  o.trajectories = 100;
  CHECK(autocorrelation_ia(ctx, p, o).truncation_warning);
}
