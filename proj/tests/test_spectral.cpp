#include "devrate/grid.hpp"
#include "devrate/spectral.hpp"

#include <catch_amalgamated.hpp>

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

struct Fixture {
  DiffusionModel model;
  SparseGenerator g;
  Vector x;
};

Fixture ou_fixture(int n = 401, DriftScheme scheme = DriftScheme::automatic) {
  auto m = ornstein_uhlenbeck(1.0);
  const Mesh mesh = Mesh::uniform(1, -8, 8, n);
  SparseGenerator g = assemble_generator(m, mesh, scheme);
  Vector x = sample(m.field("x"), mesh);
  return {m, std::move(g), std::move(x)};
}

double gaussian_l1(const Vector& mu, const Mesh& mesh) {
  double err = 0.0;
  for (std::size_t i = 0; i < mesh.size(); ++i) {
    const Vec x = mesh.point(i);
    const double w = std::exp(-0.5 * x.squaredNorm()) / std::pow(2.0 * M_PI, 0.5 * x.size()) * mesh.cell_volume();
    err += std::abs(mu[static_cast<Eigen::Index>(i)] - w);
  }
  return err;
}

}  // namespace

TEST_CASE("zero tilt") {
  const Fixture f = ou_fixture();
  const SpectralSolution s = principal_eigenpair(f.g, Vector::Zero(f.x.size()));
  CHECK(std::abs(s.lambda) <= 1e-10);
  CHECK((s.h.array() - 1.0).abs().maxCoeff() <= 1e-10);
  CHECK_THAT(s.l.sum(), WithinAbs(1.0, 1e-14));
  CHECK(s.l.minCoeff() >= 0.0);
}

TEST_CASE("OU linear tilt matches theta^2") {
  for (DriftScheme scheme : {DriftScheme::hybrid, DriftScheme::gibbs}) {
    const Fixture f = ou_fixture(401, scheme);
    for (double theta : {-1.0, -0.5, 0.5, 1.0}) {
      INFO(to_string(scheme) << " theta=" << theta);
      const SpectralSolution s = principal_eigenpair(f.g, theta * f.x);
      CHECK_THAT(s.lambda, WithinAbs(theta * theta, 1e-3));
      CHECK(s.residual <= 1e-10 * s.scale);
      // h ~ e^{theta x} on the bulk.
      const Eigen::Index mid = 200;
      for (Eigen::Index i : {150, 250})
        CHECK_THAT(std::log(s.h[i] / s.h[mid]), WithinAbs(theta * (f.x[i] - f.x[mid]), 2e-2));
    }
  }
}

TEST_CASE("OU quadratic tilt matches the quadratic ansatz") {
  const Fixture f = ou_fixture();
  const Vector x2 = f.x.cwiseProduct(f.x);
  for (double theta : {0.1, 3.0 / 16.0}) {
    const double oracle = (1.0 - std::sqrt(1.0 - 4.0 * theta)) / 2.0;
    CHECK_THAT(principal_eigenpair(f.g, theta * x2).lambda, WithinAbs(oracle, 1e-3));
  }
}

TEST_CASE("shift rule, convexity and Jensen bound on built-ins") {
  struct Case {
    DiffusionModel model;
    Mesh mesh;
    const char* observable;
  };
  const std::vector<Case> cases = {
      {ornstein_uhlenbeck(1.0), Mesh::uniform(1, -8, 8, 401), "x"},
      {quartic_overdamped(), Mesh::uniform(1, -4, 4, 201), "x^2"},
      {overdamped(power_potential(3.0), 1), Mesh::uniform(1, -8, 8, 201), "sin(x)"},
      {ornstein_uhlenbeck(2.0, 2), Mesh::uniform(2, -6, 6, 61), "x0 + x1"},
      {rotational_overdamped(), Mesh::uniform(2, -6, 6, 61), "x0"},
      {langevin(harmonic_potential(), 1.0), Mesh::uniform(2, -6, 6, 61), "q"},
  };
  for (const Case& c : cases) {
    for (DriftScheme scheme : {DriftScheme::hybrid, DriftScheme::gibbs}) {
      INFO(c.model.id() << " " << to_string(scheme));
      const SparseGenerator g = assemble_generator(c.model, c.mesh, scheme);
      const Vector f = sample(c.model.field(c.observable), c.mesh);
      const double l0 = principal_eigenpair(g, 0.5 * f).lambda;
      const double l1 = principal_eigenpair(g, (0.5 * f).array() + 0.75).lambda;
      CHECK(std::abs(l1 - l0 - 0.75) <= 1e-12 * std::max(1.0, std::abs(l0)));
      const SpectralSolution a = principal_eigenpair(g, 0.0 * f);
      const SpectralSolution b = principal_eigenpair(g, 1.0 * f);
      CHECK(l0 <= 0.5 * (a.lambda + b.lambda) + 2e-10 * b.scale);
      const Vector mu = invariant_measure(g.L);
      CHECK(l0 >= 0.5 * mu.dot(f) - 1e-10 * b.scale);
    }
  }
}

TEST_CASE("power iteration agrees with shift-invert") {
  const Fixture f = ou_fixture(101);
  EigenOptions power;
  power.method = EigenMethod::power;
  const SpectralSolution a = principal_eigenpair(f.g, 0.5 * f.x);
  const SpectralSolution b = principal_eigenpair(f.g, 0.5 * f.x, power);
  CHECK(b.method == EigenMethod::power);
  CHECK_THAT(b.lambda, WithinAbs(a.lambda, 1e-8));
  CHECK((a.h - b.h).cwiseAbs().maxCoeff() <= 1e-6);
  CHECK((a.l - b.l).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("convergence failure is reported") {
  const Fixture f = ou_fixture(101);
  EigenOptions opts;
  opts.method = EigenMethod::power;
  opts.max_iterations = 3;
  CHECK(is_kind([&] { principal_eigenpair(f.g, 0.5 * f.x, opts); }, ErrorKind::convergence));
  CHECK(is_kind([&] { principal_eigenpair(f.g, Vector::Zero(5)); }, ErrorKind::parameter));
}

TEST_CASE("Doob transform") {
  const Fixture f = ou_fixture();
  const Vector zero = Vector::Zero(f.x.size());
  const DoobTransform d0 = doob_transform(f.g.L, zero, principal_eigenpair(f.g, zero));
  CHECK(max_abs(SparseMatrix(d0.generator - f.g.L)) <= 1e-9 * max_abs(f.g.L));

  const double theta = 0.5;
  const SpectralSolution s = principal_eigenpair(f.g, theta * f.x);
  const DoobTransform d = doob_transform(f.g.L, theta * f.x, s);
  const GeneratorDefects defects = generator_defects(d.generator);
  CHECK(defects.max_row_sum <= 1e-10);
  CHECK(defects.min_off_diagonal >= 0.0);
  CHECK(d.max_diagonal_defect <= 1e-8 * s.scale);

  // Mean of f under the Doob stationary law equals d lambda / d theta.
  const double eps = 1e-3;
  const double slope =
      (principal_eigenpair(f.g, (theta + eps) * f.x).lambda - principal_eigenpair(f.g, (theta - eps) * f.x).lambda) /
      (2.0 * eps);
  const Vector pi = invariant_measure(d.generator);
  CHECK_THAT(pi.dot(f.x), WithinAbs(slope, 1e-3));
  CHECK_THAT(s.tilted_density().dot(f.x), WithinAbs(slope, 1e-3));
  CHECK_THAT(slope, WithinAbs(2.0 * theta, 2e-3));
}

TEST_CASE("invariant measures") {
  {
    const Fixture f = ou_fixture(801, DriftScheme::hybrid);
    const Vector mu = invariant_measure(f.g);
    CHECK_THAT(mu.sum(), WithinAbs(1.0, 1e-14));
    CHECK(gaussian_l1(mu, f.g.mesh) <= 1e-3);
  }
  {
    const Fixture f = ou_fixture(801, DriftScheme::gibbs);
    const Vector mu = invariant_measure(f.g);
    CHECK(gaussian_l1(mu, f.g.mesh) <= 1e-3);
    CHECK((mu - reference_measure(f.g)).cwiseAbs().sum() <= 1e-9);
  }
  const auto lv = langevin(harmonic_potential(), 1.0);
  const SparseGenerator g = assemble_generator(lv, Mesh::uniform(2, -8, 8, 161));
  const Vector mu = invariant_measure(g);
  CHECK(mu.minCoeff() > 0.0);
  CHECK(gaussian_l1(mu, g.mesh) <= 2e-2);
  // The Gibbs measure is stationary for the flux scheme.
  const Vector pi = *g.gibbs_measure;
  CHECK((SparseMatrix(g.L.transpose()) * pi).cwiseAbs().maxCoeff() <= 1e-12 * max_abs(g.L) * pi.maxCoeff());
  CHECK((mu - pi).cwiseAbs().sum() <= 1e-8);
}

TEST_CASE("ergodicity decay") {
  const Fixture f = ou_fixture();
  const Vector mu = invariant_measure(f.g);
  const Vector W = (f.x.array().square() / 4.0).exp().matrix();
  const std::vector<double> times = {1.0, 1.5, 2.0, 2.5, 3.0};

  const DecayFit at_mu = ergodicity_decay(f.g.L, W, mu, mu, times);
  for (double d : at_mu.distances) CHECK(d <= 1e-10);

  Vector delta = Vector::Zero(f.x.size());
  delta[250] = 1.0;  // x = 2
  const DecayFit fit = ergodicity_decay(f.g.L, W, delta, mu, times);
  CHECK(fit.decays);
  CHECK_THAT(fit.rate, WithinRel(1.0, 0.1));
  const DecayFit twice = ergodicity_decay(f.g.L, 2.0 * W, delta, mu, times);
  for (std::size_t k = 0; k < times.size(); ++k) CHECK_THAT(twice.distances[k], WithinRel(2.0 * fit.distances[k], 1e-12));

  CHECK(is_kind([&] { ergodicity_decay(f.g.L, 0.5 * W, delta, mu, times); }, ErrorKind::parameter));
}
