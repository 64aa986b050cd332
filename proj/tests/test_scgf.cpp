#include "devrate/lyapunov.hpp"
#include "devrate/scgf.hpp"
#include "devrate/simulate.hpp"

#include <catch_amalgamated.hpp>

using namespace devrate;
using Catch::Matchers::WithinAbs;

namespace {

bool is_kind(const std::function<void()>& fn, ErrorKind kind) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_CASE("simulation reproduces stationary moments") {
  {
    const auto m = ornstein_uhlenbeck(1.0);
    SimulationOptions o;
    o.T = 2000.0;
    o.seed = 11;
    o.observables = {m.field("x"), m.field("x^2")};
    const TrajectoryAccumulator acc = simulate(m, Vec::Zero(1), o);
    CHECK(acc.steps == 200000);
    CHECK_THAT(acc.time_average(0), WithinAbs(0.0, 0.1));
    CHECK_THAT(acc.time_average(1), WithinAbs(1.0, 0.1));
  }
  {
    const auto m = langevin(harmonic_potential(), 1.0);
    SimulationOptions o;
    o.T = 2000.0;
    o.seed = 12;
    o.observables = {hamiltonian(m), m.field("p^2")};
    const TrajectoryAccumulator acc = simulate(m, Vec::Zero(2), o);
    CHECK_THAT(acc.time_average(0), WithinAbs(1.0, 0.1));
    CHECK_THAT(acc.time_average(1), WithinAbs(1.0, 0.1));
  }
}

TEST_CASE("simulation is deterministic per stream") {
  const auto m = ornstein_uhlenbeck(1.0);
  SimulationOptions o;
  o.T = 10.0;
  o.seed = 5;
  o.observables = {m.field("x")};
  const double a = simulate(m, Vec::Zero(1), o).integrals[0];
  CHECK(simulate(m, Vec::Zero(1), o).integrals[0] == a);
  o.stream = 1;
  CHECK(simulate(m, Vec::Zero(1), o).integrals[0] != a);
}

TEST_CASE("empirical measure matches time averages") {
  const auto m = ornstein_uhlenbeck(1.0);
  SimulationOptions o;
  o.T = 200.0;
  o.seed = 3;
  o.observables = {m.field("x")};
  o.histogram = Mesh::uniform(1, -8, 8, 161);
  const TrajectoryAccumulator acc = simulate(m, Vec::Zero(1), o);
  const Vector L = acc.empirical_measure();
  CHECK_THAT(L.sum(), WithinAbs(1.0, 1e-12));
  CHECK(acc.outside_time == 0.0);
  // Cloud-in-cell deposits preserve linear functions.
  CHECK_THAT(L.dot(sample(m.field("x"), *o.histogram)), WithinAbs(acc.time_average(0), 1e-10));
}

TEST_CASE("blow-up is reported") {
  const auto m = custom_model(
      1, 1, [](const Vec& x) -> Vec { return x.array().cube(); }, [](const Vec&) -> Mat { return Mat::Identity(1, 1); });
  SimulationOptions o;
  o.T = 10.0;
  CHECK(is_kind([&] { simulate(m, Vec::Constant(1, 2.0), o); }, ErrorKind::blow_up));
}

TEST_CASE("spectral curve") {
  const auto m = ornstein_uhlenbeck(1.0);
  const Mesh mesh = Mesh::uniform(1, -8, 8, 401);
  const ScgfCurve c = scgf_spectral(m, m.field("x"), {1.0, -1.0, 0.5}, mesh);
  REQUIRE(c.points.size() == 4);
  CHECK(c.thetas() == std::vector<double>{-1.0, 0.0, 0.5, 1.0});
  CHECK(c.points[1].lambda == 0.0);
  for (const ScgfPoint& p : c.points) CHECK_THAT(p.lambda, WithinAbs(p.theta * p.theta, 1e-3));
  CHECK(check_convexity(c, 1e-9).convex);

  ScgfCurve bent = c;
  bent.points[2].lambda += 1.0;
  const ConvexityDefect d = check_convexity(bent, 1e-9);
  CHECK_FALSE(d.convex);
  CHECK(d.index == 2);
}

TEST_CASE("admissibility gate on quadratic tilts") {
  const auto m = ornstein_uhlenbeck(1.0);
  const Mesh mesh = Mesh::uniform(1, -8, 8, 401);
  SpectralScgfOptions o;
  o.witten = witten_potential(m, LyapunovSpec::exponential(*potential_of(m), 0.5, 0.1, 1));
  CHECK_NOTHROW(scgf_spectral(m, m.field("x"), {0.5, 1.0}, mesh, o));
  CHECK(is_kind([&] { scgf_spectral(m, m.field("x^2"), {0.3}, mesh, o); }, ErrorKind::out_of_theory));
  o.override_admissibility = true;
  CHECK_NOTHROW(scgf_spectral(m, m.field("x^2"), {0.1}, mesh, o));
}

TEST_CASE("box sensitivity separates admissible and inadmissible tilts") {
  const auto m = ornstein_uhlenbeck(1.0);
  const Mesh mesh = Mesh::uniform(1, -8, 8, 401);
  const ScalarField f = m.field("x^2");
  const double inside = box_sensitivity(m, f, 3.0 / 16.0, mesh);
  const double outside = box_sensitivity(m, f, 0.3, mesh);
  CHECK(inside <= 1e-6);
  CHECK(outside > 10.0 * inside);
  CHECK(outside > 1.0);
}

TEST_CASE("Monte Carlo estimator") {
  const auto m = ornstein_uhlenbeck(1.0);
  const ScalarField f = m.field("x");
  MonteCarloOptions o;
  o.replicas = 10000;
  o.T = 10.0;
  o.burn_in = 6.0;
  o.seed = 21;
  const MonteCarloEstimate zero = scgf_monte_carlo(m, f, 0.0, o);
  CHECK(zero.lambda == 0.0);
  CHECK(zero.ess_fraction == 1.0);

  const MonteCarloEstimate e = scgf_monte_carlo(m, f, 0.5, o);
  CHECK(e.standard_error > 0.0);
  // Coarse check; the calibrated comparison uses 10^5 replicas in the acceptance suite.
  CHECK_THAT(e.lambda, WithinAbs(0.25, 0.05));
  CHECK(scgf_monte_carlo(m, f, 0.5, o).lambda == e.lambda);

  // Weights degenerate at theta = 1 over long horizons.
  o.T = 20.0;
  o.burn_in = 0.0;
  o.replicas = 2000;
  CHECK(scgf_monte_carlo(m, f, 1.0, o).ess_fraction < 1e-2);

  o.burn_in = 20.0;
  CHECK(is_kind([&] { scgf_monte_carlo(m, f, 0.5, o); }, ErrorKind::parameter));
}

TEST_CASE("cloning estimator") {
  const auto m = ornstein_uhlenbeck(1.0);
  const ScalarField f = m.field("x");
  CloningOptions o;
  o.walkers = 1000;
  o.T = 40.0;
  o.seed = 8;
  const CloningEstimate e = scgf_cloning(m, f, 0.5, o);
  CHECK(e.epochs == 80);
  CHECK(e.burn_in_epochs == 8);
  CHECK(e.min_ess > 100.0);
  CHECK(std::abs(e.lambda - 0.25) <= 3.0 * e.standard_error);
  CHECK(scgf_cloning(m, f, 0.5, o).lambda == e.lambda);
  CHECK(scgf_cloning(m, f, 0.0, o).lambda == 0.0);

  CloningOptions bad;
  bad.walkers = 100;
  bad.T = 100.0;
  bad.epoch = 5.0;
  CHECK(is_kind([&] { scgf_cloning(m, f, 30.0, bad); }, ErrorKind::degeneracy));
}
