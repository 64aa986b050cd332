// Acceptance suite: one PASS/FAIL line per criterion; exit status is the number of failures.

#include "devrate/catalog.hpp"
#include "devrate/decompose.hpp"
#include "devrate/lyapunov.hpp"
#include "devrate/ratefn.hpp"
#include "devrate/scgf.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>

using namespace devrate;

namespace {

int failures = 0;
std::vector<int> selected;

void report(int id, const std::string& title, bool pass, const std::string& detail) {
  std::printf("%s [%d] %s: %s\n", pass ? "PASS" : "FAIL", id, title.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!pass) ++failures;
}

void run(int id, const std::string& title, const std::function<std::pair<bool, std::string>()>& body) {
  if (!selected.empty() && std::find(selected.begin(), selected.end(), id) == selected.end()) return;
  try {
    const auto [pass, detail] = body();
    report(id, title, pass, detail);
  } catch (const std::exception& e) {
    report(id, title, false, std::string("exception: ") + e.what());
  }
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> grid(double lo, double hi, double step) {
  std::vector<double> g;
  const int n = static_cast<int>(std::lround((hi - lo) / step));
  for (int k = 0; k <= n; ++k) {
    const double v = lo + k * step;
    g.push_back(std::abs(v) < 1e-12 ? 0.0 : v);
  }
  return g;
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

const Mesh ou_mesh = Mesh::uniform(1, -8, 8, 401);

std::pair<bool, std::string> ou_scgf() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto m = ornstein_uhlenbeck(1.0);
  const ScgfCurve c = scgf_spectral(m, m.field("x"), {-1.0, -0.5, 0.0, 0.5, 1.0}, ou_mesh);
  double worst = 0.0;
  for (const ScgfPoint& p : c.points) worst = std::max(worst, std::abs(p.lambda - p.theta * p.theta));
  const double t = seconds_since(t0);
  return {worst <= 1e-3 && t <= 30.0, "max |lambda - theta^2| = " + fmt("%.3e", worst) + ", " + fmt("%.2f", t) + " s"};
}

std::pair<bool, std::string> legendre() {
  const auto m = ornstein_uhlenbeck(1.0);
  const ScgfCurve c = scgf_spectral(m, m.field("x"), grid(-1.0, 1.0, 0.1), ou_mesh);
  const RateCurve coarse = legendre_transform(c, grid(-1.5, 1.5, 0.1));
  double worst = 0.0;
  bool finite = true;
  for (std::size_t k = 0; k < coarse.a.size(); ++k) {
    finite = finite && !coarse.infinite[k];
    worst = std::max(worst, std::abs(coarse.I[k] - coarse.a[k] * coarse.a[k] / 4.0));
  }
  const RateCurve fine = legendre_transform(c, grid(-2.0, 2.0, 0.01));
  const DoubleConjugate dc = double_conjugate_check(fine, grid(-1.0, 1.0, 0.1));
  return {finite && worst <= 5e-3 && dc.max_deviation <= 5e-3,
          "max |I(a) - a^2/4| = " + fmt("%.3e", worst) + ", double-conjugate deviation " + fmt("%.3e", dc.max_deviation)};
}

std::pair<bool, std::string> quadratic_tilt() {
  const auto m = ornstein_uhlenbeck(1.0);
  const ScalarField f = m.field("x^2");
  const SparseGenerator g = assemble_generator(m, ou_mesh);
  const double lambda = principal_eigenpair(g, (3.0 / 16.0) * sample(f, ou_mesh)).lambda;
  const double inside = box_sensitivity(m, f, 3.0 / 16.0, ou_mesh);
  const double outside = box_sensitivity(m, f, 0.3, ou_mesh);
  const double err = std::abs(lambda - 0.25);
  return {err <= 1e-3 && outside > 10.0 * inside,
          "|lambda(3/16) - 1/4| = " + fmt("%.3e", err) + ", box sensitivity " + fmt("%.3e", inside) + " at 3/16 vs " +
              fmt("%.3e", outside) + " at 0.3"};
}

std::pair<bool, std::string> friction() {
  const auto t0 = std::chrono::steady_clock::now();
  const SweepTable t = friction_sweep(harmonic_potential(), 1,
                                      {sweep_member("position", "q - 0.5"), sweep_member("hamiltonian", "(q^2 + p^2)/4")},
                                      {0.25, 1.0, 4.0}, Mesh::uniform(2, -8, 8, 161));
  bool pass = true;
  std::string detail;
  for (const SweepRow& r : t.rows) {
    const bool position = r.member == "position";
    const double value = position ? r.gamma_times_I : r.I_over_gamma;
    const double target = position ? 0.25 : 0.125;
    pass = pass && std::abs(value / target - 1.0) <= 0.05;
    detail += (position ? "gamma*I" : "I/gamma") + std::string("(") + fmt("%g", r.gamma) + ")=" + fmt("%.4f", value) + " ";
  }
  const double s = seconds_since(t0);
  return {pass && s <= 300.0, detail + fmt("%.1f", s) + " s"};
}

std::pair<bool, std::string> decomposition_identities() {
  bool pass = true;
  std::string detail;
  for (const CatalogEntry& e : builtin_catalog()) {
    if (!e.model.is_reversible()) continue;
    const DecompositionContext ctx = DecompositionContext::build(e.model, e.mesh);
    const DecompositionResult r = decompose(ctx, ctx.perturbation(e.model.field("0.5*x0 + 0.2*sin(x0)")));
    pass = pass && r.IA == 0.0 && r.reversible;
  }
  detail += "I_A = 0 on reversible built-ins; ";
  const DiffusionModel rot = rotational_overdamped();
  const DiffusionModel rev = ornstein_uhlenbeck(1.0, 2);
  const Mesh mesh = Mesh::uniform(2, -6, 6, 81);
  const DecompositionContext a = DecompositionContext::build(rot, mesh);
  const DecompositionContext b = DecompositionContext::build(rev, mesh);
  double min_gap = kInfinity, min_ia = kInfinity;
  for (const char* v : {"x0 - 0.5", "0.5*x0 + 0.3*x1", "x1 - 0.2*x0^2", "sin(x0) + 0.5*x1", "0.4*x0*x1"}) {
    const DecompositionResult ra = decompose(a, a.perturbation(rot.field(v)));
    const DecompositionResult rb = decompose(b, b.perturbation(rev.field(v)));
    min_ia = std::min(min_ia, ra.IA);
    min_gap = std::min(min_gap, ra.I() - rb.I());
  }
  pass = pass && min_ia > 0.0 && min_gap >= -1e-9;
  return {pass, detail + "rotational: min I_A = " + fmt("%.4f", min_ia) + ", min I_F - I_rev = " + fmt("%.4f", min_gap)};
}

std::pair<bool, std::string> duality() {
  const auto m = ornstein_uhlenbeck(1.0);
  const DecompositionContext ctx = DecompositionContext::build(m, ou_mesh);
  const Vector x = sample(m.field("x"), ou_mesh);
  const Perturbation p = ctx.perturbation(m.field("2*x - 2"));
  const DecompositionResult r = decompose(ctx, p);
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> amp(-1.0, 1.0), centre(-3.0, 5.0), width(0.5, 2.0), tilt(-1.5, 1.5);
  double worst = -kInfinity;
  for (int trial = 0; trial < 50; ++trial) {
    Vector log_u = tilt(rng) * x;
    for (int k = 0; k < 3; ++k) {
      const double a = amp(rng), c = centre(rng), w = width(rng);
      log_u.array() += a * (-(x.array() - c).square() / (2 * w * w)).exp();
    }
    worst = std::max(worst, donsker_varadhan_log(ctx.generator, log_u, p.nu).value - r.I());
  }
  const double at_star = donsker_varadhan_log(ctx.generator, 0.5 * (p.v + r.psi), p.nu).value;
  std::vector<Perturbation> family;
  for (double mm : grid(-3.0, 3.0, 0.1)) family.push_back(Perturbation::from_values((mm * x).array() - 0.5 * mm * mm, ctx.mu));
  const VariationalBound vb = variational_scgf_bound(ctx, x, family);
  const bool pass = worst <= 1e-3 && std::abs(at_star - r.I()) <= 1e-2 && std::abs(vb.value - 1.0) <= 1e-2;
  return {pass, "max DV(u) - I = " + fmt("%.3e", worst) + ", |DV(u*) - I| = " + fmt("%.3e", std::abs(at_star - r.I())) +
                    ", variational bound " + fmt("%.5f", vb.value)};
}

std::pair<bool, std::string> monte_carlo() {
  const auto m = ornstein_uhlenbeck(1.0);
  const ScalarField f = m.field("x");
  const SparseGenerator g = assemble_generator(m, ou_mesh);
  const Vector fs = sample(f, ou_mesh);
  auto spectral = [&](double theta) { return principal_eigenpair(g, theta * fs).lambda; };
  std::string detail;
  bool pass = true;

  MonteCarloOptions mc;
  mc.replicas = 100000;
  mc.T = 10.0;
  mc.burn_in = 6.0;
  mc.seed = 1;
  const MonteCarloEstimate e = scgf_monte_carlo(m, f, 0.5, mc);
  const double zmc = (e.lambda - spectral(0.5)) / e.standard_error;
  pass = pass && std::abs(zmc) <= 3.0;
  detail += "mc(0.5) z = " + fmt("%.2f", zmc) + "; ";

  for (double theta : {0.5, 1.0}) {
    CloningOptions co;
    co.seed = 1;
    const CloningEstimate c = scgf_cloning(m, f, theta, co);
    const double z = (c.lambda - spectral(theta)) / c.standard_error;
    pass = pass && std::abs(z) <= 3.0;
    detail += "cloning(" + fmt("%g", theta) + ") = " + fmt("%.4f", c.lambda) + " z = " + fmt("%.2f", z) + "; ";
  }
  MonteCarloOptions naive;
  naive.seed = 1;
  const MonteCarloEstimate n = scgf_monte_carlo(m, f, 1.0, naive);
  pass = pass && n.ess_fraction < 1e-2;
  detail += "naive mc(1) ess = " + fmt("%.1f", n.ess) + " of " + std::to_string(n.replicas);
  return {pass, detail};
}

std::pair<bool, std::string> autocorrelation() {
  bool pass = true;
  std::string detail;
  struct Case {
    BuiltinParams params;
    double oracle;
  };
  BuiltinParams harmonic;
  BuiltinParams dw;
  dw.potential = "double_well";
  dw.gamma = 2.0;
  for (const Case& c : {Case{harmonic, 0.25}, Case{dw, kNaN}}) {
    const DiffusionModel m = builtin_model("langevin", c.params);
    const double qmax = c.params.potential == "harmonic" ? 8.0 : 4.0;
    const DecompositionContext ctx = DecompositionContext::build(m, Mesh({Axis{-qmax, qmax, 161}, Axis{-8.0, 8.0, 161}}));
    const Perturbation p = ctx.perturbation(m.field("q - 0.5"));
    const double poisson = decompose(ctx, p).IA;
    AutocorrelationOptions o;
    o.trajectories = 1000;
    o.T = 8.0 / c.params.gamma;
    o.seed = 1;
    const AutocorrelationEstimate a = autocorrelation_ia(ctx, p, o);
    const double z = (a.IA - poisson) / a.standard_error;
    pass = pass && std::abs(z) <= 3.0 && !a.truncation_warning;
    if (!std::isnan(c.oracle)) pass = pass && std::abs(poisson - c.oracle) <= 2e-2;
    detail += m.id() + ": poisson " + fmt("%.4f", poisson) + ", autocorrelation " + fmt("%.4f", a.IA) + " +- " +
              fmt("%.4f", a.standard_error) + "; ";
  }
  return {pass, detail};
}

std::pair<bool, std::string> lyapunov_suite() {
  double worst = 0.0;
  for (const auto& m : {ornstein_uhlenbeck(1.0), quartic_overdamped(), overdamped(power_potential(3.0), 1)}) {
    const ScalarField V = *potential_of(m);
    for (double theta : {0.25, 0.5, 0.75}) {
      const ScalarField psi = witten_potential(m, LyapunovSpec::exponential(V, theta, 0.1, 1));
      const ScalarField closed = reversible_witten_potential(V, theta);
      for (const Vec& x : box_probes(1, -4.0, 4.0, 200))
        worst = std::max(worst, std::abs(psi(x) - closed(x)) / std::max(1.0, std::abs(closed(x))));
    }
  }
  const bool regimes = cramer_comparison(1.5).regime == TailRegime::sub_gaussian &&
                       cramer_comparison(2.0).regime == TailRegime::gaussian &&
                       cramer_comparison(3.0).regime == TailRegime::super_gaussian;
  const auto quartic = quartic_overdamped();
  const ScalarField psi = witten_potential(quartic, LyapunovSpec::exponential(*potential_of(quartic), 0.5, 0.1, 1));
  const GrowthFit fit = radial_growth(psi, 1, RadiusWindow{2.0, 64.0});
  const auto c = langevin_lyapunov_constants(1.0, 0.0, 1.0, 0.5, 1, 1.0, 0.1);
  const bool constants = std::abs(c.a - 0.04) <= 1e-12 && std::abs(c.b - 0.1) <= 1e-12 && std::abs(c.C - 0.5) <= 1e-12;
  const bool pass = worst <= 1e-9 && regimes && fit.valid && std::abs(fit.exponent - 6.0) <= 0.1 && constants;
  return {pass, "witten closed-form error " + fmt("%.2e", worst) + ", regimes " + (regimes ? "ok" : "wrong") +
                    ", quartic exponent " + fmt("%.3f", fit.exponent) + ", (a, b, C) = (" + fmt("%g", c.a) + ", " +
                    fmt("%g", c.b) + ", " + fmt("%g", c.C) + ")"};
}

std::vector<double> sorted_real_parts(const Eigen::MatrixXd& A) {
  Eigen::EigenSolver<Eigen::MatrixXd> es(A, false);
  std::vector<double> out;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) out.push_back(es.eigenvalues()[i].real());
  std::sort(out.begin(), out.end());
  return out;
}

/// Coarse mesh of the same dimension for the dense spectrum comparison.
Mesh coarse(const Mesh& m) {
  const int d = m.dimension();
  return Mesh::uniform(d, m.axis(0).lo, m.axis(0).hi, d == 1 ? 61 : (d == 2 ? 13 : 8));
}

std::pair<bool, std::string> structural() {
  bool pass = true;
  double row = 0.0, shift = 0.0, witten = 0.0, doob = 0.0, similarity = 0.0, symmetry = 0.0, dense = 0.0;
  double min_off = kInfinity;
  int checked = 0;
  for (const CatalogEntry& e : builtin_catalog()) {
    for (DriftScheme scheme : {DriftScheme::automatic, DriftScheme::hybrid}) {
      const SparseGenerator g = assemble_generator(e.model, e.mesh, scheme);
      const GeneratorDefects d = generator_defects(g.L);
      row = std::max(row, d.max_row_sum / std::max(1.0, d.max_entry));
      min_off = std::min(min_off, d.min_off_diagonal);
      const Vector f = sample(e.model.field(e.observable), e.mesh);
      const SpectralSolution s = principal_eigenpair(g, 0.5 * f);
      const double l1 = principal_eigenpair(g, (0.5 * f).array() + 0.75).lambda;
      shift = std::max(shift, std::abs(l1 - s.lambda - 0.75) / std::max(1.0, std::abs(s.lambda)));
      const DoobTransform dt = doob_transform(g.L, 0.5 * f, s);
      const GeneratorDefects dd = generator_defects(dt.generator);
      doob = std::max(doob, dd.max_row_sum / std::max(1.0, dd.max_entry));
      min_off = std::min(min_off, dd.min_off_diagonal);

      const SparseGenerator gc = assemble_generator(e.model, coarse(e.mesh), scheme);
      const Vector mu = reference_measure(gc);
      const SparseMatrix T = witten_similarity(gc.L, mu);
      const double scale = max_abs(gc.L);
      for (int k = 0; k < gc.L.outerSize(); ++k)
        for (SparseMatrix::InnerIterator it(gc.L, k); it; ++it) {
          const double expected = std::sqrt(mu[it.row()] / mu[it.col()]) * it.value();
          similarity = std::max(similarity, std::abs(T.coeff(it.row(), it.col()) - expected) /
                                                std::max(1.0, std::abs(expected)));
        }
      if (gc.scheme == DriftScheme::gibbs && e.model.is_reversible())
        symmetry = std::max(symmetry, max_abs(SparseMatrix(T - SparseMatrix(T.transpose()))) / scale);
      const Vector fc = sample(e.model.field(e.observable), gc.mesh);
      for (double theta : {0.0, 0.5, -1.0}) {
        SparseGenerator gt = gc;
        gt.L = T;
        const double la = principal_eigenpair(gc, theta * fc).lambda;
        const double lb = principal_eigenpair(gt, theta * fc).lambda;
        witten = std::max(witten, std::abs(la - lb) / scale);
      }
      if (gc.L.rows() <= 1000) {
        const auto a = sorted_real_parts(Eigen::MatrixXd(gc.L));
        const auto b = sorted_real_parts(Eigen::MatrixXd(T));
        for (std::size_t i = 0; i < a.size(); ++i) dense = std::max(dense, std::abs(a[i] - b[i]) / scale);
      }
      ++checked;
    }
  }
  pass = row <= 1e-12 && min_off >= 0.0 && shift <= 1e-12 && witten <= 1e-10 && similarity <= 1e-14 && symmetry <= 1e-14 && doob <= 1e-10;
  std::ostringstream os;
  os << checked << " generators: row sums " << fmt("%.1e", row) << ", min off-diagonal " << fmt("%.1e", min_off)
     << ", shift rule " << fmt("%.1e", shift) << ", Witten principal eigenvalues " << fmt("%.1e", witten) << ", similarity "
     << fmt("%.1e", similarity) << ", symmetry " << fmt("%.1e", symmetry) << ", dense spectrum (reported) "
     << fmt("%.1e", dense) << ", Doob row sums "
     << fmt("%.1e", doob);
  return {pass, os.str()};
}

}  // namespace

int main(int argc, char** argv) {
  for (int i = 1; i < argc; ++i) selected.push_back(std::atoi(argv[i]));
  run(1, "OU SCGF oracle", ou_scgf);
  run(2, "Legendre oracle", legendre);
  run(3, "quadratic-tilt boundary", quadratic_tilt);
  run(4, "Langevin friction scaling", friction);
  run(5, "decomposition identities", decomposition_identities);
  run(6, "Donsker-Varadhan duality", duality);
  run(7, "Monte Carlo and cloning consistency", monte_carlo);
  run(8, "autocorrelation route", autocorrelation);
  run(9, "Lyapunov suite", lyapunov_suite);
  run(10, "structural exactness", structural);
  std::printf("%d of %d criteria failed\n", failures, selected.empty() ? 10 : static_cast<int>(selected.size()));
  return failures == 0 ? 0 : 1;
}
