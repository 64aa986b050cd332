#pragma once

#include "devrate/catalog.hpp"
#include "devrate/cli/config.hpp"
#include "devrate/cli/output.hpp"
#include "devrate/decompose.hpp"
#include "devrate/lyapunov.hpp"
#include "devrate/ratefn.hpp"
#include "devrate/scgf.hpp"

#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <optional>
#include <ostream>
#include <regex>
#include <string>
#include <vector>

namespace devrate::cli {

/// Process exit status per failure class.
enum ExitCode : int {
  exit_ok = 0,
  exit_unexpected = 1,
  exit_config = 2,
  exit_io = 3,
  exit_theory = 4,
  exit_numerical = 5,
  exit_input = 6,
};

inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::config:
    case ErrorKind::expression:
    case ErrorKind::parameter:
    case ErrorKind::mesh:
      return exit_config;
    case ErrorKind::io:
      return exit_io;
    case ErrorKind::out_of_theory:
    case ErrorKind::invalid_lyapunov:
    case ErrorKind::invalid_nonequilibrium_force:
    case ErrorKind::insufficient_window:
    case ErrorKind::unsupported_diffusion:
    case ErrorKind::derivative_unavailable:
    case ErrorKind::incompatible_rhs:
      return exit_theory;
    case ErrorKind::convergence:
    case ErrorKind::solver:
    case ErrorKind::positivity_violation:
    case ErrorKind::blow_up:
    case ErrorKind::numeric_range:
    case ErrorKind::degeneracy:
      return exit_numerical;
    case ErrorKind::measure:
    case ErrorKind::domain:
    case ErrorKind::empty_family:
      return exit_input;
  }
  return exit_unexpected;
}

/// Command-line values that take precedence over the config file.
struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

/// --threads, then the config, then DEVRATE_THREADS, then 1.
inline int resolve_threads(const Overrides& o, const ExperimentConfig& c) {
  int n = 1;
  if (o.threads) n = *o.threads;
  else if (c.threads) n = *c.threads;
  else if (const char* env = std::getenv("DEVRATE_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == env || *end != '\0' || v < 1) fail(ErrorKind::config, "DEVRATE_THREADS must be a positive integer");
    n = static_cast<int>(v);
  }
  if (n < 1) fail(ErrorKind::config, "thread count must be positive");
  return n;
}

inline DiffusionModel build_model(const ModelConfig& m) {
  auto reject = [&](bool present, const char* field, const std::string& why) {
    if (present) fail(ErrorKind::config, "field 'model." + std::string(field) + "' " + why);
  };
  if (m.builtin) {
    const std::string& name = *m.builtin;
    const std::string why = "does not apply to built-in '" + name + "'";
    reject(m.dynamics != "overdamped", "dynamics", why);
    BuiltinParams p;
    if (m.dim) p.dim = *m.dim;
    if (m.alpha) p.alpha = *m.alpha;
    if (m.q) p.q = *m.q;
    if (m.strength) p.strength = *m.strength;
    if (m.gamma) p.gamma = *m.gamma;
    if (m.potential) p.potential = *m.potential;
    reject(m.alpha && name != "ou", "alpha", why);
    reject(m.q && name != "power", "q", why);
    reject(m.strength && name != "rotational", "strength", why);
    reject(m.gamma && name != "langevin", "gamma", why);
    reject(m.potential && name != "langevin", "potential", why);
    reject(m.dim && (name == "quartic" || name == "rotational"), "dim", why);
    return builtin_model(name, p);
  }
  if (!m.potential) fail(ErrorKind::config, "missing required field 'model.builtin' or 'model.potential'");
  const int dim = m.dim.value_or(1);
  if (dim < 1) fail(ErrorKind::config, "field 'model.dim' must be positive");
  reject(m.alpha.has_value(), "alpha", "applies only to built-in models");
  reject(m.q.has_value(), "q", "applies only to built-in models");
  reject(m.strength.has_value(), "strength", "applies only to built-in models");
  if (m.dynamics == "overdamped") {
    reject(m.gamma.has_value(), "gamma", "applies only to langevin dynamics");
    return overdamped(ScalarField::from_expression(*m.potential, expr::Symbols::cartesian(dim), dim), dim);
  }
  if (m.dynamics == "langevin") return langevin(langevin_potential(*m.potential, dim), m.gamma.value_or(1.0), dim);
  fail(ErrorKind::config, "field 'model.dynamics' must be 'overdamped' or 'langevin', got '" + m.dynamics + "'");
}

inline Boundary parse_boundary(const std::string& s) {
  if (s == "truncated") return Boundary::truncated;
  if (s == "periodic") return Boundary::periodic;
  fail(ErrorKind::config, "field 'mesh.boundary' must be 'truncated' or 'periodic', got '" + s + "'");
}

inline DriftScheme mesh_scheme(const MeshConfig& m) {
  try {
    return parse_drift_scheme(m.scheme);
  } catch (const Error&) {
    fail(ErrorKind::config, "field 'mesh.scheme' must be one of automatic, gibbs, hybrid, upwind; got '" + m.scheme + "'");
  }
}

inline Mesh build_mesh(const MeshConfig& m, int dim) {
  const Mesh base = Mesh::default_for(dim);
  Axis a = base.axis(0);
  if (m.lo) a.lo = *m.lo;
  if (m.hi) a.hi = *m.hi;
  if (m.n) a.n = *m.n;
  a.mode = parse_boundary(m.boundary);
  return Mesh(std::vector<Axis>(dim, a));
}

namespace detail {

inline std::string quote_csv(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) out += c == '"' ? std::string("\"\"") : std::string(1, c);
  return out + "\"";
}

struct Context {
  ExperimentConfig config;
  Task task;
  std::uint64_t seed;
  int threads;
  OutputSet out;
  std::ostream& log;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
};

template <class T>
const T& require_section(const std::optional<T>& s, const char* name) {
  if (!s) fail(ErrorKind::config, std::string("missing required section [") + name + "]");
  return *s;
}

inline SpectralScgfOptions spectral_options(const Context& ctx, const DiffusionModel& model, const ScgfConfig& s) {
  SpectralScgfOptions o;
  o.scheme = mesh_scheme(ctx.config.mesh);
  o.threads = ctx.threads;
  o.box_sensitivity = s.box_sensitivity;
  o.override_admissibility = s.override_admissibility;
  if (s.admissibility && !model.is_langevin())
    if (const auto V = potential_of(model))
      o.witten = witten_potential(model, LyapunovSpec::exponential(*V, 0.5, 0.1, model.dimension()));
  return o;
}

inline ScgfCurve compute_scgf(Context& ctx, const DiffusionModel& model, const Mesh& mesh) {
  const ScgfConfig& s = require_section(ctx.config.scgf, "scgf");
  if (!s.observable) fail(ErrorKind::config, "missing required field 'scgf.observable'");
  const std::vector<double> thetas = s.theta.resolve("scgf.theta");
  const ScalarField f = model.field(*s.observable);
  ScgfCurve curve;
  if (s.method == "spectral") {
    curve = scgf_spectral(model, f, thetas, mesh, spectral_options(ctx, model, s));
  } else if (s.method == "mc" || s.method == "cloning") {
    curve.observable = f.name();
    curve.model_id = model.id();
    std::vector<double> sorted = thetas;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    for (double theta : sorted) {
      ScgfPoint p;
      p.theta = theta;
      if (s.method == "mc") {
        MonteCarloOptions o;
        o.replicas = s.mc.replicas;
        o.T = s.mc.T;
        o.dt = s.mc.dt;
        o.burn_in = s.mc.burn_in;
        o.seed = ctx.seed;
        o.threads = ctx.threads;
        const MonteCarloEstimate e = scgf_monte_carlo(model, f, theta, o);
        p.lambda = e.lambda;
        p.standard_error = e.standard_error;
        p.method = ScgfMethod::mc;
        if (e.ess_fraction < 1e-2)
          ctx.log << "warning: theta " << format_number(theta) << ": effective sample fraction " << format_number(e.ess_fraction)
                  << ", estimate unreliable\n";
      } else {
        CloningOptions o;
        o.walkers = s.cloning.walkers;
        o.T = s.cloning.T;
        o.dt = s.cloning.dt;
        o.epoch = s.cloning.epoch;
        o.burn_in = s.cloning.burn_in;
        o.batches = s.cloning.batches;
        o.seed = ctx.seed;
        o.threads = ctx.threads;
        const CloningEstimate e = scgf_cloning(model, f, theta, o);
        p.lambda = e.lambda;
        p.standard_error = e.standard_error;
        p.method = ScgfMethod::cloning;
      }
      curve.points.push_back(p);
    }
  } else {
    fail(ErrorKind::config, "field 'scgf.method' must be spectral, mc or cloning; got '" + s.method + "'");
  }

  Table t({"theta", "lambda", "stderr", "method"});
  for (const ScgfPoint& p : curve.points) t.add({p.theta, p.lambda, p.standard_error, std::string(to_string(p.method))});
  ctx.out.csv("scgf.csv", t);
  if (s.box_sensitivity && s.method == "spectral") {
    Table b({"theta", "box_sensitivity"});
    for (const ScgfPoint& p : curve.points) b.add({p.theta, p.box_sensitivity});
    ctx.out.csv("scgf_box.csv", b);
  }
  Series ser{"lambda(theta)", curve.thetas(), curve.lambdas(), s.method != "spectral"};
  ctx.out.write("scgf.svg", svg_plot({"SCGF of " + *s.observable + " (" + model.id() + ")", "theta", "lambda"}, {ser}));

  const ConvexityDefect cd = check_convexity(curve, 1e-9);
  ctx.summary["scgf"] = {{"observable", *s.observable}, {"method", s.method}, {"points", curve.points.size()},
                         {"convex", cd.convex}};
  ctx.log << "scgf: " << curve.points.size() << " points, method " << s.method << (cd.convex ? "" : ", not convex") << "\n";
  return curve;
}

inline void run_scgf(Context& ctx) {
  const DiffusionModel model = build_model(ctx.config.model);
  compute_scgf(ctx, model, build_mesh(ctx.config.mesh, model.dimension()));
}

inline void run_rate(Context& ctx) {
  const DiffusionModel model = build_model(ctx.config.model);
  const RateConfig& rc = ctx.config.rate ? *ctx.config.rate : RateConfig{};
  const std::vector<double> a = rc.a.resolve("rate.a");
  const ScgfCurve curve = compute_scgf(ctx, model, build_mesh(ctx.config.mesh, model.dimension()));
  const RateCurve rate = legendre_transform(curve, a, rc.convexity_tolerance);
  Table t({"a", "I", "is_infinite"});
  std::vector<double> finite_I;
  for (std::size_t k = 0; k < rate.a.size(); ++k) {
    t.add({rate.a[k], rate.infinite[k] ? kInfinity : rate.I[k], rate.infinite[k] ? 1 : 0});
    finite_I.push_back(rate.infinite[k] ? kNaN : rate.I[k]);
  }
  ctx.out.csv("rate.csv", t);
  ctx.out.write("rate.svg", svg_plot({"Rate function (" + model.id() + ")", "a", "I(a)"}, {{"I(a)", rate.a, finite_I}}));
  // Only thetas whose maximizing a lies inside the a grid can be recovered from it.
  std::vector<double> inner;
  const auto& pts = curve.points;
  const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
  for (std::size_t k = 1; k + 1 < pts.size(); ++k) {
    const double slope = (pts[k + 1].lambda - pts[k - 1].lambda) / (pts[k + 1].theta - pts[k - 1].theta);
    if (slope >= *amin && slope <= *amax) inner.push_back(pts[k].theta);
  }
  const DoubleConjugate dc = double_conjugate_check(rate, inner);
  ctx.summary["rate"] = {{"a_star", rate.a_star},
                         {"slope_min", rate.slope_min},
                         {"slope_max", rate.slope_max},
                         {"double_conjugate_deviation", dc.max_deviation}};
  ctx.log << "rate: a* = " << format_number(rate.a_star) << ", double-conjugate deviation "
          << format_number(dc.max_deviation) << "\n";
}

inline nlohmann::ordered_json fit_json(const GrowthFit& f) {
  return {{"exponent", f.exponent}, {"standard_error", f.standard_error}, {"last_octave", f.last_octave}, {"valid", f.valid}};
}

inline void run_lyapunov(Context& ctx) {
  const DiffusionModel model = build_model(ctx.config.model);
  const LyapunovConfig lc = ctx.config.lyapunov ? *ctx.config.lyapunov : LyapunovConfig{};
  nlohmann::ordered_json rec = {{"model", model.id()}, {"theta", lc.theta}, {"epsilon", lc.epsilon}};
  std::ostringstream txt;
  txt << "model " << model.id() << "\n";

  if (const Langevin* lv = model.langevin()) {
    if (!lc.c_V) fail(ErrorKind::config, "missing required field 'lyapunov.c_V' for a Langevin model");
    const auto p = langevin_lyapunov_params(*lc.c_V, lc.C_V.value_or(0.0), lv->gamma, lc.theta, lv->position_dim);
    rec["langevin"] = {{"c_V", p.c_V}, {"C_V", p.C_V}, {"gamma", p.gamma}, {"eta", p.eta}, {"epsilon", p.epsilon},
                       {"a", p.a}, {"b", p.b}, {"C", p.C}};
    txt << "langevin constants: eta " << format_number(p.eta) << ", epsilon " << format_number(p.epsilon) << ", a "
        << format_number(p.a) << ", b " << format_number(p.b) << ", C " << format_number(p.C) << "\n";
  } else {
    const auto V = potential_of(model);
    if (!V) fail(ErrorKind::unsupported_diffusion, "Lyapunov report needs a model with a potential");
    const int d = model.dimension();
    const RadiusWindow window{lc.r_min, lc.r_max, lc.directions};
    std::vector<std::pair<std::string, ScalarField>> kappas;
    for (const std::string& k : lc.kappas) kappas.emplace_back(k, model.field(k));
    const LyapunovReport rep = lyapunov_report(model, LyapunovSpec::exponential(*V, lc.theta, lc.epsilon, d), window,
                                               kappas, lc.tail_exponent, ctx.threads);
    const NonlinearReport nl = check_nonlinear_condition(model, *V, {lc.theta}, window, ctx.threads);

    Table t({"r", "psi_min"});
    for (std::size_t i = 0; i < rep.psi_fit.radii.size(); ++i) t.add({rep.psi_fit.radii[i], rep.psi_fit.values[i]});
    ctx.out.csv("lyapunov.csv", t);
    ctx.out.write("lyapunov.svg", svg_plot({"Witten-Lyapunov potential growth (" + model.id() + ")", "r", "min Psi", true, true},
                                           {{"min Psi on sphere", rep.psi_fit.radii, rep.psi_fit.values, true}}));

    rec["psi_fit"] = fit_json(rep.psi_fit);
    rec["psi_compact_level_sets"] = rep.psi_coercive.pass;
    rec["restriction"] = {{"C1", rep.restriction.C1}, {"C2", rep.restriction.C2}, {"ratio_lower", rep.restriction.ratio_lower},
                          {"ratio_upper", rep.restriction.ratio_upper}, {"pass", rep.restriction.pass}};
    rec["nonlinear"] = {{"pass", nl.pass}, {"message", nl.message}};
    txt << "Psi growth exponent " << format_number(rep.psi_fit.exponent) << " +- " << format_number(rep.psi_fit.standard_error)
        << " on r in [" << format_number(lc.r_min) << ", " << format_number(lc.r_max) << "]\n";
    txt << "Psi has compact level sets: " << (rep.psi_coercive.pass ? "yes" : "no") << "\n";
    txt << "restriction conditions: " << (rep.restriction.pass ? "pass" : "fail") << " (C1 " << format_number(rep.restriction.C1)
        << ", C2 " << format_number(rep.restriction.C2) << ")\n";
    txt << "nonlinear criterion: " << (nl.pass ? "pass" : "fail") << (nl.message.empty() ? "" : " (" + nl.message + ")") << "\n";
    nlohmann::ordered_json kj = nlohmann::ordered_json::array();
    for (const auto& [name, v] : rep.kappas) {
      kj.push_back({{"kappa", name}, {"admissible", v.admissible}, {"bounded", v.bounded}, {"heavy_tail", v.heavy_tail},
                    {"ratio_fit", fit_json(v.ratio_fit)}, {"reason", v.reason}});
      txt << "kappa " << name << ": " << (v.admissible ? "admissible" : "not admissible")
          << (v.reason.empty() ? "" : " (" + v.reason + ")") << "\n";
    }
    rec["kappas"] = kj;
    if (rep.cramer) {
      rec["cramer"] = {{"cramer_exponent_bound", rep.cramer->cramer_exponent_bound},
                       {"witten_exponent_bound", rep.cramer->witten_exponent_bound},
                       {"regime", std::string(to_string(rep.cramer->regime))}};
      txt << "tail regime " << to_string(rep.cramer->regime) << ": Cramer bound " << format_number(rep.cramer->cramer_exponent_bound)
          << ", Witten bound " << format_number(rep.cramer->witten_exponent_bound) << "\n";
    }
  }
  ctx.out.write("lyapunov.json", rec.dump(2) + "\n");
  ctx.out.write("lyapunov.txt", txt.str());
  ctx.log << txt.str();
  ctx.summary["lyapunov"] = rec;
}

inline void run_decompose(Context& ctx) {
  const DiffusionModel model = build_model(ctx.config.model);
  const DecomposeConfig& dc = require_section(ctx.config.decompose, "decompose");
  if (dc.perturbations.empty()) fail(ErrorKind::config, "missing required field 'decompose.perturbation'");
  const Mesh mesh = build_mesh(ctx.config.mesh, model.dimension());
  const DecompositionContext dctx = DecompositionContext::build(model, mesh, mesh_scheme(ctx.config.mesh), ctx.threads);
  const bool ac = dc.autocorrelation.enabled;
  std::vector<std::string> header = {"perturbation", "IS", "IA", "I", "fisher_IS", "poisson_residual", "compatibility_defect"};
  if (ac) header.insert(header.end(), {"IA_autocorrelation", "IA_autocorrelation_stderr", "truncation_warning"});
  Table t(header);
  Table corr({"perturbation", "t", "correlation"});
  std::vector<double> idx, is, ia, total;
  std::vector<Series> curves;
  for (std::size_t k = 0; k < dc.perturbations.size(); ++k) {
    const std::string& text = dc.perturbations[k];
    const Perturbation p = dctx.perturbation(model.field(text), ctx.threads);
    const DecompositionResult r = decompose(dctx, p);
    std::vector<Table::Cell> row = {quote_csv(text), r.IS, r.IA, r.I(), r.fisher_IS, r.poisson_residual, r.compatibility_defect};
    if (ac) {
      AutocorrelationOptions o;
      o.T = dc.autocorrelation.T;
      o.window = dc.autocorrelation.window;
      o.trajectories = dc.autocorrelation.trajectories;
      o.dt = dc.autocorrelation.dt;
      o.batches = dc.autocorrelation.batches;
      o.seed = ctx.seed;
      o.threads = ctx.threads;
      const AutocorrelationEstimate e = autocorrelation_ia(dctx, p, o);
      row.insert(row.end(), {e.IA, e.standard_error, e.truncation_warning ? 1 : 0});
      for (std::size_t i = 0; i < e.times.size(); ++i) corr.add({quote_csv(text), e.times[i], e.correlation[i]});
      if (!e.times.empty()) curves.push_back({text, e.times, e.correlation});
      if (e.truncation_warning)
        ctx.log << "warning: " << text << ": autocorrelation not decayed at T (|C(T)|/C(0) = " << format_number(e.tail_ratio) << ")\n";
    }
    t.add(std::move(row));
    idx.push_back(static_cast<double>(k));
    is.push_back(r.IS);
    ia.push_back(r.IA);
    total.push_back(r.I());
    ctx.log << "decompose " << text << ": IS " << format_number(r.IS) << ", IA " << format_number(r.IA) << ", I "
            << format_number(r.I()) << "\n";
  }
  ctx.out.csv("decompose.csv", t);
  ctx.out.write("decompose.svg", svg_plot({"Rate function decomposition (" + model.id() + ")", "perturbation index", "value"},
                                          {{"I_S", idx, is, true}, {"I_A", idx, ia, true}, {"I", idx, total, true}}));
  if (ac) {
    ctx.out.csv("autocorrelation.csv", corr);
    ctx.out.write("autocorrelation.svg", svg_plot({"Autocorrelation of L_A v", "t", "C(t)"}, curves));
  }
  ctx.summary["decompose"] = {{"perturbations", dc.perturbations.size()}, {"autocorrelation", ac}};
}

inline void run_sweep(Context& ctx) {
  const SweepConfig& sc = require_section(ctx.config.sweep, "sweep");
  const ModelConfig none;
  if (!(ctx.config.model == none)) fail(ErrorKind::config, "the sweep task takes its model from [sweep]; remove [model]");
  if (sc.gamma.empty()) fail(ErrorKind::config, "missing required field 'sweep.gamma'");
  static const std::regex safe("[A-Za-z0-9_-]+");
  std::vector<SweepMember> family;
  for (const SweepMemberConfig& m : sc.members) {
    if (!std::regex_match(m.name, safe))
      fail(ErrorKind::config, "sweep member name '" + m.name + "' must use letters, digits, '_' or '-'");
    for (const SweepMember& f : family)
      if (f.name == m.name) fail(ErrorKind::config, "duplicate sweep member name '" + m.name + "'");
    family.push_back(sweep_member(m.name, m.perturbation));
  }
  const ScalarField V = langevin_potential(sc.potential, sc.dim);
  const Mesh mesh = build_mesh(ctx.config.mesh, 2 * sc.dim);
  const SweepTable table = friction_sweep(V, sc.dim, family, sc.gamma, mesh, mesh_scheme(ctx.config.mesh), ctx.threads);
  for (const SweepMember& m : family) {
    Table t({"gamma", "IS", "IA", "I", "gamma_times_I", "I_over_gamma"});
    std::vector<double> g, gi, ig;
    for (const SweepRow& r : table.rows) {
      if (r.member != m.name) continue;
      t.add({r.gamma, r.IS, r.IA, r.I, r.gamma_times_I, r.I_over_gamma});
      g.push_back(r.gamma);
      gi.push_back(r.gamma_times_I);
      ig.push_back(r.I_over_gamma);
    }
    ctx.out.csv("sweep_" + m.name + ".csv", t);
    ctx.out.write("sweep_" + m.name + ".svg", svg_plot({"Friction sweep: " + m.name, "gamma", "scaled rate", true, true},
                                                       {{"gamma * I", g, gi, true}, {"I / gamma", g, ig, true}}));
  }
  if (!table.spans_decade) ctx.log << "warning: gamma list does not reach 0.1 and 10; asymptotic regimes may not be visible\n";
  ctx.summary["sweep"] = {{"members", family.size()}, {"gammas", sc.gamma.size()}, {"spans_decade", table.spans_decade}};
  ctx.log << "sweep: " << family.size() << " members x " << sc.gamma.size() << " friction values\n";
}

}  // namespace detail

/// Runs one task and writes its outputs plus manifest.json; returns the manifest.
inline nlohmann::ordered_json run(Task task, const ExperimentConfig& config, const Overrides& o, std::ostream& log) {
  if (config.task && parse_task(*config.task) != task)
    fail(ErrorKind::config, "config task '" + *config.task + "' does not match subcommand '" + std::string(to_string(task)) + "'");
  ExperimentConfig effective = config;
  if (o.seed) effective.seed = *o.seed;
  if (o.out) effective.output = *o.out;
  detail::Context ctx{effective, task, effective.seed, resolve_threads(o, config), OutputSet(effective.output), log};
  // The recorded config keeps the configured output path so runs into different directories hash alike.
  ExperimentConfig recorded = effective;
  recorded.output = config.output;
  const std::string canonical = to_toml(recorded);
  ctx.out.write("config.toml", canonical);
  switch (task) {
    case Task::scgf: detail::run_scgf(ctx); break;
    case Task::rate: detail::run_rate(ctx); break;
    case Task::lyapunov: detail::run_lyapunov(ctx); break;
    case Task::decompose: detail::run_decompose(ctx); break;
    case Task::sweep: detail::run_sweep(ctx); break;
  }
  nlohmann::ordered_json manifest = {{"task", std::string(to_string(task))},
                                     {"seed", effective.seed},
                                     {"config_sha256", sha256_hex(canonical)},
                                     {"files", ctx.out.manifest()},
                                     {"summary", ctx.summary}};
  const std::string text = manifest.dump(2) + "\n";
  const auto path = ctx.out.directory() / "manifest.json";
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!(out << text)) fail(ErrorKind::io, "cannot write '" + path.string() + "'");
  return manifest;
}

}  // namespace devrate::cli
