#pragma once

#include "devrate/error.hpp"

#include <toml.hpp>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace devrate::cli {

enum class Task { lyapunov, scgf, rate, decompose, sweep };

inline std::string_view to_string(Task t) {
  switch (t) {
    case Task::lyapunov: return "lyapunov";
    case Task::scgf: return "scgf";
    case Task::rate: return "rate";
    case Task::decompose: return "decompose";
    case Task::sweep: return "sweep";
  }
  return "unknown";
}

inline Task parse_task(std::string_view s) {
  for (Task t : {Task::lyapunov, Task::scgf, Task::rate, Task::decompose, Task::sweep})
    if (to_string(t) == s) return t;
  fail(ErrorKind::config, "unknown task '" + std::string(s) + "'");
}

/// Explicit list, or min/max/step.
struct GridSpec {
  std::vector<double> values;
  std::optional<double> min, max, step;

  bool empty() const { return values.empty() && !min && !max && !step; }

  std::vector<double> resolve(const std::string& field) const {
    if (!values.empty()) {
      if (min || max || step) fail(ErrorKind::config, "field '" + field + "' mixes a list with a range");
      return values;
    }
    if (!min || !max || !step)
      fail(ErrorKind::config, "missing required field '" + field + "' (a list, or " + field + "_min, " + field +
                                  "_max and " + field + "_step)");
    if (!(*step > 0.0) || !(*max >= *min)) fail(ErrorKind::config, "field '" + field + "' needs step > 0 and max >= min");
    const long n = std::lround((*max - *min) / *step);
    std::vector<double> out;
    for (long k = 0; k <= n; ++k) {
      const double v = *min + static_cast<double>(k) * *step;
      out.push_back(std::abs(v) < 1e-12 * *step ? 0.0 : v);
    }
    return out;
  }

  bool operator==(const GridSpec&) const = default;
};

struct ModelConfig {
  std::optional<std::string> builtin;
  std::optional<std::string> potential;
  std::string dynamics = "overdamped";  // with an expression potential: overdamped or langevin
  std::optional<int> dim;
  std::optional<double> alpha, q, strength, gamma;

  bool operator==(const ModelConfig&) const = default;
};

struct MeshConfig {
  std::optional<double> lo, hi;
  std::optional<int> n;
  std::string boundary = "truncated";
  std::string scheme = "automatic";

  bool operator==(const MeshConfig&) const = default;
};

struct MonteCarloConfig {
  int replicas = 10000;
  double T = 10.0;
  double dt = 1e-2;
  double burn_in = 6.0;

  bool operator==(const MonteCarloConfig&) const = default;
};

struct CloningConfig {
  int walkers = 2000;
  double T = 50.0;
  double dt = 1e-2;
  double epoch = 0.5;
  double burn_in = -1.0;
  int batches = 10;

  bool operator==(const CloningConfig&) const = default;
};

struct ScgfConfig {
  std::optional<std::string> observable;
  GridSpec theta;
  std::string method = "spectral";
  MonteCarloConfig mc;
  CloningConfig cloning;
  bool box_sensitivity = false;
  bool admissibility = true;
  bool override_admissibility = false;

  bool operator==(const ScgfConfig&) const = default;
};

struct RateConfig {
  GridSpec a;
  double convexity_tolerance = 1e-9;

  bool operator==(const RateConfig&) const = default;
};

struct LyapunovConfig {
  double theta = 0.5;
  double epsilon = 0.1;
  double r_min = 2.0;
  double r_max = 64.0;
  int directions = 64;
  std::vector<std::string> kappas;
  std::optional<double> tail_exponent;
  std::optional<double> c_V, C_V;  // Langevin constants

  bool operator==(const LyapunovConfig&) const = default;
};

struct AutocorrelationConfig {
  bool enabled = false;
  double T = 8.0;
  double window = 40.0;
  int trajectories = 400;
  double dt = 1e-2;
  int batches = 20;

  bool operator==(const AutocorrelationConfig&) const = default;
};

struct DecomposeConfig {
  std::vector<std::string> perturbations;
  AutocorrelationConfig autocorrelation;

  bool operator==(const DecomposeConfig&) const = default;
};

struct SweepMemberConfig {
  std::string name;
  std::string perturbation;

  bool operator==(const SweepMemberConfig&) const = default;
};

struct SweepConfig {
  std::string potential = "harmonic";
  int dim = 1;
  std::vector<double> gamma;
  std::vector<SweepMemberConfig> members;

  bool operator==(const SweepConfig&) const = default;
};

struct ExperimentConfig {
  std::optional<std::string> task;
  std::uint64_t seed = 0;
  std::string output = "out";
  std::optional<int> threads;
  ModelConfig model;
  MeshConfig mesh;
  std::optional<ScgfConfig> scgf;
  std::optional<RateConfig> rate;
  std::optional<LyapunovConfig> lyapunov;
  std::optional<DecomposeConfig> decompose;
  std::optional<SweepConfig> sweep;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline std::string at_line(const toml::source_region& r) {
  return r.begin.line ? " (line " + std::to_string(r.begin.line) + ")" : "";
}

/// Typed access to one table; every key read is recorded so the rest can be rejected.
class Reader {
 public:
  Reader(const toml::table& t, std::string path) : t_(t), path_(std::move(path)) {}

  std::string field(std::string_view key) const { return path_.empty() ? std::string(key) : path_ + "." + std::string(key); }

  const toml::node* node(std::string_view key) {
    used_.insert(std::string(key));
    return t_.get(key);
  }

  [[noreturn]] void type_error(std::string_view key, const toml::node& n, const char* expected) const {
    fail(ErrorKind::config, "field '" + field(key) + "' must be " + expected + at_line(n.source()));
  }

  std::optional<double> real(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<double>()) return *v;
    if (auto v = n->value_exact<std::int64_t>()) return static_cast<double>(*v);
    type_error(key, *n, "a number");
  }

  std::optional<std::int64_t> integer(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::int64_t>()) return *v;
    type_error(key, *n, "an integer");
  }

  std::optional<int> small_integer(std::string_view key) {
    const auto v = integer(key);
    if (!v) return std::nullopt;
    if (*v < std::numeric_limits<int>::min() || *v > std::numeric_limits<int>::max())
      type_error(key, *t_.get(key), "an integer in range");
    return static_cast<int>(*v);
  }

  std::optional<bool> boolean(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<bool>()) return *v;
    type_error(key, *n, "true or false");
  }

  std::optional<std::string> string(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    if (auto v = n->value_exact<std::string>()) return *v;
    type_error(key, *n, "a string");
  }

  std::optional<std::vector<double>> reals(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    const toml::array* a = n->as_array();
    if (!a) type_error(key, *n, "an array of numbers");
    std::vector<double> out;
    for (const toml::node& e : *a) {
      if (auto v = e.value_exact<double>()) out.push_back(*v);
      else if (auto i = e.value_exact<std::int64_t>()) out.push_back(static_cast<double>(*i));
      else type_error(key, e, "an array of numbers");
    }
    return out;
  }

  std::optional<std::vector<std::string>> strings(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return std::nullopt;
    const toml::array* a = n->as_array();
    if (!a) type_error(key, *n, "an array of strings");
    std::vector<std::string> out;
    for (const toml::node& e : *a) {
      if (auto v = e.value_exact<std::string>()) out.push_back(*v);
      else type_error(key, e, "an array of strings");
    }
    return out;
  }

  const toml::table* table(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return nullptr;
    if (const toml::table* t = n->as_table()) return t;
    type_error(key, *n, "a table");
  }

  const toml::array* array(std::string_view key) {
    const toml::node* n = node(key);
    if (!n) return nullptr;
    if (const toml::array* a = n->as_array()) return a;
    type_error(key, *n, "an array of tables");
  }

  void grid(std::string_view key, GridSpec& g) {
    const std::string k(key);
    if (auto v = reals(k)) g.values = *v;
    g.min = real(k + "_min");
    g.max = real(k + "_max");
    g.step = real(k + "_step");
  }

  void finish() const {
    for (const auto& [k, v] : t_)
      if (!used_.count(std::string(k.str())))
        fail(ErrorKind::config, "unknown key '" + field(k.str()) + "'" + at_line(k.source()));
  }

 private:
  const toml::table& t_;
  std::string path_;
  std::set<std::string> used_;
};

template <class T>
void assign(T& dst, const std::optional<T>& v) {
  if (v) dst = *v;
}

inline ModelConfig read_model(const toml::table& t) {
  Reader r(t, "model");
  ModelConfig m;
  m.builtin = r.string("builtin");
  m.potential = r.string("potential");
  assign(m.dynamics, r.string("dynamics"));
  m.dim = r.small_integer("dim");
  m.alpha = r.real("alpha");
  m.q = r.real("q");
  m.strength = r.real("strength");
  m.gamma = r.real("gamma");
  r.finish();
  return m;
}

inline MeshConfig read_mesh(const toml::table& t) {
  Reader r(t, "mesh");
  MeshConfig m;
  m.lo = r.real("lo");
  m.hi = r.real("hi");
  m.n = r.small_integer("n");
  assign(m.boundary, r.string("boundary"));
  assign(m.scheme, r.string("scheme"));
  r.finish();
  return m;
}

inline ScgfConfig read_scgf(const toml::table& t) {
  Reader r(t, "scgf");
  ScgfConfig s;
  s.observable = r.string("observable");
  r.grid("theta", s.theta);
  assign(s.method, r.string("method"));
  assign(s.box_sensitivity, r.boolean("box_sensitivity"));
  assign(s.admissibility, r.boolean("admissibility"));
  assign(s.override_admissibility, r.boolean("override_admissibility"));
  if (const toml::table* mc = r.table("mc")) {
    Reader m(*mc, "scgf.mc");
    assign(s.mc.replicas, m.small_integer("replicas"));
    assign(s.mc.T, m.real("T"));
    assign(s.mc.dt, m.real("dt"));
    assign(s.mc.burn_in, m.real("burn_in"));
    m.finish();
  }
  if (const toml::table* cl = r.table("cloning")) {
    Reader c(*cl, "scgf.cloning");
    assign(s.cloning.walkers, c.small_integer("walkers"));
    assign(s.cloning.T, c.real("T"));
    assign(s.cloning.dt, c.real("dt"));
    assign(s.cloning.epoch, c.real("epoch"));
    assign(s.cloning.burn_in, c.real("burn_in"));
    assign(s.cloning.batches, c.small_integer("batches"));
    c.finish();
  }
  r.finish();
  return s;
}

inline RateConfig read_rate(const toml::table& t) {
  Reader r(t, "rate");
  RateConfig c;
  r.grid("a", c.a);
  assign(c.convexity_tolerance, r.real("convexity_tolerance"));
  r.finish();
  return c;
}

inline LyapunovConfig read_lyapunov(const toml::table& t) {
  Reader r(t, "lyapunov");
  LyapunovConfig c;
  assign(c.theta, r.real("theta"));
  assign(c.epsilon, r.real("epsilon"));
  assign(c.r_min, r.real("r_min"));
  assign(c.r_max, r.real("r_max"));
  assign(c.directions, r.small_integer("directions"));
  assign(c.kappas, r.strings("kappas"));
  c.tail_exponent = r.real("tail_exponent");
  c.c_V = r.real("c_V");
  c.C_V = r.real("C_V");
  r.finish();
  return c;
}

inline DecomposeConfig read_decompose(const toml::table& t) {
  Reader r(t, "decompose");
  DecomposeConfig c;
  if (auto one = r.string("perturbation")) c.perturbations.push_back(*one);
  if (auto many = r.strings("perturbations")) c.perturbations.insert(c.perturbations.end(), many->begin(), many->end());
  if (const toml::table* ac = r.table("autocorrelation")) {
    Reader a(*ac, "decompose.autocorrelation");
    c.autocorrelation.enabled = true;
    assign(c.autocorrelation.enabled, a.boolean("enabled"));
    assign(c.autocorrelation.T, a.real("T"));
    assign(c.autocorrelation.window, a.real("window"));
    assign(c.autocorrelation.trajectories, a.small_integer("trajectories"));
    assign(c.autocorrelation.dt, a.real("dt"));
    assign(c.autocorrelation.batches, a.small_integer("batches"));
    a.finish();
  }
  r.finish();
  return c;
}

inline SweepConfig read_sweep(const toml::table& t) {
  Reader r(t, "sweep");
  SweepConfig c;
  assign(c.potential, r.string("potential"));
  assign(c.dim, r.small_integer("dim"));
  assign(c.gamma, r.reals("gamma"));
  if (const toml::array* members = r.array("member")) {
    for (const toml::node& n : *members) {
      const toml::table* mt = n.as_table();
      if (!mt) r.type_error("member", n, "an array of tables");
      Reader m(*mt, "sweep.member");
      SweepMemberConfig mc;
      const auto name = m.string("name");
      const auto pert = m.string("perturbation");
      if (!name) fail(ErrorKind::config, "missing required field 'sweep.member.name'" + at_line(mt->source()));
      if (!pert) fail(ErrorKind::config, "missing required field 'sweep.member.perturbation'" + at_line(mt->source()));
      mc.name = *name;
      mc.perturbation = *pert;
      m.finish();
      c.members.push_back(mc);
    }
  }
  r.finish();
  return c;
}

inline void write_real(std::ostream& os, double v) {
  if (std::isnan(v)) {
    os << "nan";
    return;
  }
  if (std::isinf(v)) {
    os << (v > 0 ? "inf" : "-inf");
    return;
  }
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  os << s;
}

inline void write_string(std::ostream& os, const std::string& s) { os << toml::value<std::string>(s); }

struct Writer {
  std::ostream& os;

  void real(std::string_view k, double v) {
    os << k << " = ";
    write_real(os, v);
    os << '\n';
  }
  void real(std::string_view k, const std::optional<double>& v) {
    if (v) real(k, *v);
  }
  void integer(std::string_view k, std::int64_t v) { os << k << " = " << v << '\n'; }
  void integer(std::string_view k, const std::optional<int>& v) {
    if (v) integer(k, *v);
  }
  void boolean(std::string_view k, bool v) { os << k << " = " << (v ? "true" : "false") << '\n'; }
  void string(std::string_view k, const std::string& v) {
    os << k << " = ";
    write_string(os, v);
    os << '\n';
  }
  void string(std::string_view k, const std::optional<std::string>& v) {
    if (v) string(k, *v);
  }
  void reals(std::string_view k, const std::vector<double>& v) {
    os << k << " = [";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ", ";
      write_real(os, v[i]);
    }
    os << "]\n";
  }
  void strings(std::string_view k, const std::vector<std::string>& v) {
    os << k << " = [";
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (i) os << ", ";
      write_string(os, v[i]);
    }
    os << "]\n";
  }
  void grid(std::string_view k, const GridSpec& g) {
    const std::string key(k);
    if (!g.values.empty()) reals(key, g.values);
    real(key + "_min", g.min);
    real(key + "_max", g.max);
    real(key + "_step", g.step);
  }
};

}  // namespace detail

inline ExperimentConfig config_from_toml(const toml::table& root) {
  detail::Reader r(root, "");
  ExperimentConfig c;
  c.task = r.string("task");
  if (c.task) parse_task(*c.task);
  if (const toml::node* n = r.node("seed")) {
    const auto v = n->value_exact<std::int64_t>();
    if (!v || *v < 0) r.type_error("seed", *n, "a nonnegative integer");
    c.seed = static_cast<std::uint64_t>(*v);
  }
  detail::assign(c.output, r.string("output"));
  c.threads = r.small_integer("threads");
  if (const toml::table* t = r.table("model")) c.model = detail::read_model(*t);
  if (const toml::table* t = r.table("mesh")) c.mesh = detail::read_mesh(*t);
  if (const toml::table* t = r.table("scgf")) c.scgf = detail::read_scgf(*t);
  if (const toml::table* t = r.table("rate")) c.rate = detail::read_rate(*t);
  if (const toml::table* t = r.table("lyapunov")) c.lyapunov = detail::read_lyapunov(*t);
  if (const toml::table* t = r.table("decompose")) c.decompose = detail::read_decompose(*t);
  if (const toml::table* t = r.table("sweep")) c.sweep = detail::read_sweep(*t);
  r.finish();
  return c;
}

inline ExperimentConfig parse_config(std::string_view text, std::string_view source = "config") {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    fail(ErrorKind::config, std::string(e.description()) + detail::at_line(e.source()));
  }
  return config_from_toml(root);
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::io, "cannot read config file '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path);
}

/// Canonical TOML text; parse_config(to_toml(c)) == c.
inline std::string to_toml(const ExperimentConfig& c) {
  std::ostringstream os;
  detail::Writer w{os};
  w.string("task", c.task);
  if (c.seed > static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max()))
    fail(ErrorKind::config, "seed does not fit a TOML integer");
  w.integer("seed", static_cast<std::int64_t>(c.seed));
  w.string("output", c.output);
  w.integer("threads", c.threads);

  os << "\n[model]\n";
  w.string("builtin", c.model.builtin);
  w.string("potential", c.model.potential);
  w.string("dynamics", c.model.dynamics);
  w.integer("dim", c.model.dim);
  w.real("alpha", c.model.alpha);
  w.real("q", c.model.q);
  w.real("strength", c.model.strength);
  w.real("gamma", c.model.gamma);

  os << "\n[mesh]\n";
  w.real("lo", c.mesh.lo);
  w.real("hi", c.mesh.hi);
  w.integer("n", c.mesh.n);
  w.string("boundary", c.mesh.boundary);
  w.string("scheme", c.mesh.scheme);

  if (const auto& s = c.scgf) {
    os << "\n[scgf]\n";
    w.string("observable", s->observable);
    w.grid("theta", s->theta);
    w.string("method", s->method);
    w.boolean("box_sensitivity", s->box_sensitivity);
    w.boolean("admissibility", s->admissibility);
    w.boolean("override_admissibility", s->override_admissibility);
    os << "\n[scgf.mc]\n";
    w.integer("replicas", s->mc.replicas);
    w.real("T", s->mc.T);
    w.real("dt", s->mc.dt);
    w.real("burn_in", s->mc.burn_in);
    os << "\n[scgf.cloning]\n";
    w.integer("walkers", s->cloning.walkers);
    w.real("T", s->cloning.T);
    w.real("dt", s->cloning.dt);
    w.real("epoch", s->cloning.epoch);
    w.real("burn_in", s->cloning.burn_in);
    w.integer("batches", s->cloning.batches);
  }
  if (const auto& r = c.rate) {
    os << "\n[rate]\n";
    w.grid("a", r->a);
    w.real("convexity_tolerance", r->convexity_tolerance);
  }
  if (const auto& l = c.lyapunov) {
    os << "\n[lyapunov]\n";
    w.real("theta", l->theta);
    w.real("epsilon", l->epsilon);
    w.real("r_min", l->r_min);
    w.real("r_max", l->r_max);
    w.integer("directions", l->directions);
    w.strings("kappas", l->kappas);
    w.real("tail_exponent", l->tail_exponent);
    w.real("c_V", l->c_V);
    w.real("C_V", l->C_V);
  }
  if (const auto& d = c.decompose) {
    os << "\n[decompose]\n";
    w.strings("perturbations", d->perturbations);
    os << "\n[decompose.autocorrelation]\n";
    w.boolean("enabled", d->autocorrelation.enabled);
    w.real("T", d->autocorrelation.T);
    w.real("window", d->autocorrelation.window);
    w.integer("trajectories", d->autocorrelation.trajectories);
    w.real("dt", d->autocorrelation.dt);
    w.integer("batches", d->autocorrelation.batches);
  }
  if (const auto& s = c.sweep) {
    os << "\n[sweep]\n";
    w.string("potential", s->potential);
    w.integer("dim", s->dim);
    w.reals("gamma", s->gamma);
    for (const SweepMemberConfig& m : s->members) {
      os << "\n[[sweep.member]]\n";
      w.string("name", m.name);
      w.string("perturbation", m.perturbation);
    }
  }
  return os.str();
}

}  // namespace devrate::cli
