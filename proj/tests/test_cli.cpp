#include "devrate/cli/runner.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace devrate;
using namespace devrate::cli;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace fs = std::filesystem;

namespace {

const fs::path kSource = DEVRATE_SOURCE_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("devrate_test_cli_" + name);
  fs::remove_all(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::vector<std::string>> read_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

std::string config_error(const std::string& text) {
  try {
    parse_config(text);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    return e.what();
  }
  FAIL("expected a config error");
  return {};
}

nlohmann::ordered_json run_quiet(Task task, const ExperimentConfig& c, const fs::path& out) {
  std::ostringstream log;
  Overrides o;
  o.out = out.string();
  return run(task, c, o, log);
}

}  // namespace

TEST_CASE("scgf task reproduces the golden spectral rows") {
  const fs::path out = scratch("golden");
  run_quiet(Task::scgf, load_config((kSource / "configs/ou_fx.toml").string()), out);
  const auto got = read_csv(slurp(out / "scgf.csv"));
  const auto golden = read_csv(slurp(kSource / "tests/golden/ou_fx_scgf.csv"));
  REQUIRE(got.size() == golden.size());
  CHECK(got[0] == std::vector<std::string>{"theta", "lambda", "stderr", "method"});
  for (std::size_t k = 1; k < got.size(); ++k) {
    const double theta = std::stod(got[k][0]);
    CHECK(theta == std::stod(golden[k][0]));
    CHECK_THAT(std::stod(got[k][1]), WithinRel(std::stod(golden[k][1]), 1e-9) || WithinAbs(0.0, 1e-12));
    // Independent oracle: lambda(theta) = theta^2 for f = x under OU.
    CHECK_THAT(std::stod(got[k][1]), WithinAbs(theta * theta, 1e-3));
    CHECK(got[k][3] == "spectral");
  }
  CHECK(fs::exists(out / "scgf.svg"));
  CHECK(fs::exists(out / "manifest.json"));
}

TEST_CASE("numbers use 12 significant digits") {
  CHECK(format_number(1.0 / 3.0) == "0.333333333333");
  CHECK(format_number(-0.0) == "0");
  CHECK(format_number(kInfinity) == "inf");
  Table t({"a", "b"});
  t.add({2.5, "x"});
  CHECK(t.csv() == "a,b\n2.5,x\n");
}

TEST_CASE("same config and seed give identical outputs") {
  ExperimentConfig c = parse_config(R"(
seed = 11
[model]
builtin = "ou"
[scgf]
observable = "x"
theta = [0.25, 0.5]
method = "mc"
[scgf.mc]
replicas = 500
T = 2.0
burn_in = 1.0
)");
  const fs::path d1 = scratch("det1"), d2 = scratch("det2");
  const auto m1 = run_quiet(Task::scgf, c, d1);
  const auto m2 = run_quiet(Task::scgf, c, d2);
  CHECK(m1.dump() == m2.dump());
  CHECK(slurp(d1 / "scgf.csv") == slurp(d2 / "scgf.csv"));

  Overrides o;
  o.out = scratch("det3").string();
  o.seed = 12;
  std::ostringstream log;
  const auto m3 = run(Task::scgf, c, o, log);
  CHECK(m3["files"][1]["file"] == "scgf.csv");
  CHECK(m3["files"][1]["sha256"] != m1["files"][1]["sha256"]);
  CHECK(m3["seed"] == 12);
}

TEST_CASE("manifest hashes match the files") {
  const fs::path out = scratch("manifest");
  const auto m = run_quiet(Task::rate, load_config((kSource / "configs/ou_rate.toml").string()), out);
  for (const auto& f : m["files"]) {
    const std::string data = slurp(out / f["file"].get<std::string>());
    CHECK(sha256_hex(data) == f["sha256"]);
    CHECK(data.size() == f["bytes"].get<std::size_t>());
  }
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  const auto rate = read_csv(slurp(out / "rate.csv"));
  CHECK(rate[0] == std::vector<std::string>{"a", "I", "is_infinite"});
  for (std::size_t k = 1; k < rate.size(); ++k) {
    const double a = std::stod(rate[k][0]);
    if (std::abs(a) <= 2.0) CHECK_THAT(std::stod(rate[k][1]), WithinAbs(a * a / 4.0, 5e-3));
  }
}

TEST_CASE("missing theta grid names the field") {
  const ExperimentConfig c = parse_config(R"(
[model]
builtin = "ou"
[scgf]
observable = "x"
)");
  try {
    run_quiet(Task::scgf, c, scratch("missing"));
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::config);
    CHECK_THAT(std::string(e.what()), ContainsSubstring("scgf.theta"));
  }
}

TEST_CASE("unknown keys are rejected with their line") {
  CHECK_THAT(config_error("seed = 1\n[mesh]\nlo = -8.0\nfoo = 1\n"), ContainsSubstring("mesh.foo") && ContainsSubstring("line 4"));
  CHECK_THAT(config_error("sed = 1\n"), ContainsSubstring("'sed'") && ContainsSubstring("line 1"));
  CHECK_THAT(config_error("[scgf.mc]\nreplicaz = 3\n"), ContainsSubstring("scgf.mc.replicaz"));
  CHECK_THAT(config_error("[[sweep.member]]\nname = \"a\"\nperturbation = \"q\"\nweight = 2\n"),
             ContainsSubstring("sweep.member.weight") && ContainsSubstring("line 4"));
  CHECK_THAT(config_error("[mesh]\n\nn = \"many\"\n"), ContainsSubstring("mesh.n") && ContainsSubstring("line 3"));
  CHECK_THAT(config_error("seed = [1\n"), ContainsSubstring("line"));
  CHECK_THAT(config_error("task = \"plot\"\n"), ContainsSubstring("plot"));
}

TEST_CASE("configs round-trip losslessly") {
  int seen = 0;
  for (const auto& entry : fs::directory_iterator(kSource / "configs")) {
    if (entry.path().extension() != ".toml") continue;
    INFO(entry.path().string());
    const ExperimentConfig c = load_config(entry.path().string());
    const std::string text = to_toml(c);
    const ExperimentConfig back = parse_config(text);
    CHECK(back == c);
    CHECK(to_toml(back) == text);
    ++seen;
  }
  CHECK(seen >= 5);

  ExperimentConfig c;
  c.seed = 42;
  c.model.potential = "x^4/4 - \"odd\" \\ name";
  c.mesh.lo = 0.1;
  c.mesh.hi = 1.0 / 3.0;
  ScgfConfig s;
  s.observable = "x";
  s.theta.values = {-1e-300, 0.1, 2.0 / 3.0};
  c.scgf = s;
  c.lyapunov = LyapunovConfig{};
  c.lyapunov->tail_exponent = 2.5;
  const ExperimentConfig back = parse_config(to_toml(c));
  CHECK(back == c);
}

TEST_CASE("task and model validation") {
  ExperimentConfig c = parse_config("task = \"rate\"\n[model]\nbuiltin = \"ou\"\n");
  CHECK_THROWS_AS(run_quiet(Task::scgf, c, scratch("mismatch")), Error);
  CHECK_THAT(std::string([] {
               try {
                 build_model(parse_config("[model]\nbuiltin = \"quartic\"\nalpha = 2.0\n").model);
               } catch (const Error& e) {
                 return std::string(e.what());
               }
               return std::string();
             }()),
             ContainsSubstring("model.alpha"));
  CHECK_THROWS_AS(build_model(parse_config("[model]\nbuiltin = \"nope\"\n").model), Error);
  CHECK(build_model(parse_config("[model]\npotential = \"x^2/2 + y^2\"\ndim = 2\n").model).dimension() == 2);
  CHECK(build_model(parse_config("[model]\npotential = \"double_well\"\ndynamics = \"langevin\"\ngamma = 2.0\n").model).is_langevin());
  CHECK(build_mesh(MeshConfig{}, 1).size() == 401);
  CHECK(exit_code(ErrorKind::config) == 2);
  CHECK(exit_code(ErrorKind::io) == 3);
  CHECK(exit_code(ErrorKind::out_of_theory) == 4);
  CHECK(exit_code(ErrorKind::convergence) == 5);
  CHECK(exit_code(ErrorKind::measure) == 6);
}

TEST_CASE("thread count precedence") {
  ExperimentConfig c;
  Overrides o;
  ::unsetenv("DEVRATE_THREADS");
  CHECK(resolve_threads(o, c) == 1);
  ::setenv("DEVRATE_THREADS", "3", 1);
  CHECK(resolve_threads(o, c) == 3);
  c.threads = 2;
  CHECK(resolve_threads(o, c) == 2);
  o.threads = 4;
  CHECK(resolve_threads(o, c) == 4);
  ::setenv("DEVRATE_THREADS", "zero", 1);
  CHECK_THROWS_AS(resolve_threads(Overrides{}, ExperimentConfig{}), Error);
  ::unsetenv("DEVRATE_THREADS");
}

TEST_CASE("sweep writes one table per member") {
  const ExperimentConfig c = parse_config(R"(
[mesh]
lo = -8.0
hi = 8.0
n = 81
[sweep]
gamma = [0.5, 1.0, 2.0]
[[sweep.member]]
name = "position"
perturbation = "q - 0.5"
)");
  const fs::path out = scratch("sweep");
  run_quiet(Task::sweep, c, out);
  const auto rows = read_csv(slurp(out / "sweep_position.csv"));
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"gamma", "IS", "IA", "I", "gamma_times_I", "I_over_gamma"});
  for (std::size_t k = 2; k < rows.size(); ++k) CHECK_THAT(std::stod(rows[k][4]), WithinRel(std::stod(rows[1][4]), 1e-6));
}

#ifdef DEVRATE_TOOL
TEST_CASE("command line exit codes") {
  const std::string tool = DEVRATE_TOOL;
  auto status = [&](const std::string& args) {
    const int s = std::system((tool + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  const fs::path dir = scratch("exit");
  fs::create_directories(dir);
  auto write = [&](const std::string& name, const std::string& text) {
    std::ofstream(dir / name) << text;
    return (dir / name).string();
  };
  const std::string ok = write("ok.toml", "[model]\nbuiltin = \"ou\"\n[scgf]\nobservable = \"x\"\ntheta = [0.5]\n");
  CHECK(status("scgf --config " + ok + " --out " + (dir / "o").string()) == 0);
  CHECK(status("scgf --config " + write("bad.toml", "[model]\nbuiltin = \"ou\"\n[scgf]\nobservable = \"x\"\n") + " --out " +
               (dir / "o2").string()) == 2);
  CHECK(status("scgf --config " + (dir / "absent.toml").string()) == 3);
  CHECK(status("scgf --config " + write("quad.toml", "[model]\nbuiltin = \"ou\"\n[scgf]\nobservable = \"x^2\"\ntheta = [0.3]\n") +
               " --out " + (dir / "o3").string()) == 4);
  CHECK(status("frobnicate") == 2);
  CHECK(status("scgf") == 2);
}
#endif
