#include "devrate/cli/runner.hpp"
#include "devrate/cli/selftest.hpp"

#include <CLI11.hpp>

#include <iostream>

using namespace devrate;

int main(int argc, char** argv) {
  CLI::App app{"Large-deviation rate functions of ergodic diffusions"};
  app.require_subcommand(1);

  std::string config_path;
  cli::Overrides over;
  std::uint64_t seed = 0;
  std::string out;
  int threads = 0;

  struct Entry {
    cli::Task task;
    CLI::App* cmd;
  };
  std::vector<Entry> tasks;
  for (cli::Task t : {cli::Task::lyapunov, cli::Task::scgf, cli::Task::rate, cli::Task::decompose, cli::Task::sweep}) {
    CLI::App* cmd = app.add_subcommand(std::string(cli::to_string(t)), "Run the " + std::string(cli::to_string(t)) + " task");
    cmd->add_option("--config", config_path, "TOML experiment config")->required();
    cmd->add_option("--seed", seed, "Random seed (overrides the config)");
    cmd->add_option("--out", out, "Output directory (overrides the config)");
    cmd->add_option("--threads", threads, "Worker threads (default: config, then DEVRATE_THREADS)")->check(CLI::PositiveNumber);
    tasks.push_back({t, cmd});
  }
  CLI::App* selftest = app.add_subcommand("selftest", "Run quick oracle checks");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_config;
  }

  try {
    if (selftest->parsed()) return cli::selftest(std::cout) ? cli::exit_ok : cli::exit_numerical;
    for (const Entry& e : tasks) {
      if (!e.cmd->parsed()) continue;
      if (e.cmd->count("--seed")) over.seed = seed;
      if (e.cmd->count("--out")) over.out = out;
      if (e.cmd->count("--threads")) over.threads = threads;
      const cli::ExperimentConfig config = cli::load_config(config_path);
      const auto manifest = cli::run(e.task, config, over, std::cout);
      std::cout << "wrote " << manifest["files"].size() << " files and manifest.json to "
                << (over.out ? *over.out : config.output) << "\n";
      return cli::exit_ok;
    }
  } catch (const Error& e) {
    std::cerr << "devrate: " << e.what() << "\n";
    return cli::exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "devrate: unexpected error: " << e.what() << "\n";
    return cli::exit_unexpected;
  }
  return cli::exit_unexpected;
}
