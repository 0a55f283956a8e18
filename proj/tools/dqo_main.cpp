#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "dqo/scenario.hpp"

namespace {

// DQO_THREADS caps OpenMP parallelism inside the generator; 0 = runtime default.
int threads_from_env() {
  const char* env = std::getenv("DQO_THREADS");
  if (env == nullptr || *env == '\0') {
    return 1;
  }
  try {
    const int n = std::stoi(env);
    return n < 0 ? 1 : n;
  } catch (const std::exception&) {
    std::cerr << "dqo: ignoring malformed DQO_THREADS='" << env << "'\n";
    return 1;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Damped f-deformed oscillator scenario runner"};
  app.require_subcommand(1);

  std::string config;
  std::string out;
  bool strict = false;
  bool timings = false;

  auto* run = app.add_subcommand("run", "Run the scenario described by a JSON config");
  run->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out, "Output directory (default: current directory)");
  run->add_flag("--strict", strict, "Treat bath positivity violations as errors");
  run->add_flag("--timings", timings, "Record wall-clock time in summary.json");

  auto* validate = app.add_subcommand("validate", "Run the invariant suite on the config's parameters");
  validate->add_option("--config", config, "Scenario JSON")->required()->check(CLI::ExistingFile);
  validate->add_option("--out", out, "Also write summary.json into this directory");

  CLI11_PARSE(app, argc, argv);

  dqo::RunOptions options;
  options.strict = strict;
  options.timings = timings;
  options.threads = threads_from_env();

  dqo::RunOutcome outcome;
  if (run->parsed()) {
    options.out_dir = out.empty() ? std::filesystem::current_path() : std::filesystem::path(out);
    outcome = dqo::run_scenario_file(config, options);
  } else {
    if (!out.empty()) {
      options.out_dir = out;
    }
    outcome = dqo::run_scenario_file(config, options, dqo::Mode::validate);
    std::cout << outcome.summary_json;
  }
  if (outcome.exit_code != 0) {
    std::cerr << "dqo: " << outcome.message << '\n';
  }
  return outcome.exit_code;
}
