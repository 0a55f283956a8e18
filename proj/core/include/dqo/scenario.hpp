#pragma once

// JSON-configured scenario runner behind the `dqo` command-line tool.
//
// A scenario names an oscillator, a bath and a run mode; running it writes
// CSV tables and exactly one summary.json into the output directory.

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "dqo/algebra.hpp"
#include "dqo/bath.hpp"
#include "dqo/dynamics.hpp"
#include "dqo/liouvillian.hpp"

namespace dqo {

/// Malformed or out-of-range configuration. `key()` is the dotted path of the
/// offending entry, e.g. "oscillator.deformation.tau".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::invalid_argument(key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

enum class Mode { spectrum, evolve, evolve_populations, steady, partition, validate };

const char* to_string(Mode mode);

struct BathConfig {
  Bath::Kind kind = Bath::Kind::thermal;
  double lambda = 0.0;
  double temperature = 0.0;  // thermal
  double dpp = 0.0;          // constant
  double dqq = 0.0;
  double dpq = 0.0;
  std::vector<std::pair<double, double>> dpp_table;  // table
  std::vector<std::pair<double, double>> dqq_table;
  std::vector<std::pair<double, double>> dpq_table;

  Bath build(double omega) const;
};

struct InitialStateConfig {
  enum class Kind { fock, diagonal_table, matrix_file };
  Kind kind = Kind::fock;
  int n = 0;
  std::vector<double> populations;
  std::filesystem::path matrix_path;  // absolute after parsing
};

struct ScenarioConfig {
  double omega = 1.0;
  Deformation deformation = Deformation::identity();
  std::optional<int> n_max;  // nullopt = "auto"
  BathConfig bath;
  Mode mode = Mode::spectrum;
  InitialStateConfig initial_state;
  IntegratorConfig integrator;
  TruncationPolicy truncation_policy = TruncationPolicy::reflecting;
  bool snapshots = false;
  std::optional<int> n_terms;  // partition mode; nullopt = grow to tolerance
  double tolerance = 1e-12;    // tail tolerance for automatic truncation

  /// Canonical JSON echo with every default filled in.
  std::string echo_json() const;
};

/// Parses a JSON document; relative file paths resolve against `base_dir`.
ScenarioConfig parse_scenario(std::string_view json_text,
                              const std::filesystem::path& base_dir = std::filesystem::current_path());
ScenarioConfig load_scenario(const std::filesystem::path& config_path);

struct RunOptions {
  std::optional<std::filesystem::path> out_dir;  // nullopt: nothing is written
  bool strict = false;
  bool timings = false;  // wall-clock seconds in the summary (breaks byte-identity)
  int threads = 1;       // 0 = OpenMP default
};

struct RunOutcome {
  int exit_code = 0;  // 0 ok, 2 validation failure, 1 runtime error
  std::string summary_json;
  std::vector<std::filesystem::path> files;
  std::string message;
};

RunOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options);

/// Loads, runs and never throws: parse failures become exit code 2.
RunOutcome run_scenario_file(const std::filesystem::path& config_path, const RunOptions& options,
                             std::optional<Mode> mode_override = std::nullopt);

/// Decimal with 17 significant digits, "." separator, locale independent.
std::string format_number(double value);

}  // namespace dqo
