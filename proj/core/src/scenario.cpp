#include "dqo/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "dqo/checks.hpp"
#include "dqo/stationary.hpp"

namespace dqo {

using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "0.1.0";

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void reject_unknown(const json& obj, const std::string& path,
                    std::initializer_list<std::string_view> allowed) {
  for (const auto& [key, value] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(join(path, key), "unknown key");
    }
  }
}

const json& require_object(const json& parent, const std::string& path, std::string_view key) {
  const std::string full = join(path, key);
  if (!parent.contains(key)) {
    throw ConfigError(full, "missing required object");
  }
  const json& v = parent.at(std::string(key));
  if (!v.is_object()) {
    throw ConfigError(full, "must be an object");
  }
  return v;
}

double number_at(const json& obj, const std::string& path, std::string_view key) {
  const std::string full = join(path, key);
  if (!obj.contains(key)) {
    throw ConfigError(full, "missing required number");
  }
  const json& v = obj.at(std::string(key));
  if (!v.is_number()) {
    throw ConfigError(full, "must be a number");
  }
  const double d = v.get<double>();
  if (!std::isfinite(d)) {
    throw ConfigError(full, "must be finite");
  }
  return d;
}

double number_or(const json& obj, const std::string& path, std::string_view key, double fallback) {
  return obj.contains(key) ? number_at(obj, path, key) : fallback;
}

int integer_at(const json& obj, const std::string& path, std::string_view key) {
  const std::string full = join(path, key);
  const json& v = obj.at(std::string(key));
  if (!v.is_number_integer()) {
    throw ConfigError(full, "must be an integer");
  }
  return v.get<int>();
}

std::string string_at(const json& obj, const std::string& path, std::string_view key) {
  const std::string full = join(path, key);
  if (!obj.contains(key)) {
    throw ConfigError(full, "missing required string");
  }
  const json& v = obj.at(std::string(key));
  if (!v.is_string()) {
    throw ConfigError(full, "must be a string");
  }
  return v.get<std::string>();
}

std::vector<double> number_array(const json& v, const std::string& path) {
  if (!v.is_array()) {
    throw ConfigError(path, "must be an array of numbers");
  }
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) {
      throw ConfigError(path + "[" + std::to_string(i) + "]", "must be a number");
    }
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<std::pair<double, double>> pair_table(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) {
    throw ConfigError(path, "must be a nonempty array of [x, value] pairs");
  }
  std::vector<std::pair<double, double>> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto& e = v[i];
    if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
      throw ConfigError(path + "[" + std::to_string(i) + "]", "must be an [x, value] pair");
    }
    out.emplace_back(e[0].get<double>(), e[1].get<double>());
  }
  return out;
}

template <class Fn>
auto rethrow_as_config(const std::string& key, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(key, e.what());
  }
}

Deformation parse_deformation(const json& d, const std::string& path) {
  const std::string kind = string_at(d, path, "kind");
  if (kind == "identity") {
    reject_unknown(d, path, {"kind"});
    return Deformation::identity();
  }
  if (kind == "q") {
    reject_unknown(d, path, {"kind", "tau", "q"});
    const bool has_tau = d.contains("tau");
    const bool has_q = d.contains("q");
    if (has_tau == has_q) {
      throw ConfigError(join(path, "tau"), "give exactly one of 'tau' or 'q'");
    }
    if (has_tau) {
      const double tau = number_at(d, path, "tau");
      return rethrow_as_config(join(path, "tau"), [&] { return Deformation::q_tau(tau); });
    }
    const double q = number_at(d, path, "q");
    return rethrow_as_config(join(path, "q"), [&] { return Deformation::q_value(q); });
  }
  if (kind == "custom") {
    reject_unknown(d, path, {"kind", "phi_table"});
    if (!d.contains("phi_table")) {
      throw ConfigError(join(path, "phi_table"), "missing required array");
    }
    auto table = number_array(d.at("phi_table"), join(path, "phi_table"));
    return rethrow_as_config(join(path, "phi_table"),
                             [&] { return Deformation::custom(std::move(table)); });
  }
  throw ConfigError(join(path, "kind"), "must be one of identity, q, custom (got '" + kind + "')");
}

BathConfig parse_bath(const json& b, const std::string& path, double omega) {
  BathConfig cfg;
  const std::string kind = string_at(b, path, "kind");
  if (kind == "thermal") {
    reject_unknown(b, path, {"kind", "lambda", "temperature"});
    cfg.kind = Bath::Kind::thermal;
    cfg.temperature = number_at(b, path, "temperature");
  } else if (kind == "constant") {
    reject_unknown(b, path, {"kind", "lambda", "dpp", "dqq", "dpq"});
    cfg.kind = Bath::Kind::constant;
    cfg.dpp = number_at(b, path, "dpp");
    cfg.dqq = number_at(b, path, "dqq");
    cfg.dpq = number_or(b, path, "dpq", 0.0);
  } else if (kind == "table") {
    reject_unknown(b, path, {"kind", "lambda", "dpp", "dqq", "dpq"});
    cfg.kind = Bath::Kind::table;
    for (const char* k : {"dpp", "dqq"}) {
      if (!b.contains(k)) {
        throw ConfigError(join(path, k), "missing required table");
      }
    }
    cfg.dpp_table = pair_table(b.at("dpp"), join(path, "dpp"));
    cfg.dqq_table = pair_table(b.at("dqq"), join(path, "dqq"));
    cfg.dpq_table = b.contains("dpq") ? pair_table(b.at("dpq"), join(path, "dpq"))
                                      : std::vector<std::pair<double, double>>{{0.0, 0.0}};
  } else {
    throw ConfigError(join(path, "kind"), "must be one of thermal, constant, table (got '" + kind + "')");
  }
  cfg.lambda = number_at(b, path, "lambda");
  if (cfg.lambda < 0.0) {
    throw ConfigError(join(path, "lambda"), "must be >= 0");
  }
  if (cfg.kind == Bath::Kind::thermal && cfg.temperature < 0.0) {
    throw ConfigError(join(path, "temperature"), "must be >= 0");
  }
  // Constructing the bath revalidates every numeric constraint.
  rethrow_as_config(path, [&] { return cfg.build(omega); });
  return cfg;
}

Mode parse_mode(const std::string& s, const std::string& key) {
  if (s == "spectrum") return Mode::spectrum;
  if (s == "evolve") return Mode::evolve;
  if (s == "evolve-populations") return Mode::evolve_populations;
  if (s == "steady") return Mode::steady;
  if (s == "partition") return Mode::partition;
  if (s == "validate") return Mode::validate;
  throw ConfigError(key, "must be one of spectrum, evolve, evolve-populations, steady, partition, validate");
}

json matrix_to_pairs(const Matrix& m) {
  json arr = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      arr.push_back(json::array({m(r, c).real(), m(r, c).imag()}));
    }
  }
  return arr;
}

Matrix load_matrix_file(const std::filesystem::path& path, int expected_dim) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("run.initial_state.path", "cannot open '" + path.string() + "'");
  }
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("run.initial_state.path", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("dim") || !doc.contains("entries")) {
    throw ConfigError("run.initial_state.path", "matrix file needs 'dim' and 'entries'");
  }
  const int d = doc.at("dim").get<int>();
  const auto& e = doc.at("entries");
  if (d != expected_dim) {
    throw ConfigError("run.initial_state.path", "matrix dimension " + std::to_string(d) +
                                                    " does not match n_max + 1 = " +
                                                    std::to_string(expected_dim));
  }
  if (!e.is_array() || e.size() != static_cast<std::size_t>(d) * static_cast<std::size_t>(d)) {
    throw ConfigError("run.initial_state.path", "entries must hold dim*dim [re, im] pairs");
  }
  Matrix m(d, d);
  for (int r = 0; r < d; ++r) {
    for (int c = 0; c < d; ++c) {
      const auto& pair = e[static_cast<std::size_t>(r * d + c)];
      if (!pair.is_array() || pair.size() != 2) {
        throw ConfigError("run.initial_state.path", "entries must be [re, im] pairs");
      }
      m(r, c) = Complex(pair[0].get<double>(), pair[1].get<double>());
    }
  }
  return m;
}

std::string csv_table(const std::vector<std::string>& header,
                      const std::vector<std::vector<double>>& columns,
                      bool first_column_integer = false) {
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) {
    out += (i ? "," : "") + header[i];
  }
  out += '\n';
  const std::size_t rows = columns.empty() ? 0 : columns.front().size();
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) {
        out += ',';
      }
      if (c == 0 && first_column_integer) {
        out += std::to_string(static_cast<long long>(columns[c][r]));
      } else {
        out += format_number(columns[c][r]);
      }
    }
    out += '\n';
  }
  return out;
}

std::string trajectory_csv(const Trajectory& t) {
  return csv_table({"t", "mean_N", "energy", "trace", "trace_leak", "min_eig"},
                   {t.times, t.mean_n, t.energy, t.trace, t.trace_leak, t.min_eig});
}

std::string populations_csv(std::span<const double> p) {
  std::vector<double> n(p.size());
  for (std::size_t i = 0; i < p.size(); ++i) {
    n[i] = static_cast<double>(i);
  }
  return csv_table({"n", "P"}, {n, {p.begin(), p.end()}}, true);
}

json work_json(const StepStats& s) {
  return json{{"steps", s.steps}, {"rejected_steps", s.rejected}, {"rhs_evaluations", s.rhs_evaluations}};
}

json trajectory_summary(const Trajectory& t) {
  json r;
  r["samples"] = t.size();
  if (t.size() > 0) {
    r["final_time"] = t.times.back();
    r["final_mean_N"] = t.mean_n.back();
    r["final_energy"] = t.energy.back();
    r["final_trace"] = t.trace.back();
    r["max_abs_trace_leak"] = std::abs(*std::max_element(
        t.trace_leak.begin(), t.trace_leak.end(),
        [](double a, double b) { return std::abs(a) < std::abs(b); }));
    r["min_eigenvalue"] = *std::min_element(t.min_eig.begin(), t.min_eig.end());
  }
  return r;
}

json equilibrium_json(const EquilibriumReport& e) {
  json r;
  r["energy_numeric"] = e.energy_numeric;
  r["energy_smalltau"] = e.energy_smalltau ? json(*e.energy_smalltau) : json(nullptr);
  r["difference"] = e.energy_smalltau ? json(e.energy_numeric - *e.energy_smalltau) : json(nullptr);
  r["c_coefficient"] = e.c_coefficient;
  r["beta"] = std::isfinite(e.beta) ? json(e.beta) : json(nullptr);
  r["n_max_used"] = e.n_max_used;
  r["tail_mass"] = e.tail_mass;
  return r;
}

json partition_json(const PartitionResult& z) {
  return json{{"value", z.value},
              {"log_value", z.log_value},
              {"terms_used", z.terms_used},
              {"tail_bound", z.tail_bound}};
}

struct PendingFile {
  std::string name;
  std::string contents;
};

}  // namespace

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::spectrum:
      return "spectrum";
    case Mode::evolve:
      return "evolve";
    case Mode::evolve_populations:
      return "evolve-populations";
    case Mode::steady:
      return "steady";
    case Mode::partition:
      return "partition";
    case Mode::validate:
      return "validate";
  }
  return "unknown";
}

std::string format_number(double value) {
  if (std::isnan(value)) {
    return "nan";
  }
  if (std::isinf(value)) {
    return value > 0 ? "inf" : "-inf";
  }
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

Bath BathConfig::build(double omega) const {
  switch (kind) {
    case Bath::Kind::thermal:
      return Bath::thermal(lambda, temperature, omega);
    case Bath::Kind::constant:
      return Bath::constant(lambda, omega, dpp, dqq, dpq);
    case Bath::Kind::table:
      return Bath::table(lambda, omega, PiecewiseLinear(dpp_table), PiecewiseLinear(dqq_table),
                         PiecewiseLinear(dpq_table));
    case Bath::Kind::custom:
      break;
  }
  throw std::invalid_argument("bath kind cannot be built from a configuration");
}

ScenarioConfig parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ConfigError("<document>", std::string("invalid JSON: ") + e.what());
  }
  if (!root.is_object()) {
    throw ConfigError("<document>", "top level must be an object");
  }
  reject_unknown(root, "", {"oscillator", "bath", "run"});

  ScenarioConfig cfg;
  const json& osc = require_object(root, "", "oscillator");
  reject_unknown(osc, "oscillator", {"omega", "deformation", "n_max"});
  cfg.omega = number_or(osc, "oscillator", "omega", 1.0);
  if (!(cfg.omega > 0.0)) {
    throw ConfigError("oscillator.omega", "must be > 0");
  }
  cfg.deformation = osc.contains("deformation")
                        ? parse_deformation(require_object(osc, "oscillator", "deformation"),
                                            "oscillator.deformation")
                        : Deformation::identity();
  if (!osc.contains("n_max")) {
    throw ConfigError("oscillator.n_max", "missing (integer >= 2 or \"auto\")");
  }
  if (const auto& nm = osc.at("n_max"); nm.is_string()) {
    if (nm.get<std::string>() != "auto") {
      throw ConfigError("oscillator.n_max", "must be an integer >= 2 or \"auto\"");
    }
  } else {
    cfg.n_max = integer_at(osc, "oscillator", "n_max");
    rethrow_as_config("oscillator.n_max",
                      [&] { return Oscillator(cfg.omega, cfg.deformation, *cfg.n_max); });
  }

  cfg.bath = parse_bath(require_object(root, "", "bath"), "bath", cfg.omega);

  const json& run = require_object(root, "", "run");
  reject_unknown(run, "run", {"mode", "initial_state", "integrator", "truncation_policy", "snapshots",
                              "n_terms", "tolerance"});
  cfg.mode = parse_mode(string_at(run, "run", "mode"), "run.mode");
  const bool evolving = cfg.mode == Mode::evolve || cfg.mode == Mode::evolve_populations;

  if (!cfg.n_max && evolving) {
    throw ConfigError("oscillator.n_max", "\"auto\" is only supported for spectrum-free modes "
                                          "steady, partition and validate");
  }
  if (!cfg.n_max && cfg.mode == Mode::spectrum) {
    throw ConfigError("oscillator.n_max", "spectrum mode needs an explicit n_max");
  }

  cfg.truncation_policy = cfg.mode == Mode::evolve ? TruncationPolicy::drop : TruncationPolicy::reflecting;
  if (run.contains("truncation_policy")) {
    const std::string p = string_at(run, "run", "truncation_policy");
    if (p == "drop") {
      cfg.truncation_policy = TruncationPolicy::drop;
    } else if (p == "reflecting") {
      cfg.truncation_policy = TruncationPolicy::reflecting;
    } else {
      throw ConfigError("run.truncation_policy", "must be 'drop' or 'reflecting'");
    }
    if (cfg.mode == Mode::evolve && cfg.truncation_policy == TruncationPolicy::reflecting) {
      throw ConfigError("run.truncation_policy",
                        "'reflecting' applies to population evolution only; the density "
                        "equation always drops out-of-range terms");
    }
  }

  if (run.contains("snapshots")) {
    if (!run.at("snapshots").is_boolean()) {
      throw ConfigError("run.snapshots", "must be a boolean");
    }
    cfg.snapshots = run.at("snapshots").get<bool>();
  }
  if (run.contains("n_terms")) {
    cfg.n_terms = integer_at(run, "run", "n_terms");
    if (*cfg.n_terms < 2) {
      throw ConfigError("run.n_terms", "must be >= 2");
    }
  }
  cfg.tolerance = number_or(run, "run", "tolerance", 1e-12);
  if (!(cfg.tolerance > 0.0)) {
    throw ConfigError("run.tolerance", "must be > 0");
  }

  if (run.contains("integrator")) {
    const json& integ = require_object(run, "run", "integrator");
    reject_unknown(integ, "run.integrator", {"method", "dt", "rtol", "atol", "t_final", "samples"});
    auto& ic = cfg.integrator;
    if (integ.contains("method")) {
      const std::string m = string_at(integ, "run.integrator", "method");
      if (m == "rk4-fixed") {
        ic.method = Method::rk4_fixed;
      } else if (m == "rk45-adaptive") {
        ic.method = Method::rk45_adaptive;
      } else {
        throw ConfigError("run.integrator.method", "must be 'rk4-fixed' or 'rk45-adaptive'");
      }
    }
    ic.dt = number_or(integ, "run.integrator", "dt", ic.dt);
    ic.rtol = number_or(integ, "run.integrator", "rtol", ic.rtol);
    ic.atol = number_or(integ, "run.integrator", "atol", ic.atol);
    ic.t_final = number_or(integ, "run.integrator", "t_final", ic.t_final);
    if (integ.contains("samples")) {
      const auto& s = integ.at("samples");
      if (s.is_number_integer()) {
        const int count = s.get<int>();
        if (count < 2) {
          throw ConfigError("run.integrator.samples", "sample count must be >= 2");
        }
        ic.sample_times = linspace(0.0, ic.t_final, count);
      } else {
        ic.sample_times = number_array(s, "run.integrator.samples");
      }
    }
    if (ic.sample_times.empty()) {
      ic.sample_times = ic.resolved_samples();
    }
    rethrow_as_config("run.integrator", [&] {
      ic.validate();
      return 0;
    });
  } else {
    cfg.integrator.sample_times = cfg.integrator.resolved_samples();
  }

  if (run.contains("initial_state")) {
    const json& init = require_object(run, "run", "initial_state");
    const std::string path = "run.initial_state";
    const std::string kind = string_at(init, path, "kind");
    auto& is = cfg.initial_state;
    if (kind == "fock") {
      reject_unknown(init, path, {"kind", "n"});
      is.kind = InitialStateConfig::Kind::fock;
      if (!init.contains("n")) {
        throw ConfigError(join(path, "n"), "missing required integer");
      }
      is.n = integer_at(init, path, "n");
      if (is.n < 0 || (cfg.n_max && is.n > *cfg.n_max)) {
        throw ConfigError(join(path, "n"), "must lie in 0..n_max");
      }
    } else if (kind == "diagonal-table") {
      reject_unknown(init, path, {"kind", "p"});
      is.kind = InitialStateConfig::Kind::diagonal_table;
      if (!init.contains("p")) {
        throw ConfigError(join(path, "p"), "missing required array");
      }
      is.populations = number_array(init.at("p"), join(path, "p"));
      if (cfg.n_max && static_cast<int>(is.populations.size()) != *cfg.n_max + 1) {
        throw ConfigError(join(path, "p"), "must have n_max + 1 entries");
      }
      rethrow_as_config(join(path, "p"), [&] { return PopulationDist::from_values(is.populations, 1e-9); });
    } else if (kind == "matrix-file") {
      reject_unknown(init, path, {"kind", "path"});
      is.kind = InitialStateConfig::Kind::matrix_file;
      std::filesystem::path p = string_at(init, path, "path");
      if (p.is_relative()) {
        p = base_dir / p;
      }
      is.matrix_path = std::filesystem::absolute(p).lexically_normal();
      if (!std::filesystem::exists(is.matrix_path)) {
        throw ConfigError(join(path, "path"), "file '" + is.matrix_path.string() + "' does not exist");
      }
      if (cfg.mode == Mode::evolve_populations) {
        throw ConfigError(join(path, "kind"), "population evolution needs a fock or diagonal-table state");
      }
    } else {
      throw ConfigError(join(path, "kind"), "must be one of fock, diagonal-table, matrix-file");
    }
  } else if (evolving) {
    throw ConfigError("run.initial_state", "required for evolution modes");
  }
  return cfg;
}

ScenarioConfig load_scenario(const std::filesystem::path& config_path) {
  std::ifstream in(config_path);
  if (!in) {
    throw ConfigError("<document>", "cannot read config file '" + config_path.string() + "'");
  }
  std::stringstream buf;
  buf << in.rdbuf();
  const auto base = std::filesystem::absolute(config_path).parent_path();
  return parse_scenario(buf.str(), base);
}

namespace {

json echo(const ScenarioConfig& cfg) {
  json def;
  def["kind"] = to_string(cfg.deformation.kind());
  if (cfg.deformation.kind() == Deformation::Kind::q) {
    def["tau"] = cfg.deformation.tau();
  } else if (cfg.deformation.kind() == Deformation::Kind::custom) {
    const auto t = cfg.deformation.phi_table();
    def["phi_table"] = std::vector<double>(t.begin(), t.end());
  }
  json osc;
  osc["omega"] = cfg.omega;
  osc["deformation"] = def;
  osc["n_max"] = cfg.n_max ? json(*cfg.n_max) : json("auto");

  json bath;
  const auto& b = cfg.bath;
  auto table_json = [](const std::vector<std::pair<double, double>>& t) {
    json arr = json::array();
    for (const auto& [x, v] : t) {
      arr.push_back(json::array({x, v}));
    }
    return arr;
  };
  switch (b.kind) {
    case Bath::Kind::thermal:
      bath = json{{"kind", "thermal"}, {"lambda", b.lambda}, {"temperature", b.temperature}};
      break;
    case Bath::Kind::constant:
      bath = json{{"kind", "constant"}, {"lambda", b.lambda}, {"dpp", b.dpp}, {"dqq", b.dqq}, {"dpq", b.dpq}};
      break;
    case Bath::Kind::table:
    case Bath::Kind::custom:
      bath = json{{"kind", "table"},
                  {"lambda", b.lambda},
                  {"dpp", table_json(b.dpp_table)},
                  {"dqq", table_json(b.dqq_table)},
                  {"dpq", table_json(b.dpq_table)}};
      break;
  }

  json run;
  run["mode"] = to_string(cfg.mode);
  const auto& is = cfg.initial_state;
  if (cfg.mode == Mode::evolve || cfg.mode == Mode::evolve_populations) {
    switch (is.kind) {
      case InitialStateConfig::Kind::fock:
        run["initial_state"] = json{{"kind", "fock"}, {"n", is.n}};
        break;
      case InitialStateConfig::Kind::diagonal_table:
        run["initial_state"] = json{{"kind", "diagonal-table"}, {"p", is.populations}};
        break;
      case InitialStateConfig::Kind::matrix_file:
        run["initial_state"] = json{{"kind", "matrix-file"}, {"path", is.matrix_path.string()}};
        break;
    }
  }
  const auto& ic = cfg.integrator;
  if (cfg.mode == Mode::evolve || cfg.mode == Mode::evolve_populations) {
    run["integrator"] = json{{"method", to_string(ic.method)},
                           {"dt", ic.dt},
                           {"rtol", ic.rtol},
                           {"atol", ic.atol},
                           {"t_final", ic.t_final},
                           {"samples", ic.sample_times}};
  }
  run["truncation_policy"] = to_string(cfg.truncation_policy);
  run["snapshots"] = cfg.snapshots;
  if (cfg.n_terms) {
    run["n_terms"] = *cfg.n_terms;
  }
  run["tolerance"] = cfg.tolerance;
  return json{{"oscillator", osc}, {"bath", bath}, {"run", run}};
}

}  // namespace

std::string ScenarioConfig::echo_json() const { return echo(*this).dump(2); }

RunOutcome run_scenario(const ScenarioConfig& config, const RunOptions& options) {
  const auto started = std::chrono::steady_clock::now();
  RunOutcome outcome;
  std::vector<PendingFile> files;

  json summary;
  summary["tool"] = "dqo";
  summary["version"] = kVersion;
  summary["mode"] = to_string(config.mode);
  summary["status"] = "ok";
  summary["config"] = echo(config);
  json results = json::object();

  auto fail = [&](int code, const std::string& status, const std::string& message) {
    outcome.exit_code = code;
    outcome.message = message;
    summary["status"] = status;
    summary["message"] = message;
  };

  try {
    const Bath bath = config.bath.build(config.omega);
    int n_max = 0;
    std::optional<TruncationChoice> auto_choice;
    if (config.n_max) {
      n_max = *config.n_max;
    } else if (config.mode == Mode::partition && bath.is_thermal() && *bath.temperature() > 0.0) {
      auto_choice = choose_n_max(config.omega, config.deformation, *bath.temperature(), config.tolerance);
      n_max = auto_choice->n_max;
    } else {
      auto_choice = choose_n_max(config.deformation, bath, config.tolerance);
      n_max = auto_choice->n_max;
      if (config.mode == Mode::validate) {
        n_max = std::max(n_max, 6);
      }
    }
    if (auto_choice) {
      results["auto_truncation"] = json{{"n_max", n_max},
                                        {"tail_mass", auto_choice->tail_mass},
                                        {"converged", auto_choice->converged}};
    }
    const Oscillator model(config.omega, config.deformation, n_max);

    const auto report = validate_bath(bath, model);
    json issues = json::array();
    for (const auto& i : report.issues) {
      issues.push_back(json{{"n", i.n}, {"check", i.check}, {"value", i.value}});
    }
    summary["bath_validation"] = json{{"ok", report.ok()}, {"levels_checked", report.levels_checked},
                                      {"issues", issues}};
    const bool strict_block = options.strict && !report.ok() && config.mode != Mode::validate &&
                              config.mode != Mode::spectrum;
    if (strict_block) {
      fail(2, "validation_failed", "bath failed positivity checks (strict mode)");
    } else {
      switch (config.mode) {
        case Mode::spectrum: {
          std::vector<double> n(static_cast<std::size_t>(model.dim()));
          std::vector<double> shift(n.size());
          for (int k = 0; k <= model.n_max(); ++k) {
            n[static_cast<std::size_t>(k)] = k;
            shift[static_cast<std::size_t>(k)] = model.omega_shift(k);
          }
          const auto e = model.spectrum();
          files.push_back({"spectrum.csv", csv_table({"n", "E", "omega_shift"}, {n, e, shift}, true)});
          results["n_max"] = model.n_max();
          results["ground_energy"] = e.front();
          results["top_energy"] = e.back();
          break;
        }
        case Mode::evolve: {
          Matrix rho0;
          const auto& is = config.initial_state;
          switch (is.kind) {
            case InitialStateConfig::Kind::fock:
              rho0 = DensityMatrix::fock(model.dim(), is.n).matrix();
              break;
            case InitialStateConfig::Kind::diagonal_table:
              rho0 = DensityMatrix::diagonal(PopulationDist::normalized(is.populations).values()).matrix();
              break;
            case InitialStateConfig::Kind::matrix_file:
              rho0 = load_matrix_file(is.matrix_path, model.dim());
              break;
          }
          const auto state = rethrow_as_config("run.initial_state",
                                               [&] { return DensityMatrix::from_matrix(rho0, 1e-10); });
          IntegratorConfig ic = config.integrator;
          ic.keep_snapshots = config.snapshots;
          ic.threads = options.threads;
          const auto traj = evolve_density(model, bath, state, ic);
          files.push_back({"trajectory.csv", trajectory_csv(traj)});
          if (config.snapshots) {
            json states = json::array();
            for (const auto& s : traj.density_snapshots) {
              states.push_back(matrix_to_pairs(s));
            }
            files.push_back({"snapshots.json",
                             json{{"dim", model.dim()}, {"times", traj.times}, {"states", states}}.dump() + "\n"});
          }
          results["trajectory"] = trajectory_summary(traj);
          summary["work"] = work_json(traj.stats);
          break;
        }
        case Mode::evolve_populations: {
          const auto& is = config.initial_state;
          const auto p0 = is.kind == InitialStateConfig::Kind::fock
                              ? PopulationDist::delta(model.dim(), is.n)
                              : PopulationDist::normalized(is.populations);
          IntegratorConfig ic = config.integrator;
          ic.keep_snapshots = true;
          const auto traj = evolve_populations(model, bath, p0, ic, config.truncation_policy);
          files.push_back({"trajectory.csv", trajectory_csv(traj)});
          files.push_back({"populations.csv", populations_csv(traj.population_snapshots.back())});
          if (config.snapshots) {
            json states = json::array();
            for (const auto& p : traj.population_snapshots) {
              states.push_back(matrix_to_pairs(DensityMatrix::diagonal(PopulationDist::normalized(p).values()).matrix()));
            }
            files.push_back({"snapshots.json",
                             json{{"dim", model.dim()}, {"times", traj.times}, {"states", states}}.dump() + "\n"});
          }
          results["trajectory"] = trajectory_summary(traj);
          results["truncation_policy"] = to_string(config.truncation_policy);
          summary["work"] = work_json(traj.stats);
          break;
        }
        case Mode::steady: {
          const auto p = steady_populations(model, bath);
          files.push_back({"populations.csv", populations_csv(p.values())});
          const auto gen = build_population_generator(model, bath, TruncationPolicy::reflecting);
          const auto lp = gen.apply(p.values());
          double stationarity = 0.0;
          for (double v : lp) {
            stationarity = std::max(stationarity, std::abs(v));
          }
          results["n_max"] = model.n_max();
          results["tail_mass"] = p[model.n_max()];
          results["detailed_balance_residual"] = detailed_balance_residual(model, bath, p);
          results["stationarity_residual"] = stationarity;
          results["mean_N"] = mean_n(p.values());
          results["energy"] = energy(model, p.values());
          if (bath.is_thermal() && *bath.temperature() > 0.0) {
            const double t = *bath.temperature();
            const auto boltz = thermal_boltzmann(model, t);
            double dev = 0.0;
            for (int n = 0; n <= model.n_max(); ++n) {
              dev = std::max(dev, std::abs(boltz[n] - p[n]));
            }
            results["boltzmann_max_deviation"] = dev;
            results["partition_function"] =
                partition_json(partition_function_to_tolerance(model, t, config.tolerance));
            results["equilibrium"] = equilibrium_json(equilibrium_energy(model, t));
          }
          break;
        }
        case Mode::partition: {
          if (!bath.is_thermal()) {
            throw ConfigError("bath.kind", "partition mode needs a thermal bath (for its temperature)");
          }
          const double t = *bath.temperature();
          if (!(t > 0.0)) {
            throw ConfigError("bath.temperature", "partition mode needs temperature > 0");
          }
          const auto z = config.n_terms ? partition_function(model, t, *config.n_terms)
                                        : partition_function_to_tolerance(model, t, config.tolerance);
          results["partition_function"] = partition_json(z);
          if (config.deformation.kind() == Deformation::Kind::identity) {
            const double exact = 1.0 / (2.0 * std::sinh(config.omega / (2.0 * t)));
            results["undeformed_closed_form"] = exact;
            results["closed_form_abs_difference"] = std::abs(z.value - exact);
          }
          results["equilibrium"] = equilibrium_json(equilibrium_energy(model, t));
          break;
        }
        case Mode::validate: {
          const auto checks = run_invariant_checks(model, bath);
          json arr = json::array();
          bool all = true;
          for (const auto& c : checks) {
            arr.push_back(json{{"name", c.name},
                               {"passed", c.passed},
                               {"skipped", c.skipped},
                               {"value", c.value},
                               {"threshold", c.threshold},
                               {"note", c.note}});
            all = all && c.passed;
          }
          results["n_max"] = model.n_max();
          results["checks"] = arr;
          results["all_passed"] = all;
          if (!all) {
            fail(2, "validation_failed", "one or more invariant checks failed");
          }
          break;
        }
      }
    }
  } catch (const ConfigError& e) {
    fail(2, "validation_failed", e.what());
  } catch (const std::domain_error& e) {
    fail(2, "validation_failed", e.what());
  } catch (const std::exception& e) {
    fail(1, "error", e.what());
  }

  summary["results"] = results;
  json names = json::array();
  for (const auto& f : files) {
    names.push_back(f.name);
  }
  names.push_back("summary.json");
  summary["files"] = names;
  if (options.timings) {
    const auto elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - started);
    summary["timings"] = json{{"wall_seconds", elapsed.count()}};
  }
  outcome.summary_json = summary.dump(2) + "\n";

  if (options.out_dir) {
    files.push_back({"summary.json", outcome.summary_json});
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    for (const auto& f : files) {
      const auto path = *options.out_dir / f.name;
      std::ofstream out(path, std::ios::binary | std::ios::trunc);
      out << f.contents;
      out.close();
      if (!out) {
        outcome.exit_code = 1;
        outcome.message = "cannot write '" + path.string() + "'";
        return outcome;
      }
      outcome.files.push_back(path);
    }
  }
  return outcome;
}

RunOutcome run_scenario_file(const std::filesystem::path& config_path, const RunOptions& options,
                             std::optional<Mode> mode_override) {
  ScenarioConfig cfg;
  try {
    cfg = load_scenario(config_path);
  } catch (const ConfigError& e) {
    RunOutcome out;
    out.exit_code = 2;
    out.message = e.what();
    json summary{{"tool", "dqo"},        {"version", kVersion}, {"status", "validation_failed"},
                 {"message", e.what()}, {"key", e.key()},      {"files", json::array({"summary.json"})}};
    out.summary_json = summary.dump(2) + "\n";
    if (options.out_dir) {
      std::error_code ec;
      std::filesystem::create_directories(*options.out_dir, ec);
      std::ofstream f(*options.out_dir / "summary.json", std::ios::binary | std::ios::trunc);
      f << out.summary_json;
      if (f) {
        out.files.push_back(*options.out_dir / "summary.json");
      }
    }
    return out;
  }
  if (mode_override) {
    cfg.mode = *mode_override;
  }
  return run_scenario(cfg, options);
}

}  // namespace dqo
