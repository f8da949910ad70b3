#include "cli.hpp"

#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "gcid/config.hpp"
#include "gcid/errors.hpp"
#include "gcid/onoff.hpp"
#include "gcid/stats.hpp"
#include "verify.hpp"

namespace gcid::cli {
namespace {

using nlohmann::json;
namespace cfg = gcid::config;

class UsageError : public Error {
 public:
  using Error::Error;
};

// Flag values. Each one, when given, replaces the matching config field.
struct Flags {
  std::string config_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::optional<unsigned> threads;
  std::optional<std::size_t> n;
  std::string out;
  std::string csv;
  std::string report;
  bool force = false;
  std::vector<double> grid;
  std::vector<double> theta;
  std::vector<double> theta_axis;
  std::vector<std::size_t> n_list;
  std::vector<std::string> sets;
};

// Applies "a.b.c=<json>" to the config. Values that do not parse as JSON are
// taken as strings.
void apply_set(json& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0)
    throw UsageError("--set expects key=value, got '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  json value = json::parse(raw, nullptr, false);
  if (value.is_discarded()) value = raw;
  json* node = &config;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> path;
  while (std::getline(parts, part, '.')) path.push_back(part);
  for (std::size_t k = 0; k + 1 < path.size(); ++k) {
    if (!node->is_object()) throw UsageError("--set " + key + ": '" + path[k] + "' is not an object");
    node = &(*node)[path[k]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw UsageError("--set " + key + ": parent is not an object");
  (*node)[path.back()] = std::move(value);
}

json merged_config(const Flags& f) {
  json c = f.config_file.empty() ? json::object() : cfg::load_file(f.config_file);
  if (!c.is_object()) throw ConfigError(f.config_file + ": top level must be an object");
  for (const auto& s : f.sets) apply_set(c, s);
  if (f.seed) c["seed"] = *f.seed;
  if (f.reps) c["reps"] = *f.reps;
  if (f.n) c["n"] = *f.n;
  if (!f.grid.empty()) c["grid"] = f.grid;
  if (!f.theta.empty()) c["theta"] = f.theta;
  if (!f.theta_axis.empty()) c["theta_grid"] = {{"axis", f.theta_axis}};
  if (!f.n_list.empty()) c["n_list"] = f.n_list;
  return c;
}

std::uint64_t seed_of(const json& c) {
  if (!c.contains("seed")) return 1;
  const json& s = c["seed"];
  if (!s.is_number_unsigned() && !(s.is_number_integer() && s.get<std::int64_t>() >= 0))
    throw ConfigError("seed: expected an unsigned 64-bit integer");
  return s.get<std::uint64_t>();
}

std::size_t count_of(const json& c, const std::string& key, std::size_t fallback) {
  if (!c.contains(key)) return fallback;
  const json& v = c[key];
  if (!v.is_number_integer() || v.get<std::int64_t>() < 1)
    throw ConfigError(key + ": expected an integer >= 1");
  return v.get<std::size_t>();
}

std::vector<std::size_t> size_list(const json& c, const std::string& key, std::vector<std::size_t> fallback) {
  if (!c.contains(key)) return fallback;
  const auto values = cfg::number_array(c[key], key);
  std::vector<std::size_t> out;
  for (std::size_t k = 0; k < values.size(); ++k) {
    if (values[k] < 1 || values[k] != std::floor(values[k]))
      throw ConfigError(key + "[" + std::to_string(k) + "]: expected a positive integer");
    out.push_back(static_cast<std::size_t>(values[k]));
  }
  if (out.empty()) throw ConfigError(key + ": must not be empty");
  return out;
}

std::vector<double> doubles_or(const json& c, const std::string& key, std::vector<double> fallback) {
  return c.contains(key) ? cfg::number_array(c[key], key) : fallback;
}

TimeGrid grid_of(const json& c, std::vector<double> fallback = {}) {
  if (!c.contains("grid")) {
    if (fallback.empty()) throw ConfigError("grid: required field is missing");
    return TimeGrid(std::move(fallback));
  }
  return cfg::parse_grid(c["grid"], "grid");
}

const json* optional_field(const json& c, const std::string& key) {
  auto it = c.find(key);
  return it == c.end() ? nullptr : &*it;
}

// Outputs are checked before any work starts so a long run never ends in a
// refused write.
void guard_output(const std::string& path, bool force) {
  if (!path.empty() && !force && std::filesystem::exists(path))
    throw UsageError("refusing to overwrite " + path + " (pass --force)");
}

void emit(const std::string& path, const std::string& text, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("cannot open " + path + " for writing");
  f << text;
  if (!f) throw Error("write to " + path + " failed");
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

void append_double(std::string& s, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  s += buf;
}

std::string csv_header(const std::string& prefix, std::size_t n) {
  std::string s;
  for (std::size_t k = 0; k < n; ++k) s += (k ? "," : "") + prefix + std::to_string(k + 1);
  return s + "\n";
}

std::string samples_csv(const SampleMatrix& m, bool integral) {
  std::string s = csv_header("x", m.cols());
  s.reserve(s.size() + m.rows() * m.cols() * 12);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      if (c) s += ',';
      if (integral)
        s += std::to_string(static_cast<std::int64_t>(m(r, c)));
      else
        append_double(s, m(r, c));
    }
    s += '\n';
  }
  return s;
}

json complex_json(Complex z) { return {{"re", z.real()}, {"im", z.imag()}}; }

GcidProcess process_of(const json& c, std::size_t n) {
  LevyExponent law = cfg::parse_law(cfg::require(c, "law", ""), "law");
  if (!c.contains("H")) {
    if (n != 1) throw ConfigError("H: required field is missing");
    return {std::move(law), CorrelationStructure::exponential(1.0)};
  }
  return {std::move(law), cfg::parse_structure(c["H"], "H")};
}

int cmd_cf_eval(const Flags& f, std::ostream& out) {
  const json c = merged_config(f);
  const TimeGrid grid = grid_of(c, {0.0});
  const GcidProcess p = process_of(c, grid.size());
  guard_output(f.out, f.force);
  json result{{"law", p.law.kind_name()}, {"H", p.structure.kind_name()}, {"grid", grid.epochs()}};
  if (c.contains("theta")) {
    const auto theta = cfg::parse_theta(c["theta"], grid.size());
    const Complex psi = log_cf(p, grid, theta);
    result["theta"] = theta;
    result["log_cf"] = complex_json(psi);
    result["cf"] = complex_json(std::exp(psi));
  }
  if (c.contains("theta_grid") || !c.contains("theta")) {
    const ThetaGrid tg = cfg::parse_theta_grid(optional_field(c, "theta_grid"), grid.size());
    json values = json::array();
    for (std::size_t k = 0; k < tg.size(); ++k) {
      const auto th = tg.point(k);
      const Complex z = std::exp(log_cf(p, grid, th));
      values.push_back({{"theta", th}, {"re", z.real()}, {"im", z.imag()}});
    }
    result["values"] = values;
  }
  emit(f.out, dump(result), out);
  return kExitOk;
}

int cmd_sample(const Flags& f, std::ostream& out) {
  const json c = merged_config(f);
  const TimeGrid grid = grid_of(c);
  const GcidProcess p = process_of(c, grid.size());
  const std::size_t reps = count_of(c, "reps", 1000);
  guard_output(f.out, f.force);
  guard_output(f.report, f.force);
  const WeightMatrix a = weights(p.structure, grid);
  const SampleMatrix m = generate_samples(reps, grid.size(), seed_of(c), f.threads.value_or(0),
                                          [&](Rng& rng, std::span<double> row) { sample_fidi(p.law, a, rng, row); });
  if (!f.report.empty()) {
    const ThetaGrid tg = cfg::parse_theta_grid(optional_field(c, "theta_grid"), grid.size());
    const EmpiricalCF emp = empirical_cf(m, tg, f.threads.value_or(0));
    const auto exact = analytic_cf(tg, [&](std::span<const double> th) { return log_cf(p.law, a, th); });
    emit(f.report, dump(cf_report(emp, exact)), out);
  }
  emit(f.out, samples_csv(m, false), out);
  return kExitOk;
}

int cmd_simulate_coverage(const Flags& f, std::ostream& out) {
  const json c = merged_config(f);
  const TimeGrid grid = grid_of(c);
  const CoverageModel model = cfg::parse_coverage(cfg::require(c, "model", ""), "model");
  const std::size_t reps = count_of(c, "reps", 1000);
  guard_output(f.out, f.force);
  simulation_window(model);
  const SampleMatrix m = generate_samples(reps, grid.size(), seed_of(c), f.threads.value_or(0),
                                          [&](Rng& rng, std::span<double> row) { simulate_into(model, grid, rng, row); });
  emit(f.out, samples_csv(m, !model.marks.has_value()), out);
  return kExitOk;
}

int cmd_simulate_onoff(const Flags& f, std::ostream& out) {
  const json c = merged_config(f);
  const OnOffArraySpec spec = cfg::parse_array(cfg::require(c, "array", ""), "array");
  if (!c.contains("n")) throw ConfigError("n: required field is missing");
  const std::size_t n = count_of(c, "n", 1);
  if (!spec.has_row(n)) throw ConfigError("n: the array has no row " + std::to_string(n));
  const TimeGrid grid = grid_of(c, {0.0, 1.0});
  const std::size_t reps = count_of(c, "reps", 1000);
  guard_output(f.out, f.force);
  const SuperpositionSampler sampler(spec.row(n), grid);
  const SampleMatrix m = generate_samples(reps, grid.size(), seed_of(c), f.threads.value_or(0),
                                          [&](Rng& rng, std::span<double> row) { sampler.sample(rng, row); });
  emit(f.out, samples_csv(m, false), out);
  return kExitOk;
}

LevyMeasure limit_measure_of(const json& c, const OnOffArraySpec& spec) {
  if (c.contains("measure")) return cfg::parse_measure(c["measure"], "measure");
  if (spec.is_power_example()) return spec.power_limit_measure();
  throw ConfigError("measure: required unless the array is the power example");
}

int cmd_check_array(const Flags& f, std::ostream& out, std::ostream& err) {
  const json c = merged_config(f);
  const OnOffArraySpec spec = cfg::parse_array(cfg::require(c, "array", ""), "array");
  const LevyMeasure nu = limit_measure_of(c, spec);
  AssumptionOptions opt;
  opt.n_list = size_list(c, "n_list", opt.n_list);
  opt.x_probe = doubles_or(c, "x_probe", opt.x_probe);
  opt.eps_list = doubles_or(c, "eps_list", opt.eps_list);
  opt.powers = doubles_or(c, "powers", opt.powers);
  opt.relative_tolerance = cfg::number_or(c, "relative_tolerance", opt.relative_tolerance, "");
  opt.c2_tolerance = cfg::number_or(c, "c2_tolerance", opt.c2_tolerance, "");
  opt.cf_tolerance = cfg::number_or(c, "cf_tolerance", opt.cf_tolerance, "");
  if (c.contains("theta")) opt.theta_grid = cfg::number_array(c["theta"], "theta");
  for (std::size_t n : opt.n_list)
    if (!spec.has_row(n)) throw ConfigError("n_list: the array has no row " + std::to_string(n));
  guard_output(f.out, f.force);
  const AssumptionReport rep = check_assumptions(spec, nu, opt);
  for (const auto& chk : rep.checks)
    if (!chk.pass) err << "assumption not met: " << chk.name << "\n";
  emit(f.out, dump(rep.to_json()), out);
  return kExitOk;
}

int cmd_convergence(const Flags& f, std::ostream& out) {
  const json c = merged_config(f);
  const OnOffArraySpec spec = cfg::parse_array(cfg::require(c, "array", ""), "array");
  const LevyMeasure nu = limit_measure_of(c, spec);
  const TimeGrid grid = grid_of(c, {0.0, 1.0});
  const ThetaGrid tg = cfg::parse_theta_grid(optional_field(c, "theta_grid"), grid.size());
  const auto n_list = size_list(c, "n_list", {100, 1000, 10000});
  for (std::size_t n : n_list)
    if (!spec.has_row(n)) throw ConfigError("n_list: the array has no row " + std::to_string(n));
  ConvergenceOptions opt;
  opt.replications = count_of(c, "reps", opt.replications);
  opt.seed = seed_of(c);
  opt.threads = f.threads.value_or(0);
  opt.tolerance = cfg::number_or(c, "tolerance", opt.tolerance, "");
  opt.monotone_slack = cfg::number_or(c, "monotone_slack", opt.monotone_slack, "");
  guard_output(f.out, f.force);
  guard_output(f.csv, f.force);
  const ConvergenceReport rep = convergence_study(spec, nu, grid, tg, n_list, opt);
  if (!f.csv.empty()) {
    std::string s = "n,sup,l2,bias_sup,noise_sup,max_stderr\n";
    for (const auto& r : rep.rows) {
      s += std::to_string(r.n);
      for (double v : {r.sup, r.l2, r.bias_sup, r.noise_sup, r.max_stderr}) {
        s += ',';
        append_double(s, v);
      }
      s += '\n';
    }
    emit(f.csv, s, out);
  }
  emit(f.out, dump(rep.to_json()), out);
  return kExitOk;
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  const json c = merged_config(f);
  verify::Options opt;
  opt.seed = c.contains("seed") ? seed_of(c) : opt.seed;
  opt.cases = count_of(c, "cases", opt.cases);
  if (c.contains("reps")) opt.replications = count_of(c, "reps", opt.replications);
  opt.threads = f.threads.value_or(0);
  guard_output(f.out, f.force);
  const verify::Report rep = verify::run(opt);
  for (const auto& chk : rep.checks) {
    if (chk.pass) continue;
    err << (chk.gating ? "FAILED: " : "note: ") << chk.name << " " << chk.observed.dump() << "\n";
  }
  emit(f.out, dump(rep.to_json()), out);
  return rep.pass() ? kExitOk : kExitFailure;
}

void add_common(CLI::App* sub, Flags& f) {
  sub->add_option("--config", f.config_file, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--seed", f.seed, "64-bit seed");
  sub->add_option("--reps", f.reps, "number of replications N")->check(CLI::PositiveNumber);
  sub->add_option("--threads", f.threads, "worker threads (0 = all cores)");
  sub->add_option("--out", f.out, "output file (default: stdout)");
  sub->add_flag("--force", f.force, "overwrite existing outputs");
  sub->add_option("--set", f.sets, "override a config field, key.path=<json>");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Generalized coverage processes: evaluation, simulation and checks"};
  app.require_subcommand(1);
  Flags f;

  auto* cf = app.add_subcommand("cf-eval", "evaluate the joint characteristic function");
  add_common(cf, f);
  cf->add_option("--grid", f.grid, "observation epochs")->delimiter(',');
  cf->add_option("--theta", f.theta, "one theta per epoch")->delimiter(',');
  cf->add_option("--theta-axis", f.theta_axis, "theta values repeated on every coordinate")->delimiter(',');

  auto* sample = app.add_subcommand("sample", "exact fidi samples as CSV");
  add_common(sample, f);
  sample->add_option("--grid", f.grid, "observation epochs")->delimiter(',');
  sample->add_option("--theta-axis", f.theta_axis, "theta axis for --report")->delimiter(',');
  sample->add_option("--report", f.report, "also write an empirical CF report (JSON)");

  auto* cov = app.add_subcommand("simulate-coverage", "simulate M/GI/inf coverage counts");
  add_common(cov, f);
  cov->add_option("--grid", f.grid, "observation epochs")->delimiter(',');

  auto* onoff = app.add_subcommand("simulate-onoff", "simulate ON/OFF superposition row sums");
  add_common(onoff, f);
  onoff->add_option("--grid", f.grid, "observation epochs")->delimiter(',');
  onoff->add_option("--n", f.n, "array row")->check(CLI::PositiveNumber);

  auto* check = app.add_subcommand("check-array", "check the limit-theorem assumptions of an array");
  add_common(check, f);
  check->add_option("--n-list", f.n_list, "rows to inspect")->delimiter(',');
  check->add_option("--theta", f.theta, "theta grid for the CF checks")->delimiter(',');

  auto* conv = app.add_subcommand("convergence", "CF distance of array row sums to the limit");
  add_common(conv, f);
  conv->add_option("--grid", f.grid, "observation epochs")->delimiter(',');
  conv->add_option("--theta-axis", f.theta_axis, "theta values repeated on every coordinate")->delimiter(',');
  conv->add_option("--n-list", f.n_list, "rows to simulate")->delimiter(',');
  conv->add_option("--csv", f.csv, "plot-ready CSV table");

  auto* ver = app.add_subcommand("verify", "run the property suite");
  add_common(ver, f);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, e2;
    const int code = app.exit(e, o, e2);
    out << o.str();
    err << e2.str();
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*cf) return cmd_cf_eval(f, out);
    if (*sample) return cmd_sample(f, out);
    if (*cov) return cmd_simulate_coverage(f, out);
    if (*onoff) return cmd_simulate_onoff(f, out);
    if (*check) return cmd_check_array(f, out, err);
    if (*conv) return cmd_convergence(f, out);
    if (*ver) return cmd_verify(f, out, err);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const nlohmann::json::exception& e) {
    err << "config error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace gcid::cli
