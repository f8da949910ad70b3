#include "gcid/config.hpp"

#include <cmath>
#include <fstream>
#include <map>

#include "gcid/errors.hpp"

namespace gcid::config {
namespace {

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

// Runs a library constructor, turning its precondition failures into field errors.
template <class F>
auto guarded(const std::string& path, F&& make) {
  try {
    return make();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

std::string kind_of(const json& j, const std::string& path) {
  if (!j.is_object()) throw ConfigError(path + ": expected an object");
  const json& k = require(j, "kind", path);
  if (!k.is_string()) throw ConfigError(join(path, "kind") + ": expected a string");
  return k.get<std::string>();
}

[[noreturn]] void unknown_kind(const std::string& path, const std::string& kind,
                               const std::string& allowed) {
  throw ConfigError(join(path, "kind") + ": unknown kind '" + kind + "' (expected one of " +
                    allowed + ")");
}

}  // namespace

const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ConfigError(path + ": expected an object");
  auto it = obj.find(key);
  if (it == obj.end()) throw ConfigError(join(path, key) + ": required field is missing");
  return *it;
}

double require_number(const json& obj, const std::string& key, const std::string& path) {
  const json& v = require(obj, key, path);
  if (!v.is_number()) throw ConfigError(join(path, key) + ": expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ConfigError(join(path, key) + ": must be finite");
  return x;
}

double number_or(const json& obj, const std::string& key, double fallback, const std::string& path) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  return require_number(obj, key, path);
}

std::vector<double> number_array(const json& j, const std::string& path) {
  if (!j.is_array()) throw ConfigError(path + ": expected an array of numbers");
  std::vector<double> out;
  for (std::size_t k = 0; k < j.size(); ++k) {
    if (!j[k].is_number()) throw ConfigError(path + "[" + std::to_string(k) + "]: expected a number");
    out.push_back(j[k].get<double>());
  }
  return out;
}

MarkDistribution parse_marks(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  return guarded(path, [&] {
    if (kind == "point_mass") return MarkDistribution::point_mass(require_number(j, "value", path));
    if (kind == "discrete")
      return MarkDistribution::discrete(number_array(require(j, "values", path), join(path, "values")),
                                        number_array(require(j, "probs", path), join(path, "probs")));
    if (kind == "normal")
      return MarkDistribution::normal(require_number(j, "mean", path), require_number(j, "variance", path));
    unknown_kind(path, kind, "point_mass, discrete, normal");
  });
}

LevyMeasure parse_measure(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  const double inf = std::numeric_limits<double>::infinity();
  return guarded(path, [&] {
    if (kind == "atomic")
      return LevyMeasure::atomic(number_array(require(j, "locations", path), join(path, "locations")),
                                 number_array(require(j, "masses", path), join(path, "masses")));
    if (kind == "tempered_power") {
      LevyMeasure::TemperedPower p;
      p.scale = number_or(j, "scale", 1.0, path);
      p.exponent = number_or(j, "exponent", 0.0, path);
      p.decay = number_or(j, "decay", inf, path);
      return LevyMeasure::tempered_power(p, number_or(j, "lower", 0.0, path), number_or(j, "upper", inf, path));
    }
    if (kind == "gamma")
      return LevyMeasure::tempered_power({number_or(j, "shape", 1.0, path), 0.0, 1.0}, 0.0, inf);
    if (kind == "inverse_x")
      return LevyMeasure::inverse_x(require_number(j, "scale", path), number_or(j, "lower", 0.0, path),
                                    require_number(j, "upper", path));
    unknown_kind(path, kind, "atomic, tempered_power, gamma, inverse_x");
  });
}

LevyExponent parse_law(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  return guarded(path, [&] {
    if (kind == "gaussian")
      return LevyExponent::gaussian(number_or(j, "drift", 0.0, path), require_number(j, "variance", path));
    if (kind == "poisson") return LevyExponent::poisson(require_number(j, "rate", path));
    if (kind == "compound_poisson")
      return LevyExponent::compound_poisson(require_number(j, "rate", path),
                                            parse_marks(require(j, "marks", path), join(path, "marks")));
    if (kind == "gamma") return LevyExponent::gamma(number_or(j, "shape", 1.0, path));
    if (kind == "spectrally_positive")
      return LevyExponent::spectrally_positive(
          parse_measure(require(j, "measure", path), join(path, "measure")),
          number_or(j, "epsilon", LevyExponent::kDefaultEpsilon, path));
    unknown_kind(path, kind, "gaussian, poisson, compound_poisson, gamma, spectrally_positive");
  });
}

ServiceDistribution parse_service(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  return guarded(path, [&] {
    if (kind == "exponential") return ServiceDistribution::exponential(require_number(j, "rate", path));
    if (kind == "deterministic") return ServiceDistribution::deterministic(require_number(j, "value", path));
    if (kind == "pareto_truncated")
      return ServiceDistribution::pareto_truncated(require_number(j, "shape", path),
                                                   require_number(j, "scale", path),
                                                   require_number(j, "cap", path));
    if (kind == "discrete")
      return ServiceDistribution::discrete(number_array(require(j, "values", path), join(path, "values")),
                                           number_array(require(j, "probs", path), join(path, "probs")));
    unknown_kind(path, kind, "exponential, deterministic, pareto_truncated, discrete");
  });
}

CorrelationStructure parse_structure(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  return guarded(path, [&] {
    if (kind == "exponential") return CorrelationStructure::exponential(require_number(j, "rate", path));
    if (kind == "power") return CorrelationStructure::power(require_number(j, "alpha", path));
    if (kind == "integrated_tail")
      return CorrelationStructure::integrated_tail(
          parse_service(require(j, "service", path), join(path, "service")));
    if (kind == "mixture") {
      const json& comps = require(j, "components", path);
      const std::string cpath = join(path, "components");
      if (!comps.is_array() || comps.empty()) throw ConfigError(cpath + ": expected a non-empty array");
      std::vector<std::pair<double, CorrelationStructure>> parts;
      for (std::size_t k = 0; k < comps.size(); ++k) {
        const std::string p = cpath + "[" + std::to_string(k) + "]";
        parts.emplace_back(require_number(comps[k], "weight", p),
                           parse_structure(require(comps[k], "structure", p), join(p, "structure")));
      }
      return CorrelationStructure::mixture(std::move(parts));
    }
    unknown_kind(path, kind, "exponential, power, integrated_tail, mixture");
  });
}

TimeGrid parse_grid(const json& j, const std::string& path) {
  std::vector<double> epochs = number_array(j, path);
  return guarded(path, [&] { return TimeGrid(std::move(epochs)); });
}

ThetaGrid parse_theta_grid(const json* j, std::size_t dimension, const std::string& path) {
  if (j == nullptr || j->is_null()) return ThetaGrid::uniform(default_theta_axis(), dimension);
  if (!j->is_object()) throw ConfigError(path + ": expected an object with 'axis' or 'axes'");
  if (j->contains("axis")) {
    auto axis = number_array((*j)["axis"], join(path, "axis"));
    if (axis.empty()) throw ConfigError(join(path, "axis") + ": must not be empty");
    return ThetaGrid::uniform(std::move(axis), dimension);
  }
  const json& axes = require(*j, "axes", path);
  if (!axes.is_array() || axes.size() != dimension)
    throw ConfigError(join(path, "axes") + ": expected " + std::to_string(dimension) + " axes");
  std::vector<std::vector<double>> out;
  for (std::size_t k = 0; k < axes.size(); ++k) {
    out.push_back(number_array(axes[k], join(path, "axes") + "[" + std::to_string(k) + "]"));
    if (out.back().empty()) throw ConfigError(join(path, "axes") + "[" + std::to_string(k) + "]: must not be empty");
  }
  return ThetaGrid(std::move(out));
}

std::vector<double> parse_theta(const json& j, std::size_t dimension, const std::string& path) {
  auto theta = number_array(j, path);
  if (theta.size() != dimension)
    throw ConfigError(path + ": expected " + std::to_string(dimension) + " values to match the grid");
  return theta;
}

CoverageModel parse_coverage(const json& j, const std::string& path) {
  CoverageModel m{require_number(j, "lambda", path),
                  parse_service(require(j, "service", path), join(path, "service")), std::nullopt};
  if (!(m.lambda > 0.0)) throw ConfigError(join(path, "lambda") + ": must be positive");
  if (j.contains("marks") && !j["marks"].is_null()) m.marks = parse_marks(j["marks"], join(path, "marks"));
  return m;
}

OnOffArraySpec parse_array(const json& j, const std::string& path) {
  const std::string kind = kind_of(j, path);
  return guarded(path, [&] {
    if (kind == "power_example")
      return OnOffArraySpec::power_example(require_number(j, "alpha", path), require_number(j, "b", path),
                                           number_or(j, "mu", 1.0, path));
    if (kind == "explicit") {
      const json& rows = require(j, "rows", path);
      const std::string rpath = join(path, "rows");
      if (!rows.is_object()) throw ConfigError(rpath + ": expected an object keyed by n");
      std::map<std::size_t, std::vector<std::pair<double, double>>> parsed;
      for (const auto& [key, entries] : rows.items()) {
        const std::string p = join(rpath, key);
        std::size_t n = 0;
        try {
          n = std::stoul(key);
        } catch (const std::exception&) {
          throw ConfigError(p + ": row key must be a positive integer");
        }
        if (!entries.is_array()) throw ConfigError(p + ": expected an array of [lambda, r] pairs");
        auto& row = parsed[n];
        for (std::size_t k = 0; k < entries.size(); ++k) {
          const auto pair = number_array(entries[k], p + "[" + std::to_string(k) + "]");
          if (pair.size() != 2) throw ConfigError(p + "[" + std::to_string(k) + "]: expected [lambda, r]");
          row.emplace_back(pair[0], pair[1]);
        }
      }
      return OnOffArraySpec::explicit_rows(std::move(parsed), require_number(j, "mu", path));
    }
    unknown_kind(path, kind, "power_example, explicit");
  });
}

json load_file(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ConfigError(file + ": cannot open config file");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError(file + ": " + e.what());
  }
}

}  // namespace gcid::config
