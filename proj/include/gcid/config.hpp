#pragma once

#include <optional>
#include <string>

#include "json.hpp"

#include "gcid/corrstruct.hpp"
#include "gcid/coverage.hpp"
#include "gcid/fidi.hpp"
#include "gcid/levy.hpp"
#include "gcid/onoff.hpp"
#include "gcid/stats.hpp"

// JSON spec parsing. Every parser takes the dotted path of the object it is
// reading so that ConfigError messages name the offending field.
namespace gcid::config {

using nlohmann::json;

MarkDistribution parse_marks(const json& j, const std::string& path = "marks");
LevyMeasure parse_measure(const json& j, const std::string& path = "measure");
LevyExponent parse_law(const json& j, const std::string& path = "law");
ServiceDistribution parse_service(const json& j, const std::string& path = "service");
CorrelationStructure parse_structure(const json& j, const std::string& path = "H");
TimeGrid parse_grid(const json& j, const std::string& path = "grid");
/// {"axis": [...]} repeats one axis per coordinate; {"axes": [[...], ...]}
/// gives them explicitly. A missing spec selects the default axis.
ThetaGrid parse_theta_grid(const json* j, std::size_t dimension, const std::string& path = "theta_grid");
std::vector<double> parse_theta(const json& j, std::size_t dimension, const std::string& path = "theta");
CoverageModel parse_coverage(const json& j, const std::string& path = "model");
OnOffArraySpec parse_array(const json& j, const std::string& path = "array");

/// Reads and parses a JSON file; I/O and syntax failures become ConfigError.
json load_file(const std::string& file);

/// Field lookup helpers shared with the command layer.
const json& require(const json& obj, const std::string& key, const std::string& path);
double require_number(const json& obj, const std::string& key, const std::string& path);
double number_or(const json& obj, const std::string& key, double fallback, const std::string& path);
std::vector<double> number_array(const json& j, const std::string& path);

}  // namespace gcid::config
