#pragma once

#include "tmgeom/tm_geom.hpp"
#include "tmgeom/verify.hpp"

#include <json.hpp>

#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace tmgeom {

inline constexpr int kScenarioSchemaVersion = 1;

/// Validation failure, tagged with the JSON path of the offending field.
class ScenarioError : public std::runtime_error {
 public:
  ScenarioError(std::string field, const std::string& message)
      : std::runtime_error(field + ": " + message), field_(std::move(field)) {}
  [[nodiscard]] const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct Scenario {
  std::string name;
  int dimension = 0;
  std::vector<std::string> metric;  // row-major n*n
  std::vector<Interval> domain;
  std::string alpha;
  std::string sigma = "0";
  int jet_order = 3;
  Tolerances tolerance;
  SampleSpec sampling;
  std::vector<std::string> checks;  // suite names, in run order
  /// FNV-1a 64 of the canonical JSON text, as 16 hex digits.
  std::string digest;
  std::shared_ptr<const ScenarioGeometry> geometry;
};

/// Parses and validates fully: every expression is parsed, shapes and types
/// are checked, and the geometry is constructed. Throws ScenarioError.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::string& path);

std::string fnv1a64_hex(std::string_view bytes);

}  // namespace tmgeom
