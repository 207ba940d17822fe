#include "tmgeom/scenario.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace tmgeom {

using nlohmann::json;

std::string fnv1a64_hex(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

const json& require(const json& obj, const char* key) {
  if (!obj.contains(key)) throw ScenarioError(key, "required field is missing");
  return obj.at(key);
}

std::string expression_text(const json& v, const std::string& field) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_number()) return v.dump();
  throw ScenarioError(field, "expected an expression string");
}

double number(const json& v, const std::string& field) {
  if (!v.is_number()) throw ScenarioError(field, "expected a number");
  return v.get<double>();
}

int integer(const json& v, const std::string& field) {
  if (!v.is_number_integer()) throw ScenarioError(field, "expected an integer");
  return v.get<int>();
}

ExprAst parse_field(const std::string& text, int n, const std::string& field) {
  try {
    return parse(text, n);
  } catch (const ParseError& e) {
    throw ScenarioError(field, std::string("cannot parse \"") + text + "\": " + e.what());
  }
}

void reject_unknown(const json& obj, const std::set<std::string>& known, const std::string& where) {
  for (const auto& [key, value] : obj.items()) {
    if (!known.count(key)) throw ScenarioError(where + key, "unknown field");
  }
}

}  // namespace

Scenario parse_scenario(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError("(document)", std::string("invalid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw ScenarioError("(document)", "scenario must be a JSON object");
  reject_unknown(doc,
                 {"schema_version", "name", "description", "dimension", "metric", "domain", "alpha", "sigma",
                  "jet_order", "tolerance", "sampling", "checks"},
                 "");

  const int version = integer(require(doc, "schema_version"), "schema_version");
  if (version != kScenarioSchemaVersion) {
    throw ScenarioError("schema_version", "unsupported version " + std::to_string(version) + " (expected " +
                                              std::to_string(kScenarioSchemaVersion) + ")");
  }

  Scenario s;
  const json& name = require(doc, "name");
  if (!name.is_string() || name.get<std::string>().empty()) throw ScenarioError("name", "expected a non-empty string");
  s.name = name.get<std::string>();

  s.dimension = integer(require(doc, "dimension"), "dimension");
  const int n = s.dimension;
  if (n < 1 || n > 4) throw ScenarioError("dimension", "must be between 1 and 4");

  const json& metric = require(doc, "metric");
  if (!metric.is_array() || static_cast<int>(metric.size()) != n) {
    throw ScenarioError("metric", "expected " + std::to_string(n) + " rows for dimension " + std::to_string(n));
  }
  std::vector<ExprAst> components;
  for (int i = 0; i < n; ++i) {
    const json& row = metric[static_cast<std::size_t>(i)];
    const std::string row_field = "metric[" + std::to_string(i) + "]";
    if (!row.is_array() || static_cast<int>(row.size()) != n) {
      throw ScenarioError(row_field, "expected " + std::to_string(n) + " entries");
    }
    for (int j = 0; j < n; ++j) {
      const std::string field = row_field + "[" + std::to_string(j) + "]";
      const std::string text = expression_text(row[static_cast<std::size_t>(j)], field);
      ExprAst e = parse_field(text, n, field);
      if (e.depends_on_fiber()) throw ScenarioError(field, "metric components may depend on x1..xn only");
      s.metric.push_back(text);
      components.push_back(std::move(e));
    }
  }

  const json& domain = require(doc, "domain");
  if (!domain.is_array() || static_cast<int>(domain.size()) != n) {
    throw ScenarioError("domain", "expected " + std::to_string(n) + " intervals");
  }
  for (int i = 0; i < n; ++i) {
    const json& iv = domain[static_cast<std::size_t>(i)];
    const std::string field = "domain[" + std::to_string(i) + "]";
    if (!iv.is_array() || iv.size() != 2) throw ScenarioError(field, "expected [lo, hi]");
    const Interval box{number(iv[0], field + "[0]"), number(iv[1], field + "[1]")};
    if (!(box.lo < box.hi)) throw ScenarioError(field, "lo must be below hi");
    s.domain.push_back(box);
  }

  s.alpha = expression_text(require(doc, "alpha"), "alpha");
  ExprAst alpha = parse_field(s.alpha, n, "alpha");
  if (doc.contains("sigma")) s.sigma = expression_text(doc.at("sigma"), "sigma");
  ExprAst sigma = parse_field(s.sigma, n, "sigma");

  if (doc.contains("jet_order")) s.jet_order = integer(doc.at("jet_order"), "jet_order");
  if (s.jet_order != 3) throw ScenarioError("jet_order", "only order 3 is supported (curvature needs third derivatives)");

  if (doc.contains("tolerance")) {
    const json& t = doc.at("tolerance");
    if (!t.is_object()) throw ScenarioError("tolerance", "expected an object");
    reject_unknown(t, {"relative", "absolute"}, "tolerance.");
    if (t.contains("relative")) s.tolerance.relative = number(t.at("relative"), "tolerance.relative");
    if (t.contains("absolute")) s.tolerance.absolute = number(t.at("absolute"), "tolerance.absolute");
    if (!(s.tolerance.relative >= 0.0) || !(s.tolerance.absolute >= 0.0)) {
      throw ScenarioError("tolerance", "tolerances must be non-negative");
    }
  }

  if (doc.contains("sampling")) {
    const json& sp = doc.at("sampling");
    if (!sp.is_object()) throw ScenarioError("sampling", "expected an object");
    reject_unknown(sp, {"count", "seed", "margin", "fiber_radius", "alpha_floor"}, "sampling.");
    if (sp.contains("count")) s.sampling.count = integer(sp.at("count"), "sampling.count");
    if (sp.contains("seed")) {
      if (!sp.at("seed").is_number_unsigned()) throw ScenarioError("sampling.seed", "expected a non-negative integer");
      s.sampling.seed = sp.at("seed").get<std::uint64_t>();
    }
    if (sp.contains("margin")) s.sampling.margin = number(sp.at("margin"), "sampling.margin");
    if (sp.contains("fiber_radius")) s.sampling.fiber_radius = number(sp.at("fiber_radius"), "sampling.fiber_radius");
    if (sp.contains("alpha_floor")) s.sampling.alpha_floor = number(sp.at("alpha_floor"), "sampling.alpha_floor");
    if (s.sampling.count < 1) throw ScenarioError("sampling.count", "must be positive");
    if (s.sampling.margin < 0.0) throw ScenarioError("sampling.margin", "must be non-negative");
    if (s.sampling.fiber_radius < 0.0) throw ScenarioError("sampling.fiber_radius", "must be non-negative");
  }

  if (doc.contains("checks")) {
    const json& c = doc.at("checks");
    if (!c.is_array()) throw ScenarioError("checks", "expected an array of suite names");
    for (std::size_t i = 0; i < c.size(); ++i) {
      const std::string field = "checks[" + std::to_string(i) + "]";
      if (!c[i].is_string()) throw ScenarioError(field, "expected a suite name");
      const std::string suite = c[i].get<std::string>();
      if (std::find(suite_names().begin(), suite_names().end(), suite) == suite_names().end()) {
        throw ScenarioError(field, "unknown suite \"" + suite + "\"");
      }
      if (std::find(s.checks.begin(), s.checks.end(), suite) == s.checks.end()) s.checks.push_back(suite);
    }
  } else {
    s.checks = suite_names();
  }

  try {
    s.geometry = std::make_shared<const ScenarioGeometry>(
        ChartMetric(n, std::move(components), s.domain), IsotropicParams{std::move(alpha), std::move(sigma)},
        s.jet_order, s.tolerance);
  } catch (const std::invalid_argument& e) {
    throw ScenarioError("metric", e.what());
  }

  s.digest = fnv1a64_hex(doc.dump());
  return s;
}

Scenario load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ScenarioError("(file)", "cannot read " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

}  // namespace tmgeom
