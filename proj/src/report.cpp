#include "tmgeom/report.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <system_error>

namespace tmgeom {

using nlohmann::json;

namespace {

const char* kind_name(CheckKind k) { return k == CheckKind::Audit ? "audit" : "check"; }

json tolerance_json(const Tolerances& t) { return {{"relative", t.relative}, {"absolute", t.absolute}}; }

json scenario_json(const Scenario& sc) {
  return {{"name", sc.name},
          {"digest", sc.digest},
          {"dimension", sc.dimension},
          {"alpha", sc.alpha},
          {"sigma", sc.sigma}};
}

json check_json(const CheckResult& r) {
  json pts = json::array();
  for (const auto& p : r.points) {
    json jp = {{"index", p.point_index},
               {"abs_residual", p.abs_residual},
               {"rel_residual", p.rel_residual},
               {"passed", p.passed}};
    if (!p.error.empty()) jp["error"] = p.error;
    pts.push_back(std::move(jp));
  }
  return {{"id", r.id},
          {"kind", kind_name(r.kind)},
          {"tolerance", tolerance_json(r.tolerance)},
          {"passed", r.passed()},
          {"max_abs_residual", r.max_abs()},
          {"max_rel_residual", r.max_rel()},
          {"points", std::move(pts)}};
}

json header(const Scenario& sc, std::uint64_t seed, const char* command) {
  return {{"schema_version", kReportSchemaVersion},
          {"tool", {{"name", kToolName}, {"version", kToolVersion}}},
          {"command", command},
          {"scenario", scenario_json(sc)},
          {"seed", seed}};
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

json verify_report(const Scenario& sc, std::uint64_t seed, const std::vector<CheckResult>& results,
                   const std::vector<SkippedSuite>& skipped, double seconds) {
  json r = header(sc, seed, "verify");
  json checks = json::array();
  int failed = 0;
  int audits = 0;
  for (const auto& c : results) {
    if (c.kind == CheckKind::Audit) {
      ++audits;
    } else if (!c.passed()) {
      ++failed;
    }
    checks.push_back(check_json(c));
  }
  json sk = json::array();
  for (const auto& s : skipped) sk.push_back({{"suite", s.suite}, {"reason", s.reason}});
  r["sample_count"] = results.empty() ? 0 : results.front().points.size();
  r["summary"] = {{"passed", failed == 0},
                  {"checks", static_cast<int>(results.size()) - audits},
                  {"failed", failed},
                  {"audit_records", audits}};
  r["skipped"] = std::move(sk);
  r["checks"] = std::move(checks);
  r["timing"] = {{"seconds", seconds}};
  return r;
}

json audit_report(const Scenario& sc, std::uint64_t seed, int points, const AuditRecord& rec, double seconds) {
  json r = header(sc, seed, "audit");
  r["sample_count"] = points;

  json terms = json::array();
  for (const auto& t : rec.terms) {
    terms.push_back({{"label", t.label},
                     {"flagged", t.flagged},
                     {"max_magnitude", t.max_magnitude},
                     {"max_residual_without_term", t.max_residual_without}});
  }
  json readings = json::array();
  for (const auto& rd : rec.readings) {
    readings.push_back({{"name", rd.name},
                        {"max_abs_residual", rd.max_abs_residual},
                        {"max_rel_residual", rd.max_rel_residual},
                        {"agrees_with_oracle", rd.agrees}});
  }
  json evals = json::array();
  for (const auto& e : rec.evaluations) {
    evals.push_back({{"point_index", e.point_index},
                     {"arguments", e.arguments},
                     {"closed_form", e.closed_form},
                     {"oracle", e.oracle},
                     {"abs_residual", e.abs_residual},
                     {"rel_residual", e.rel_residual}});
  }
  r["audit"] = {{"equation", rec.equation},
                {"flagged", rec.flagged},
                {"default_reading", rec.default_reading},
                {"tolerance", tolerance_json(rec.tolerance)},
                {"term_count", rec.terms.size()},
                {"terms", std::move(terms)},
                {"readings", std::move(readings)},
                {"max_abs_residual", rec.max_abs_residual},
                {"max_rel_residual", rec.max_rel_residual},
                {"verdict", rec.verdict},
                {"evaluations", std::move(evals)}};

  // Per-point summary in the common check layout so `report --format csv`
  // works on audit reports too.
  CheckResult summary{"audit." + rec.equation, CheckKind::Audit, rec.tolerance, {}};
  for (int i = 0; i < points; ++i) summary.points.push_back({i, 0.0, 0.0, true, {}});
  for (const auto& e : rec.evaluations) {
    auto& p = summary.points[static_cast<std::size_t>(e.point_index)];
    p.abs_residual = std::max(p.abs_residual, e.abs_residual);
    p.rel_residual = std::max(p.rel_residual, e.rel_residual);
    p.passed = p.passed && Residual{e.abs_residual, e.rel_residual}.within(rec.tolerance);
  }
  r["checks"] = json::array({check_json(summary)});
  r["timing"] = {{"seconds", seconds}};
  return r;
}

json payload(const json& report) {
  json p = report;
  p.erase("timing");
  return p;
}

std::string to_csv(const json& report) {
  std::ostringstream out;
  out << "check_id,kind,point_index,abs_residual,rel_residual,passed\n";
  for (const auto& c : report.at("checks")) {
    for (const auto& p : c.at("points")) {
      out << c.at("id").get<std::string>() << ',' << c.at("kind").get<std::string>() << ','
          << p.at("index").get<int>() << ',' << format_double(p.at("abs_residual").get<double>()) << ','
          << format_double(p.at("rel_residual").get<double>()) << ',' << (p.at("passed").get<bool>() ? "true" : "false")
          << '\n';
    }
  }
  return out.str();
}

json load_report(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ReportError("cannot read report " + path);
  json r;
  try {
    r = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ReportError(std::string("report is not valid JSON: ") + e.what());
  }
  if (!r.is_object() || !r.contains("schema_version") || !r.at("schema_version").is_number_integer()) {
    throw ReportError("report has no schema_version field");
  }
  const int v = r.at("schema_version").get<int>();
  if (v != kReportSchemaVersion) {
    throw ReportError("report schema version " + std::to_string(v) + " does not match supported version " +
                      std::to_string(kReportSchemaVersion));
  }
  if (!r.contains("checks") || !r.at("checks").is_array()) throw ReportError("report has no checks array");
  return r;
}

void write_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp);
    throw std::runtime_error("cannot move report into place at " + path + ": " + ec.message());
  }
}

}  // namespace tmgeom
