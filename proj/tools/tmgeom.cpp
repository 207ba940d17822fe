#include "tmgeom/report.hpp"
#include "tmgeom/scenario.hpp"
#include "tmgeom/verify.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

using namespace tmgeom;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

void emit(const nlohmann::json& report, const std::string& out) {
  const std::string text = report.dump(2) + "\n";
  if (out.empty()) {
    std::cout << text;
  } else {
    write_atomic(out, text);
  }
}

int cmd_verify(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  Scenario sc;
  std::vector<TangentPoint> pts;
  try {
    sc = load_scenario(path);
    if (seed) sc.sampling.seed = *seed;
    pts = sample_points(*sc.geometry, sc.sampling);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }

  const bool sigma_zero = sc.geometry->params.sigma_vanishes();
  std::vector<CheckResult> results;
  std::vector<SkippedSuite> skipped;
  for (const auto& suite : sc.checks) {
    if (!sigma_zero && suite_needs_sigma_zero(suite)) {
      skipped.push_back({suite, "closed form exists only for sigma = 0; oracle-only for this scenario"});
      continue;
    }
    auto r = run_suite(suite, *sc.geometry, pts, sc.sampling.seed);
    results.insert(results.end(), std::make_move_iterator(r.begin()), std::make_move_iterator(r.end()));
  }
  sort_results(results);

  bool ok = true;
  for (const auto& r : results) {
    const char* status = r.kind == CheckKind::Audit ? (r.passed() ? "AUDIT-AGREES" : "AUDIT-DIFFERS")
                                                    : (r.passed() ? "PASS" : "FAIL");
    std::cerr << status << "  " << r.id << "  max_abs=" << r.max_abs() << "  max_rel=" << r.max_rel() << "\n";
    if (r.kind == CheckKind::Check && !r.passed()) ok = false;
  }
  for (const auto& s : skipped) std::cerr << "SKIP  " << s.suite << "  (" << s.reason << ")\n";

  try {
    emit(verify_report(sc, sc.sampling.seed, results, skipped, seconds_since(t0)), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return ok ? kExitPass : kExitFail;
}

int cmd_audit(const std::string& path, const std::string& equation, std::optional<std::uint64_t> seed, int points,
              const std::string& out) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& ids = equation_ids();
  if (std::find(ids.begin(), ids.end(), equation) == ids.end()) {
    std::cerr << "error: unknown equation id \"" << equation << "\"; expected one of:";
    for (const auto& id : ids) std::cerr << ' ' << id;
    std::cerr << "\n";
    return kExitUsage;
  }
  try {
    Scenario sc = load_scenario(path);
    if (seed) sc.sampling.seed = *seed;
    sc.sampling.count = points;
    const auto pts = sample_points(*sc.geometry, sc.sampling);
    const AuditRecord rec = audit_equation(*sc.geometry, pts, equation);
    std::cerr << rec.equation << ": " << rec.terms.size() << " terms, max_abs=" << rec.max_abs_residual
              << ", verdict " << rec.verdict << "\n";
    for (const auto& r : rec.readings) {
      std::cerr << "  reading " << r.name << ": max_abs=" << r.max_abs_residual
                << (r.agrees ? "  agrees" : "  disagrees") << "\n";
    }
    emit(audit_report(sc, sc.sampling.seed, points, rec, seconds_since(t0)), out);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitPass;
}

int cmd_report(const std::string& path, const std::string& format) {
  try {
    const auto report = load_report(path);
    if (format == "csv") {
      std::cout << to_csv(report);
    } else {
      std::cout << report.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  }
  return kExitPass;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Closed-form geometry of isotropic tangent-bundle metrics, checked against a coordinate oracle"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string scenario;
  std::string out;
  std::optional<std::uint64_t> seed;

  auto* verify = app.add_subcommand("verify", "run the scenario's check suites and write a report");
  verify->add_option("--scenario", scenario, "scenario JSON file")->required();
  verify->add_option("--seed", seed, "override the sampling seed");
  verify->add_option("--out", out, "report path (default: stdout)");

  std::string equation;
  int points = 10;
  auto* audit = app.add_subcommand("audit", "term-by-term audit of one equation against the oracle");
  audit->add_option("--scenario", scenario, "scenario JSON file")->required();
  audit->add_option("--equation", equation, "hhh|hhv|hvh|vhv|vvh|vvv|ricci_h|ricci_v|K_hh|K_hv|K_vv|laplacian")
      ->required();
  audit->add_option("--seed", seed, "override the sampling seed");
  audit->add_option("--points", points, "number of sampled points")->check(CLI::PositiveNumber);
  audit->add_option("--out", out, "report path (default: stdout)");

  std::string report_path;
  std::string format = "json";
  auto* report = app.add_subcommand("report", "print a saved report as JSON or CSV");
  report->add_option("path", report_path, "report JSON file")->required();
  report->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  if (verify->parsed()) return cmd_verify(scenario, seed, out);
  if (audit->parsed()) return cmd_audit(scenario, equation, seed, points, out);
  return cmd_report(report_path, format);
}
