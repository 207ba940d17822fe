#pragma once

#include "tmgeom/scenario.hpp"
#include "tmgeom/verify.hpp"

#include <json.hpp>

#include <stdexcept>
#include <string>
#include <vector>

namespace tmgeom {

inline constexpr int kReportSchemaVersion = 1;
inline constexpr const char* kToolName = "tmgeom";
inline constexpr const char* kToolVersion = "0.1.0";

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SkippedSuite {
  std::string suite;
  std::string reason;
};

nlohmann::json verify_report(const Scenario& sc, std::uint64_t seed, const std::vector<CheckResult>& results,
                             const std::vector<SkippedSuite>& skipped, double seconds);

/// `points` is the number of sampled points the audit used.
nlohmann::json audit_report(const Scenario& sc, std::uint64_t seed, int points, const AuditRecord& rec,
                            double seconds);

/// The report without its timing block; identical for identical inputs.
nlohmann::json payload(const nlohmann::json& report);

/// One row per check x point: check_id,kind,point_index,abs_residual,rel_residual,passed
std::string to_csv(const nlohmann::json& report);

/// Reads a report and checks its schema version. Throws ReportError.
nlohmann::json load_report(const std::string& path);

/// Writes to a temporary sibling and renames it into place.
void write_atomic(const std::string& path, const std::string& content);

}  // namespace tmgeom
