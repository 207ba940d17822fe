#pragma once

#include "tmgeom/oracle.hpp"
#include "tmgeom/tm_geom.hpp"

#include <algorithm>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace tmgeom {

struct SampleSpec {
  int count = 100;
  std::uint64_t seed = 42;
  /// Distance kept from every face of the base domain box.
  double margin = 0.0;
  /// Fiber vectors satisfy |u| <= fiber_radius (Euclidean in chart components).
  double fiber_radius = 1.0;
  /// Points with 0 < alpha <= alpha_floor are skipped as near-degenerate.
  double alpha_floor = 1e-6;
};

/// Deterministic uniform points: x in the shrunk box, u uniform in the ball.
/// Throws DomainError("alpha must be positive on the sampled domain") when a
/// candidate point has alpha <= 0, and std::invalid_argument when the box is
/// empty after the margin or no point survives the filters.
std::vector<TangentPoint> sample_points(const ScenarioGeometry& sg, const SampleSpec& spec);

/// Uniform doubles from mt19937_64 with a fixed bit mapping, so sequences are
/// identical on every platform (the std distributions are not).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

 private:
  std::mt19937_64 engine_;
};

enum class CheckKind { Check, Audit };

struct PointResult {
  int point_index = 0;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
  bool passed = true;
  std::string error;  // non-empty when the point could not be evaluated
};

struct CheckResult {
  std::string id;
  CheckKind kind = CheckKind::Check;
  Tolerances tolerance;
  std::vector<PointResult> points;

  [[nodiscard]] bool passed() const;
  [[nodiscard]] double max_abs() const;
  [[nodiscard]] double max_rel() const;
};

/// Residual pair; fails only when both tolerances are exceeded.
struct Residual {
  double abs = 0.0;
  double rel = 0.0;
  void merge(const Residual& o) {
    abs = std::max(abs, o.abs);
    rel = std::max(rel, o.rel);
  }
  [[nodiscard]] bool within(const Tolerances& t) const { return abs <= t.absolute || rel <= t.relative; }
};

/// gbar-norm residual normalized by max(|lhs|, |rhs|, 1).
Residual vector_residual(const TmPoint& tp, const LiftVector& lhs, const LiftVector& rhs);
Residual scalar_residual(double lhs, double rhs);

/// Suites. Each returns one CheckResult per check id with one entry per point.
/// Curvature-side suites require sigma = 0 and return nothing otherwise.
std::vector<CheckResult> compare_connection(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts);
std::vector<CheckResult> compare_curvature(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts);
std::vector<CheckResult> compare_ricci(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts);
std::vector<CheckResult> compare_sectional(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts);
std::vector<CheckResult> compare_laplacian(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts);
std::vector<CheckResult> invariant_suite(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts,
                                         std::uint64_t seed);

/// Suite names accepted in scenario files.
const std::vector<std::string>& suite_names();
bool suite_needs_sigma_zero(const std::string& suite);
std::vector<CheckResult> run_suite(const std::string& suite, const ScenarioGeometry& sg,
                                   const std::vector<TangentPoint>& pts, std::uint64_t seed);

/// Results sorted by id; points sorted by index.
void sort_results(std::vector<CheckResult>& results);

// ---------------------------------------------------------------------------
// Audit

/// Equation ids accepted by the audit engine.
const std::vector<std::string>& equation_ids();
bool is_flagged_equation(const std::string& id);

struct AuditTerm {
  std::string label;
  bool flagged = false;
  /// Largest gbar-norm (or absolute value) of the term over the evaluations.
  double max_magnitude = 0.0;
  /// Largest residual against the oracle when this term alone is dropped.
  double max_residual_without = 0.0;
};

struct AuditReading {
  std::string name;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  bool agrees = false;
};

struct AuditEvaluation {
  int point_index = 0;
  std::string arguments;  // e.g. "X=e1 Y=e2 Z=e1"
  std::vector<double> closed_form;  // stacked (h, v) or a single scalar
  std::vector<double> oracle;
  double abs_residual = 0.0;
  double rel_residual = 0.0;
};

struct AuditRecord {
  std::string equation;
  bool flagged = false;
  std::string default_reading;
  Tolerances tolerance;
  std::vector<AuditTerm> terms;
  std::vector<AuditReading> readings;  // every candidate, default first
  std::vector<AuditEvaluation> evaluations;
  double max_abs_residual = 0.0;
  double max_rel_residual = 0.0;
  /// "agrees" when the default reading matches the oracle within tolerance,
  /// otherwise "disagrees".
  std::string verdict;
};

/// Throws std::invalid_argument for an unknown id and UnsupportedError when
/// sigma != 0.
AuditRecord audit_equation(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts,
                           const std::string& equation);

// ---------------------------------------------------------------------------

/// Worker count: TMGEOM_THREADS when set, else hardware concurrency, capped at
/// `jobs`.
int worker_count(int jobs);
/// Runs body(i) for i in [0, count) on worker_count(count) threads.
void parallel_for(int count, const std::function<void(int)>& body);

}  // namespace tmgeom
