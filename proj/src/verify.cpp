#include "tmgeom/verify.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace tmgeom {

// ---------------------------------------------------------------------------
// Sampling

std::vector<TangentPoint> sample_points(const ScenarioGeometry& sg, const SampleSpec& spec) {
  const int n = sg.dim();
  if (spec.count < 1) throw std::invalid_argument("sample count must be positive");
  if (spec.fiber_radius < 0.0) throw std::invalid_argument("fiber radius must be non-negative");
  std::vector<Interval> box;
  for (const auto& iv : sg.metric.domain()) {
    Interval s{iv.lo + spec.margin, iv.hi - spec.margin};
    if (!(s.lo <= s.hi)) throw std::invalid_argument("sampling margin leaves an empty domain box");
    box.push_back(s);
  }

  Rng rng(spec.seed);
  std::vector<TangentPoint> pts;
  const long max_attempts = 1000L * spec.count + 1000L;
  for (long attempt = 0; attempt < max_attempts && static_cast<int>(pts.size()) < spec.count; ++attempt) {
    TangentPoint p{Vec(n), Vec::Zero(n)};
    for (int i = 0; i < n; ++i) p.x(i) = rng.uniform(box[static_cast<std::size_t>(i)].lo, box[static_cast<std::size_t>(i)].hi);
    if (spec.fiber_radius > 0.0) {
      const double r = spec.fiber_radius;
      do {
        for (int i = 0; i < n; ++i) p.u(i) = rng.uniform(-r, r);
      } while (p.u.norm() > r);
    }
    const std::vector<double> chart = p.chart();
    const double a = eval(sg.params.alpha, chart);
    if (!(a > 0.0)) {
      std::ostringstream msg;
      msg << "alpha must be positive on the sampled domain (alpha = " << a << " at x = [" << p.x.transpose()
          << "], u = [" << p.u.transpose() << "])";
      throw DomainError(msg.str());
    }
    if (a <= spec.alpha_floor) continue;
    Mat g(n, n);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) g(i, j) = eval(sg.metric.component(i, j), chart);
    }
    if (!positive_definite(g)) {
      std::ostringstream msg;
      msg << "metric is not positive definite at x = [" << p.x.transpose() << "]";
      throw DomainError(msg.str());
    }
    pts.push_back(std::move(p));
  }
  if (static_cast<int>(pts.size()) < spec.count) {
    throw std::invalid_argument("empty feasible region: too few points pass the sampling filters");
  }
  return pts;
}

// ---------------------------------------------------------------------------
// Results

bool CheckResult::passed() const {
  return std::all_of(points.begin(), points.end(), [](const PointResult& p) { return p.passed; });
}

double CheckResult::max_abs() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, p.abs_residual);
  return m;
}

double CheckResult::max_rel() const {
  double m = 0.0;
  for (const auto& p : points) m = std::max(m, p.rel_residual);
  return m;
}

Residual vector_residual(const TmPoint& tp, const LiftVector& lhs, const LiftVector& rhs) {
  const double a = tp.norm(lhs - rhs);
  return {a, a / std::max({tp.norm(lhs), tp.norm(rhs), 1.0})};
}

Residual scalar_residual(double lhs, double rhs) {
  const double a = std::abs(lhs - rhs);
  return {a, a / std::max({std::abs(lhs), std::abs(rhs), 1.0})};
}

void sort_results(std::vector<CheckResult>& results) {
  std::sort(results.begin(), results.end(), [](const CheckResult& a, const CheckResult& b) { return a.id < b.id; });
  for (auto& r : results) {
    std::sort(r.points.begin(), r.points.end(),
              [](const PointResult& a, const PointResult& b) { return a.point_index < b.point_index; });
  }
}

// ---------------------------------------------------------------------------
// Parallel map

int worker_count(int jobs) {
  int workers = static_cast<int>(std::thread::hardware_concurrency());
  if (const char* env = std::getenv("TMGEOM_THREADS")) {
    const int v = std::atoi(env);
    if (v > 0) workers = v;
  }
  return std::max(1, std::min(workers, jobs));
}

void parallel_for(int count, const std::function<void(int)>& body) {
  const int workers = worker_count(count);
  if (workers <= 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> threads;
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (int i = next++; i < count; i = next++) {
        try {
          body(i);
        } catch (...) {
          const std::lock_guard<std::mutex> lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (failure) std::rethrow_exception(failure);
}

namespace {

struct CheckSpec {
  std::string id;
  CheckKind kind = CheckKind::Check;
  Tolerances tol;
};

using PointEval = std::function<std::vector<Residual>(const TangentPoint&, int)>;

// Evaluates every point once and distributes the residual vector over the
// checks. A point that throws fails every check it feeds.
std::vector<CheckResult> run_points(const std::vector<CheckSpec>& specs, const std::vector<TangentPoint>& pts,
                                    const PointEval& eval_point) {
  const int np = static_cast<int>(pts.size());
  std::vector<std::vector<Residual>> values(static_cast<std::size_t>(np));
  std::vector<std::string> errors(static_cast<std::size_t>(np));
  parallel_for(np, [&](int i) {
    try {
      values[static_cast<std::size_t>(i)] = eval_point(pts[static_cast<std::size_t>(i)], i);
    } catch (const std::exception& e) {
      errors[static_cast<std::size_t>(i)] = e.what();
    }
  });
  std::vector<CheckResult> out;
  for (std::size_t c = 0; c < specs.size(); ++c) {
    CheckResult r{specs[c].id, specs[c].kind, specs[c].tol, {}};
    for (int i = 0; i < np; ++i) {
      PointResult pr;
      pr.point_index = i;
      const auto& err = errors[static_cast<std::size_t>(i)];
      if (!err.empty()) {
        pr.passed = false;
        pr.error = err;
      } else {
        const Residual& res = values[static_cast<std::size_t>(i)].at(c);
        pr.abs_residual = res.abs;
        pr.rel_residual = res.rel;
        pr.passed = res.within(specs[c].tol);
      }
      r.points.push_back(std::move(pr));
    }
    out.push_back(std::move(r));
  }
  return out;
}

LiftVector lift(Lift l, const Vec& X) {
  return l == Lift::Horizontal ? LiftVector::horizontal(X) : LiftVector::vertical(X);
}

constexpr Lift kH = Lift::Horizontal;
constexpr Lift kV = Lift::Vertical;

ConnectionCase connection_case(Lift a, Lift b) {
  if (a == kH) return b == kH ? ConnectionCase::HH : ConnectionCase::HV;
  return b == kH ? ConnectionCase::VH : ConnectionCase::VV;
}

struct CurvatureLifts {
  CurvatureCase c;
  Lift x, y, z;
};

const std::vector<CurvatureLifts>& curvature_lifts() {
  static const std::vector<CurvatureLifts> v = {
      {CurvatureCase::HHH, kH, kH, kH}, {CurvatureCase::HHV, kH, kH, kV}, {CurvatureCase::HVH, kH, kV, kH},
      {CurvatureCase::VHV, kV, kH, kV}, {CurvatureCase::VVH, kV, kV, kH}, {CurvatureCase::VVV, kV, kV, kV}};
  return v;
}

bool flagged_curvature(CurvatureCase c) { return c == CurvatureCase::HHV || c == CurvatureCase::VHV; }

// Adapted basis vector a of T(TM): (d_a)^h for a < n, (d_{a-n})^v otherwise.
LiftVector adapted_basis(int n, int a) {
  return a < n ? LiftVector::horizontal(Vec::Unit(n, a)) : LiftVector::vertical(Vec::Unit(n, a - n));
}

// gbar(R(e_a, e_b) e_c, e_d) from the closed-form blocks, extended to the
// missing lift patterns by antisymmetry in the first pair.
std::vector<double> closed_riemann_lowered(const TmPoint& tp) {
  const int n = tp.dim();
  const int m = 2 * n;
  std::vector<double> r(static_cast<std::size_t>(m * m * m * m));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        const Lift la = a < n ? kH : kV;
        const Lift lb = b < n ? kH : kV;
        const Lift lc = c < n ? kH : kV;
        const Vec X = Vec::Unit(n, a % n);
        const Vec Y = Vec::Unit(n, b % n);
        const Vec Z = Vec::Unit(n, c % n);
        LiftVector v;
        if (la == kH && lb == kH) {
          v = tp.riemann(lc == kH ? CurvatureCase::HHH : CurvatureCase::HHV, X, Y, Z).total();
        } else if (la == kV && lb == kV) {
          v = tp.riemann(lc == kH ? CurvatureCase::VVH : CurvatureCase::VVV, X, Y, Z).total();
        } else if (la == kH) {
          v = lc == kH ? tp.riemann(CurvatureCase::HVH, X, Y, Z).total()
                       : -tp.riemann(CurvatureCase::VHV, Y, X, Z).total();
        } else {
          v = lc == kV ? tp.riemann(CurvatureCase::VHV, X, Y, Z).total()
                       : -tp.riemann(CurvatureCase::HVH, Y, X, Z).total();
        }
        for (int d = 0; d < m; ++d) {
          r[static_cast<std::size_t>(((a * m + b) * m + c) * m + d)] = tp.gbar(v, adapted_basis(n, d));
        }
      }
    }
  }
  return r;
}

// Largest violation of the four algebraic curvature identities over a
// lowered tensor with index order (a, b, c, d) = g(R(a,b)c, d).
Residual riemann_identities(const std::vector<double>& r, int m) {
  auto at = [&](int a, int b, int c, int d) { return r[static_cast<std::size_t>(((a * m + b) * m + c) * m + d)]; };
  double worst = 0.0;
  double scale = 1.0;
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          const double v = at(a, b, c, d);
          scale = std::max(scale, std::abs(v));
          worst = std::max({worst, std::abs(v + at(b, a, c, d)), std::abs(v + at(a, b, d, c)),
                            std::abs(v - at(c, d, a, b)), std::abs(v + at(b, c, a, d) + at(c, a, b, d))});
        }
      }
    }
  }
  return {worst, worst / scale};
}

// Sectional pairs: ordered pairs of distinct Gram-Schmidt frame vectors.
std::vector<std::pair<int, int>> frame_pairs(int n) {
  std::vector<std::pair<int, int>> p;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      if (i != j) p.emplace_back(i, j);
    }
  }
  return p;
}

void require_sigma_zero(const ScenarioGeometry& sg, const char* what) {
  if (!sg.params.sigma_vanishes()) {
    throw UnsupportedError(std::string(what) + " has no closed form for sigma != 0");
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Comparison suites

std::vector<CheckResult> compare_connection(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts) {
  const Tolerances tol = sg.tolerance;
  const std::vector<CheckSpec> specs = {{"connection.hh", CheckKind::Check, tol},
                                        {"connection.hv", CheckKind::Check, tol},
                                        {"connection.vh", CheckKind::Check, tol},
                                        {"connection.vv", CheckKind::Check, tol},
                                        {"gradient.alpha", CheckKind::Check, tol},
                                        {"second_gradient.alpha", CheckKind::Check, tol}};
  return run_points(specs, pts, [&](const TangentPoint& p, int) {
    const TmPoint tp(sg, p);
    const TmOracle orc(sg, p);
    const int n = sg.dim();
    std::vector<Residual> r(specs.size());
    const Lift lifts[4][2] = {{kH, kH}, {kH, kV}, {kV, kH}, {kV, kV}};
    for (int c = 0; c < 4; ++c) {
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          const Vec X = Vec::Unit(n, i);
          const Vec Y = Vec::Unit(n, j);
          r[static_cast<std::size_t>(c)].merge(vector_residual(
              tp, tp.nabla(static_cast<ConnectionCase>(c), X, Y), orc.nabla(lifts[c][0], X, lifts[c][1], Y)));
        }
      }
    }
    r[4] = vector_residual(tp, tp.grad_alpha(), orc.gradient(orc.alpha_jet()));
    for (int i = 0; i < n; ++i) {
      for (const Lift l : {kH, kV}) {
        const Vec X = Vec::Unit(n, i);
        r[5].merge(vector_residual(tp, tp.second_grad(l, X, tp.alpha_jet()),
                                   orc.hessian_vector(lift(l, X), orc.alpha_jet())));
      }
    }
    return r;
  });
}

std::vector<CheckResult> compare_curvature(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts) {
  if (!sg.params.sigma_vanishes()) return {};
  std::vector<CheckSpec> specs;
  for (const auto& cl : curvature_lifts()) {
    specs.push_back({"curvature." + to_string(cl.c), flagged_curvature(cl.c) ? CheckKind::Audit : CheckKind::Check,
                     sg.tolerance});
  }
  return run_points(specs, pts, [&](const TangentPoint& p, int) {
    const TmPoint tp(sg, p);
    const TmOracle orc(sg, p);
    const int n = sg.dim();
    std::vector<Residual> r(specs.size());
    for (std::size_t c = 0; c < curvature_lifts().size(); ++c) {
      const auto& cl = curvature_lifts()[c];
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          for (int k = 0; k < n; ++k) {
            const Vec X = Vec::Unit(n, i);
            const Vec Y = Vec::Unit(n, j);
            const Vec Z = Vec::Unit(n, k);
            r[c].merge(vector_residual(tp, tp.riemann(cl.c, X, Y, Z).total(),
                                       orc.riemann(lift(cl.x, X), lift(cl.y, Y), lift(cl.z, Z))));
          }
        }
      }
    }
    return r;
  });
}

std::vector<CheckResult> compare_ricci(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts) {
  if (!sg.params.sigma_vanishes()) return {};
  const std::vector<CheckSpec> specs = {{"ricci.h", CheckKind::Audit, sg.tolerance},
                                        {"ricci.v", CheckKind::Check, sg.tolerance}};
  return run_points(specs, pts, [&](const TangentPoint& p, int) {
    const TmPoint tp(sg, p);
    const TmOracle orc(sg, p);
    const int n = sg.dim();
    std::vector<Residual> r(2);
    for (int i = 0; i < n; ++i) {
      const Vec X = Vec::Unit(n, i);
      r[0].merge(vector_residual(tp, tp.ricci(kH, X).total(), orc.ricci(LiftVector::horizontal(X))));
      r[1].merge(vector_residual(tp, tp.ricci(kV, X).total(), orc.ricci(LiftVector::vertical(X))));
    }
    return r;
  });
}

std::vector<CheckResult> compare_sectional(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts) {
  if (!sg.params.sigma_vanishes()) return {};
  if (sg.dim() < 2) return {};
  const std::vector<CheckSpec> specs = {{"sectional.hh", CheckKind::Check, sg.tolerance},
                                        {"sectional.hv", CheckKind::Audit, sg.tolerance},
                                        {"sectional.vv", CheckKind::Audit, sg.tolerance}};
  return run_points(specs, pts, [&](const TangentPoint& p, int) {
    const TmPoint tp(sg, p);
    const TmOracle orc(sg, p);
    const Mat& F = tp.base().frame();
    std::vector<Residual> r(3);
    for (const auto& [i, j] : frame_pairs(sg.dim())) {
      const Vec X = F.col(i);
      const Vec Y = F.col(j);
      r[0].merge(scalar_residual(tp.sectional(SectionalCase::HH, X, Y).total(),
                                 orc.sectional(LiftVector::horizontal(X), LiftVector::horizontal(Y))));
      r[1].merge(scalar_residual(tp.sectional(SectionalCase::HV, X, Y).total(),
                                 orc.sectional(LiftVector::horizontal(X), LiftVector::vertical(Y))));
      r[2].merge(scalar_residual(tp.sectional(SectionalCase::VV, X, Y).total(),
                                 orc.sectional(LiftVector::vertical(X), LiftVector::vertical(Y))));
    }
    return r;
  });
}

std::vector<CheckResult> compare_laplacian(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts) {
  if (!sg.params.sigma_vanishes()) return {};
  const std::vector<CheckSpec> specs = {{"laplacian", CheckKind::Check, sg.tolerance}};
  return run_points(specs, pts, [&](const TangentPoint& p, int) {
    const TmPoint tp(sg, p);
    const TmOracle orc(sg, p);
    return std::vector<Residual>{scalar_residual(tp.laplacian(), orc.laplacian(orc.alpha_jet()))};
  });
}

// ---------------------------------------------------------------------------
// Invariants

namespace {

constexpr Tolerances kAlgebraicTol{1e-12, 1e-12};
constexpr Tolerances kConstraintTol{1e-14, 1e-14};
constexpr Tolerances kDifferentialTol{1e-9, 1e-9};
constexpr Tolerances kDualityTol{1e-10, 1e-10};
constexpr Tolerances kBaseTol{1e-10, 1e-10};
constexpr Tolerances kStrictTol{0.0, 0.0};

LiftVector random_lift(Rng& rng, int n) {
  LiftVector a = LiftVector::zero(n);
  for (int i = 0; i < n; ++i) a.h(i) = rng.uniform(-1.0, 1.0);
  for (int i = 0; i < n; ++i) a.v(i) = rng.uniform(-1.0, 1.0);
  return a;
}

// gbar(B, C) for adapted basis fields as a jet on TM.
Jet gbar_coefficient(const TmPoint& tp, Lift lb, int i, Lift lc, int j) {
  const int nv = 2 * tp.dim();
  const Jet gij = tp.base().metric_jets()(i, j).embedded(nv);
  if (lb == kH && lc == kH) return tp.alpha_jet() * gij;
  if (lb == kV && lc == kV) return tp.delta_jet() * gij;
  return -1.0 * tp.sigma_jet() * gij;
}

Residual base_identities(const BasePoint& bp) {
  const int n = bp.dim();
  std::vector<double> r(static_cast<std::size_t>(n * n * n * n));
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = 0; d < n; ++d) r[static_cast<std::size_t>(((a * n + b) * n + c) * n + d)] = bp.riemann_lowered(a, b, c, d);
      }
    }
  }
  return riemann_identities(r, n);
}

Residual base_metric_compatibility(const BasePoint& bp) {
  const int n = bp.dim();
  double worst = 0.0;
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double v = bp.metric_jets()(i, j).d(k);
        for (int l = 0; l < n; ++l) v -= bp.gamma(l, k, i) * bp.metric()(l, j) + bp.gamma(l, k, j) * bp.metric()(i, l);
        worst = std::max(worst, std::abs(v));
      }
    }
  }
  return {worst, worst};
}

Residual base_second_bianchi(const BasePoint& bp) {
  const int n = bp.dim();
  double worst = 0.0;
  double scale = 1.0;
  for (int m = 0; m < n; ++m) {
    for (int l = 0; l < n; ++l) {
      for (int k = 0; k < n; ++k) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const double v = bp.nabla_riemann(m, l, k, i, j) + bp.nabla_riemann(i, l, k, j, m) +
                             bp.nabla_riemann(j, l, k, m, i);
            scale = std::max(scale, std::abs(bp.nabla_riemann(m, l, k, i, j)));
            worst = std::max(worst, std::abs(v));
          }
        }
      }
    }
  }
  return {worst, worst / scale};
}

Residual base_sectional_basis(const BasePoint& bp) {
  if (bp.dim() < 2) return {};
  const int n = bp.dim();
  Residual r;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const Vec X = Vec::Unit(n, i);
      const Vec Y = Vec::Unit(n, j);
      r.merge(scalar_residual(bp.sectional(X, Y), bp.sectional(2.0 * X - 0.5 * Y, 0.75 * X + 1.5 * Y)));
    }
  }
  return r;
}

Residual oracle_metric_compatibility(const TmOracle& orc) {
  const int m = 2 * orc.dim();
  const JetMatrix& g = orc.metric_jets();
  double worst = 0.0;
  for (int c = 0; c < m; ++c) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) {
        double v = g(a, b).d(c);
        for (int d = 0; d < m; ++d) {
          v -= orc.christoffel(d, c, a) * orc.metric()(d, b) + orc.christoffel(d, c, b) * orc.metric()(a, d);
        }
        worst = std::max(worst, std::abs(v));
      }
    }
  }
  return {worst, worst};
}

Residual oracle_christoffel_symmetry(const TmOracle& orc) {
  const int m = 2 * orc.dim();
  double worst = 0.0;
  for (int c = 0; c < m; ++c) {
    for (int a = 0; a < m; ++a) {
      for (int b = 0; b < m; ++b) worst = std::max(worst, std::abs(orc.christoffel(c, a, b) - orc.christoffel(c, b, a)));
    }
  }
  return {worst, worst};
}

Residual oracle_identities(const TmOracle& orc) {
  const int m = 2 * orc.dim();
  std::vector<double> r(static_cast<std::size_t>(m * m * m * m));
  for (int a = 0; a < m; ++a) {
    for (int b = 0; b < m; ++b) {
      for (int c = 0; c < m; ++c) {
        for (int d = 0; d < m; ++d) {
          double s = 0.0;
          for (int l = 0; l < m; ++l) s += orc.riemann_component(l, c, a, b) * orc.metric()(l, d);
          r[static_cast<std::size_t>(((a * m + b) * m + c) * m + d)] = s;
        }
      }
    }
  }
  return riemann_identities(r, m);
}

}  // namespace

std::vector<CheckResult> invariant_suite(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts,
                                         std::uint64_t seed) {
  const bool sigma_zero = sg.params.sigma_vanishes();
  std::vector<CheckSpec> specs = {
      {"invariant.base.metric_compatibility", CheckKind::Check, kBaseTol},
      {"invariant.base.riemann_identities", CheckKind::Check, kBaseTol},
      {"invariant.base.second_bianchi", CheckKind::Check, kBaseTol},
      {"invariant.base.sectional_basis_change", CheckKind::Check, kBaseTol},
      {"invariant.constraint", CheckKind::Check, kConstraintTol},
      {"invariant.j_squared", CheckKind::Check, kAlgebraicTol},
      {"invariant.hermitian", CheckKind::Check, kAlgebraicTol},
      {"invariant.positive_definite", CheckKind::Check, kStrictTol},
      {"invariant.gradient_duality", CheckKind::Check, kDualityTol},
      {"invariant.metric_compatibility", CheckKind::Check, kDifferentialTol},
      {"invariant.torsion_free", CheckKind::Check, kDifferentialTol},
      {"invariant.oracle.frame_change_round_trip", CheckKind::Check, kConstraintTol},
      {"invariant.oracle.metric_consistency", CheckKind::Check, kAlgebraicTol},
      {"invariant.oracle.christoffel_symmetry", CheckKind::Check, kAlgebraicTol},
      {"invariant.oracle.metric_compatibility", CheckKind::Check, kDifferentialTol},
      {"invariant.oracle.riemann_identities", CheckKind::Check, kDifferentialTol},
  };
  if (sigma_zero) {
    specs.push_back({"invariant.closed.riemann_identities", CheckKind::Check, kDifferentialTol});
    specs.push_back({"invariant.closed.tensoriality", CheckKind::Check, kAlgebraicTol});
    if (sg.dim() >= 2) specs.push_back({"invariant.closed.sectional_consistency", CheckKind::Check, kDualityTol});
  }

  return run_points(specs, pts, [&](const TangentPoint& p, int index) {
    const TmPoint tp(sg, p);
    const TmOracle orc(sg, p);
    const BasePoint& bp = tp.base();
    const int n = sg.dim();
    // Each point has its own stream so results do not depend on scheduling.
    Rng rng(seed ^ (0x9e3779b97f4a7c15ULL * static_cast<std::uint64_t>(index + 1)));
    std::vector<Residual> r;

    r.push_back(base_metric_compatibility(bp));
    r.push_back(base_identities(bp));
    r.push_back(base_second_bianchi(bp));
    r.push_back(base_sectional_basis(bp));
    r.push_back(scalar_residual(tp.alpha() * tp.delta() - tp.sigma() * tp.sigma(), 1.0));

    Residual jj;
    Residual herm;
    Residual dual;
    for (int k = 0; k < 20; ++k) {
      const LiftVector A = random_lift(rng, n);
      const LiftVector B = random_lift(rng, n);
      jj.merge(vector_residual(tp, tp.j_apply(tp.j_apply(A)), -A));
      herm.merge(scalar_residual(tp.gbar(tp.j_apply(A), tp.j_apply(B)), tp.gbar(A, B)));
      double af = 0.0;
      for (int i = 0; i < n; ++i) {
        const Vec e = Vec::Unit(n, i);
        af += A.h(i) * tp.hderiv(e, tp.alpha_jet()).value() + A.v(i) * tp.vderiv(e, tp.alpha_jet()).value();
      }
      dual.merge(scalar_residual(tp.gbar(tp.grad_alpha(), A), af));
    }
    r.push_back(jj);
    r.push_back(herm);
    {
      const Eigen::SelfAdjointEigenSolver<Mat> es(orc.metric(), Eigen::EigenvaluesOnly);
      const double lo = es.eigenvalues().minCoeff();
      r.push_back(lo > 0.0 ? Residual{} : Residual{std::abs(lo) + 1.0, 1.0});
    }
    r.push_back(dual);

    // A(gbar(B, C)) = gbar(nabla_A B, C) + gbar(B, nabla_A C) on lifted coordinate fields.
    Residual compat;
    for (const Lift la : {kH, kV}) {
      for (int k = 0; k < n; ++k) {
        const Vec X = Vec::Unit(n, k);
        for (const Lift lb : {kH, kV}) {
          for (const Lift lc : {kH, kV}) {
            for (int i = 0; i < n; ++i) {
              for (int j = 0; j < n; ++j) {
                const double lhs = tp.lift_deriv(la, X, gbar_coefficient(tp, lb, i, lc, j)).value();
                const double rhs = tp.gbar(tp.nabla(connection_case(la, lb), X, Vec::Unit(n, i)), lift(lc, Vec::Unit(n, j))) +
                                   tp.gbar(lift(lb, Vec::Unit(n, i)), tp.nabla(connection_case(la, lc), X, Vec::Unit(n, j)));
                compat.merge(scalar_residual(lhs, rhs));
              }
            }
          }
        }
      }
    }
    r.push_back(compat);

    // [X^h, Y^h] = -(R(X,Y)u)^v, [X^h, Y^v] = (nabla_X Y)^v, [X^v, Y^v] = 0.
    Residual torsion;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const Vec X = Vec::Unit(n, i);
        const Vec Y = Vec::Unit(n, j);
        torsion.merge(vector_residual(tp, tp.nabla(ConnectionCase::HH, X, Y) - tp.nabla(ConnectionCase::HH, Y, X),
                                      LiftVector::vertical(-bp.curvature(X, Y, p.u))));
        torsion.merge(vector_residual(tp, tp.nabla(ConnectionCase::HV, X, Y) - tp.nabla(ConnectionCase::VH, Y, X),
                                      LiftVector::vertical(bp.covariant(X, Y))));
        torsion.merge(vector_residual(tp, tp.nabla(ConnectionCase::VV, X, Y) - tp.nabla(ConnectionCase::VV, Y, X),
                                      LiftVector::zero(n)));
      }
    }
    r.push_back(torsion);

    Residual round_trip;
    for (int k = 0; k < 5; ++k) {
      const LiftVector A = random_lift(rng, n);
      const LiftVector back = orc.frame().to_adapted(orc.frame().to_coordinates(A));
      const double a = (back.stacked() - A.stacked()).norm();
      round_trip.merge({a, a / std::max(1.0, A.stacked().norm())});
      const Vec c = orc.frame().matrix() * A.stacked();
      const double m = (c - orc.frame().to_coordinates(A)).norm() +
                       (orc.frame().inverse() * c - A.stacked()).norm();
      round_trip.merge({m, m / std::max(1.0, A.stacked().norm())});
    }
    r.push_back(round_trip);
    {
      const Mat M = orc.frame().matrix();
      const Mat adapted = M.transpose() * orc.metric() * M;
      const double a = (adapted - tp.gbar_matrix()).cwiseAbs().maxCoeff();
      r.push_back({a, a / std::max(1.0, tp.gbar_matrix().cwiseAbs().maxCoeff())});
    }
    r.push_back(oracle_christoffel_symmetry(orc));
    r.push_back(oracle_metric_compatibility(orc));
    r.push_back(oracle_identities(orc));

    if (sigma_zero) {
      r.push_back(riemann_identities(closed_riemann_lowered(tp), 2 * n));
      Residual tens;
      const double lambda = 2.5;
      for (const auto& cl : curvature_lifts()) {
        for (int i = 0; i < n; ++i) {
          for (int j = 0; j < n; ++j) {
            const Vec X = Vec::Unit(n, i);
            const Vec Y = Vec::Unit(n, j);
            tens.merge(vector_residual(tp, tp.riemann(cl.c, lambda * X, Y, Y).total(),
                                       lambda * tp.riemann(cl.c, X, Y, Y).total()));
          }
        }
      }
      r.push_back(tens);
      if (n >= 2) {
        Residual cons;
        const Mat& F = bp.frame();
        Readings traced;
        traced.derived = DerivedReading::FromCurvature;
        for (const auto& [i, j] : frame_pairs(n)) {
          cons.merge(scalar_residual(tp.sectional(SectionalCase::HH, F.col(i), F.col(j)).total(),
                                     tp.sectional(SectionalCase::HH, F.col(i), F.col(j), traced).total()));
        }
        r.push_back(cons);
      }
    }
    return r;
  });
}

// ---------------------------------------------------------------------------
// Suite registry

const std::vector<std::string>& suite_names() {
  static const std::vector<std::string> v = {"connection", "curvature", "ricci", "sectional", "laplacian", "invariants"};
  return v;
}

bool suite_needs_sigma_zero(const std::string& suite) {
  return suite == "curvature" || suite == "ricci" || suite == "sectional" || suite == "laplacian";
}

std::vector<CheckResult> run_suite(const std::string& suite, const ScenarioGeometry& sg,
                                   const std::vector<TangentPoint>& pts, std::uint64_t seed) {
  if (suite == "connection") return compare_connection(sg, pts);
  if (suite == "curvature") return compare_curvature(sg, pts);
  if (suite == "ricci") return compare_ricci(sg, pts);
  if (suite == "sectional") return compare_sectional(sg, pts);
  if (suite == "laplacian") return compare_laplacian(sg, pts);
  if (suite == "invariants") return invariant_suite(sg, pts, seed);
  throw std::invalid_argument("unknown suite: " + suite);
}

// ---------------------------------------------------------------------------
// Audit engine

const std::vector<std::string>& equation_ids() {
  static const std::vector<std::string> v = {"hhh",     "hhv",     "hvh",  "vhv",  "vvh",  "vvv",
                                             "ricci_h", "ricci_v", "K_hh", "K_hv", "K_vv", "laplacian"};
  return v;
}

bool is_flagged_equation(const std::string& id) {
  return id == "hhv" || id == "vhv" || id == "ricci_h" || id == "K_hv" || id == "K_vv";
}

namespace {

// One evaluation of one equation under one reading: terms and oracle value as
// stacked vectors, with the metric used for norms.
struct Evaluation {
  std::vector<std::string> labels;
  std::vector<bool> flagged;
  std::vector<Vec> terms;
  Vec oracle;
  Mat metric;
  std::string arguments;
};

struct ReadingChoice {
  std::string name;
  Readings readings;
};

std::vector<ReadingChoice> readings_for(const std::string& eq) {
  Readings base;
  if (eq == "hhv") {
    Readings comp;
    comp.hhv = HhvReading::Composition;
    return {{"derivation", base}, {"composition", comp}};
  }
  if (eq == "vhv") {
    Readings alt;
    alt.vhv = VhvReading::Alternative;
    return {{"as_printed_1/(4a^4)", base}, {"alternative_1/(4a^2)", alt}};
  }
  if (eq == "ricci_h" || eq == "ricci_v" || eq == "K_hv" || eq == "K_vv") {
    Readings traced;
    traced.derived = DerivedReading::FromCurvature;
    return {{"as_printed", base}, {"traced_from_curvature", traced}};
  }
  return {{"as_printed", base}};
}

double gnorm(const Mat& G, const Vec& v) { return std::sqrt(std::max(0.0, v.dot(G * v))); }

Residual eval_residual(const Mat& G, const Vec& closed, const Vec& oracle) {
  const double a = gnorm(G, closed - oracle);
  return {a, a / std::max({gnorm(G, closed), gnorm(G, oracle), 1.0})};
}

std::string basis_name(const char* slot, int i) { return std::string(slot) + "=e" + std::to_string(i + 1); }
std::string frame_name(const char* slot, int i) { return std::string(slot) + "=E" + std::to_string(i + 1); }

void push_vector_terms(Evaluation& ev, const TermBreakdown& b) {
  for (const auto& t : b.terms) {
    ev.labels.push_back(t.label);
    ev.flagged.push_back(t.flagged);
    ev.terms.push_back(t.value.stacked());
  }
}

void push_scalar_terms(Evaluation& ev, const ScalarBreakdown& b) {
  for (const auto& t : b.terms) {
    ev.labels.push_back(t.label);
    ev.flagged.push_back(t.flagged);
    ev.terms.push_back(Vec::Constant(1, t.value));
  }
}

std::vector<Evaluation> evaluate(const ScenarioGeometry& sg, const TangentPoint& p, const std::string& eq,
                                 const Readings& readings) {
  const TmPoint tp(sg, p);
  const TmOracle orc(sg, p);
  const int n = sg.dim();
  const Mat G = tp.gbar_matrix();
  const Mat scalar_metric = Mat::Identity(1, 1);
  std::vector<Evaluation> out;

  for (const auto& cl : curvature_lifts()) {
    if (eq != to_string(cl.c)) continue;
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
          const Vec X = Vec::Unit(n, i);
          const Vec Y = Vec::Unit(n, j);
          const Vec Z = Vec::Unit(n, k);
          Evaluation ev;
          push_vector_terms(ev, tp.riemann(cl.c, X, Y, Z, readings));
          ev.oracle = orc.riemann(lift(cl.x, X), lift(cl.y, Y), lift(cl.z, Z)).stacked();
          ev.metric = G;
          ev.arguments = basis_name("X", i) + " " + basis_name("Y", j) + " " + basis_name("Z", k);
          out.push_back(std::move(ev));
        }
      }
    }
    return out;
  }
  if (eq == "ricci_h" || eq == "ricci_v") {
    const Lift l = eq == "ricci_h" ? kH : kV;
    for (int i = 0; i < n; ++i) {
      const Vec X = Vec::Unit(n, i);
      Evaluation ev;
      push_vector_terms(ev, tp.ricci(l, X, readings));
      ev.oracle = orc.ricci(lift(l, X)).stacked();
      ev.metric = G;
      ev.arguments = basis_name("X", i);
      out.push_back(std::move(ev));
    }
    return out;
  }
  if (eq == "K_hh" || eq == "K_hv" || eq == "K_vv") {
    const SectionalCase c = eq == "K_hh" ? SectionalCase::HH : eq == "K_hv" ? SectionalCase::HV : SectionalCase::VV;
    const Lift lx = c == SectionalCase::VV ? kV : kH;
    const Lift ly = c == SectionalCase::HH ? kH : kV;
    const Mat& F = tp.base().frame();
    for (const auto& [i, j] : frame_pairs(n)) {
      Evaluation ev;
      push_scalar_terms(ev, tp.sectional(c, F.col(i), F.col(j), readings));
      ev.oracle = Vec::Constant(1, orc.sectional(lift(lx, F.col(i)), lift(ly, F.col(j))));
      ev.metric = scalar_metric;
      ev.arguments = frame_name("X", i) + " " + frame_name("Y", j);
      out.push_back(std::move(ev));
    }
    return out;
  }
  if (eq == "laplacian") {
    Evaluation ev;
    push_scalar_terms(ev, tp.laplacian_terms());
    ev.oracle = Vec::Constant(1, orc.laplacian(orc.alpha_jet()));
    ev.metric = scalar_metric;
    ev.arguments = "f=alpha";
    out.push_back(std::move(ev));
    return out;
  }
  throw std::invalid_argument("unknown equation id: " + eq);
}

Vec sum_terms(const Evaluation& ev, std::size_t skip = static_cast<std::size_t>(-1)) {
  Vec s = Vec::Zero(ev.oracle.size());
  for (std::size_t t = 0; t < ev.terms.size(); ++t) {
    if (t != skip) s += ev.terms[t];
  }
  return s;
}

}  // namespace

AuditRecord audit_equation(const ScenarioGeometry& sg, const std::vector<TangentPoint>& pts,
                           const std::string& equation) {
  if (std::find(equation_ids().begin(), equation_ids().end(), equation) == equation_ids().end()) {
    throw std::invalid_argument("unknown equation id: " + equation);
  }
  require_sigma_zero(sg, ("equation " + equation).c_str());

  const auto choices = readings_for(equation);
  const int np = static_cast<int>(pts.size());
  // evals[reading][point] -> evaluations
  std::vector<std::vector<std::vector<Evaluation>>> evals(choices.size(),
                                                          std::vector<std::vector<Evaluation>>(static_cast<std::size_t>(np)));
  parallel_for(np, [&](int i) {
    for (std::size_t c = 0; c < choices.size(); ++c) {
      evals[c][static_cast<std::size_t>(i)] = evaluate(sg, pts[static_cast<std::size_t>(i)], equation, choices[c].readings);
    }
  });

  AuditRecord rec;
  rec.equation = equation;
  rec.flagged = is_flagged_equation(equation);
  rec.default_reading = choices.front().name;
  rec.tolerance = sg.tolerance;

  for (std::size_t c = 0; c < choices.size(); ++c) {
    AuditReading reading{choices[c].name, 0.0, 0.0, true};
    for (const auto& per_point : evals[c]) {
      for (const auto& ev : per_point) {
        const Residual r = eval_residual(ev.metric, sum_terms(ev), ev.oracle);
        reading.max_abs_residual = std::max(reading.max_abs_residual, r.abs);
        reading.max_rel_residual = std::max(reading.max_rel_residual, r.rel);
        if (!r.within(sg.tolerance)) reading.agrees = false;
      }
    }
    rec.readings.push_back(reading);
  }

  // Term table and per-evaluation records use the default reading. The term
  // list is fixed per equation except for the traced readings, which are not
  // the default.
  const auto& base = evals.front();
  std::map<std::size_t, AuditTerm> terms;
  for (int i = 0; i < np; ++i) {
    for (const auto& ev : base[static_cast<std::size_t>(i)]) {
      const Vec total = sum_terms(ev);
      const Residual r = eval_residual(ev.metric, total, ev.oracle);
      AuditEvaluation ae;
      ae.point_index = i;
      ae.arguments = ev.arguments;
      ae.closed_form.assign(total.data(), total.data() + total.size());
      ae.oracle.assign(ev.oracle.data(), ev.oracle.data() + ev.oracle.size());
      ae.abs_residual = r.abs;
      ae.rel_residual = r.rel;
      rec.evaluations.push_back(std::move(ae));
      rec.max_abs_residual = std::max(rec.max_abs_residual, r.abs);
      rec.max_rel_residual = std::max(rec.max_rel_residual, r.rel);
      for (std::size_t t = 0; t < ev.terms.size(); ++t) {
        AuditTerm& term = terms[t];
        term.label = ev.labels[t];
        term.flagged = ev.flagged[t];
        term.max_magnitude = std::max(term.max_magnitude, gnorm(ev.metric, ev.terms[t]));
        term.max_residual_without =
            std::max(term.max_residual_without, eval_residual(ev.metric, sum_terms(ev, t), ev.oracle).abs);
      }
    }
  }
  for (auto& [idx, term] : terms) rec.terms.push_back(std::move(term));
  rec.verdict = rec.readings.front().agrees ? "agrees" : "disagrees";
  return rec;
}

}  // namespace tmgeom
