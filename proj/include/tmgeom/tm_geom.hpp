#pragma once

#include "tmgeom/base_geom.hpp"
#include "tmgeom/expr.hpp"
#include "tmgeom/jet.hpp"

#include <optional>
#include <string>
#include <vector>

namespace tmgeom {

/// Raised when a closed-form formula is asked for outside its hypotheses
/// (curvature formulas with sigma != 0).
class UnsupportedError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Tangent vector to TM in the adapted frame {(d_i)^h, (d_i)^v}.
struct LiftVector {
  Vec h;
  Vec v;

  static LiftVector zero(int n) { return {Vec::Zero(n), Vec::Zero(n)}; }
  static LiftVector horizontal(const Vec& X) { return {X, Vec::Zero(X.size())}; }
  static LiftVector vertical(const Vec& X) { return {Vec::Zero(X.size()), X}; }

  [[nodiscard]] int dim() const { return static_cast<int>(h.size()); }
  [[nodiscard]] LiftVector h_part() const { return horizontal(h); }
  [[nodiscard]] LiftVector v_part() const { return vertical(v); }
  /// Stacked (h, v) components.
  [[nodiscard]] Vec stacked() const;
  static LiftVector from_stacked(const Vec& s);

  LiftVector& operator+=(const LiftVector& o) {
    h += o.h;
    v += o.v;
    return *this;
  }
  LiftVector& operator-=(const LiftVector& o) {
    h -= o.h;
    v -= o.v;
    return *this;
  }
  LiftVector& operator*=(double s) {
    h *= s;
    v *= s;
    return *this;
  }
  friend LiftVector operator+(LiftVector a, const LiftVector& b) { return a += b; }
  friend LiftVector operator-(LiftVector a, const LiftVector& b) { return a -= b; }
  friend LiftVector operator*(double s, LiftVector a) { return a *= s; }
  friend LiftVector operator*(LiftVector a, double s) { return a *= s; }
  friend LiftVector operator-(LiftVector a) { return a *= -1.0; }
};

struct TangentPoint {
  Vec x;
  Vec u;

  /// (x, u) as one 2n-vector, the chart point of TM.
  [[nodiscard]] std::vector<double> chart() const;
};

/// alpha and sigma as expressions on TM; delta = (1 + sigma^2) / alpha so
/// that alpha * delta - sigma^2 = 1 holds identically.
struct IsotropicParams {
  ExprAst alpha;
  ExprAst sigma;

  /// True when sigma is the constant zero.
  [[nodiscard]] bool sigma_vanishes() const;
};

struct Tolerances {
  double relative = 1e-8;
  double absolute = 1e-10;
};

/// Immutable bundle of everything that defines the geometry of a scenario.
struct ScenarioGeometry {
  ChartMetric metric;
  IsotropicParams params;
  int jet_order = 3;
  Tolerances tolerance;

  ScenarioGeometry(ChartMetric m, IsotropicParams p, int order = 3, Tolerances tol = {});
  [[nodiscard]] int dim() const { return metric.dim(); }
};

enum class Lift { Horizontal, Vertical };
enum class ConnectionCase { HH, HV, VH, VV };
enum class CurvatureCase { HHH, HHV, HVH, VHV, VVH, VVV };
enum class SectionalCase { HH, HV, VV };
/// Restricts a gradient field to one of its adapted parts before it is
/// differentiated, e.g. h(grad alpha) in the Ricci formulas.
enum class FieldPart { Full, Horizontal, Vertical };

/// Readings of the two curvature terms whose printed form is ambiguous.
enum class HhvReading {
  Derivation,   ///< (R(u,Z).R)(X,Y)u as R(u,Z) acting on R as a derivation.
  Composition,  ///< the same slot read as R(u,Z)R(X,Y)u.
};
enum class VhvReading {
  AsPrinted,    ///< 1/(4 alpha^4) (R(u,X)R(u,Z)Y)^h
  Alternative,  ///< 1/(4 alpha^2) (R(u,X)R(u,Z)Y)^h
};
/// Ricci and the mixed sectional curvatures: the printed closed form, or the
/// value traced out of the closed-form curvature blocks.
enum class DerivedReading { AsPrinted, FromCurvature };

struct Readings {
  HhvReading hhv = HhvReading::Derivation;
  VhvReading vhv = VhvReading::AsPrinted;
  DerivedReading derived = DerivedReading::AsPrinted;
};

std::string to_string(ConnectionCase c);
std::string to_string(CurvatureCase c);
std::string to_string(SectionalCase c);

/// One displayed term of a closed-form equation, kept for audit output.
struct Term {
  std::string label;
  LiftVector value;
  bool flagged = false;
};

struct TermBreakdown {
  std::vector<Term> terms;
  [[nodiscard]] LiftVector total() const;
};

struct ScalarTerm {
  std::string label;
  double value = 0.0;
  bool flagged = false;
};

struct ScalarBreakdown {
  std::vector<ScalarTerm> terms;
  [[nodiscard]] double total() const;
};

/// Closed-form geometry of (TM, gbar) evaluated at one point (p, u).
///
/// All vector arguments are base vectors; they stand for the
/// constant-coefficient coordinate fields with those components at p, which
/// is the extension every derivative term below assumes.
class TmPoint {
 public:
  TmPoint(const ScenarioGeometry& sg, const TangentPoint& pt);

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] const BasePoint& base() const { return base_; }
  [[nodiscard]] const TangentPoint& point() const { return pt_; }
  [[nodiscard]] double alpha() const { return alpha_.value(); }
  [[nodiscard]] double sigma() const { return sigma_.value(); }
  [[nodiscard]] double delta() const { return delta_.value(); }
  [[nodiscard]] const Jet& alpha_jet() const { return alpha_; }
  [[nodiscard]] const Jet& sigma_jet() const { return sigma_; }
  [[nodiscard]] const Jet& delta_jet() const { return delta_; }

  /// A scalar on TM as a jet in the 2n chart variables at this point.
  [[nodiscard]] Jet field(const ExprAst& f) const;

  /// X^h(f) and X^v(f) as jets one order lower, using
  /// X^h = X^i (d/dx^i - Gamma^k_ij u^j d/du^k) and X^v = X^k d/du^k.
  [[nodiscard]] Jet hderiv(const Vec& X, const Jet& f) const;
  [[nodiscard]] Jet vderiv(const Vec& X, const Jet& f) const;
  [[nodiscard]] Jet lift_deriv(Lift lift, const Vec& X, const Jet& f) const;

  [[nodiscard]] LiftVector j_apply(const LiftVector& a) const;
  [[nodiscard]] double gbar(const LiftVector& a, const LiftVector& b) const;
  [[nodiscard]] double norm(const LiftVector& a) const;
  /// Components of gbar in the adapted frame, (h, v) block order.
  [[nodiscard]] Mat gbar_matrix() const;

  /// Levi-Civita connection of gbar on lifted fields, general sigma.
  [[nodiscard]] LiftVector nabla(ConnectionCase c, const Vec& X, const Vec& Y) const;
  /// Gradient of f with respect to gbar.
  [[nodiscard]] LiftVector grad(const Jet& f) const;
  [[nodiscard]] const LiftVector& grad_alpha() const { return grad_alpha_; }
  [[nodiscard]] const LiftVector& grad_sigma() const { return grad_sigma_; }
  [[nodiscard]] const LiftVector& grad_delta() const { return grad_delta_; }
  /// nabla_{X^lift} of the gradient field of f (or of one of its parts).
  [[nodiscard]] LiftVector second_grad(Lift lift, const Vec& X, const Jet& f,
                                       FieldPart part = FieldPart::Full) const;

  // Everything below assumes sigma = 0 and throws UnsupportedError otherwise.

  /// Rough Laplacian of alpha in a g-orthonormal frame that is parallel at p.
  [[nodiscard]] double laplacian() const;
  [[nodiscard]] ScalarBreakdown laplacian_terms() const;
  [[nodiscard]] TermBreakdown riemann(CurvatureCase c, const Vec& X, const Vec& Y, const Vec& Z,
                                      const Readings& readings = {}) const;
  [[nodiscard]] TermBreakdown ricci(Lift lift, const Vec& X, const Readings& readings = {}) const;
  /// X, Y must be g-orthonormal at p.
  [[nodiscard]] ScalarBreakdown sectional(SectionalCase c, const Vec& X, const Vec& Y,
                                          const Readings& readings = {}) const;

 private:
  void require_sigma_zero(const char* what) const;
  [[nodiscard]] LiftVector h(const Vec& X) const { return LiftVector::horizontal(X); }
  [[nodiscard]] LiftVector v(const Vec& X) const { return LiftVector::vertical(X); }
  // Derivatives of alpha along lifts, as numbers at p.
  [[nodiscard]] double ah(const Vec& X) const { return hderiv(X, alpha_).value(); }
  [[nodiscard]] double av(const Vec& X) const { return vderiv(X, alpha_).value(); }
  [[nodiscard]] double second(Lift outer, const Vec& Y, Lift inner, const Vec& Z) const;
  [[nodiscard]] LiftVector hess(Lift lift, const Vec& Y) const {
    return second_grad(lift, Y, alpha_);
  }
  [[nodiscard]] Vec R(const Vec& X, const Vec& Y, const Vec& Z) const { return base_.curvature(X, Y, Z); }
  [[nodiscard]] Vec cov(const Vec& X, const Vec& Y) const { return base_.covariant(X, Y); }
  [[nodiscard]] double g(const Vec& X, const Vec& Y) const { return base_.inner(X, Y); }

  TermBreakdown riemann_hhh(const Vec& X, const Vec& Y, const Vec& Z) const;
  TermBreakdown riemann_hhv(const Vec& X, const Vec& Y, const Vec& Z, HhvReading reading) const;
  TermBreakdown riemann_hvh(const Vec& X, const Vec& Y, const Vec& Z) const;
  TermBreakdown riemann_vhv(const Vec& X, const Vec& Y, const Vec& Z, VhvReading reading) const;
  TermBreakdown riemann_vvh(const Vec& X, const Vec& Y, const Vec& Z) const;
  TermBreakdown riemann_vvv(const Vec& X, const Vec& Y, const Vec& Z) const;
  TermBreakdown ricci_h(const Vec& X) const;
  TermBreakdown ricci_v(const Vec& X) const;
  TermBreakdown ricci_trace(Lift lift, const Vec& X, const Readings& readings) const;

  int n_;
  TangentPoint pt_;
  BasePoint base_;
  std::vector<double> chart_;
  Jet alpha_;
  Jet sigma_;
  Jet delta_;
  bool sigma_zero_;
  // N^k_i = Gamma^k_ij u^j and g^-1 as jets on TM.
  std::vector<Jet> connection_map_;
  JetMatrix g_inv_tm_;
  LiftVector grad_alpha_;
  LiftVector grad_sigma_;
  LiftVector grad_delta_;
};

}  // namespace tmgeom
