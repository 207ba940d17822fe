#pragma once

#include "tmgeom/base_geom.hpp"
#include "tmgeom/jet.hpp"
#include "tmgeom/tm_geom.hpp"

#include <vector>

namespace tmgeom {

/// Basis change between the adapted frame and the coordinate frame
/// {d/dx^i, d/du^k} of TM at one point. With N^k_i = Gamma^k_ij u^j,
/// d/dx^i = (d_i)^h + N^k_i (d_k)^v and d/du^k = (d_k)^v.
class FrameChange {
 public:
  FrameChange() = default;
  explicit FrameChange(Mat connection_map) : N_(std::move(connection_map)) {}

  [[nodiscard]] const Mat& connection_map() const { return N_; }
  /// Adapted (h, v) components -> coordinate (x, u) components.
  [[nodiscard]] Vec to_coordinates(const LiftVector& a) const;
  [[nodiscard]] LiftVector to_adapted(const Vec& c) const;
  /// [[I, 0], [-N, I]] and its inverse [[I, 0], [N, I]].
  [[nodiscard]] Mat matrix() const;
  [[nodiscard]] Mat inverse() const;

 private:
  Mat N_;
};

/// Coordinate-chart computation of the geometry of (TM, gbar): the metric
/// components on the 2n chart, generic Levi-Civita machinery on them, and
/// conversion back to the adapted frame. Shares only jets and base_geom with
/// the closed-form side.
class TmOracle {
 public:
  TmOracle(const ScenarioGeometry& sg, const TangentPoint& pt);

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] const FrameChange& frame() const { return frame_; }
  /// gbar components in coordinates, order-2 jets in all 2n variables.
  [[nodiscard]] const JetMatrix& metric_jets() const { return gbar_; }
  [[nodiscard]] const Mat& metric() const { return gbar_value_; }
  [[nodiscard]] const Mat& inverse_metric() const { return gbar_inv_value_; }
  [[nodiscard]] double christoffel(int c, int a, int b) const { return gamma_(c, a, b).value(); }
  /// R^d_cab on the 2n chart.
  [[nodiscard]] double riemann_component(int d, int c, int a, int b) const {
    return riemann_(d, c, a, b).value();
  }

  [[nodiscard]] double gbar(const LiftVector& a, const LiftVector& b) const;

  /// Coordinate components of the lifted coordinate field X^h or X^v as
  /// order-1 jets on TM.
  [[nodiscard]] std::vector<Jet> lifted_field(Lift lift, const Vec& X) const;
  /// A(f) for a tangent vector A at the point.
  [[nodiscard]] double directional(const LiftVector& a, const Jet& f) const;

  /// nabla of the lifted field Y^{lb} along X^{la}.
  [[nodiscard]] LiftVector nabla(Lift la, const Vec& X, Lift lb, const Vec& Y) const;
  /// R(A, B) C.
  [[nodiscard]] LiftVector riemann(const LiftVector& a, const LiftVector& b, const LiftVector& c) const;
  /// Q(A) = trace_{gbar} of B -> R(A, B) B.
  [[nodiscard]] LiftVector ricci(const LiftVector& a) const;
  [[nodiscard]] double sectional(const LiftVector& a, const LiftVector& b) const;

  /// Scalar operators; f is a jet in the 2n chart variables.
  [[nodiscard]] LiftVector gradient(const Jet& f) const;
  [[nodiscard]] LiftVector hessian_vector(const LiftVector& a, const Jet& f) const;
  [[nodiscard]] double laplacian(const Jet& f) const;

  /// The scenario's alpha as a jet at this point.
  [[nodiscard]] const Jet& alpha_jet() const { return alpha_; }

 private:
  int n_;
  BasePoint base_;
  FrameChange frame_;
  Jet alpha_;
  JetMatrix gbar_;
  JetMatrix gbar_inv_;
  Mat gbar_value_;
  Mat gbar_inv_value_;
  Christoffel gamma_;
  RiemannJets riemann_;
  std::vector<Jet> N_;  // N^k_i as order-2 jets, index k * n + i
};

}  // namespace tmgeom
