#pragma once

#include "tmgeom/expr.hpp"
#include "tmgeom/jet.hpp"

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace tmgeom {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Metric inversion refuses value matrices worse conditioned than this.
inline constexpr double kMaxMetricCondition = 1e12;

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Riemannian metric on a chart box, given by expressions in x1..xn.
class ChartMetric {
 public:
  ChartMetric() = default;
  /// `components` is row-major n*n. Throws std::invalid_argument when the
  /// matrix references fiber variables, has the wrong shape, or is not
  /// symmetric as expressions or numerically on a lattice of interior points.
  ChartMetric(int n, std::vector<ExprAst> components, std::vector<Interval> domain);

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] const ExprAst& component(int i, int j) const {
    return g_[static_cast<std::size_t>(i * n_ + j)];
  }
  [[nodiscard]] const std::vector<Interval>& domain() const { return domain_; }
  [[nodiscard]] bool contains(std::span<const double> x) const;

  /// Components as jets in x only (n variables).
  [[nodiscard]] JetMatrix jets(std::span<const double> x, int order) const;

 private:
  int n_ = 0;
  std::vector<ExprAst> g_;
  std::vector<Interval> domain_;
};

/// Christoffel symbols Gamma^k_ij as jets; (k, i, j) indexing.
class Christoffel {
 public:
  Christoffel() = default;
  Christoffel(int dim, int nvars, int order);

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] int order() const { return c_.empty() ? 0 : c_.front().order(); }
  Jet& operator()(int k, int i, int j) { return c_[index(k, i, j)]; }
  const Jet& operator()(int k, int i, int j) const { return c_[index(k, i, j)]; }

 private:
  [[nodiscard]] std::size_t index(int k, int i, int j) const {
    return static_cast<std::size_t>((k * dim_ + i) * dim_ + j);
  }
  int dim_ = 0;
  std::vector<Jet> c_;
};

/// Curvature components R^l_kij with R(d_i, d_j) d_k = R^l_kij d_l.
class RiemannJets {
 public:
  RiemannJets() = default;
  RiemannJets(int dim, int nvars, int order);

  [[nodiscard]] int dim() const { return dim_; }
  Jet& operator()(int l, int k, int i, int j) { return r_[index(l, k, i, j)]; }
  const Jet& operator()(int l, int k, int i, int j) const { return r_[index(l, k, i, j)]; }

 private:
  [[nodiscard]] std::size_t index(int l, int k, int i, int j) const {
    return static_cast<std::size_t>(((l * dim_ + k) * dim_ + i) * dim_ + j);
  }
  int dim_ = 0;
  std::vector<Jet> r_;
};

// Generic Levi-Civita machinery. Chart coordinate a is jet variable a, so
// these work equally for the base chart and for the 2n-dimensional chart of
// TM. Each step returns jets one order lower than its input.

/// Gamma^k_ij = 1/2 g^kl (d_i g_jl + d_j g_il - d_l g_ij).
Christoffel christoffel_symbols(const JetMatrix& g, const JetMatrix& g_inv);

/// R^l_kij = d_i Gamma^l_jk - d_j Gamma^l_ik + Gamma^l_im Gamma^m_jk - Gamma^l_jm Gamma^m_ik,
/// which realizes R(X,Y)Z = nabla_X nabla_Y Z - nabla_Y nabla_X Z - nabla_[X,Y] Z.
RiemannJets riemann_tensor(const Christoffel& gamma);

/// Orthonormal frame (columns) from Gram-Schmidt on the coordinate frame in
/// index order.
Mat gram_schmidt(const Mat& metric);

/// Everything the tangent-bundle formulas consume from the base at one point.
class BasePoint {
 public:
  BasePoint(const ChartMetric& m, std::span<const double> x);

  [[nodiscard]] int dim() const { return n_; }
  [[nodiscard]] const Vec& x() const { return x_; }
  [[nodiscard]] const Mat& metric() const { return g_; }
  [[nodiscard]] const Mat& inverse_metric() const { return g_inv_; }
  /// g and g^-1 to order 3, Gamma to order 2, R to order 1 (all in x).
  [[nodiscard]] const JetMatrix& metric_jets() const { return g_jets_; }
  [[nodiscard]] const JetMatrix& inverse_metric_jets() const { return g_inv_jets_; }
  [[nodiscard]] const Christoffel& christoffel() const { return gamma_; }
  [[nodiscard]] const RiemannJets& riemann_jets() const { return riemann_; }

  [[nodiscard]] double gamma(int k, int i, int j) const { return gamma_(k, i, j).value(); }
  [[nodiscard]] double riemann(int l, int k, int i, int j) const { return riemann_(l, k, i, j).value(); }
  /// R_ijkl = g(R(d_i, d_j) d_k, d_l).
  [[nodiscard]] double riemann_lowered(int i, int j, int k, int l) const;
  /// (nabla_m R)^l_kij.
  [[nodiscard]] double nabla_riemann(int m, int l, int k, int i, int j) const {
    return nabla_r_[static_cast<std::size_t>((((m * n_ + l) * n_ + k) * n_ + i) * n_ + j)];
  }

  [[nodiscard]] double inner(const Vec& a, const Vec& b) const { return a.dot(g_ * b); }
  /// nabla_X Y at x for the constant-coefficient extension of Y.
  [[nodiscard]] Vec covariant(const Vec& X, const Vec& Y) const;
  /// R(X, Y) Z.
  [[nodiscard]] Vec curvature(const Vec& X, const Vec& Y, const Vec& Z) const;
  /// g(R(X, Y) Z, W).
  [[nodiscard]] double curvature4(const Vec& X, const Vec& Y, const Vec& Z, const Vec& W) const;
  /// (nabla_Z R)(X, Y) W.
  [[nodiscard]] Vec nabla_curvature(const Vec& Z, const Vec& X, const Vec& Y, const Vec& W) const;
  /// Ricci operator Q(X) = sum_i R(X, E_i) E_i as a matrix.
  [[nodiscard]] const Mat& ricci_operator() const { return ricci_; }
  /// Columns are the Gram-Schmidt orthonormal frame at x.
  [[nodiscard]] const Mat& frame() const { return frame_; }
  /// Sectional curvature of span{X, Y}; throws std::invalid_argument on a
  /// degenerate plane.
  [[nodiscard]] double sectional(const Vec& X, const Vec& Y) const;

 private:
  int n_;
  Vec x_;
  JetMatrix g_jets_;
  JetMatrix g_inv_jets_;
  Mat g_;
  Mat g_inv_;
  Christoffel gamma_;
  RiemannJets riemann_;
  std::vector<double> nabla_r_;
  Mat frame_;
  Mat ricci_;
};

/// Symmetric-matrix positive definiteness via the smallest eigenvalue.
bool positive_definite(const Mat& m);

}  // namespace tmgeom
