#include "tmgeom/oracle.hpp"

#include <cmath>
#include <sstream>

namespace tmgeom {

Vec FrameChange::to_coordinates(const LiftVector& a) const {
  const auto n = N_.rows();
  Vec c(2 * n);
  c << a.h, a.v - N_ * a.h;
  return c;
}

LiftVector FrameChange::to_adapted(const Vec& c) const {
  const auto n = N_.rows();
  return {c.head(n), c.tail(n) + N_ * c.head(n)};
}

Mat FrameChange::matrix() const {
  const auto n = N_.rows();
  Mat m = Mat::Identity(2 * n, 2 * n);
  m.bottomLeftCorner(n, n) = -N_;
  return m;
}

Mat FrameChange::inverse() const {
  const auto n = N_.rows();
  Mat m = Mat::Identity(2 * n, 2 * n);
  m.bottomLeftCorner(n, n) = N_;
  return m;
}

TmOracle::TmOracle(const ScenarioGeometry& sg, const TangentPoint& pt)
    : n_(sg.dim()), base_(sg.metric, std::span<const double>(pt.x.data(), pt.x.size())) {
  const int n = n_;
  const int nv = 2 * n;
  if (pt.u.size() != n) throw std::invalid_argument("tangent point has the wrong dimension");
  const std::vector<double> chart = pt.chart();

  alpha_ = eval_jet(sg.params.alpha, chart, 3);
  if (!(alpha_.value() > 0.0)) {
    std::ostringstream msg;
    msg << "alpha must be positive (alpha = " << alpha_.value() << ")";
    throw DomainError(msg.str());
  }
  const Jet a = alpha_.truncated(2);
  const Jet s = eval_jet(sg.params.sigma, chart, 2);
  const Jet d = (1.0 + s * s) / a;

  // g in 2n variables; Gamma from the base enters through N.
  const JetMatrix g = base_.metric_jets().embedded(nv).truncated(2);
  N_.assign(static_cast<std::size_t>(n * n), Jet(nv, 2));
  Mat Nval(n, n);
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      Jet acc(nv, 2);
      for (int j = 0; j < n; ++j) {
        acc += base_.christoffel()(k, i, j).embedded(nv) * Jet::variable(nv, 2, n + j, pt.u(j));
      }
      N_[static_cast<std::size_t>(k * n + i)] = acc;
      Nval(k, i) = acc.value();
    }
  }
  frame_ = FrameChange(Nval);
  auto N = [&](int k, int i) -> const Jet& { return N_[static_cast<std::size_t>(k * n + i)]; };

  // d/dx^i = (d_i)^h + N^k_i (d_k)^v, d/du^k = (d_k)^v, expanded bilinearly.
  gbar_ = JetMatrix(nv, nv, 2);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      Jet xx = a * g(i, j);
      Jet xu = -1.0 * s * g(i, j);
      for (int l = 0; l < n; ++l) {
        xx -= s * (N(l, j) * g(i, l) + N(l, i) * g(l, j));
        xu += d * N(l, i) * g(l, j);
        for (int k = 0; k < n; ++k) xx += d * N(k, i) * N(l, j) * g(k, l);
      }
      gbar_(i, j) = xx;
      gbar_(i, n + j) = xu;
      gbar_(n + j, i) = xu;
      gbar_(n + i, n + j) = d * g(i, j);
    }
  }
  gbar_inv_ = inverse(gbar_, kMaxMetricCondition);
  gbar_value_ = Mat(nv, nv);
  gbar_inv_value_ = Mat(nv, nv);
  for (int r = 0; r < nv; ++r) {
    for (int c = 0; c < nv; ++c) {
      gbar_value_(r, c) = gbar_(r, c).value();
      gbar_inv_value_(r, c) = gbar_inv_(r, c).value();
    }
  }
  gamma_ = christoffel_symbols(gbar_, gbar_inv_);
  riemann_ = riemann_tensor(gamma_);
}

double TmOracle::gbar(const LiftVector& a, const LiftVector& b) const {
  return frame_.to_coordinates(a).dot(gbar_value_ * frame_.to_coordinates(b));
}

std::vector<Jet> TmOracle::lifted_field(Lift lift, const Vec& X) const {
  const int n = n_;
  const int nv = 2 * n;
  std::vector<Jet> f(static_cast<std::size_t>(nv), Jet(nv, 1));
  if (lift == Lift::Vertical) {
    for (int k = 0; k < n; ++k) f[static_cast<std::size_t>(n + k)] = Jet::constant(nv, 1, X(k));
    return f;
  }
  for (int i = 0; i < n; ++i) f[static_cast<std::size_t>(i)] = Jet::constant(nv, 1, X(i));
  for (int k = 0; k < n; ++k) {
    Jet acc(nv, 1);
    for (int i = 0; i < n; ++i) acc -= X(i) * N_[static_cast<std::size_t>(k * n + i)].truncated(1);
    f[static_cast<std::size_t>(n + k)] = acc;
  }
  return f;
}

double TmOracle::directional(const LiftVector& a, const Jet& f) const {
  const Vec c = frame_.to_coordinates(a);
  double r = 0.0;
  for (int i = 0; i < 2 * n_; ++i) r += c(i) * f.d(i);
  return r;
}

namespace {

// (nabla_A B)^d = A^c d_c B^d + Gamma^d_ce A^c B^e, all in coordinates.
Vec covariant(const Christoffel& gamma, const Vec& A, const std::vector<Jet>& B) {
  const auto nv = A.size();
  Vec r = Vec::Zero(nv);
  for (Eigen::Index d = 0; d < nv; ++d) {
    double s = 0.0;
    for (Eigen::Index c = 0; c < nv; ++c) {
      s += A(c) * B[static_cast<std::size_t>(d)].d(static_cast<int>(c));
      for (Eigen::Index e = 0; e < nv; ++e) {
        s += gamma(static_cast<int>(d), static_cast<int>(c), static_cast<int>(e)).value() * A(c) *
             B[static_cast<std::size_t>(e)].value();
      }
    }
    r(d) = s;
  }
  return r;
}

}  // namespace

LiftVector TmOracle::nabla(Lift la, const Vec& X, Lift lb, const Vec& Y) const {
  const LiftVector A = la == Lift::Horizontal ? LiftVector::horizontal(X) : LiftVector::vertical(X);
  return frame_.to_adapted(covariant(gamma_, frame_.to_coordinates(A), lifted_field(lb, Y)));
}

LiftVector TmOracle::riemann(const LiftVector& a, const LiftVector& b, const LiftVector& c) const {
  const int nv = 2 * n_;
  const Vec A = frame_.to_coordinates(a);
  const Vec B = frame_.to_coordinates(b);
  const Vec C = frame_.to_coordinates(c);
  Vec r = Vec::Zero(nv);
  for (int d = 0; d < nv; ++d) {
    for (int k = 0; k < nv; ++k) {
      if (C(k) == 0.0) continue;
      for (int i = 0; i < nv; ++i) {
        if (A(i) == 0.0) continue;
        for (int j = 0; j < nv; ++j) r(d) += riemann_(d, k, i, j).value() * A(i) * B(j) * C(k);
      }
    }
  }
  return frame_.to_adapted(r);
}

LiftVector TmOracle::ricci(const LiftVector& a) const {
  const int nv = 2 * n_;
  const Vec A = frame_.to_coordinates(a);
  Vec r = Vec::Zero(nv);
  for (int d = 0; d < nv; ++d) {
    for (int c = 0; c < nv; ++c) {
      for (int i = 0; i < nv; ++i) {
        if (A(i) == 0.0) continue;
        for (int b = 0; b < nv; ++b) r(d) += riemann_(d, c, i, b).value() * A(i) * gbar_inv_value_(b, c);
      }
    }
  }
  return frame_.to_adapted(r);
}

double TmOracle::sectional(const LiftVector& a, const LiftVector& b) const {
  const double den = gbar(a, a) * gbar(b, b) - gbar(a, b) * gbar(a, b);
  if (den < 1e-12) throw std::invalid_argument("degenerate plane: A and B are linearly dependent");
  return gbar(riemann(a, b, b), a) / den;
}

LiftVector TmOracle::gradient(const Jet& f) const {
  const int nv = 2 * n_;
  Vec df(nv);
  for (int i = 0; i < nv; ++i) df(i) = f.d(i);
  return frame_.to_adapted(gbar_inv_value_ * df);
}

LiftVector TmOracle::hessian_vector(const LiftVector& a, const Jet& f) const {
  const int nv = 2 * n_;
  if (f.order() < 2) throw std::invalid_argument("hessian_vector needs a jet of order >= 2");
  std::vector<Jet> G(static_cast<std::size_t>(nv), Jet(nv, 1));
  for (int d = 0; d < nv; ++d) {
    Jet acc(nv, 1);
    for (int e = 0; e < nv; ++e) acc += gbar_inv_(d, e).truncated(1) * f.partial(e).truncated(1);
    G[static_cast<std::size_t>(d)] = acc;
  }
  return frame_.to_adapted(covariant(gamma_, frame_.to_coordinates(a), G));
}

double TmOracle::laplacian(const Jet& f) const {
  const int nv = 2 * n_;
  double r = 0.0;
  for (int a = 0; a < nv; ++a) {
    for (int b = 0; b < nv; ++b) {
      double h = f.d(a, b);
      for (int c = 0; c < nv; ++c) h -= gamma_(c, a, b).value() * f.d(c);
      r += gbar_inv_value_(a, b) * h;
    }
  }
  return r;
}

}  // namespace tmgeom
