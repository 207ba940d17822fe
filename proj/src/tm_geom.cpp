#include "tmgeom/tm_geom.hpp"

#include <cmath>
#include <sstream>

namespace tmgeom {

Vec LiftVector::stacked() const {
  Vec s(h.size() + v.size());
  s << h, v;
  return s;
}

LiftVector LiftVector::from_stacked(const Vec& s) {
  const auto n = s.size() / 2;
  return {s.head(n), s.tail(n)};
}

std::vector<double> TangentPoint::chart() const {
  std::vector<double> c(static_cast<std::size_t>(x.size() + u.size()));
  for (Eigen::Index i = 0; i < x.size(); ++i) c[static_cast<std::size_t>(i)] = x(i);
  for (Eigen::Index i = 0; i < u.size(); ++i) c[static_cast<std::size_t>(x.size() + i)] = u(i);
  return c;
}

bool IsotropicParams::sigma_vanishes() const {
  if (!sigma.is_constant()) return false;
  const std::vector<double> origin(static_cast<std::size_t>(sigma.dimension()), 0.0);
  return eval(sigma, origin) == 0.0;
}

ScenarioGeometry::ScenarioGeometry(ChartMetric m, IsotropicParams p, int order, Tolerances tol)
    : metric(std::move(m)), params(std::move(p)), jet_order(order), tolerance(tol) {
  const int n = metric.dim();
  if (params.alpha.empty() || params.sigma.empty()) throw std::invalid_argument("alpha and sigma are required");
  if (params.alpha.dimension() != n || params.sigma.dimension() != n) {
    throw std::invalid_argument("alpha and sigma must use the metric's dimension");
  }
  if (jet_order != 3) {
    // Curvature of gbar needs third derivatives of g; lower orders cannot
    // evaluate the formulas.
    throw std::invalid_argument("jet order must be 3");
  }
}

std::string to_string(ConnectionCase c) {
  switch (c) {
    case ConnectionCase::HH: return "hh";
    case ConnectionCase::HV: return "hv";
    case ConnectionCase::VH: return "vh";
    case ConnectionCase::VV: return "vv";
  }
  return "?";
}

std::string to_string(CurvatureCase c) {
  switch (c) {
    case CurvatureCase::HHH: return "hhh";
    case CurvatureCase::HHV: return "hhv";
    case CurvatureCase::HVH: return "hvh";
    case CurvatureCase::VHV: return "vhv";
    case CurvatureCase::VVH: return "vvh";
    case CurvatureCase::VVV: return "vvv";
  }
  return "?";
}

std::string to_string(SectionalCase c) {
  switch (c) {
    case SectionalCase::HH: return "hh";
    case SectionalCase::HV: return "hv";
    case SectionalCase::VV: return "vv";
  }
  return "?";
}

LiftVector TermBreakdown::total() const {
  if (terms.empty()) return {};
  LiftVector s = LiftVector::zero(terms.front().value.dim());
  for (const auto& t : terms) s += t.value;
  return s;
}

double ScalarBreakdown::total() const {
  double s = 0.0;
  for (const auto& t : terms) s += t.value;
  return s;
}

TmPoint::TmPoint(const ScenarioGeometry& sg, const TangentPoint& pt)
    : n_(sg.dim()), pt_(pt), base_(sg.metric, std::span<const double>(pt.x.data(), pt.x.size())) {
  if (pt.x.size() != n_ || pt.u.size() != n_) throw std::invalid_argument("tangent point has the wrong dimension");
  if (!sg.metric.contains(std::span<const double>(pt.x.data(), pt.x.size()))) {
    throw std::invalid_argument("point outside the chart domain");
  }
  chart_ = pt.chart();
  const int nv = 2 * n_;
  alpha_ = eval_jet(sg.params.alpha, chart_, 3);
  if (!(alpha_.value() > 0.0)) {
    std::ostringstream msg;
    msg << "alpha must be positive (alpha = " << alpha_.value() << ")";
    throw DomainError(msg.str());
  }
  sigma_ = eval_jet(sg.params.sigma, chart_, 3);
  sigma_zero_ = sg.params.sigma_vanishes();
  delta_ = (1.0 + sigma_ * sigma_) / alpha_;

  connection_map_.assign(static_cast<std::size_t>(n_ * n_), Jet(nv, 2));
  for (int k = 0; k < n_; ++k) {
    for (int i = 0; i < n_; ++i) {
      Jet acc(nv, 2);
      for (int j = 0; j < n_; ++j) {
        acc += base_.christoffel()(k, i, j).embedded(nv) * Jet::variable(nv, 2, n_ + j, pt.u(j));
      }
      connection_map_[static_cast<std::size_t>(k * n_ + i)] = acc;
    }
  }
  g_inv_tm_ = base_.inverse_metric_jets().embedded(nv);

  grad_alpha_ = grad(alpha_);
  grad_sigma_ = grad(sigma_);
  grad_delta_ = grad(delta_);
}

Jet TmPoint::field(const ExprAst& f) const { return eval_jet(f, chart_, 3); }

Jet TmPoint::hderiv(const Vec& X, const Jet& f) const {
  const int order = f.order() - 1;
  if (order < 0) throw std::invalid_argument("cannot differentiate an order-0 jet");
  Jet r(2 * n_, order);
  for (int i = 0; i < n_; ++i) {
    if (X(i) == 0.0) continue;
    Jet term = f.partial(i);
    for (int k = 0; k < n_; ++k) {
      term -= connection_map_[static_cast<std::size_t>(k * n_ + i)].truncated(order) * f.partial(n_ + k);
    }
    r += X(i) * term;
  }
  return r;
}

Jet TmPoint::vderiv(const Vec& X, const Jet& f) const {
  const int order = f.order() - 1;
  if (order < 0) throw std::invalid_argument("cannot differentiate an order-0 jet");
  Jet r(2 * n_, order);
  for (int k = 0; k < n_; ++k) {
    if (X(k) != 0.0) r += X(k) * f.partial(n_ + k);
  }
  return r;
}

Jet TmPoint::lift_deriv(Lift lift, const Vec& X, const Jet& f) const {
  return lift == Lift::Horizontal ? hderiv(X, f) : vderiv(X, f);
}

LiftVector TmPoint::j_apply(const LiftVector& a) const {
  // J(X^h) = alpha X^v + sigma X^h,  J(X^v) = -sigma X^v - delta X^h.
  return {sigma() * a.h - delta() * a.v, alpha() * a.h - sigma() * a.v};
}

double TmPoint::gbar(const LiftVector& a, const LiftVector& b) const {
  return alpha() * g(a.h, b.h) - sigma() * (g(a.h, b.v) + g(a.v, b.h)) + delta() * g(a.v, b.v);
}

double TmPoint::norm(const LiftVector& a) const { return std::sqrt(std::max(0.0, gbar(a, a))); }

Mat TmPoint::gbar_matrix() const {
  const Mat& gm = base_.metric();
  Mat m(2 * n_, 2 * n_);
  m.topLeftCorner(n_, n_) = alpha() * gm;
  m.topRightCorner(n_, n_) = -sigma() * gm;
  m.bottomLeftCorner(n_, n_) = -sigma() * gm;
  m.bottomRightCorner(n_, n_) = delta() * gm;
  return m;
}

LiftVector TmPoint::grad(const Jet& f) const {
  Vec dh(n_);
  Vec dv(n_);
  for (int j = 0; j < n_; ++j) {
    const Vec e = Vec::Unit(n_, j);
    dh(j) = hderiv(e, f).value();
    dv(j) = vderiv(e, f).value();
  }
  // Inverse of [[alpha g, -sigma g], [-sigma g, delta g]] is
  // [[delta g^-1, sigma g^-1], [sigma g^-1, alpha g^-1]].
  const Mat& gi = base_.inverse_metric();
  return {gi * (delta() * dh + sigma() * dv), gi * (sigma() * dh + alpha() * dv)};
}

LiftVector TmPoint::nabla(ConnectionCase c, const Vec& X, const Vec& Y) const {
  const double a = alpha();
  const double s = sigma();
  const double d = delta();
  const Vec& u = pt_.u;
  const double gxy = g(X, Y);
  LiftVector r = LiftVector::zero(n_);
  switch (c) {
    case ConnectionCase::HH: {
      const double xa = hderiv(X, alpha_).value();
      const double ya = hderiv(Y, alpha_).value();
      const double xs = hderiv(X, sigma_).value();
      const double ys = hderiv(Y, sigma_).value();
      r.h = cov(X, Y) - (s / a) * R(u, X, Y) + (xa / (2 * a)) * Y + (ya / (2 * a)) * X;
      r.v = -(s / d) * cov(X, Y) - 0.5 * R(X, Y, u) - (xs / (2 * d)) * Y - (ys / (2 * d)) * X;
      r -= 0.5 * gxy * grad_alpha_;
      break;
    }
    case ConnectionCase::HV: {
      const double xs = hderiv(X, sigma_).value();
      const double ya = vderiv(Y, alpha_).value();
      const double xd = hderiv(X, delta_).value();
      const double ys = vderiv(Y, sigma_).value();
      r.h = -(s / a) * cov(X, Y) + (d / (2 * a)) * R(u, Y, X) - (xs / (2 * a)) * Y + (ya / (2 * a)) * X;
      r.v = cov(X, Y) + (xd / (2 * d)) * Y - (ys / (2 * d)) * X;
      r += 0.5 * gxy * grad_sigma_;
      break;
    }
    case ConnectionCase::VH: {
      const double xa = vderiv(X, alpha_).value();
      const double ys = hderiv(Y, sigma_).value();
      const double xs = vderiv(X, sigma_).value();
      const double yd = hderiv(Y, delta_).value();
      r.h = (d / (2 * a)) * R(u, X, Y) + (xa / (2 * a)) * Y - (ys / (2 * a)) * X;
      r.v = -(xs / (2 * d)) * Y + (yd / (2 * d)) * X;
      r += 0.5 * gxy * grad_sigma_;
      break;
    }
    case ConnectionCase::VV: {
      const double xs = vderiv(X, sigma_).value();
      const double ys = vderiv(Y, sigma_).value();
      const double xd = vderiv(X, delta_).value();
      const double yd = vderiv(Y, delta_).value();
      r.h = -(xs / (2 * a)) * Y - (ys / (2 * a)) * X;
      r.v = (xd / (2 * d)) * Y + (yd / (2 * d)) * X;
      r -= 0.5 * gxy * grad_delta_;
      break;
    }
  }
  return r;
}

LiftVector TmPoint::second_grad(Lift lift, const Vec& X, const Jet& f, FieldPart part) const {
  const int order = f.order() - 1;
  if (order < 1) throw std::invalid_argument("second_grad needs a jet of order >= 2");
  const int nv = 2 * n_;
  const Jet a = alpha_.truncated(order);
  const Jet s = sigma_.truncated(order);
  const Jet d = delta_.truncated(order);
  std::vector<Jet> dh;
  std::vector<Jet> dv;
  for (int j = 0; j < n_; ++j) {
    const Vec e = Vec::Unit(n_, j);
    dh.push_back(hderiv(e, f));
    dv.push_back(vderiv(e, f));
  }
  const bool horizontal = lift == Lift::Horizontal;
  const ConnectionCase onto_h = horizontal ? ConnectionCase::HH : ConnectionCase::VH;
  const ConnectionCase onto_v = horizontal ? ConnectionCase::HV : ConnectionCase::VV;

  LiftVector r = LiftVector::zero(n_);
  for (int i = 0; i < n_; ++i) {
    Jet gh(nv, order);
    Jet gv(nv, order);
    for (int j = 0; j < n_; ++j) {
      const Jet gij = g_inv_tm_(i, j).truncated(order);
      gh += gij * (d * dh[static_cast<std::size_t>(j)] + s * dv[static_cast<std::size_t>(j)]);
      gv += gij * (s * dh[static_cast<std::size_t>(j)] + a * dv[static_cast<std::size_t>(j)]);
    }
    const Vec e = Vec::Unit(n_, i);
    if (part != FieldPart::Vertical) {
      r.h(i) += lift_deriv(lift, X, gh).value();
      r += gh.value() * nabla(onto_h, X, e);
    }
    if (part != FieldPart::Horizontal) {
      r.v(i) += lift_deriv(lift, X, gv).value();
      r += gv.value() * nabla(onto_v, X, e);
    }
  }
  return r;
}

void TmPoint::require_sigma_zero(const char* what) const {
  if (!sigma_zero_) {
    throw UnsupportedError(std::string(what) + " is only available in closed form for sigma = 0");
  }
}

double TmPoint::second(Lift outer, const Vec& Y, Lift inner, const Vec& Z) const {
  return lift_deriv(outer, Y, lift_deriv(inner, Z, alpha_)).value();
}

ScalarBreakdown TmPoint::laplacian_terms() const {
  require_sigma_zero("the closed-form Laplacian");
  const double a = alpha();
  const Mat& frame = base_.frame();
  double hh = 0.0;
  double vv = 0.0;
  double h1 = 0.0;
  double v1 = 0.0;
  for (int i = 0; i < n_; ++i) {
    const Vec E = frame.col(i);
    // Parallel-at-p extension of E_i: the constant-coefficient field minus
    // its first-order Gamma correction, which subtracts (nabla_E E)^h(alpha).
    hh += second(Lift::Horizontal, E, Lift::Horizontal, E) - ah(cov(E, E));
    vv += second(Lift::Vertical, E, Lift::Vertical, E);
    h1 += ah(E) * ah(E);
    v1 += av(E) * av(E);
  }
  return {{{"(1/a) E_i^h(E_i^h(a))", hh / a},
           {"a E_i^v(E_i^v(a))", a * vv},
           {"-(1/a^2) E_i^h(a) E_i^h(a)", -h1 / (a * a)},
           {"E_i^v(a) E_i^v(a)", v1}}};
}

double TmPoint::laplacian() const { return laplacian_terms().total(); }

TermBreakdown TmPoint::riemann(CurvatureCase c, const Vec& X, const Vec& Y, const Vec& Z,
                               const Readings& readings) const {
  require_sigma_zero("the curvature tensor");
  switch (c) {
    case CurvatureCase::HHH: return riemann_hhh(X, Y, Z);
    case CurvatureCase::HHV: return riemann_hhv(X, Y, Z, readings.hhv);
    case CurvatureCase::HVH: return riemann_hvh(X, Y, Z);
    case CurvatureCase::VHV: return riemann_vhv(X, Y, Z, readings.vhv);
    case CurvatureCase::VVH: return riemann_vvh(X, Y, Z);
    case CurvatureCase::VVV: return riemann_vvv(X, Y, Z);
  }
  return {};
}

namespace {
constexpr Lift kH = Lift::Horizontal;
constexpr Lift kV = Lift::Vertical;
}  // namespace

TermBreakdown TmPoint::riemann_hhh(const Vec& X, const Vec& Y, const Vec& Z) const {
  const double a = alpha();
  const double a2 = a * a;
  const Vec& u = pt_.u;
  const LiftVector& G = grad_alpha_;
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value) { b.terms.push_back({label, std::move(value)}); };
  add("(R(X,Y)Z)^h", h(R(X, Y, Z)));
  add("-1/(4a^2) (R(u,R(Y,Z)u)X)^h", -1.0 / (4 * a2) * h(R(u, R(Y, Z, u), X)));
  add("+1/(4a^2) (R(u,R(X,Z)u)Y)^h", 1.0 / (4 * a2) * h(R(u, R(X, Z, u), Y)));
  add("+1/(2a^2) (R(u,R(X,Y)u)Z)^h", 1.0 / (2 * a2) * h(R(u, R(X, Y, u), Z)));
  add("+1/(2a) (nabla_Y Z)^h(a) X^h", ah(cov(Y, Z)) / (2 * a) * h(X));
  add("+3/(4a^2) Y^h(a) Z^h(a) X^h", 3.0 / (4 * a2) * ah(Y) * ah(Z) * h(X));
  add("-1/(2a) Y^h(Z^h(a)) X^h", -second(kH, Y, kH, Z) / (2 * a) * h(X));
  add("-1/(4a) (R(Y,Z)u)^v(a) X^h", -av(R(Y, Z, u)) / (4 * a) * h(X));
  add("-1/(2a) (nabla_X Z)^h(a) Y^h", -ah(cov(X, Z)) / (2 * a) * h(Y));
  add("-3/(4a^2) X^h(a) Z^h(a) Y^h", -3.0 / (4 * a2) * ah(X) * ah(Z) * h(Y));
  add("+1/(2a) X^h(Z^h(a)) Y^h", second(kH, X, kH, Z) / (2 * a) * h(Y));
  add("+1/(4a) (R(X,Z)u)^v(a) Y^h", av(R(X, Z, u)) / (4 * a) * h(Y));
  add("+1/2 ((nabla_Z R)(X,Y)u)^v", 0.5 * v(base_.nabla_curvature(Z, X, Y, u)));
  add("-1/(2a) Y^h(a) (R(X,Z)u)^v", -ah(Y) / (2 * a) * v(R(X, Z, u)));
  add("+1/(2a) X^h(a) (R(Y,Z)u)^v", ah(X) / (2 * a) * v(R(Y, Z, u)));
  add("-1/a Z^h(a) (R(X,Y)u)^v", -ah(Z) / a * v(R(X, Y, u)));
  add("{1/(4a) X^h(a) g(Y,Z) - 1/(4a) Y^h(a) g(X,Z)} grad a",
      (ah(X) * g(Y, Z) - ah(Y) * g(X, Z)) / (4 * a) * G);
  add("+1/2 g(X,Z) nabla_{Y^h} grad a", 0.5 * g(X, Z) * hess(kH, Y));
  add("-1/2 g(Y,Z) nabla_{X^h} grad a", -0.5 * g(Y, Z) * hess(kH, X));
  return b;
}

TermBreakdown TmPoint::riemann_hhv(const Vec& X, const Vec& Y, const Vec& Z, HhvReading reading) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const Vec& u = pt_.u;
  const LiftVector& G = grad_alpha_;
  auto RuZ = [&](const Vec& W) { return R(u, Z, W); };
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value, bool flagged = false) {
    b.terms.push_back({label, std::move(value), flagged});
  };
  add("+1/(2a^2) ((nabla_X R)(u,Z)Y)^h", 1.0 / (2 * a2) * h(base_.nabla_curvature(X, u, Z, Y)));
  add("-1/(2a^2) ((nabla_Y R)(u,Z)X)^h", -1.0 / (2 * a2) * h(base_.nabla_curvature(Y, u, Z, X)));
  add("+1/(2a^3) Y^h(a) (R(u,Z)X)^h", ah(Y) / (2 * a3) * h(RuZ(X)));
  add("-1/(2a^3) X^h(a) (R(u,Z)Y)^h", -ah(X) / (2 * a3) * h(RuZ(Y)));
  add("+1/(4a^3) (R(u,Z)Y)^h(a) X^h", ah(RuZ(Y)) / (4 * a3) * h(X));
  add("+1/(2a) (nabla_Y Z)^v(a) X^h", av(cov(Y, Z)) / (2 * a) * h(X));
  add("+1/(4a^2) Y^h(a) Z^v(a) X^h", ah(Y) * av(Z) / (4 * a2) * h(X));
  add("-1/(2a) Y^h(Z^v(a)) X^h", -second(kH, Y, kV, Z) / (2 * a) * h(X));
  add("-1/(4a^3) (R(u,Z)X)^h(a) Y^h", -ah(RuZ(X)) / (4 * a3) * h(Y));
  add("-1/(2a) (nabla_X Z)^v(a) Y^h", -av(cov(X, Z)) / (2 * a) * h(Y));
  add("-1/(4a^2) X^h(a) Z^v(a) Y^h", -ah(X) * av(Z) / (4 * a2) * h(Y));
  add("+1/(2a) X^h(Z^v(a)) Y^h", second(kH, X, kV, Z) / (2 * a) * h(Y));
  add("(R(X,Y)Z)^v", v(R(X, Y, Z)));
  const Vec Rxyu = R(X, Y, u);
  Vec dotted;
  if (reading == HhvReading::Derivation) {
    dotted = RuZ(Rxyu) - R(RuZ(X), Y, u) - R(X, RuZ(Y), u) - R(X, Y, RuZ(u));
  } else {
    dotted = RuZ(Rxyu);
  }
  add("+1/(4a^2) ((R(u,Z).R)(X,Y)u)^v", 1.0 / (4 * a2) * v(dotted), true);
  add("-1/(4a^2) (R(u,Z)R(X,Y)u)^v", -1.0 / (4 * a2) * v(RuZ(Rxyu)));
  add("+1/(4a^2) (R(X,Y)R(u,Z)u)^v", 1.0 / (4 * a2) * v(R(X, Y, RuZ(u))));
  add("+1/a Z^v(a) (R(Y,X)u)^v", av(Z) / a * v(R(Y, X, u)));
  // Coordinate fields commute, so [X,Y] = 0.
  add("-1/(2a) Z^v(a) [X,Y]^v", LiftVector::zero(n_));
  add("+1/a^2 R(X,Y,u,Z) grad a", base_.curvature4(X, Y, u, Z) / a2 * G);
  return b;
}

TermBreakdown TmPoint::riemann_hvh(const Vec& X, const Vec& Y, const Vec& Z) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const Vec& u = pt_.u;
  const LiftVector& G = grad_alpha_;
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value) { b.terms.push_back({label, std::move(value)}); };
  add("+1/(2a^2) ((nabla_X R)(u,Y)Z)^h", 1.0 / (2 * a2) * h(base_.nabla_curvature(X, u, Y, Z)));
  add("-1/a^3 X^h(a) (R(u,Y)Z)^h", -ah(X) / a3 * h(R(u, Y, Z)));
  add("-1/(2a^3) Z^h(a) (R(u,Y)X)^h", -ah(Z) / (2 * a3) * h(R(u, Y, X)));
  add("+1/(4a^3) (R(u,Y)Z)^h(a) X^h", ah(R(u, Y, Z)) / (4 * a3) * h(X));
  add("+1/(4a^2) Z^h(a) Y^v(a) X^h", ah(Z) * av(Y) / (4 * a2) * h(X));
  add("-1/(2a) Y^v(Z^h(a)) X^h", -second(kV, Y, kH, Z) / (2 * a) * h(X));
  add("+1/2 (R(X,Z)Y)^v", 0.5 * v(R(X, Z, Y)));
  add("-1/(4a^2) (R(X,R(u,Y)Z)u)^v", -1.0 / (4 * a2) * v(R(X, R(u, Y, Z), u)));
  add("-1/(2a) Y^v(a) (R(X,Z)u)^v", -av(Y) / (2 * a) * v(R(X, Z, u)));
  add("-1/(2a) X^h(Z^h(a)) Y^v", -second(kH, X, kH, Z) / (2 * a) * v(Y));
  add("+1/(2a) (nabla_X Z)^h(a) Y^v", ah(cov(X, Z)) / (2 * a) * v(Y));
  add("+5/(4a^2) Z^h(a) X^h(a) Y^v", 5.0 / (4 * a2) * ah(Z) * ah(X) * v(Y));
  add("-1/(4a) (R(X,Z)u)^v(a) Y^v", -av(R(X, Z, u)) / (4 * a) * v(Y));
  add("-1/(2a^2) R(u,Y,Z,X) grad a", -base_.curvature4(u, Y, Z, X) / (2 * a2) * G);
  add("-1/(4a) Y^v(a) g(X,Z) grad a", -av(Y) * g(X, Z) / (4 * a) * G);
  add("+1/2 g(X,Z) nabla_{Y^v} grad a", 0.5 * g(X, Z) * hess(kV, Y));
  return b;
}

TermBreakdown TmPoint::riemann_vhv(const Vec& X, const Vec& Y, const Vec& Z, VhvReading reading) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const Vec& u = pt_.u;
  const LiftVector& G = grad_alpha_;
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value, bool flagged = false) {
    b.terms.push_back({label, std::move(value), flagged});
  };
  add("+1/(2a^2) (R(X,Z)Y)^h", 1.0 / (2 * a2) * h(R(X, Z, Y)));
  const double coeff = reading == VhvReading::AsPrinted ? 1.0 / (4 * a2 * a2) : 1.0 / (4 * a2);
  add("+1/(4a^4) (R(u,X)R(u,Z)Y)^h", coeff * h(R(u, X, R(u, Z, Y))), true);
  add("-1/(2a^3) X^v(a) (R(u,Z)Y)^h", -av(X) / (2 * a3) * h(R(u, Z, Y)));
  add("+1/(2a^3) Z^v(a) (R(u,X)Y)^h", av(Z) / (2 * a3) * h(R(u, X, Y)));
  add("+1/(4a^2) X^v(a) Z^v(a) Y^h", av(X) * av(Z) / (4 * a2) * h(Y));
  add("+1/(2a) X^v(Z^v(a)) Y^h", second(kV, X, kV, Z) / (2 * a) * h(Y));
  add("-1/(4a^3) (R(u,Z)Y)^h(a) X^v", -ah(R(u, Z, Y)) / (4 * a3) * v(X));
  add("-1/(2a) (nabla_Y Z)^v(a) X^v", -av(cov(Y, Z)) / (2 * a) * v(X));
  add("-3/(4a^2) Y^h(a) Z^v(a) X^v", -3.0 / (4 * a2) * ah(Y) * av(Z) * v(X));
  add("+1/(2a) Y^h(Z^v(a)) X^v", second(kH, Y, kV, Z) / (2 * a) * v(X));
  add("+3/(4a^3) g(X,Z) Y^h(a) grad a", 3.0 / (4 * a3) * g(X, Z) * ah(Y) * G);
  add("-1/(2a^2) g(X,Z) nabla_{Y^h} grad a", -g(X, Z) / (2 * a2) * hess(kH, Y));
  return b;
}

TermBreakdown TmPoint::riemann_vvh(const Vec& X, const Vec& Y, const Vec& Z) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const double a4 = a2 * a2;
  const Vec& u = pt_.u;
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value) { b.terms.push_back({label, std::move(value)}); };
  add("+1/a^2 (R(X,Y)Z)^h", 1.0 / a2 * h(R(X, Y, Z)));
  add("-1/a^3 X^v(a) (R(u,Y)Z)^h", -av(X) / a3 * h(R(u, Y, Z)));
  add("+1/a^3 Y^v(a) (R(u,X)Z)^h", av(Y) / a3 * h(R(u, X, Z)));
  add("+1/(4a^4) (R(u,X)R(u,Y)Z)^h", 1.0 / (4 * a4) * h(R(u, X, R(u, Y, Z))));
  add("-1/(4a^4) (R(u,Y)R(u,X)Z)^h", -1.0 / (4 * a4) * h(R(u, Y, R(u, X, Z))));
  add("-1/(4a^3) (R(u,Y)Z)^h(a) X^v", -ah(R(u, Y, Z)) / (4 * a3) * v(X));
  add("+1/(2a) Y^v(Z^h(a)) X^v", second(kV, Y, kH, Z) / (2 * a) * v(X));
  add("-3/(4a^2) Y^v(a) Z^h(a) X^v", -3.0 / (4 * a2) * av(Y) * ah(Z) * v(X));
  add("+1/(4a^3) (R(u,X)Z)^h(a) Y^v", ah(R(u, X, Z)) / (4 * a3) * v(Y));
  add("-1/(2a) X^v(Z^h(a)) Y^v", -second(kV, X, kH, Z) / (2 * a) * v(Y));
  add("+3/(4a^2) X^v(a) Z^h(a) Y^v", 3.0 / (4 * a2) * av(X) * ah(Z) * v(Y));
  return b;
}

TermBreakdown TmPoint::riemann_vvv(const Vec& X, const Vec& Y, const Vec& Z) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const LiftVector& G = grad_alpha_;
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value) { b.terms.push_back({label, std::move(value)}); };
  add("+1/(2a) Y^v(Z^v(a)) X^v", second(kV, Y, kV, Z) / (2 * a) * v(X));
  add("-1/(4a^2) Y^v(a) Z^v(a) X^v", -av(Y) * av(Z) / (4 * a2) * v(X));
  add("-1/(2a) X^v(Z^v(a)) Y^v", -second(kV, X, kV, Z) / (2 * a) * v(Y));
  add("+1/(4a^2) X^v(a) Z^v(a) Y^v", av(X) * av(Z) / (4 * a2) * v(Y));
  add("+3/(4a^3) Y^v(a) g(X,Z) grad a", 3.0 / (4 * a3) * av(Y) * g(X, Z) * G);
  add("-3/(4a^3) X^v(a) g(Y,Z) grad a", -3.0 / (4 * a3) * av(X) * g(Y, Z) * G);
  add("+1/(2a^2) g(Y,Z) nabla_{X^v} grad a", g(Y, Z) / (2 * a2) * hess(kV, X));
  add("-1/(2a^2) g(X,Z) nabla_{Y^v} grad a", -g(X, Z) / (2 * a2) * hess(kV, Y));
  return b;
}

TermBreakdown TmPoint::ricci(Lift lift, const Vec& X, const Readings& readings) const {
  require_sigma_zero("the Ricci operator");
  if (readings.derived == DerivedReading::FromCurvature) return ricci_trace(lift, X, readings);
  return lift == Lift::Horizontal ? ricci_h(X) : ricci_v(X);
}

TermBreakdown TmPoint::ricci_h(const Vec& X) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const int n = n_;
  const Vec& u = pt_.u;
  const LiftVector& G = grad_alpha_;
  const Mat& frame = base_.frame();
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value) { b.terms.push_back({label, std::move(value)}); };
  const double vnorm2 = gbar(G.v_part(), G.v_part());
  add("(1/a) Q^h(X)", 1.0 / a * h(base_.ricci_operator() * X));
  add("+1/(4a^2) |v grad a|^2 X^h", vnorm2 / (4 * a2) * h(X));
  add("-1/(2a) Lap(a) X^h", -laplacian() / (2 * a) * h(X));
  add("+1/(2a) h nabla_{X^h} h grad a", 1.0 / (2 * a) * second_grad(kH, X, alpha_, FieldPart::Horizontal).h_part());
  add("-1/(2a) v nabla_{X^h} v grad a", -1.0 / (2 * a) * second_grad(kH, X, alpha_, FieldPart::Vertical).v_part());
  add("+1/(2a) nabla_{X^h} grad a", 1.0 / (2 * a) * hess(kH, X));
  add("-(2n+1)/(4a^2) X^h(a) grad a", -(2.0 * n + 1.0) / (4 * a2) * ah(X) * G);
  add("-1/(4a^2) X^h(a) h grad a", -ah(X) / (4 * a2) * G.h_part());
  add("+1/a^2 X^h(a) v grad a", ah(X) / a2 * G.v_part());
  LiftVector s10 = LiftVector::zero(n);
  LiftVector s11 = LiftVector::zero(n);
  LiftVector s12 = LiftVector::zero(n);
  LiftVector s13 = LiftVector::zero(n);
  LiftVector s14 = LiftVector::zero(n);
  LiftVector s15 = LiftVector::zero(n);
  for (int i = 0; i < n; ++i) {
    const Vec E = frame.col(i);
    s10 += 3.0 / (4 * a3) * h(R(u, R(X, E, u), E));
    s11 += av(R(X, E, u)) / (4 * a2) * h(E);
    s12 += -1.0 / (4 * a3) * h(R(u, E, R(u, E, X)));
    s13 += 1.0 / (2 * a) * v(base_.nabla_curvature(E, X, E, u));
    s14 += -3.0 / (2 * a2) * ah(E) * v(R(X, E, u));
    s15 += ah(R(u, E, X)) / (4 * a2) * v(E);
  }
  add("sum +3/(4a^3) (R(u,R(X,E_i)u)E_i)^h", s10);
  add("sum +1/(4a^2) (R(X,E_i)u)^v(a) E_i^h", s11);
  add("sum -1/(4a^3) (R(u,E_i)R(u,E_i)X)^h", s12);
  add("sum +1/(2a) ((nabla_E_i R)(X,E_i)u)^v", s13);
  add("sum -3/(2a^2) E_i^h(a) (R(X,E_i)u)^v", s14);
  add("sum +1/(4a^2) (R(u,E_i)X)^h(a) E_i^v", s15);
  return b;
}

TermBreakdown TmPoint::ricci_v(const Vec& X) const {
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const double a4 = a2 * a2;
  const int n = n_;
  const Vec& u = pt_.u;
  const LiftVector& G = grad_alpha_;
  const Mat& frame = base_.frame();
  TermBreakdown b;
  auto add = [&](const char* label, LiftVector value) { b.terms.push_back({label, std::move(value)}); };
  const double vnorm2 = gbar(G.v_part(), G.v_part());
  const double norm2 = gbar(G, G);
  add("-1/(4a^2) |v grad a|^2 X^v", -vnorm2 / (4 * a2) * v(X));
  add("-3/(4a^2) |grad a|^2 X^v", -3.0 * norm2 / (4 * a2) * v(X));
  add("+1/(2a) Lap(a) X^v", laplacian() / (2 * a) * v(X));
  add("+1/(2a) h nabla_{X^v} h grad a", 1.0 / (2 * a) * second_grad(kV, X, alpha_, FieldPart::Horizontal).h_part());
  add("-1/(2a) v nabla_{X^v} v grad a", -1.0 / (2 * a) * second_grad(kV, X, alpha_, FieldPart::Vertical).v_part());
  add("-1/(2a) nabla_{X^v} grad a", -1.0 / (2 * a) * hess(kV, X));
  add("+(3-2n)/(4a^2) X^v(a) grad a", (3.0 - 2.0 * n) / (4 * a2) * av(X) * G);
  add("+3/(4a^2) X^v(a) v grad a", 3.0 / (4 * a2) * av(X) * G.v_part());
  LiftVector s9 = LiftVector::zero(n);
  LiftVector s10 = LiftVector::zero(n);
  LiftVector s11 = LiftVector::zero(n);
  LiftVector s12 = LiftVector::zero(n);
  for (int i = 0; i < n; ++i) {
    const Vec E = frame.col(i);
    s9 += -1.0 / (2 * a3) * h(base_.nabla_curvature(E, u, X, E));
    s10 += 3.0 / (2 * a4) * ah(E) * h(R(u, X, E));
    s11 += -ah(R(u, X, E)) / (4 * a4) * h(E);
    s12 += 1.0 / (4 * a3) * v(R(E, R(u, X, E), u));
  }
  add("sum -1/(2a^3) ((nabla_E_i R)(u,X)E_i)^h", s9);
  add("sum +3/(2a^4) E_i^h(a) (R(u,X)E_i)^h", s10);
  add("sum -1/(4a^4) (R(u,X)E_i)^h(a) E_i^h", s11);
  add("sum +1/(4a^3) (R(E_i,R(u,X)E_i)u)^v", s12);
  return b;
}

TermBreakdown TmPoint::ricci_trace(Lift lift, const Vec& X, const Readings& readings) const {
  const double a = alpha();
  const Mat& frame = base_.frame();
  TermBreakdown b;
  for (int i = 0; i < n_; ++i) {
    const Vec E = frame.col(i);
    const std::string idx = std::to_string(i + 1);
    if (lift == Lift::Horizontal) {
      b.terms.push_back({"(1/a) Rbar(X^h,E" + idx + "^h)E" + idx + "^h",
                         1.0 / a * riemann_hhh(X, E, E).total()});
      b.terms.push_back({"-a Rbar(E" + idx + "^v,X^h)E" + idx + "^v",
                         -a * riemann_vhv(E, X, E, readings.vhv).total()});
    } else {
      b.terms.push_back({"-(1/a) Rbar(E" + idx + "^h,X^v)E" + idx + "^h",
                         -1.0 / a * riemann_hvh(E, X, E).total()});
      b.terms.push_back({"a Rbar(X^v,E" + idx + "^v)E" + idx + "^v", a * riemann_vvv(X, E, E).total()});
    }
  }
  return b;
}

ScalarBreakdown TmPoint::sectional(SectionalCase c, const Vec& X, const Vec& Y, const Readings& readings) const {
  require_sigma_zero("the sectional curvature");
  constexpr double kOrthoTol = 1e-10;
  if (std::abs(g(X, X) - 1.0) > kOrthoTol || std::abs(g(Y, Y) - 1.0) > kOrthoTol || std::abs(g(X, Y)) > kOrthoTol) {
    throw std::invalid_argument("sectional curvature formulas need g-orthonormal X and Y");
  }
  const double a = alpha();
  const double a2 = a * a;
  const double a3 = a2 * a;
  const Vec& u = pt_.u;
  ScalarBreakdown b;
  if (readings.derived == DerivedReading::FromCurvature) {
    switch (c) {
      case SectionalCase::HH:
        b.terms.push_back({"(1/a^2) gbar(Rbar(X^h,Y^h)Y^h, X^h)", gbar(riemann_hhh(X, Y, Y).total(), h(X)) / a2});
        break;
      case SectionalCase::HV:
        b.terms.push_back({"-gbar(Rbar(Y^v,X^h)Y^v, X^h)", -gbar(riemann_vhv(Y, X, Y, readings.vhv).total(), h(X))});
        break;
      case SectionalCase::VV:
        b.terms.push_back({"a^2 gbar(Rbar(X^v,Y^v)Y^v, X^v)", a2 * gbar(riemann_vvv(X, Y, Y).total(), v(X))});
        break;
    }
    return b;
  }
  switch (c) {
    case SectionalCase::HH: {
      const double Ruxy = R(X, Y, u).dot(base_.metric() * R(X, Y, u));
      // Y^h(Y^h(a)) for Y extended parallel at p.
      const double yy = second(kH, Y, kH, Y) - ah(cov(Y, Y));
      b.terms = {{"(1/a) K(X,Y)", base_.sectional(X, Y) / a},
                 {"-3/(4a^3) |R(X,Y)u|^2", -3.0 / (4 * a3) * Ruxy},
                 {"+3/(4a^3) Y^h(a) Y^h(a)", 3.0 / (4 * a3) * ah(Y) * ah(Y)},
                 {"-1/(2a^2) Y^h(Y^h(a))", -yy / (2 * a2)},
                 {"+1/(4a^3) X^h(a) X^h(a)", ah(X) * ah(X) / (4 * a3)},
                 {"-1/(2a^2) gbar(nabla_{X^h} grad a, X^h)", -gbar(hess(kH, X), h(X)) / (2 * a2)}};
      break;
    }
    case SectionalCase::HV: {
      const Vec r = R(u, Y, X);
      b.terms = {{"+1/(4a^3) |R(u,Y)X|^2", r.dot(base_.metric() * r) / (4 * a3)},
                 {"-1/(4a) Y^v(a) Y^v(a)", -av(Y) * av(Y) / (4 * a)},
                 {"-1/2 Y^v(Y^v(a))", -0.5 * second(kV, Y, kV, Y)},
                 {"-3/(4a^3) X^h(a) X^h(a)", -3.0 / (4 * a3) * ah(X) * ah(X)},
                 {"+1/(2a^2) gbar(nabla_{X^h} grad a, X^h)", gbar(hess(kH, X), h(X)) / (2 * a2)}};
      for (auto& t : b.terms) t.flagged = true;
      break;
    }
    case SectionalCase::VV: {
      b.terms = {{"+1/2 Y^v(Y^v(a))", 0.5 * second(kV, Y, kV, Y)},
                 {"-1/(4a) Y^v(a) Y^v(a)", -av(Y) * av(Y) / (4 * a)},
                 {"-3/(4a) X^v(a) X^v(a)", -3.0 / (4 * a) * av(X) * av(X)},
                 {"+1/2 gbar(nabla_{X^v} grad a, X^v)", 0.5 * gbar(hess(kV, X), v(X))}};
      for (auto& t : b.terms) t.flagged = true;
      break;
    }
  }
  return b;
}

}  // namespace tmgeom
