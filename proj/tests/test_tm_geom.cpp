#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "tmgeom/tm_geom.hpp"

#include <cmath>

using namespace tmgeom;
using namespace tmgeom::testing;
using doctest::Approx;

namespace {

const LiftVector e1h = LiftVector::horizontal(vec({1, 0}));
const LiftVector e1v = LiftVector::vertical(vec({1, 0}));
const LiftVector e2h = LiftVector::horizontal(vec({0, 1}));
const LiftVector e2v = LiftVector::vertical(vec({0, 1}));

}  // namespace

TEST_CASE("isotropic structure") {
  const auto sg = flat2("2");
  const TmPoint tp(sg, at({0.1, 0.2}, {0.3, -0.4}));
  CHECK(tp.delta() == Approx(0.5));
  CHECK(dist(tp.j_apply(e1h), 2.0 * e1v) < 1e-15);

  const auto sg1 = flat2("1", "1");
  const TmPoint tq(sg1, at({0.1, 0.2}, {0.3, -0.4}));
  CHECK(tq.delta() == Approx(2.0));
  CHECK(dist(tq.j_apply(e1v), -1.0 * e1v - 2.0 * e1h) < 1e-15);

  const auto sg2 = sphere("1+u1^2", "0.4*x1+u2");
  const TmPoint tr(sg2, at({1.0, 0.2}, {0.7, -0.3}));
  CHECK(tr.alpha() * tr.delta() - tr.sigma() * tr.sigma() == Approx(1.0).epsilon(1e-14));
  for (const auto& a : {e1h, e2v, 0.3 * e1h - 1.7 * e2v + e1v}) {
    CHECK(dist(tr.j_apply(tr.j_apply(a)), -1.0 * a) < 1e-12);
  }
}

TEST_CASE("metric on lifts") {
  const auto sg = flat2("2");
  const TmPoint tp(sg, at({0.1, 0.2}, {0.3, -0.4}));
  CHECK(tp.gbar(e1h, e1h) == Approx(2.0));
  CHECK(tp.gbar(e1h, e1v) == 0.0);
  CHECK(tp.gbar(e1v, e1v) == Approx(0.5));

  const auto sg1 = sphere("1", "0.3");
  const TmPoint tq(sg1, at({kPi / 4, 0.0}, {0.1, 0.2}));
  CHECK(tq.gbar(e2h, e2v) == Approx(-0.3 * 0.5));
  CHECK(tq.gbar(e2v, e2v) == Approx(1.09 * 0.5));
  const Mat G = tq.gbar_matrix();
  CHECK((G - G.transpose()).norm() == 0.0);
  CHECK(positive_definite(G));
}

TEST_CASE("constant parameters on a flat base give a flat connection") {
  const auto sg = flat2("1");
  const TmPoint tp(sg, at({0.5, -0.5}, {1.0, 2.0}));
  for (auto c : {ConnectionCase::HH, ConnectionCase::HV, ConnectionCase::VH, ConnectionCase::VV}) {
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) CHECK(tp.nabla(c, unit(2, i), unit(2, j)).stacked().norm() == 0.0);
  }
}

TEST_CASE("connection spot values with nonconstant alpha") {
  const auto sg = flat2("1+u1^2+u2^2");
  const TmPoint tp(sg, at({0.0, 0.0}, {1.0, 0.0}));
  CHECK(dist(tp.nabla(ConnectionCase::VV, unit(2, 1), unit(2, 1)), 0.5 * e1v) < 1e-10);
  CHECK(dist(tp.nabla(ConnectionCase::VV, unit(2, 0), unit(2, 0)), -0.5 * e1v) < 1e-10);

  const TmPoint tq(sg, at({0.0, 0.0}, {1.0, 1.0}));
  CHECK(dist(tq.nabla(ConnectionCase::HV, unit(2, 0), unit(2, 1)), (1.0 / 3.0) * e1h) < 1e-10);
}

TEST_CASE("sphere zero section connection") {
  const auto sg = sphere();
  const TmPoint tp(sg, at({1.0, 0.3}, {0.0, 0.0}));
  const LiftVector hh = tp.nabla(ConnectionCase::HH, unit(2, 1), unit(2, 1));
  CHECK(hh.v.norm() < 1e-15);
  CHECK((hh.h - tp.base().covariant(unit(2, 1), unit(2, 1))).norm() < 1e-14);
}

TEST_CASE("gradients") {
  const auto sg = flat2("1+u1^2+u2^2");
  const TmPoint tp(sg, at({0.3, 0.1}, {1.0, 0.0}));
  CHECK(dist(tp.grad_alpha(), 4.0 * e1v) < 1e-13);
  CHECK(dist(tp.grad_delta(), -1.0 * e1v) < 1e-13);
  CHECK(tp.grad_sigma().stacked().norm() == 0.0);
  CHECK(tp.grad(Jet::constant(4, 2, 3.0)).stacked().norm() == 0.0);

  // Duality on a curved base with sigma != 0.
  const auto sh = sphere("1+x1^2*u1^2", "0.2*u2");
  const TmPoint tq(sh, at({1.2, 0.5}, {0.4, -0.6}));
  const ExprAst f = parse("sin(x1)*u2+x2*u1^2", 2);
  const Jet fj = tq.field(f);
  const LiftVector G = tq.grad(fj);
  for (int i = 0; i < 2; ++i) {
    CHECK(tq.gbar(G, LiftVector::horizontal(unit(2, i))) == Approx(tq.hderiv(unit(2, i), fj).value()).epsilon(1e-12));
    CHECK(tq.gbar(G, LiftVector::vertical(unit(2, i))) == Approx(tq.vderiv(unit(2, i), fj).value()).epsilon(1e-12));
  }

  const auto one = sphere();
  const TmPoint ts(one, at({1.2, 0.5}, {0.4, -0.6}));
  CHECK(ts.second_grad(Lift::Horizontal, unit(2, 0), ts.alpha_jet()).stacked().norm() == 0.0);
}

TEST_CASE("laplacian of alpha") {
  const auto sg = flat2("1+u1^2+u2^2");
  const TmPoint tp(sg, at({0.0, 0.0}, {1.0, 0.0}));
  CHECK(tp.laplacian() == Approx(12.0).epsilon(1e-12));

  const auto s = sphere();
  const TmPoint ts(s, at({1.0, 0.2}, {0.5, 0.5}));
  CHECK(ts.laplacian() == 0.0);
  CHECK(ts.laplacian_terms().terms.size() == 4);
}

TEST_CASE("sasaki sphere sectional curvature") {
  const auto sg = sphere();
  const double x1 = 1.0;
  const Vec X = vec({1.0, 0.0});
  const Vec Y = vec({0.0, 1.0 / std::sin(x1)});
  const TmPoint zero(sg, {vec({x1, 0.2}), vec({0.0, 0.0})});
  CHECK(zero.sectional(SectionalCase::HH, X, Y).total() == Approx(1.0).epsilon(1e-12));
  const TmPoint along(sg, {vec({x1, 0.2}), X});
  CHECK(along.sectional(SectionalCase::HH, X, Y).total() == Approx(0.25).epsilon(1e-12));

  Readings traced;
  traced.derived = DerivedReading::FromCurvature;
  CHECK(along.sectional(SectionalCase::HH, X, Y, traced).total() == Approx(0.25).epsilon(1e-12));

  CHECK(zero.riemann(CurvatureCase::HHH, X, Y, Y).terms.size() == 19);
  CHECK(zero.gbar(zero.riemann(CurvatureCase::HHH, X, Y, Y).total(), LiftVector::horizontal(X)) ==
        Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS((void)zero.sectional(SectionalCase::HH, X, 2.0 * Y), std::invalid_argument);
}

TEST_CASE("flat sasaki curvature vanishes") {
  const auto sg = flat2();
  const TmPoint tp(sg, at({0.5, 0.5}, {1.0, -2.0}));
  for (auto c : {CurvatureCase::HHH, CurvatureCase::HHV, CurvatureCase::HVH, CurvatureCase::VHV, CurvatureCase::VVH,
                 CurvatureCase::VVV}) {
    CHECK(tp.riemann(c, unit(2, 0), unit(2, 1), unit(2, 0)).total().stacked().norm() == 0.0);
  }
  CHECK(tp.ricci(Lift::Horizontal, unit(2, 0)).total().stacked().norm() == 0.0);
  CHECK(tp.ricci(Lift::Vertical, unit(2, 1)).total().stacked().norm() == 0.0);
}

TEST_CASE("flagged terms are marked") {
  const auto sg = sphere("1+u1^2");
  const TmPoint tp(sg, at({1.0, 0.2}, {0.3, 0.4}));
  const auto hhv = tp.riemann(CurvatureCase::HHV, unit(2, 0), unit(2, 1), unit(2, 0));
  int flagged = 0;
  for (const auto& t : hhv.terms) flagged += t.flagged ? 1 : 0;
  CHECK(flagged == 1);
  CHECK(tp.riemann(CurvatureCase::VHV, unit(2, 0), unit(2, 1), unit(2, 0)).terms.size() == 12);
}

TEST_CASE("curvature formulas need sigma = 0") {
  const auto sg = sphere("1", "0.3");
  const TmPoint tp(sg, at({1.0, 0.2}, {0.3, 0.4}));
  CHECK_NOTHROW((void)tp.nabla(ConnectionCase::HH, unit(2, 0), unit(2, 1)));
  CHECK_THROWS_AS((void)tp.riemann(CurvatureCase::HHH, unit(2, 0), unit(2, 1), unit(2, 0)), UnsupportedError);
  CHECK_THROWS_AS((void)tp.ricci(Lift::Vertical, unit(2, 0)), UnsupportedError);
  CHECK_THROWS_AS((void)tp.laplacian(), UnsupportedError);
}

TEST_CASE("non-positive alpha is rejected") {
  const auto sg = flat2("u1");
  CHECK_THROWS_AS(TmPoint(sg, at({0.0, 0.0}, {-1.0, 0.0})), DomainError);
  CHECK_THROWS_AS(ScenarioGeometry(flat2().metric, flat2().params, 2), std::invalid_argument);
}
