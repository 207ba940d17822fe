#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"
#include "tmgeom/oracle.hpp"
#include "tmgeom/verify.hpp"

#include <cmath>

using namespace tmgeom;
using namespace tmgeom::testing;
using doctest::Approx;

TEST_CASE("coordinate metric of flat sasaki and scaled metrics") {
  const TmOracle flat(flat2(), at({0.3, -0.2}, {1.0, 0.5}));
  CHECK((flat.metric() - Mat::Identity(4, 4)).norm() == 0.0);

  const TmOracle scaled(flat2("2"), at({0.3, -0.2}, {1.0, 0.5}));
  Mat expected = Mat::Zero(4, 4);
  expected.diagonal() << 2, 2, 0.5, 0.5;
  CHECK((scaled.metric() - expected).norm() < 1e-15);
}

TEST_CASE("coordinate metric of the sphere couples x and u through the connection map") {
  // N^k_i = Gamma^k_ij u^j; at x1 = pi/4, u = (0, 1): N^1_2 = -1/2, N^2_1 = 1.
  const TmOracle o(sphere(), at({kPi / 4, 0.0}, {0.0, 1.0}));
  const Mat& G = o.metric();
  CHECK(G(0, 2) == Approx(0.0));           // x1 u1
  CHECK(G(1, 2) == Approx(-0.5));          // x2 u1 = N^1_2 g_11
  CHECK(G(0, 3) == Approx(0.5));           // x1 u2 = N^2_1 g_22
  CHECK(G(2, 2) == Approx(1.0));           // u1 u1 = g_11
  CHECK(G(0, 0) == Approx(1.0 + 0.5));     // x1 x1 = g_11 + N^2_1 N^2_1 g_22
  CHECK(G(1, 1) == Approx(0.5 + 0.25));    // x2 x2 = g_22 + N^1_2 N^1_2 g_11
  CHECK((G - G.transpose()).norm() < 1e-15);
}

TEST_CASE("coordinate metric agrees with the metric on lifts") {
  const auto sg = sphere("1+x1*u1^2", "0.25*u2");
  const TangentPoint p = at({1.1, 0.4}, {0.5, -0.7});
  const TmOracle o(sg, p);
  const TmPoint tp(sg, p);
  const Mat F = o.frame().matrix();
  const Mat adapted = F.transpose() * o.metric() * F;
  CHECK((adapted - tp.gbar_matrix()).norm() < 1e-12);
  CHECK((o.frame().matrix() * o.frame().inverse() - Mat::Identity(4, 4)).norm() < 1e-15);

  const LiftVector a{vec({0.3, -1.2}), vec({2.0, 0.7})};
  CHECK(dist(o.frame().to_adapted(o.frame().to_coordinates(a)), a) < 1e-14);
  CHECK(o.gbar(a, a) == Approx(tp.gbar(a, a)).epsilon(1e-12));
}

TEST_CASE("christoffel symbols of the coordinate metric") {
  const TmOracle flat(flat2(), at({0.3, -0.2}, {1.0, 0.5}));
  for (int c = 0; c < 4; ++c)
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) CHECK(flat.christoffel(c, a, b) == 0.0);

  const auto sg = make_geometry({"1+x2^2", "0.3*x1", "0.3*x1", "exp(x1)"}, "1+u1^2+x1*u2^2", "0.1*x2",
                                {{-0.5, 0.5}, {-0.5, 0.5}});
  Rng rng(7);
  for (int k = 0; k < 100; ++k) {
    const TangentPoint p = at({rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)}, {rng.uniform(-1, 1), rng.uniform(-1, 1)});
    const TmOracle o(sg, p);
    double worst = 0.0;
    for (int c = 0; c < 4; ++c)
      for (int a = 0; a < 4; ++a)
        for (int b = 0; b < 4; ++b) worst = std::max(worst, std::abs(o.christoffel(c, a, b) - o.christoffel(c, b, a)));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("covariant derivatives of lifted fields") {
  const TmOracle flat(flat2(), at({0.3, -0.2}, {1.0, 0.5}));
  for (auto la : {Lift::Horizontal, Lift::Vertical})
    for (auto lb : {Lift::Horizontal, Lift::Vertical})
      CHECK(flat.nabla(la, unit(2, 0), lb, unit(2, 1)).stacked().norm() == 0.0);

  const auto sg = flat2("1+u1^2+u2^2");
  const TmOracle o(sg, at({0.0, 0.0}, {1.0, 1.0}));
  CHECK(dist(o.nabla(Lift::Horizontal, unit(2, 0), Lift::Vertical, unit(2, 1)),
             LiftVector::horizontal(vec({1.0 / 3.0, 0.0}))) < 1e-12);
  const TmOracle q(sg, at({0.0, 0.0}, {1.0, 0.0}));
  CHECK(dist(q.nabla(Lift::Vertical, unit(2, 1), Lift::Vertical, unit(2, 1)), LiftVector::vertical(vec({0.5, 0.0}))) <
        1e-12);

  // Zero section of the Sasaki sphere: nabla_{X^h} Y^h = (nabla_X Y)^h.
  const TmOracle s(sphere(), at({1.0, 0.3}, {0.0, 0.0}));
  const BasePoint b(sphere().metric, std::vector<double>{1.0, 0.3});
  const LiftVector hh = s.nabla(Lift::Horizontal, unit(2, 1), Lift::Horizontal, unit(2, 1));
  CHECK(hh.v.norm() < 1e-14);
  CHECK((hh.h - b.covariant(unit(2, 1), unit(2, 1))).norm() < 1e-14);
}

TEST_CASE("curvature of the coordinate metric") {
  const TmOracle flat(flat2(), at({0.3, -0.2}, {1.0, 0.5}));
  const LiftVector a{vec({1, 0}), vec({0, 1})};
  const LiftVector b{vec({0, 1}), vec({1, 1})};
  CHECK(flat.riemann(a, b, a).stacked().norm() == 0.0);
  CHECK(flat.ricci(a).stacked().norm() == 0.0);

  const double x1 = 1.0;
  const TmOracle s(sphere(), at({x1, 0.2}, {0.0, 0.0}));
  const LiftVector X = LiftVector::horizontal(vec({1.0, 0.0}));
  const LiftVector Y = LiftVector::horizontal(vec({0.0, 1.0 / std::sin(x1)}));
  CHECK(s.gbar(s.riemann(X, Y, Y), X) == Approx(1.0).epsilon(1e-12));
  CHECK(s.sectional(X, Y) == Approx(1.0).epsilon(1e-12));
  const TmOracle t(sphere(), {vec({x1, 0.2}), vec({1.0, 0.0})});
  CHECK(t.sectional(X, Y) == Approx(0.25).epsilon(1e-12));
}

TEST_CASE("scalar operators") {
  const auto sg = flat2("1+u1^2+u2^2");
  const TmOracle o(sg, at({0.0, 0.0}, {1.0, 0.0}));
  CHECK(o.laplacian(o.alpha_jet()) == Approx(12.0).epsilon(1e-12));
  CHECK(dist(o.gradient(o.alpha_jet()), LiftVector::vertical(vec({4.0, 0.0}))) < 1e-13);

  const TmOracle s(sphere(), at({1.0, 0.2}, {0.3, 0.3}));
  CHECK(std::abs(s.laplacian(s.alpha_jet())) < 1e-15);
}
