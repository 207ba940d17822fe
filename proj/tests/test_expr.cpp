#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "tmgeom/expr.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

using namespace tmgeom;
using doctest::Approx;

namespace {

// Well-formed expressions in dimension 2 (x1, x2, u1, u2).
const std::vector<std::string> kValid = {
    "1",
    "0.5",
    "2.5e-3",
    "1E2",
    "pi",
    "x1",
    "u2",
    "x1+x2",
    "x1-x2-u1",
    "x1*x2",
    "x1/x2/u1",
    "x1^2",
    "x1^0",
    "x1^-2",
    "x2^+3",
    "x1^2^3",
    "-x1",
    "--x1",
    "-x1^2",
    "(-x1)^2",
    "2*-x1",
    "x1*(x2+u1)",
    "(x1+x2)*(u1-u2)",
    "1+u1^2+u2^2",
    "1+u1^2+sin(x1)^2*u2^2",
    "sin(x1)",
    "cos(x2)",
    "tan(0.3*x1)",
    "exp(-x1*x1)",
    "log(2+x2)",
    "sqrt(1+x1^2)",
    "sinh(x1)",
    "cosh(u1)",
    "tanh(x2-u2)",
    "sin(x1)^2",
    "1/x2^2",
    "exp(sin(cos(x1)))",
    "  x1 \t+\n x2 ",
    "((((x1))))",
    "x1*x2*u1*u2",
    "1-2+3-4",
    "8/4/2",
    "2^3*x1",
    "-(x1+x2)",
    "x1-(x2-u1)",
    "x1/(x2*u1)",
    "sqrt(sqrt(2+x1))",
    "3*x1^2*x2-u1/(1+u2^2)",
    "0.3*x1",
    "1+x1^2+u1^2+x1*u2^2+0.5*u2*u1",
    "exp(x1)*cos(x2)-log(1+u1^2)",
};

struct Malformed {
  std::string text;
  ParseError::Kind kind;
  std::size_t offset;
};

const std::vector<Malformed> kMalformed = {
    {"1+*2", ParseError::Kind::Syntax, 2},
    {"", ParseError::Kind::Syntax, 0},
    {"   ", ParseError::Kind::Syntax, 3},
    {"x1+", ParseError::Kind::Syntax, 3},
    {"(x1", ParseError::Kind::Syntax, 3},
    {"x1)", ParseError::Kind::Syntax, 2},
    {"x1 x2", ParseError::Kind::Syntax, 3},
    {"2x1", ParseError::Kind::Syntax, 1},
    {"y1", ParseError::Kind::UnknownIdentifier, 0},
    {"1+foo(x1)", ParseError::Kind::UnknownIdentifier, 2},
    {"x3", ParseError::Kind::VariableOutOfRange, 0},
    {"1+u0", ParseError::Kind::VariableOutOfRange, 2},
    {"x1^2.5", ParseError::Kind::BadExponent, 3},
    {"x1^x2", ParseError::Kind::Syntax, 3},
    {"x1^1e3", ParseError::Kind::BadExponent, 3},
    {"sin x1", ParseError::Kind::Syntax, 4},
    {"sin()", ParseError::Kind::Syntax, 4},
    {"1..2", ParseError::Kind::Syntax, 0},
    {"x1 # 2", ParseError::Kind::Syntax, 3},
    {"x1a", ParseError::Kind::UnknownIdentifier, 0},
};

double fd_partial(const ExprAst& e, std::vector<double> p, std::size_t i) {
  const double h = 1e-5;
  p[i] += h;
  const double fp = eval(e, p);
  p[i] -= 2 * h;
  const double fm = eval(e, p);
  return (fp - fm) / (2 * h);
}

}  // namespace

TEST_CASE("corpus size") {
  CHECK(kValid.size() + kMalformed.size() >= 50);
  CHECK(kMalformed.size() >= 10);
}

TEST_CASE("well-formed corpus parses and round-trips through print") {
  for (const auto& s : kValid) {
    CAPTURE(s);
    const ExprAst e = parse(s, 2);
    const std::string printed = print(e);
    CAPTURE(printed);
    const ExprAst again = parse(printed, 2);
    CHECK(again == e);
    CHECK(print(again) == printed);
  }
}

TEST_CASE("malformed corpus is rejected with kind and offset") {
  for (const auto& m : kMalformed) {
    CAPTURE(m.text);
    try {
      (void)parse(m.text, 2);
      FAIL("accepted malformed input");
    } catch (const ParseError& e) {
      CHECK(e.kind() == m.kind);
      CHECK(e.offset() == m.offset);
    }
  }
  try {
    (void)parse("1+*2", 2);
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("offset 2") != std::string::npos);
  }
}

TEST_CASE("precedence and associativity") {
  const auto v = [](const char* s) { return eval(parse(s, 2), std::vector<double>{2.0, 3.0, 0.0, 0.0}); };
  CHECK(v("-x1^2") == -4.0);
  CHECK(v("(-x1)^2") == 4.0);
  CHECK(v("x1^2^3") == 64.0);
  CHECK(v("8/4/2") == 1.0);
  CHECK(v("1-2+3-4") == -2.0);
  CHECK(v("2*x1+x2*3") == 13.0);
  CHECK(v("x2^-1") == Approx(1.0 / 3.0));

  const ExprAst e = parse("sin(x1)^2", 2);
  CHECK(e.root().kind == ExprNode::Kind::Pow);
  CHECK(e.root().exponent == 2);
  CHECK(e.root().lhs->kind == ExprNode::Kind::Call);
  CHECK(e.root().lhs->func == Func::Sin);
  CHECK(e.root().lhs->lhs->kind == ExprNode::Kind::BaseVar);

  const ExprAst f = parse("1+u1^2+u2^2", 2);
  CHECK(f.root().kind == ExprNode::Kind::Add);
  CHECK(f.root().lhs->kind == ExprNode::Kind::Add);
  CHECK(f.root().lhs->lhs->kind == ExprNode::Kind::Constant);
  CHECK(f.root().rhs->kind == ExprNode::Kind::Pow);
  CHECK(f.root().rhs->lhs->kind == ExprNode::Kind::FiberVar);
  CHECK(f.root().rhs->lhs->index == 1);
  CHECK(f.depends_on_fiber());
  CHECK_FALSE(e.depends_on_fiber());
  CHECK(parse("2*pi", 2).is_constant());
}

TEST_CASE("jet evaluation spot values") {
  const std::vector<double> p{2.0, 3.0, 0.0, 0.0};
  const Jet j = eval_jet(parse("x1*x2", 2), p, 1);
  CHECK(j.value() == 6.0);
  CHECK(j.d(0) == 3.0);
  CHECK(j.d(1) == 2.0);

  const std::vector<double> q{std::numbers::pi / 4, 0.1, 0.0, 0.0};
  const Jet s = eval_jet(parse("sin(x1)^2", 2), q, 2);
  CHECK(s.value() == Approx(0.5).epsilon(1e-15));
  CHECK(s.d(0) == Approx(1.0).epsilon(1e-15));
  CHECK(std::abs(s.d(0, 0)) < 1e-15);

  const std::vector<double> z{1.0, 0.0, 0.0, 0.0};
  try {
    (void)eval_jet(parse("1/x2", 2), z, 1);
    FAIL("no domain error");
  } catch (const DomainError& e) {
    CHECK(std::string(e.what()).find("division by zero") != std::string::npos);
    CHECK(std::string(e.what()).find("x2") != std::string::npos);
  }
  CHECK_THROWS_AS((void)eval(parse("log(x1-2)", 2), z), DomainError);
  CHECK_THROWS_AS((void)eval(parse("sqrt(-1-x1)", 2), z), DomainError);

  // Base-only evaluation has n variables; fiber variables are then an error.
  const std::vector<double> base{1.0, 2.0};
  CHECK(eval_jet(parse("x1*x2", 2), base, 2).nvars() == 2);
  CHECK_THROWS_AS((void)eval_jet(parse("u1", 2), base, 1), std::invalid_argument);
}

TEST_CASE("jet evaluation is linear") {
  const std::vector<double> p{0.7, -0.4, 0.9, 0.2};
  for (std::size_t a = 0; a + 1 < kValid.size(); ++a) {
    const ExprAst e1 = parse(kValid[a], 2);
    const ExprAst e2 = parse(kValid[a + 1], 2);
    Jet j1, j2;
    try {
      j1 = eval_jet(e1, p, 3);
      j2 = eval_jet(e2, p, 3);
    } catch (const DomainError&) {
      continue;
    }
    const double s = -1.75;
    const Jet combined = eval_jet(make_binary(ExprNode::Kind::Add, make_scaled(s, e1), e2), p, 3);
    const Jet expected = s * j1 + j2;
    for (std::size_t k = 0; k < combined.raw().size(); ++k) {
      const double scale = std::max({1.0, std::abs(s * j1.raw()[k]), std::abs(j2.raw()[k])});
      CHECK(std::abs(combined.raw()[k] - expected.raw()[k]) <= 1e-14 * scale);
    }
  }
}

TEST_CASE("first partials match central differences") {
  const std::vector<double> p{0.7, -0.4, 0.9, 0.2};
  for (const auto& s : kValid) {
    CAPTURE(s);
    const ExprAst e = parse(s, 2);
    Jet j;
    try {
      j = eval_jet(e, p, 1);
    } catch (const DomainError&) {
      continue;
    }
    for (std::size_t i = 0; i < 4; ++i) {
      const double fd = fd_partial(e, p, i);
      const double ad = j.d(static_cast<int>(i));
      CHECK(std::abs(fd - ad) <= 1e-7 * std::max(1.0, std::abs(ad)));
    }
  }
}

TEST_CASE("builders") {
  const ExprAst c = make_constant(2.5, 3);
  CHECK(c.dimension() == 3);
  CHECK(eval(c, std::vector<double>{0, 0, 0}) == 2.5);
  CHECK_THROWS_AS((void)make_binary(ExprNode::Kind::Add, parse("x1", 2), parse("x1", 3)), std::invalid_argument);
}
