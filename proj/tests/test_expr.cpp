#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "odesplit/errors.hpp"
#include "odesplit/expr.hpp"

using namespace odesplit;

namespace {

void expect_near(cplx a, cplx b, double tol) {
  EXPECT_NEAR(a.real(), b.real(), tol);
  EXPECT_NEAR(a.imag(), b.imag(), tol);
}

}  // namespace

TEST(Parse, PolynomialEvaluates) { EXPECT_EQ(parse("t^2 + 1")(2.0), cplx(5.0)); }

TEST(Parse, SineOfProductArgument) {
  const Expr e = parse("sin(2*t)");
  ASSERT_EQ(e.kind(), NodeKind::Call);
  EXPECT_EQ(e.func(), Func::Sin);
  EXPECT_EQ(e.arg().kind(), NodeKind::Mul);
}

TEST(Parse, TrailingOperatorReportsOffset) {
  try {
    parse("t +");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.offset(), 3u);
    EXPECT_EQ(e.expected(), "expected operand");
  }
}

TEST(Parse, Precedence) {
  EXPECT_EQ(parse("2+3*4")(0.0), cplx(14.0));
  EXPECT_EQ(parse("2*3^2")(0.0), cplx(18.0));
  EXPECT_EQ(parse("2^3^2")(0.0), cplx(512.0));  // right-associative
  EXPECT_EQ(parse("-2^2")(0.0), cplx(-4.0));
  EXPECT_EQ(parse("8/4/2")(0.0), cplx(1.0));
  EXPECT_EQ(parse("8-4-2")(0.0), cplx(2.0));
}

TEST(Parse, ReservedNamesAndParams) {
  expect_near(parse("i*i")(0.0), cplx(-1.0), 0.0);
  expect_near(parse("pi")(0.0), cplx(M_PI), 0.0);
  expect_near(parse("lambda^2*t", {{"lambda", 3.0}})(2.0), cplx(18.0), 0.0);
  expect_near(parse("1e-3*t")(2.0), cplx(2e-3), 1e-18);
}

TEST(Parse, Errors) {
  EXPECT_THROW(parse(""), ParseError);
  EXPECT_THROW(parse("(t"), ParseError);
  EXPECT_THROW(parse("foo(t)"), ParseError);
  EXPECT_THROW(parse("sin t"), ParseError);
  EXPECT_THROW(parse("t t"), ParseError);
  EXPECT_THROW(parse("Sin(t)"), ParseError);  // case-sensitive
}

TEST(Eval, PrincipalSqrt) { expect_near(parse("sqrt(t)")(cplx(-1.0, 0.0)), cplx(0.0, 1.0), 1e-15); }

TEST(Eval, ExpIdentity) { EXPECT_EQ(parse("exp(t)")(0.0), cplx(1.0)); }

TEST(Eval, DivisionByZero) {
  try {
    parse("1/t")(0.0);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::EvalDomain);
    EXPECT_EQ(e.t(), 0.0);
  }
}

TEST(Eval, LogOfZero) { EXPECT_THROW(parse("ln(t)")(0.0), NumericalError); }

TEST(Eval, BranchCutTakesUpperSide) {
  expect_near(parse("ln(t)")(cplx(-1.0, -0.0)), cplx(0.0, M_PI), 1e-15);
  expect_near(parse("t^0.5")(cplx(-4.0, 0.0)), cplx(0.0, 2.0), 1e-14);
}

TEST(Eval, Deterministic) {
  const Expr e = parse("sin(t)^2 + exp(t/3) - ln(2+t)");
  EXPECT_EQ(e(1.2345), e(1.2345));
}

TEST(Differentiate, PowerRule) { EXPECT_EQ(to_string(differentiate(parse("t^2"))), "2*t"); }

TEST(Differentiate, ChainRule) { EXPECT_EQ(to_string(differentiate(parse("sin(2*t)"))), "2*cos(2*t)"); }

TEST(Differentiate, Constant) {
  EXPECT_TRUE(differentiate(parse("c", {{"c", 5.0}})).is_zero());
  EXPECT_TRUE(differentiate(parse("3.5")).is_zero());
}

TEST(Differentiate, SecondDerivatives) {
  const Expr q = parse("sqrt(t)");
  const Expr d2 = differentiate(differentiate(q));
  expect_near(d2(4.0), cplx(-0.25 * std::pow(4.0, -1.5)), 1e-15);
}

// ---------------------------------------------------------------------------
// Randomized properties

namespace {

// Real-valued on [0.5, 2] by construction; depth <= max_depth.
Expr random_expr(std::mt19937_64& rng, int depth) {
  std::uniform_int_distribution<int> pick(0, depth <= 1 ? 1 : 11);
  std::uniform_real_distribution<double> coef(-2.0, 2.0);
  const Expr t = Expr::variable();
  switch (pick(rng)) {
    case 0: return Expr::constant(std::round(coef(rng) * 100.0) / 100.0);
    case 1: return t;
    case 2: return random_expr(rng, depth - 1) + random_expr(rng, depth - 1);
    case 3: return random_expr(rng, depth - 1) - random_expr(rng, depth - 1);
    case 4: return random_expr(rng, depth - 1) * random_expr(rng, depth - 1);
    case 5: return random_expr(rng, depth - 1) / (Expr::constant(2.0) + cos(random_expr(rng, depth - 2)));
    case 6: return sin(random_expr(rng, depth - 1));
    case 7: return cos(random_expr(rng, depth - 1));
    case 8: return exp(sin(random_expr(rng, depth - 2)));
    case 9: return ln(Expr::constant(2.0) + sin(random_expr(rng, depth - 2)));
    case 10: return sqrt(Expr::constant(2.0) + cos(random_expr(rng, depth - 2)));
    default: {
      std::uniform_int_distribution<int> ex(2, 3);
      return pow(random_expr(rng, depth - 1), Expr::constant(ex(rng)));
    }
  }
}

}  // namespace

TEST(ExprProperty, DerivativeMatchesFiniteDifference) {
  std::mt19937_64 rng(20261018);
  std::uniform_real_distribution<double> tdist(0.5, 2.0);
  const double h = 1e-6;
  for (int k = 0; k < 20; ++k) {
    const Expr e = random_expr(rng, 5);
    const Expr de = differentiate(e);
    for (int j = 0; j < 10; ++j) {
      const double t = tdist(rng);
      const cplx fd = (e(t + h) - e(t - h)) / (2.0 * h);
      const cplx d = de(t);
      EXPECT_LE(std::abs(d - fd), 1e-5 * (1.0 + std::abs(d))) << to_string(e) << " at t=" << t;
    }
  }
}

TEST(ExprProperty, DerivativeIsRedifferentiable) {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const Expr e = random_expr(rng, 4);
    const Expr d2 = differentiate(differentiate(e));
    const double t = 1.1, h = 1e-4;
    const cplx fd = (e(t + h) - 2.0 * e(t) + e(t - h)) / (h * h);
    EXPECT_LE(std::abs(d2(t) - fd), 1e-4 * (1.0 + std::abs(fd))) << to_string(e);
  }
}

TEST(ExprProperty, PrintParseRoundTrip) {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> tdist(0.5, 2.0);
  for (int k = 0; k < 200; ++k) {
    const Expr e = random_expr(rng, 5);
    const std::string printed = to_string(e);
    const Expr back = parse(printed);
    for (int j = 0; j < 5; ++j) {
      const double t = tdist(rng);
      const cplx a = e(t), b = back(t);
      EXPECT_LE(std::abs(a - b), 1e-13 * (1.0 + std::abs(a))) << printed;
    }
  }
}

TEST(ExprProperty, ComplexConstantsRoundTrip) {
  const Expr e = Expr::constant({1.5, -2.25}) * Expr::variable() + Expr::constant({-3.0, 0.0});
  const Expr back = parse(to_string(e));
  EXPECT_EQ(back(0.7), e(0.7));
}
