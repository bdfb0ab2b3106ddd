#include <gtest/gtest.h>

#include <algorithm>

#include "odesplit/errors.hpp"
#include "odesplit/gauges.hpp"
#include "odesplit/roots.hpp"

using namespace odesplit;

namespace {

const cplx I{0.0, 1.0};

void expect_close(cplx a, cplx b, double tol = 1e-12) { EXPECT_LE(std::abs(a - b), tol) << a << " vs " << b; }

}  // namespace

TEST(Roots, FactorableQuadratic) {
  const auto r = characteristic_roots(make_ode(2, {"2", "-3"}, "0"), 0.0);
  expect_close(r.roots[0], 1.0);
  expect_close(r.roots[1], 2.0);
}

TEST(Roots, FactorableCubic) {
  const auto r = characteristic_roots(make_ode(3, {"-6", "11", "-6"}, "0"), 0.0);
  expect_close(r.roots[0], 1.0);
  expect_close(r.roots[1], 2.0);
  expect_close(r.roots[2], 3.0);
}

TEST(Roots, QuarticViaEigenvalues) {
  const auto r = characteristic_roots(make_ode(4, {"24", "-50", "35", "-10"}, "0"), 0.0);
  for (int k = 0; k < 4; ++k) expect_close(r.roots[k], k + 1.0, 1e-10);
}

TEST(Roots, DerivativesForAiry) {
  const auto r = characteristic_roots(make_ode(2, {"t", "0"}, "0"), 1.0);
  // First call: sorted by (real, imag).
  expect_close(r.roots[0], -I);
  expect_close(r.roots[1], I);
  expect_close(r.droots[0], -0.5 * I);
  expect_close(r.droots[1], 0.5 * I);
  // Against finite differences of the roots.
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  const double h = 1e-6;
  const auto rp = characteristic_roots(ode, 1.0 + h, r), rm = characteristic_roots(ode, 1.0 - h, r);
  for (int k = 0; k < 2; ++k) expect_close((rp.roots[k] - rm.roots[k]) / (2.0 * h), r.droots[k], 1e-8);
}

TEST(Roots, ResidualSmall) {
  const LinearODE ode = make_ode(3, {"1+t", "sin(t)", "2"}, "0");
  const auto s = ode.sample(0.7);
  const auto r = characteristic_roots(s, 0.7, nullptr);
  for (cplx rho : r.roots) EXPECT_LE(std::abs(monic_value(s.f, rho)), 1e-10 * 4.0);
}

TEST(Roots, CollisionThrows) {
  try {
    characteristic_roots(make_ode(2, {"1", "-2"}, "0"), 0.25);
    FAIL();
  } catch (const RootCollision& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::RootCollision);
    EXPECT_EQ(e.t(), 0.25);
  }
}

TEST(Roots, ContinuityFollowsPrevious) {
  // Roots +-i sqrt(t); seed the opposite order and check it is kept.
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  RootSet prev{1.0, {I, -I}, {}};
  const auto r = characteristic_roots(ode, 1.01, prev);
  EXPECT_GT(r.roots[0].imag(), 0.0);
  EXPECT_LT(r.roots[1].imag(), 0.0);
}

TEST(Roots, NoBranchSwapsAlongPath) {
  // Roots of rho^2 + (cos t) rho + 1 swirl around; track and check step sizes shrink with h.
  const LinearODE ode = make_ode(2, {"1", "0.5*cos(t)"}, "0");
  auto max_jump = [&](double h) {
    std::optional<RootSet> prev;
    double jump = 0.0;
    for (double t = 0.0; t <= 6.0; t += h) {
      auto r = characteristic_roots(ode, t, prev);
      if (prev)
        for (int k = 0; k < 2; ++k) jump = std::max(jump, std::abs(r.roots[k] - prev->roots[k]));
      prev = r;
    }
    return jump;
  };
  const double j1 = max_jump(0.02), j2 = max_jump(0.01);
  EXPECT_LT(j2, 0.6 * j1);
}

TEST(CharacteristicGauge, ConstantCoefficientsDiagonal) {
  const LinearODE ode = make_ode(2, {"2", "-3"}, "0");
  CharacteristicGauge g(ode);
  const auto s = g.sample(0.0, {});
  const auto x = coupling_terms_n2(ode.sample(0.0), s.g(0, 0), s.g(0, 1), s.dg(0, 0), s.dg(0, 1));
  expect_close(x.x1, 0.0);
  expect_close(x.x2, 0.0);
}

TEST(CharacteristicGauge, AiryValues) {
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  CharacteristicGauge g(ode);
  const auto s = g.sample(4.0, {});
  std::vector<cplx> v{s.g(0, 0), s.g(0, 1)};
  std::sort(v.begin(), v.end(), [](cplx a, cplx b) { return a.imag() < b.imag(); });
  expect_close(v[0], -2.0 * I);
  expect_close(v[1], 2.0 * I);
}

TEST(CharacteristicGauge, CubicSquares) {
  const LinearODE ode = make_ode(3, {"-6", "11", "-6"}, "0");
  CharacteristicGauge g(ode);
  const auto s = g.sample(0.0, {});
  expect_close(s.g(1, 0), 1.0);
  expect_close(s.g(1, 1), 4.0);
  expect_close(s.g(1, 2), 9.0);
}

TEST(Riccati, RhsExamples) {
  const LinearODE ho = make_ode(2, {"1", "0"}, "0");
  expect_close(riccati_rhs(ho, 0.0, I), 0.0);
  expect_close(riccati_rhs(ho, 0.0, 0.0), -1.0);
  expect_close(riccati_rhs(make_ode(2, {"2", "3"}, "0"), 0.0, 1.0), -6.0);
}

TEST(StrongCoupling, RhsExample) {
  const auto r = strong_coupling_rhs(make_ode(2, {"1", "0"}, "0"), 0.0, I, 2.0 * I, 0.0);
  expect_close(r.dg1, -2.0);
  expect_close(r.g2, -I);
}

TEST(StrongCoupling, DifferenceConstantWhenF1Zero) {
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  StrongCouplingGauge g(ode, 2.0 * I, I, 1e8);
  for (double t : {1.0, 2.0, 3.0}) {
    const auto s = g.sample(t, std::vector<cplx>{0.3 + 0.1 * t, 0.0});
    expect_close(s.g(0, 0) - s.g(0, 1), 2.0 * I);
  }
}

TEST(StrongCoupling, ResidualsVanishPointwise) {
  // Both lines of g_n' = -(f1 g_n + f0 + g1 g2) hold for the sampled pair.
  const LinearODE ode = make_ode(2, {"t", "0.3*sin(t)"}, "0");
  StrongCouplingGauge g(ode, {0.5, 1.0}, {0.2, -0.4}, 1e8);
  const std::vector<cplx> state{{0.1, 0.7}, {0.05, 0.0}};
  const double t = 1.3;
  const auto s = g.sample(t, state);
  const auto c = ode.sample(t);
  const cplx g1 = s.g(0, 0), g2 = s.g(0, 1);
  expect_close(s.dg(0, 0), -(c.f[1] * g1 + c.f[0] + g1 * g2));
  expect_close(s.dg(0, 1), -(c.f[1] * g2 + c.f[0] + g1 * g2));
}

TEST(PhaseIntegral, GFromQExamples) {
  auto [a, b] = g_from_q(1.0, 0.0, 0.0);
  expect_close(a, I);
  expect_close(b, -I);
  std::tie(a, b) = g_from_q(2.0, 0.0, 2.0);
  expect_close(a, 2.0 * I - 1.0);
  expect_close(b, -2.0 * I - 1.0);
  const cplx q{0.3, -1.2};
  std::tie(a, b) = g_from_q(q, {0.7, 0.1}, {-0.4, 2.0});
  expect_close(a - b, 2.0 * I * q);
  EXPECT_THROW(g_from_q(0.0, 1.0, 0.0, 2.5), NumericalError);
}

TEST(PhaseIntegral, QResidualExamples) {
  expect_close(q_residual(parse("3"), make_ode(2, {"9", "0"}, "0"), 1.0), 0.0);
  expect_close(q_residual(parse("sqrt(t)"), make_ode(2, {"t", "0"}, "0"), 4.0), 5.0 / (16.0 * 16.0));
  EXPECT_THROW(q_residual(parse("t-1"), make_ode(2, {"t", "0"}, "0"), 1.0), NumericalError);
}

TEST(PhaseIntegral, DefaultsToSqrtF0) {
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  auto g = make_gauge(ode, PhaseIntegralSpec{}, 1.0);
  const auto s = g->sample(4.0, {});
  // +-2i - q'/(2q) with q' = 1/4, q = 2
  expect_close(s.g(0, 0), 2.0 * I - 1.0 / 16.0);
  expect_close(s.g(0, 1), -2.0 * I - 1.0 / 16.0);
}

TEST(GenRiccati3, RhsExamples) {
  const LinearODE zero = make_ode(3, {"0", "0", "0"}, "0");
  auto r = gen_riccati3_rhs(zero, 0.0, 1.0, 1.0);
  expect_close(r.dg1, 0.0);
  expect_close(r.dg2, -1.0);
  const LinearODE cubic = make_ode(3, {"-6", "11", "-6"}, "0");
  for (double rho : {1.0, 2.0, 3.0}) {
    r = gen_riccati3_rhs(cubic, 0.0, rho, rho * rho);
    expect_close(r.dg1, 0.0);
    expect_close(r.dg2, 0.0);
  }
  const LinearODE euler = make_ode(3, {"-6/t^3", "0", "0"}, "0");
  const double t = 1.7;
  r = gen_riccati3_rhs(euler, t, 3.0 / t, 6.0 / (t * t));
  expect_close(r.dg1, -3.0 / (t * t));
  expect_close(r.dg2, -12.0 / (t * t * t));
}

TEST(GenRiccati3, ResidualExamples) {
  const double a = 1.5;
  const LinearODE c = make_ode(3, {"-3.375", "0", "0"}, "0");
  expect_close(gen_riccati3_residual(Expr::constant(a), c, 0.3), 0.0);
  const LinearODE euler = make_ode(3, {"-6/t^3", "0", "0"}, "0");
  for (double t : {1.0, 2.0, 4.5}) expect_close(gen_riccati3_residual(parse("3/t"), euler, t), 0.0, 1e-12);
}

TEST(MakeGauge, RiccatiDefaultsToRoots) {
  const LinearODE ode = make_ode(2, {"2", "-3"}, "0");
  auto g = make_gauge(ode, RiccatiSpec{}, 0.0);
  const auto init = g->initial_state();
  expect_close(init[0], 1.0);
  expect_close(init[1], 2.0);
}

TEST(MakeGauge, StrongCouplingDefaultC) {
  const LinearODE ode = make_ode(2, {"2", "-3"}, "0");
  auto g = make_gauge(ode, StrongCouplingSpec{}, 0.0);
  auto* sc = dynamic_cast<StrongCouplingGauge*>(g.get());
  ASSERT_NE(sc, nullptr);
  expect_close(sc->C(), -1.0);
  // g1(t1) is a root of g^2 + (f1 - C) g + f0, so g1' vanishes at t1.
  const auto s = g->sample(0.0, g->initial_state());
  expect_close(s.dg(0, 0), 0.0);
}

TEST(MakeGauge, FamilyOrderChecked) {
  const LinearODE cubic = make_ode(3, {"-6", "11", "-6"}, "0");
  EXPECT_THROW(make_gauge(cubic, RiccatiSpec{}, 0.0), InvalidArgument);
  EXPECT_THROW(make_gauge(make_ode(2, {"1", "0"}, "0"), GenRiccati3Spec{}, 0.0), InvalidArgument);
}

TEST(DynamicGauge, CapRaisesRiccatiBlowup) {
  const LinearODE ode = make_ode(2, {"1", "0"}, "0");
  RiccatiGauge g(ode, {I, -I}, 100.0);
  EXPECT_NO_THROW(g.accept(0.0, std::vector<cplx>{I, -I}));
  try {
    g.accept(1.5, std::vector<cplx>{1e3, -I});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::RiccatiBlowup);
    EXPECT_EQ(e.t(), 1.5);
  }
}

TEST(Vandermonde, Rows) {
  const std::vector<cplx> nodes{1.0, 2.0, 3.0};
  const auto rows = vandermonde_rows(nodes);
  ASSERT_EQ(rows.size(), 2u);
  expect_close(rows[1][2](0.0), 9.0);
}
