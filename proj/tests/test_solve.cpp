#include <gtest/gtest.h>

#include <cmath>

#include "odesplit/analysis.hpp"
#include "odesplit/errors.hpp"
#include "odesplit/solve.hpp"

using namespace odesplit;

namespace {

const cplx I{0.0, 1.0};

IVP ivp(double t1, std::vector<cplx> y0, double t_end) { return {t1, {t1, std::move(y0)}, t_end}; }

double sup_dev(const Trajectory& a, const Trajectory& b) { return compare(a, b, {0}).max_rel_norm; }

}  // namespace

TEST(Integrate, ExponentialDecay) {
  SolveConfig cfg;
  RhsFn f = [](double, std::span<const cplx> y, std::span<cplx> d) { d[0] = -y[0]; };
  const auto tr = integrate(f, 0.0, 1.0, {1.0}, cfg);
  EXPECT_NEAR(tr.states.back()[0].real(), std::exp(-1.0), 1e-8);
  EXPECT_EQ(tr.t.back(), 1.0);
}

TEST(Integrate, HarmonicOscillator) {
  SolveConfig cfg;
  RhsFn f = [](double, std::span<const cplx> y, std::span<cplx> d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
  const auto tr = integrate(f, 0.0, M_PI, {1.0, 0.0}, cfg);
  EXPECT_LE(std::abs(tr.states.back()[0] + 1.0), 1e-8);
  EXPECT_LE(std::abs(tr.states.back()[1]), 1e-8);
}

TEST(Integrate, ToleranceConvergence) {
  RhsFn f = [](double, std::span<const cplx> y, std::span<cplx> d) {
    d[0] = y[1];
    d[1] = -y[0];
  };
  double prev = 1.0;
  for (double tol : {1e-5, 1e-6, 1e-7, 1e-8, 1e-9}) {
    SolveConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    const auto tr = integrate(f, 0.0, 10.0, {1.0, 0.0}, cfg);
    const double err = std::abs(tr.states.back()[0] - std::cos(10.0));
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(Integrate, BackwardAndOutputGrid) {
  SolveConfig cfg;
  RhsFn f = [](double, std::span<const cplx> y, std::span<cplx> d) { d[0] = y[0]; };
  IntegrateOptions opts;
  opts.output_times = {1.0, 0.5, 0.0};
  const auto tr = integrate(f, 1.0, 0.0, {std::exp(1.0)}, cfg, opts);
  ASSERT_EQ(tr.size(), 3u);
  EXPECT_NEAR(tr.states[1][0].real(), std::exp(0.5), 1e-8);
  EXPECT_NEAR(tr.states[2][0].real(), 1.0, 1e-8);
}

TEST(Integrate, MonotoneTimesAndHmax) {
  SolveConfig cfg;
  cfg.h_max = 0.05;
  cfg.record_steps = true;
  RhsFn f = [](double t, std::span<const cplx> y, std::span<cplx> d) { d[0] = std::cos(t) * y[0]; };
  const auto tr = integrate(f, 0.0, 3.0, {1.0}, cfg);
  for (std::size_t i = 1; i < tr.size(); ++i) EXPECT_GT(tr.t[i], tr.t[i - 1]);
  EXPECT_LE(tr.max_step, 0.05 + 1e-15);
  EXPECT_GT(tr.accepted, 59u);
}

TEST(Integrate, DenseOutput) {
  SolveConfig cfg;
  cfg.dense = true;
  RhsFn f = [](double, std::span<const cplx> y, std::span<cplx> d) { d[0] = I * y[0]; };
  const auto tr = integrate(f, 0.0, 5.0, {1.0}, cfg);
  ASSERT_TRUE(tr.has_dense());
  for (double t : {0.123, 1.7, 3.33, 4.999}) EXPECT_LE(std::abs(tr.at(t, 0) - std::exp(I * t)), 1e-7);
  EXPECT_THROW(tr.at(6.0), NumericalError);
}

TEST(Integrate, Errors) {
  SolveConfig cfg;
  RhsFn blow = [](double, std::span<const cplx> y, std::span<cplx> d) { d[0] = y[0] * y[0]; };
  try {
    integrate(blow, 0.0, 2.0, {1.0}, cfg);  // pole at t = 1
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_TRUE(e.kind() == NumericalErrorKind::BlowUp || e.kind() == NumericalErrorKind::StepUnderflow);
    EXPECT_NEAR(e.t(), 1.0, 1e-3);
  }
  SolveConfig few;
  few.max_steps = 5;
  RhsFn osc = [](double, std::span<const cplx> y, std::span<cplx> d) { d[0] = 50.0 * I * y[0]; };
  try {
    integrate(osc, 0.0, 10.0, {1.0}, few);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::MaxSteps);
  }
  SolveConfig bad;
  bad.rel_tol = -1.0;
  EXPECT_THROW(integrate(osc, 0.0, 1.0, {1.0}, bad), InvalidArgument);
}

TEST(Quadrature, Examples) {
  EXPECT_LE(std::abs(quadrature([](double t) { return cplx(std::sin(t)); }, 0.0, M_PI, 1e-12) - 2.0), 1e-10);
  EXPECT_LE(std::abs(quadrature([](double t) { return cplx(0.5 / std::sqrt(t)); }, 1.0, 4.0, 1e-12) - 1.0), 1e-10);
  EXPECT_LE(std::abs(quadrature([](double t) { return cplx(std::exp(t)); }, 0.0, 1.0, 1e-12) - (M_E - 1.0)), 1e-9);
  // reversed limits and complex integrand
  EXPECT_LE(std::abs(quadrature([](double t) { return std::exp(I * t); }, M_PI, 0.0, 1e-12) + 2.0 * I), 1e-10);
}

TEST(Quadrature, MaxDepth) {
  try {
    quadrature([](double t) { return cplx(std::sin(1.0 / t)); }, 1e-9, 1.0, 1e-14, 12);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::MaxDepth);
  }
}

TEST(SolveCompanion, Examples) {
  SolveConfig cfg;
  auto tr = solve_companion(make_ode(2, {"1", "0"}, "0"), ivp(0.0, {1.0, 0.0}, 2.0 * M_PI), cfg);
  EXPECT_LE(std::abs(tr.states.back()[0] - 1.0), 1e-7);
  EXPECT_LE(std::abs(tr.states.back()[1]), 1e-7);
  tr = solve_companion(make_ode(2, {"-1", "0"}, "0"), ivp(0.0, {1.0, 1.0}, 1.0), cfg);
  EXPECT_LE(std::abs(tr.states.back()[0] - M_E), 1e-7);
  EXPECT_LE(std::abs(tr.states.back()[1] - M_E), 1e-7);
}

TEST(SolveCompanion, AirySelfConvergence) {
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  SolveConfig ref;
  ref.rel_tol = 1e-13;
  ref.abs_tol = 1e-15;
  const auto exact = solve_companion(ode, ivp(1.0, {1.0, 0.0}, 10.0), ref).states.back()[0];
  double prev = 1.0;
  for (double tol : {1e-6, 1e-7, 1e-8, 1e-9}) {
    SolveConfig cfg;
    cfg.rel_tol = tol;
    cfg.abs_tol = tol * 1e-2;
    const double err = std::abs(solve_companion(ode, ivp(1.0, {1.0, 0.0}, 10.0), cfg).states.back()[0] - exact);
    EXPECT_LT(err, prev);
    prev = err;
  }
}

TEST(SolveSplit, HarmonicCharacteristic) {
  SolveConfig cfg;
  const auto sol = solve_split(make_ode(2, {"1", "0"}, "0"), CharacteristicSpec{}, ivp(0.0, {1.0, 0.0}, M_PI), cfg);
  EXPECT_LE(std::abs(sol.companion.states.back()[0] + 1.0), 1e-7);
  EXPECT_LE(std::abs(sol.companion.states.back()[1]), 1e-7);
  EXPECT_EQ(sol.split.dimension(), 2u);
  EXPECT_EQ(sol.abs_det.size(), sol.split.size());
}

TEST(SolveSplit, AiryCharacteristicMatchesOracle) {
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  SolveConfig cfg;
  const auto p = ivp(1.0, {1.0, 0.0}, 10.0);
  const auto sol = solve_split(ode, CharacteristicSpec{}, p, cfg);
  EXPECT_LE(sup_dev(sol.companion, solve_companion(ode, p, cfg)), 1e-6);
}

TEST(SolveSplit, GenRiccati3MatchesOracle) {
  const LinearODE ode = make_ode(3, {"-6/t^3", "0", "0"}, "0");
  SolveConfig cfg;
  const auto p = ivp(1.0, {1.0, 0.5, -0.25}, 5.0);
  GenRiccati3Spec spec;
  const double s2 = std::sqrt(2.0);
  spec.branches = {{{3.0, 6.0}, {I * s2, -2.0 - I * s2}, {-I * s2, -2.0 + I * s2}}};
  const auto sol = solve_split(ode, spec, p, cfg);
  EXPECT_LE(sup_dev(sol.companion, solve_companion(ode, p, cfg)), 1e-6);
}

TEST(SolveSplit, EveryFamilyWithinToleranceBound) {
  // |reconstructed - companion| <= 10 (rel_tol |companion| + abs_tol)
  struct Case {
    LinearODE ode;
    IVP p;
  };
  std::vector<Case> cases{{make_ode(2, {"1", "0"}, "0"), ivp(0.0, {1.0, 0.3}, 6.0)},
                          {make_ode(2, {"1+0.3*sin(t)", "0"}, "0"), ivp(0.0, {1.0, 0.0}, 10.0)}};
  std::vector<GaugeSpec> specs{CharacteristicSpec{}, RiccatiSpec{}, StrongCouplingSpec{}, PhaseIntegralSpec{},
                               AnalyticSpec{{{parse("2*i"), parse("-i")}}}};
  SolveConfig cfg;
  for (const auto& c : cases) {
    const auto oracle = solve_companion(c.ode, c.p, cfg);
    double sup = 0.0;
    for (const auto& s : oracle.states) sup = std::max(sup, std::abs(s[0]));
    for (const auto& spec : specs) {
      const auto sol = solve_split(c.ode, spec, c.p, cfg);
      const auto rep = compare(sol.companion, oracle, {0});
      EXPECT_LE(rep.max_abs, 10.0 * (cfg.rel_tol * sup + cfg.abs_tol)) << family_name(spec);
    }
  }
}

TEST(SolveSplit, QuarticCharacteristic) {
  const LinearODE ode = make_ode(4, {"24+0.1*t", "-50", "35", "-10"}, "0");
  SolveConfig cfg;
  const auto p = ivp(0.0, {1.0, 0.0, 0.0, 0.0}, 1.0);
  const auto sol = solve_split(ode, CharacteristicSpec{}, p, cfg);
  EXPECT_LE(sup_dev(sol.companion, solve_companion(ode, p, cfg)), 1e-7);
}

TEST(SolveSplit, InhomogeneousMatchesOracle) {
  const LinearODE ode = make_ode(2, {"1+t/5", "0.1"}, "cos(2*t)");
  SolveConfig cfg;
  const auto p = ivp(0.0, {0.5, -0.5}, 8.0);
  const auto oracle = solve_companion(ode, p, cfg);
  for (const GaugeSpec& spec : {GaugeSpec{CharacteristicSpec{}}, GaugeSpec{RiccatiSpec{}}})
    EXPECT_LE(sup_dev(solve_split(ode, spec, p, cfg).companion, oracle), 1e-7);
}

TEST(SolveSplit, LinearityInInitialData) {
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  SolveConfig cfg;
  const cplx alpha{2.5, -1.0};
  const auto a = solve_split(ode, RiccatiSpec{}, ivp(1.0, {1.0, 0.2}, 6.0), cfg);
  const auto b = solve_split(ode, RiccatiSpec{}, ivp(1.0, {alpha, alpha * 0.2}, 6.0), cfg);
  double dev = 0.0, sup = 0.0;
  for (std::size_t i = 0; i < a.companion.size(); ++i) {
    dev = std::max(dev, std::abs(alpha * a.companion.states[i][0] - b.companion.states[i][0]));
    sup = std::max(sup, std::abs(b.companion.states[i][0]));
  }
  EXPECT_LE(dev / sup, 1e-9);
}

TEST(SolveSplit, DerivativeConsistency) {
  // d/dt sum y_n matches y' = sum g_1n y_n carried by the reconstruction.
  const LinearODE ode = make_ode(2, {"t", "0"}, "0");
  SolveConfig cfg;
  cfg.dense = true;
  const auto sol = solve_split(ode, CharacteristicSpec{}, ivp(1.0, {1.0, 0.0}, 5.0), cfg);
  const double h = 1e-5;
  for (std::size_t i = 10; i + 10 < sol.split.size(); i += 37) {
    const double t = sol.split.t[i];
    const auto yp = sol.split.at(t + h), ym = sol.split.at(t - h);
    const cplx fd = (yp[0] + yp[1] - ym[0] - ym[1]) / (2.0 * h);
    const cplx dy = sol.companion.states[i][1];
    EXPECT_LE(std::abs(fd - dy), 1e-6 * (1.0 + std::abs(dy))) << "t=" << t;
  }
}

TEST(SolveSplit, SingularGaugeDetected) {
  // g = (t, 2): D = 2 - t vanishes at t = 2.
  const LinearODE ode = make_ode(2, {"1", "0"}, "0");
  SolveConfig cfg;
  try {
    solve_split(ode, AnalyticSpec{{{parse("t"), parse("2")}}}, ivp(0.0, {1.0, 0.0}, 4.0), cfg);
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::SingularGauge);
    EXPECT_NEAR(e.t(), 2.0, 1e-3);
  }
}

TEST(SolveSplit, EqualGaugesFailAtStart) {
  try {
    solve_split(make_ode(2, {"1", "0"}, "0"), AnalyticSpec{{{parse("i"), parse("i")}}}, ivp(0.5, {1.0, 0.0}, 1.0),
                SolveConfig{});
    FAIL();
  } catch (const SingularGauge& e) {
    EXPECT_EQ(e.t(), 0.5);
  }
}

TEST(SolveSplit, RiccatiPoleRaisesBlowup) {
  // y'' + y = 0, y(0) = 0, y'(0) = 1: g = y'/y = cot t ... with g(0) = 0, g = -tan t has a pole at pi/2.
  RiccatiSpec spec;
  spec.initial = std::array<cplx, 2>{0.0, I};
  try {
    solve_split(make_ode(2, {"1", "0"}, "0"), spec, ivp(0.0, {1.0, 0.0}, 3.0), SolveConfig{});
    FAIL();
  } catch (const NumericalError& e) {
    EXPECT_EQ(e.kind(), NumericalErrorKind::RiccatiBlowup);
    EXPECT_NEAR(e.t(), M_PI / 2.0, 1e-3);
  }
}

TEST(SolveSplit, PhaseIntegralOdeModeIsExact) {
  // q integrated from the q-equation makes the gauge exactly Riccati: coupling vanishes.
  const LinearODE ode = make_ode(2, {"4*(1+0.1*t)^2", "0"}, "0");
  PhaseIntegralSpec spec;
  spec.mode = PhaseIntegralSpec::Mode::Ode;
  SolveConfig cfg;
  const auto p = ivp(0.0, {1.0, 0.0}, 5.0);
  const auto sol = solve_split(ode, spec, p, cfg);
  EXPECT_LE(sup_dev(sol.companion, solve_companion(ode, p, cfg)), 1e-7);
  for (std::size_t i = 0; i < sol.gauges.size(); i += 20) {
    const auto& g = sol.gauges[i];
    const auto x = coupling_terms_n2(ode.sample(g.t), g.g(0, 0), g.g(0, 1), g.dg(0, 0), g.dg(0, 1));
    EXPECT_LE(std::abs(x.x1), 1e-7);
    EXPECT_LE(std::abs(x.x2), 1e-7);
  }
}
