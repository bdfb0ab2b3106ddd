#include "odesplit/gauges.hpp"

#include <algorithm>
#include <cmath>

#include "odesplit/errors.hpp"

namespace odesplit {

namespace {

constexpr cplx kI{0.0, 1.0};

void require_order(const LinearODE& ode, std::size_t n, std::string_view family) {
  if (ode.order() != n)
    throw InvalidArgument(std::string(family) + " gauge requires an order-" + std::to_string(n) + " ODE");
}

void check_zero_q(cplx q, double t) {
  if (q == cplx{}) throw NumericalError(NumericalErrorKind::ZeroQ, t, "q vanishes");
}

}  // namespace

// ---------------------------------------------------------------------------

cplx riccati_rhs(const CoefficientSample& c, cplx g) { return -(c.f[1] * g + c.f[0] + g * g); }

cplx riccati_rhs(const LinearODE& ode, double t, cplx g) {
  require_order(ode, 2, "riccati");
  return riccati_rhs(ode.sample(t), g);
}

StrongCouplingRhs strong_coupling_rhs(const CoefficientSample& c, cplx g1, cplx C, cplx int_f1) {
  const cplx decay = C * std::exp(-int_f1);
  return {-((c.f[1] - decay) * g1 + c.f[0] + g1 * g1), g1 - decay};
}

StrongCouplingRhs strong_coupling_rhs(const LinearODE& ode, double t, cplx g1, cplx C, cplx int_f1) {
  require_order(ode, 2, "strong_coupling");
  return strong_coupling_rhs(ode.sample(t), g1, C, int_f1);
}

std::pair<cplx, cplx> g_from_q(cplx q, cplx dq, cplx f1, double t) {
  check_zero_q(q, t);
  const cplx common = -dq / (2.0 * q) - f1 / 2.0;
  return {kI * q + common, -kI * q + common};
}

cplx q_residual(const Expr& q, const LinearODE& ode, double t) {
  require_order(ode, 2, "phase_integral");
  const Expr dq = differentiate(q);
  const Expr ddq = differentiate(dq);
  const cplx qv = q(t), dqv = dq(t), ddqv = ddq(t);
  check_zero_q(qv, t);
  const cplx f0 = ode.coeff(0)(t), f1 = ode.coeff(1)(t), df1 = ode.coeff_derivative(1)(t);
  return -ddqv / (2.0 * qv) + 3.0 * dqv * dqv / (4.0 * qv * qv) + f0 - qv * qv - df1 / 2.0 - f1 * f1 / 4.0;
}

cplx q_equation_rhs(const CoefficientSample& c, cplx q, cplx dq, double t) {
  check_zero_q(q, t);
  return 1.5 * dq * dq / q + 2.0 * q * (c.f[0] - q * q - c.df[1] / 2.0 - c.f[1] * c.f[1] / 4.0);
}

BranchRhs gen_riccati3_rhs(const CoefficientSample& c, cplx g1, cplx g2) {
  return {g2 - g1 * g1, -(c.f[2] * g2 + c.f[1] * g1 + c.f[0] + g1 * g2)};
}

BranchRhs gen_riccati3_rhs(const LinearODE& ode, double t, cplx g1, cplx g2) {
  require_order(ode, 3, "gen_riccati3");
  return gen_riccati3_rhs(ode.sample(t), g1, g2);
}

cplx gen_riccati3_residual(const Expr& g1, const LinearODE& ode, double t) {
  require_order(ode, 3, "gen_riccati3");
  const Expr dg = differentiate(g1);
  const Expr ddg = differentiate(dg);
  const cplx g = g1(t), d = dg(t), dd = ddg(t);
  const cplx f0 = ode.coeff(0)(t), f1 = ode.coeff(1)(t), f2 = ode.coeff(2)(t);
  return dd + d * (3.0 * g + f2) + f1 * g + f0 + f2 * g * g + g * g * g;
}

// ---------------------------------------------------------------------------

CharacteristicGauge::CharacteristicGauge(const LinearODE& ode) : ode_(ode) {
  if (ode.order() > kMaxOrder) throw InvalidArgument("characteristic gauge supports order <= 6");
}

RootSet CharacteristicGauge::roots_at(double t) const {
  return characteristic_roots(ode_.sample(t), t, committed_ ? &*committed_ : nullptr);
}

GaugeSample CharacteristicGauge::sample(double t, std::span<const cplx>) const {
  const RootSet rs = roots_at(t);
  const auto n = static_cast<Eigen::Index>(order());
  GaugeSample s{t, MatrixXc(n - 1, n), MatrixXc(n - 1, n)};
  for (Eigen::Index k = 0; k < n; ++k) {
    const cplx r = rs.roots[k], dr = rs.droots[k];
    cplx power = r;      // rho^m
    cplx lower{1.0};     // rho^(m-1)
    for (Eigen::Index m = 0; m + 1 < n; ++m) {
      s.g(m, k) = power;
      s.dg(m, k) = static_cast<double>(m + 1) * lower * dr;
      lower = power;
      power *= r;
    }
  }
  return s;
}

void CharacteristicGauge::accept(double t, std::span<const cplx>) { committed_ = roots_at(t); }

// ---------------------------------------------------------------------------

void DynamicGauge::accept(double t, std::span<const cplx> state) {
  for (cplx v : watched(t, state)) {
    if (!(std::abs(v) <= cap_))
      throw NumericalError(NumericalErrorKind::RiccatiBlowup, t,
                           std::string(name()) + " gauge magnitude " + std::to_string(std::abs(v)) +
                               " exceeds cap " + std::to_string(cap_));
  }
}

// ---------------------------------------------------------------------------

RiccatiGauge::RiccatiGauge(const LinearODE& ode, std::array<cplx, 2> initial, double cap)
    : DynamicGauge(ode, cap), initial_(initial) {
  require_order(ode, 2, "riccati");
  if (initial[0] == initial[1]) throw InvalidArgument("riccati gauge needs distinct initial values");
}

void RiccatiGauge::state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const {
  const CoefficientSample c = ode_.sample(t);
  out[0] = riccati_rhs(c, state[0]);
  out[1] = riccati_rhs(c, state[1]);
}

GaugeSample RiccatiGauge::sample(double t, std::span<const cplx> state) const {
  const CoefficientSample c = ode_.sample(t);
  GaugeSample s{t, MatrixXc(1, 2), MatrixXc(1, 2)};
  for (int n = 0; n < 2; ++n) {
    s.g(0, n) = state[n];
    s.dg(0, n) = riccati_rhs(c, state[n]);
  }
  return s;
}

std::vector<cplx> RiccatiGauge::watched(double, std::span<const cplx> state) const { return {state[0], state[1]}; }

// ---------------------------------------------------------------------------

StrongCouplingGauge::StrongCouplingGauge(const LinearODE& ode, cplx C, cplx g1_initial, double cap)
    : DynamicGauge(ode, cap), C_(C), g1_initial_(g1_initial) {
  require_order(ode, 2, "strong_coupling");
  if (C == cplx{}) throw InvalidArgument("strong coupling constant C must be nonzero");
}

void StrongCouplingGauge::state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const {
  const CoefficientSample c = ode_.sample(t);
  out[0] = strong_coupling_rhs(c, state[0], C_, state[1]).dg1;
  out[1] = c.f[1];
}

GaugeSample StrongCouplingGauge::sample(double t, std::span<const cplx> state) const {
  const CoefficientSample c = ode_.sample(t);
  const auto r = strong_coupling_rhs(c, state[0], C_, state[1]);
  const cplx decay = C_ * std::exp(-state[1]);
  GaugeSample s{t, MatrixXc(1, 2), MatrixXc(1, 2)};
  s.g(0, 0) = state[0];
  s.g(0, 1) = r.g2;
  s.dg(0, 0) = r.dg1;
  s.dg(0, 1) = r.dg1 + c.f[1] * decay;
  return s;
}

std::vector<cplx> StrongCouplingGauge::watched(double, std::span<const cplx> state) const {
  return {state[0], state[0] - C_ * std::exp(-state[1])};
}

// ---------------------------------------------------------------------------

namespace {

std::vector<std::vector<Expr>> phase_integral_rows(const LinearODE& ode, const Expr& q) {
  const Expr dq = differentiate(q);
  const Expr common = -(dq / (Expr::constant(2.0) * q)) - ode.coeff(1) / Expr::constant(2.0);
  const Expr iq = Expr::constant(kI) * q;
  return {{iq + common, -iq + common}};
}

}  // namespace

PhaseIntegralGauge::PhaseIntegralGauge(const LinearODE& ode, Expr q, double cap)
    : DynamicGauge(ode, cap), analytic_(std::in_place, phase_integral_rows(ode, q)), q_expr_(std::move(q)) {
  require_order(ode, 2, "phase_integral");
}

PhaseIntegralGauge::PhaseIntegralGauge(const LinearODE& ode, std::array<cplx, 2> q_initial, double cap)
    : DynamicGauge(ode, cap), q_initial_(q_initial) {
  require_order(ode, 2, "phase_integral");
  check_zero_q(q_initial[0], 0.0);
}

std::vector<cplx> PhaseIntegralGauge::initial_state() const {
  if (analytic_) return {};
  return {q_initial_[0], q_initial_[1]};
}

void PhaseIntegralGauge::state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const {
  if (analytic_) return;
  out[0] = state[1];
  out[1] = q_equation_rhs(ode_.sample(t), state[0], state[1], t);
}

cplx PhaseIntegralGauge::q(double t, std::span<const cplx> state) const {
  return analytic_ ? (*q_expr_)(t) : state[0];
}

GaugeSample PhaseIntegralGauge::sample(double t, std::span<const cplx> state) const {
  if (analytic_) {
    check_zero_q((*q_expr_)(t), t);
    return analytic_->sample(t, state);
  }
  const CoefficientSample c = ode_.sample(t);
  const cplx qv = state[0], dq = state[1];
  const cplx ddq = q_equation_rhs(c, qv, dq, t);
  const auto [g1, g2] = g_from_q(qv, dq, c.f[1], t);
  const cplx common = -(ddq * qv - dq * dq) / (2.0 * qv * qv) - c.df[1] / 2.0;
  GaugeSample s{t, MatrixXc(1, 2), MatrixXc(1, 2)};
  s.g(0, 0) = g1;
  s.g(0, 1) = g2;
  s.dg(0, 0) = kI * dq + common;
  s.dg(0, 1) = -kI * dq + common;
  return s;
}

std::vector<cplx> PhaseIntegralGauge::watched(double t, std::span<const cplx> state) const {
  if (analytic_) return {};
  check_zero_q(state[0], t);
  return {state[0], state[1]};
}

// ---------------------------------------------------------------------------

GenRiccati3Gauge::GenRiccati3Gauge(const LinearODE& ode, std::array<std::array<cplx, 2>, 3> branches, double cap)
    : DynamicGauge(ode, cap), branches_(branches) {
  require_order(ode, 3, "gen_riccati3");
  for (int i = 0; i < 3; ++i)
    for (int j = i + 1; j < 3; ++j)
      if (branches[i][0] == branches[j][0])
        throw InvalidArgument("gen_riccati3 branches need pairwise distinct g_1 initial values");
}

std::vector<cplx> GenRiccati3Gauge::initial_state() const {
  std::vector<cplx> s;
  for (const auto& b : branches_) s.insert(s.end(), b.begin(), b.end());
  return s;
}

void GenRiccati3Gauge::state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const {
  const CoefficientSample c = ode_.sample(t);
  for (int n = 0; n < 3; ++n) {
    const auto r = gen_riccati3_rhs(c, state[2 * n], state[2 * n + 1]);
    out[2 * n] = r.dg1;
    out[2 * n + 1] = r.dg2;
  }
}

GaugeSample GenRiccati3Gauge::sample(double t, std::span<const cplx> state) const {
  const CoefficientSample c = ode_.sample(t);
  GaugeSample s{t, MatrixXc(2, 3), MatrixXc(2, 3)};
  for (int n = 0; n < 3; ++n) {
    const cplx g1 = state[2 * n], g2 = state[2 * n + 1];
    const auto r = gen_riccati3_rhs(c, g1, g2);
    s.g(0, n) = g1;
    s.g(1, n) = g2;
    s.dg(0, n) = r.dg1;
    s.dg(1, n) = r.dg2;
  }
  return s;
}

std::vector<cplx> GenRiccati3Gauge::watched(double, std::span<const cplx> state) const {
  return {state.begin(), state.end()};
}

// ---------------------------------------------------------------------------

std::vector<std::vector<Expr>> vandermonde_rows(std::span<const cplx> nodes) {
  const std::size_t n = nodes.size();
  std::vector<std::vector<Expr>> rows(n - 1);
  for (std::size_t k = 0; k < n; ++k) {
    cplx power = nodes[k];
    for (std::size_t m = 0; m + 1 < n; ++m) {
      rows[m].push_back(Expr::constant(power));
      power *= nodes[k];
    }
  }
  return rows;
}

std::string_view family_name(const GaugeSpec& spec) {
  struct {
    std::string_view operator()(const CharacteristicSpec&) const { return "characteristic"; }
    std::string_view operator()(const RiccatiSpec&) const { return "riccati"; }
    std::string_view operator()(const StrongCouplingSpec&) const { return "strong_coupling"; }
    std::string_view operator()(const PhaseIntegralSpec&) const { return "phase_integral"; }
    std::string_view operator()(const GenRiccati3Spec&) const { return "gen_riccati3"; }
    std::string_view operator()(const AnalyticSpec&) const { return "analytic"; }
  } visitor;
  return std::visit(visitor, spec);
}

std::unique_ptr<GaugeSet> make_gauge(const LinearODE& ode, const GaugeSpec& spec, double t1, double default_cap) {
  auto cap_of = [&](const std::optional<double>& c) { return c.value_or(default_cap); };

  if (std::holds_alternative<CharacteristicSpec>(spec)) return std::make_unique<CharacteristicGauge>(ode);

  if (const auto* s = std::get_if<RiccatiSpec>(&spec)) {
    require_order(ode, 2, "riccati");
    std::array<cplx, 2> init;
    if (s->initial) {
      init = *s->initial;
    } else {
      const RootSet rs = characteristic_roots(ode, t1);
      init = {rs.roots[0], rs.roots[1]};
    }
    return std::make_unique<RiccatiGauge>(ode, init, cap_of(s->blowup_cap));
  }

  if (const auto* s = std::get_if<StrongCouplingSpec>(&spec)) {
    require_order(ode, 2, "strong_coupling");
    cplx C;
    if (s->C) {
      C = *s->C;
    } else {
      const RootSet rs = characteristic_roots(ode, t1);
      C = rs.roots[0] - rs.roots[1];
    }
    cplx g1;
    if (s->g1_initial) {
      g1 = *s->g1_initial;
    } else {
      // A fixed point of the g_1 Riccati equation with coefficients frozen at t1.
      const CoefficientSample c = ode.sample(t1);
      const std::array<cplx, 2> frozen{c.f[0], c.f[1] - C};
      auto r = monic_roots(frozen);
      std::sort(r.begin(), r.end(), [](cplx a, cplx b) {
        return a.real() != b.real() ? a.real() < b.real() : a.imag() < b.imag();
      });
      g1 = r[0];
    }
    return std::make_unique<StrongCouplingGauge>(ode, C, g1, cap_of(s->blowup_cap));
  }

  if (const auto* s = std::get_if<PhaseIntegralSpec>(&spec)) {
    require_order(ode, 2, "phase_integral");
    const Expr q = s->q.value_or(sqrt(ode.coeff(0)));
    if (s->mode == PhaseIntegralSpec::Mode::Analytic)
      return std::make_unique<PhaseIntegralGauge>(ode, q, cap_of(s->blowup_cap));
    std::array<cplx, 2> init;
    if (s->q_initial) {
      init = *s->q_initial;
    } else {
      init = {q(t1), differentiate(q)(t1)};
    }
    return std::make_unique<PhaseIntegralGauge>(ode, init, cap_of(s->blowup_cap));
  }

  if (const auto* s = std::get_if<GenRiccati3Spec>(&spec)) {
    require_order(ode, 3, "gen_riccati3");
    std::array<std::array<cplx, 2>, 3> br;
    if (s->branches) {
      br = *s->branches;
    } else {
      const RootSet rs = characteristic_roots(ode, t1);
      for (int n = 0; n < 3; ++n) br[n] = {rs.roots[n], rs.roots[n] * rs.roots[n]};
    }
    return std::make_unique<GenRiccati3Gauge>(ode, br, cap_of(s->blowup_cap));
  }

  const auto& a = std::get<AnalyticSpec>(spec);
  if (a.rows.size() + 1 != ode.order()) throw InvalidArgument("analytic gauge must have N-1 rows");
  return std::make_unique<AnalyticGauge>(a.rows);
}

}  // namespace odesplit
