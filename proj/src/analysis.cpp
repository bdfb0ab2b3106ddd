#include "odesplit/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "odesplit/errors.hpp"
#include "odesplit/gauges.hpp"
#include "odesplit/roots.hpp"

namespace odesplit {

namespace {

constexpr double kZeroTol = 1e-14;

void check_f0(const LinearODE& ode, double t, double scale) {
  if (!(std::abs(ode.coeff(0)(t)) > kZeroTol * scale))
    throw NumericalError(NumericalErrorKind::ZeroCoefficient, t, "f0 vanishes (turning point)");
}

// Looks for a real sign change of f0 on a coarse grid; quadrature alone can
// step over a simple zero.
void scan_turning_point(const LinearODE& ode, double a, double b, double scale) {
  constexpr int kScan = 64;
  cplx prev = ode.coeff(0)(a);
  for (int k = 1; k <= kScan; ++k) {
    const double t = a + (b - a) * k / kScan;
    const cplx cur = ode.coeff(0)(t);
    check_f0(ode, t, scale);
    const bool real_line = std::abs(prev.imag()) <= kZeroTol * scale && std::abs(cur.imag()) <= kZeroTol * scale;
    if (real_line && prev.real() * cur.real() < 0.0)
      throw NumericalError(NumericalErrorKind::ZeroCoefficient, t, "f0 changes sign (turning point)");
    prev = cur;
  }
}

// Diagonal coefficient rho_n - rho_n' sum_{k != n} 1/(rho_n - rho_k).
cplx diagonal_rate(const RootSet& r, std::size_t n) {
  cplx s{};
  for (std::size_t k = 0; k < r.roots.size(); ++k)
    if (k != n) s += 1.0 / (r.roots[n] - r.roots[k]);
  return r.roots[n] - r.droots[n] * s;
}

// Forcing -f / prod_{k != n} (rho_n - rho_k).
cplx diagonal_forcing(const RootSet& r, std::size_t n, cplx f) {
  cplx p{1.0};
  for (std::size_t k = 0; k < r.roots.size(); ++k)
    if (k != n) p *= r.roots[n] - r.roots[k];
  return -f / p;
}

struct Accumulator {
  ErrorReport rep;
  double ref_sup = 0.0;
  double sum_abs = 0.0, sum_rel = 0.0;

  void add(double t, double abs, double ref) {
    const double rel = abs / std::max(ref, kRelFloor);
    if (rep.rows.empty() || abs > rep.max_abs) {
      rep.max_abs = abs;
      rep.t_of_max = t;
    }
    rep.max_rel = std::max(rep.max_rel, rel);
    ref_sup = std::max(ref_sup, ref);
    sum_abs += abs;
    sum_rel += rel;
    rep.rows.push_back({t, abs, rel});
  }

  ErrorReport finish() {
    if (!rep.rows.empty()) {
      const auto n = static_cast<double>(rep.rows.size());
      rep.mean_abs = sum_abs / n;
      rep.mean_rel = sum_rel / n;
      rep.max_rel_norm = rep.max_abs / std::max(ref_sup, kRelFloor);
    }
    return std::move(rep);
  }
};

}  // namespace

std::array<cplx, 2> wkb2(const LinearODE& ode, double t1, std::array<cplx, 2> y12, double t, double tol) {
  if (ode.order() != 2) throw InvalidArgument("wkb2 needs a second-order equation");
  if (!ode.coeff(1).is_zero()) throw InvalidArgument("wkb2 needs f1 identically zero");
  const cplx f01 = ode.coeff(0)(t1);
  const double scale = std::max(1.0, std::abs(f01));
  check_f0(ode, t1, scale);
  if (t != t1) scan_turning_point(ode, t1, t, scale);
  const cplx phase = quadrature(
      [&](double s) {
        const cplx f0 = ode.coeff(0)(s);
        if (!(std::abs(f0) > kZeroTol * scale))
          throw NumericalError(NumericalErrorKind::ZeroCoefficient, s, "f0 vanishes (turning point)");
        return std::sqrt(f0);
      },
      t1, t, tol);
  const cplx amp = std::pow(f01 / ode.coeff(0)(t), 0.25);
  const cplx i{0.0, 1.0};
  return {y12[0] * amp * std::exp(i * phase), y12[1] * amp * std::exp(-i * phase)};
}

std::array<cplx, 2> phase_integral2(const LinearODE& ode, const ScalarFn& q, double t1, std::array<cplx, 2> y12,
                                    double t, double tol) {
  if (ode.order() != 2) throw InvalidArgument("phase_integral2 needs a second-order equation");
  auto q_checked = [&](double s) {
    const cplx v = q(s);
    if (v == cplx{}) throw NumericalError(NumericalErrorKind::ZeroQ, s, "q vanishes");
    return v;
  };
  const cplx q1 = q_checked(t1);
  const cplx qt = q_checked(t);
  const cplx iq = quadrature(q_checked, t1, t, tol);
  const cplx if1 = ode.coeff(1).is_zero()
                       ? cplx{}
                       : quadrature([&](double s) { return ode.coeff(1)(s); }, t1, t, tol);
  const cplx amp = std::sqrt(q1 / qt) * std::exp(-0.5 * if1);
  const cplx i{0.0, 1.0};
  return {y12[0] * amp * std::exp(i * iq), y12[1] * amp * std::exp(-i * iq)};
}

std::array<cplx, 2> phase_integral2(const LinearODE& ode, const Expr& q, double t1, std::array<cplx, 2> y12,
                                    double t, double tol) {
  return phase_integral2(ode, ScalarFn([&q](double s) { return q(s); }), t1, y12, t, tol);
}

std::array<cplx, 3> wkb3_diagonal(const LinearODE& ode, const IVP& ivp, double t, double tol) {
  if (ode.order() != 3) throw InvalidArgument("wkb3_diagonal needs a third-order equation");
  ivp.validate(3);
  CharacteristicGauge gauge(ode);
  gauge.accept(ivp.t1, {});
  const RootSet r0 = *gauge.committed();
  CompanionState c0 = ivp.initial;
  c0.t = ivp.t1;
  const SplitState s0 = split_initial(gauge.sample(ivp.t1, {}), c0);
  std::array<cplx, 3> out{s0.parts[0], s0.parts[1], s0.parts[2]};
  if (t == ivp.t1) return out;

  if (ode.homogeneous()) {
    // Each part is an exponential; Simpson recursion walks left to right, so
    // tracking against the previous evaluation keeps the root order.
    for (std::size_t n = 0; n < 3; ++n) {
      std::optional<RootSet> prev = r0;
      const cplx integral = quadrature(
          [&](double s) {
            prev = characteristic_roots(ode, s, prev);
            return diagonal_rate(*prev, n);
          },
          ivp.t1, t, tol);
      out[n] *= std::exp(integral);
    }
    return out;
  }

  RhsFn rhs = [&](double s, std::span<const cplx> y, std::span<cplx> dy) {
    const RootSet r = gauge.roots_at(s);
    const cplx f = ode.inhom()(s);
    for (std::size_t n = 0; n < 3; ++n) dy[n] = y[n] * diagonal_rate(r, n) + diagonal_forcing(r, n, f);
  };
  SolveConfig cfg;
  cfg.rel_tol = std::max(tol, 1e-13);
  cfg.abs_tol = cfg.rel_tol * 1e-2;
  IntegrateOptions opts;
  opts.output_times = {ivp.t1, t};
  opts.on_accept = [&](double s, std::span<const cplx>) { gauge.accept(s, {}); };
  const Trajectory tr = integrate(rhs, ivp.t1, t, {out.begin(), out.end()}, cfg, opts);
  const auto& last = tr.states.back();
  return {last[0], last[1], last[2]};
}

cplx exp_solution(const ScalarFn& g, double t1, double t, cplx amplitude, double tol) {
  return amplitude * std::exp(quadrature(g, t1, t, tol));
}

cplx exp_solution(const Expr& g, double t1, double t, cplx amplitude, double tol) {
  return exp_solution(ScalarFn([&g](double s) { return g(s); }), t1, t, amplitude, tol);
}

ErrorReport wronskian_abel(const Trajectory& a, const Trajectory& b, const Expr& f1, double tol) {
  if (a.size() == 0 || a.t != b.t)
    throw NumericalError(NumericalErrorKind::GridMismatch, a.size() ? a.t.front() : 0.0,
                         "trajectories are not sampled on a common grid");
  if (a.dimension() < 2 || b.dimension() < 2)
    throw InvalidArgument("Wronskian needs (y, y') in each trajectory");
  auto wronskian = [&](std::size_t i) {
    return a.states[i][0] * b.states[i][1] - b.states[i][0] * a.states[i][1];
  };
  const cplx w0 = wronskian(0);
  const ScalarFn f = [&f1](double s) { return f1(s); };
  Accumulator acc;
  cplx integral{};
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (i > 0 && !f1.is_zero()) integral += quadrature(f, a.t[i - 1], a.t[i], tol);
    const cplx expected = w0 * std::exp(-integral);
    acc.add(a.t[i], std::abs(wronskian(i) - expected), std::abs(expected));
  }
  return acc.finish();
}

ErrorReport compare(const Trajectory& a, const Trajectory& b, const std::vector<std::size_t>& components) {
  if (a.size() == 0 || b.size() == 0)
    throw NumericalError(NumericalErrorKind::EmptyOverlap, 0.0, "empty trajectory");
  std::vector<std::size_t> comps = components;
  if (comps.empty())
    for (std::size_t k = 0; k < std::min(a.dimension(), b.dimension()); ++k) comps.push_back(k);
  for (std::size_t k : comps)
    if (k >= a.dimension() || k >= b.dimension()) throw InvalidArgument("component index out of range");

  const bool forward = b.t.back() >= b.t.front();
  const double lo = std::min(b.t.front(), b.t.back()), hi = std::max(b.t.front(), b.t.back());
  const bool same_grid = a.t == b.t;

  auto reference = [&](std::size_t i, double t) -> std::vector<cplx> {
    if (same_grid) return b.states[i];
    if (b.has_dense()) return b.at(t);
    // Linear interpolation between bracketing samples.
    auto it = forward ? std::lower_bound(b.t.begin(), b.t.end(), t)
                      : std::lower_bound(b.t.begin(), b.t.end(), t, std::greater<double>());
    std::size_t j = static_cast<std::size_t>(it - b.t.begin());
    if (j < b.size() && b.t[j] == t) return b.states[j];
    if (j == 0) j = 1;
    if (j >= b.size()) j = b.size() - 1;
    const double w = (t - b.t[j - 1]) / (b.t[j] - b.t[j - 1]);
    std::vector<cplx> v(b.dimension());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = (1.0 - w) * b.states[j - 1][k] + w * b.states[j][k];
    return v;
  };

  Accumulator acc;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double t = a.t[i];
    if (t < lo || t > hi) continue;
    const auto ref = reference(i, t);
    double abs = 0.0, mag = 0.0;
    for (std::size_t k : comps) {
      abs = std::max(abs, std::abs(a.states[i][k] - ref[k]));
      mag = std::max(mag, std::abs(ref[k]));
    }
    acc.add(t, abs, mag);
  }
  if (acc.rep.rows.empty())
    throw NumericalError(NumericalErrorKind::EmptyOverlap, a.t.front(), "trajectories do not overlap");
  return acc.finish();
}

}  // namespace odesplit
