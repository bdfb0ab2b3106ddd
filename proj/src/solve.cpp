#include <cmath>

#include "odesplit/errors.hpp"
#include "odesplit/solve.hpp"

namespace odesplit {

Trajectory solve_companion(const LinearODE& ode, const IVP& ivp, const SolveConfig& cfg,
                           std::vector<double> output_times) {
  ivp.validate(ode.order());
  RhsFn rhs = [&ode](double t, std::span<const cplx> y, std::span<cplx> out) { companion_rhs(ode, t, y, out); };
  IntegrateOptions opts;
  opts.output_times = std::move(output_times);
  return integrate(rhs, ivp.t1, ivp.t_end, ivp.initial.derivs, cfg, opts);
}

SplitSolution solve_split(const LinearODE& ode, const GaugeSpec& spec, const IVP& ivp, const SolveConfig& cfg,
                          std::vector<double> output_times) {
  ivp.validate(ode.order());
  auto gauge = make_gauge(ode, spec, ivp.t1, cfg.blowup_cap);
  return solve_split(ode, *gauge, ivp, cfg, std::move(output_times));
}

SplitSolution solve_split(const LinearODE& ode, GaugeSet& gauge, const IVP& ivp, const SolveConfig& cfg,
                          std::vector<double> output_times) {
  ivp.validate(ode.order());
  const std::size_t n = ode.order();
  if (gauge.order() != n) throw InvalidArgument("gauge order does not match the equation order");
  const std::size_t gs = gauge.state_size();

  std::vector<cplx> gstate0 = gauge.initial_state();
  gauge.accept(ivp.t1, gstate0);
  const GaugeSample g0 = gauge.sample(ivp.t1, gstate0);
  const double det0 = std::abs(gauge_determinant(g0));
  CompanionState c0 = ivp.initial;
  c0.t = ivp.t1;
  const SplitState s0 = split_initial(g0, c0);

  std::vector<cplx> y0 = gstate0;
  y0.insert(y0.end(), s0.parts.begin(), s0.parts.end());

  RhsFn rhs = [&](double t, std::span<const cplx> y, std::span<cplx> out) {
    const auto gstate = y.first(gs);
    gauge.state_rhs(t, gstate, out.first(gs));
    const GaugeSample g = gauge.sample(t, gstate);
    split_rhs_general(ode.sample(t), g, y.subspan(gs), out.subspan(gs));
  };

  SplitSolution sol;
  sol.family = std::string(gauge.name());
  sol.gauge_state_size = gs;

  double last_t = ivp.t1;
  std::vector<cplx> last_gauge = gstate0;

  IntegrateOptions opts;
  opts.output_times = std::move(output_times);
  opts.on_accept = [&](double t, std::span<const cplx> y) {
    last_t = t;
    last_gauge.assign(y.begin(), y.begin() + static_cast<std::ptrdiff_t>(gs));
    gauge.accept(t, y.first(gs));
  };
  opts.on_sample = [&](double t, std::span<const cplx> y) {
    GaugeSample g = gauge.sample(t, y.first(gs));
    SplitState sp{t, std::vector<cplx>(y.begin() + static_cast<std::ptrdiff_t>(gs), y.end())};
    sol.abs_det.push_back(std::abs(gauge_determinant(g)));
    const CompanionState c = reconstruct(g, sp);
    sol.companion.t.push_back(t);
    sol.companion.states.push_back(c.derivs);
    sol.gauges.push_back(std::move(g));
  };

  try {
    sol.raw = integrate(rhs, ivp.t1, ivp.t_end, std::move(y0), cfg, opts);
  } catch (const NumericalError& e) {
    switch (e.kind()) {
      case NumericalErrorKind::BlowUp:
      case NumericalErrorKind::StepUnderflow:
      case NumericalErrorKind::MaxSteps:
      case NumericalErrorKind::LinearSolve: {
        // The parts grow like 1/D, so they usually overflow before D itself
        // crosses the singularity threshold.
        double detl = 0.0;
        try {
          detl = std::abs(gauge_determinant(gauge.sample(last_t, last_gauge)));
        } catch (const NumericalError&) {
          throw e;
        }
        if (det0 > 0.0 && detl / det0 < 1e-6) throw SingularGauge(last_t, detl);
        throw;
      }
      default: throw;
    }
  }

  sol.split = sol.raw.slice(gs, n);
  sol.companion.accepted = sol.raw.accepted;
  sol.companion.rejected = sol.raw.rejected;
  sol.companion.rhs_evaluations = sol.raw.rhs_evaluations;
  sol.companion.max_step = sol.raw.max_step;
  return sol;
}

}  // namespace odesplit
