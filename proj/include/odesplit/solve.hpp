#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "odesplit/expr.hpp"
#include "odesplit/gauges.hpp"
#include "odesplit/model.hpp"
#include "odesplit/transform.hpp"

namespace odesplit {

struct SolveConfig {
  double rel_tol = 1e-9;
  double abs_tol = 1e-11;
  double h_init = 0.0;  ///< 0 selects the starting step automatically
  double h_min = 1e-12;
  double h_max = std::numeric_limits<double>::infinity();
  std::size_t max_steps = 1'000'000;
  double blowup_cap = 1e8;
  /// Evenly spaced output samples when no explicit output times are given.
  std::size_t sample_count = 200;
  /// Also record every accepted step endpoint.
  bool record_steps = false;
  /// Keep interpolation data so Trajectory::at works anywhere in the span.
  bool dense = false;

  void validate() const;
};

enum class Termination { Completed };

/// Sampled solution. Samples are strictly monotone in t (in the direction of
/// integration) and all have the same dimension.
class Trajectory {
public:
  std::vector<double> t;
  std::vector<std::vector<cplx>> states;
  std::size_t accepted = 0;
  std::size_t rejected = 0;
  std::size_t rhs_evaluations = 0;
  double max_step = 0.0;
  Termination termination = Termination::Completed;

  std::size_t size() const noexcept { return t.size(); }
  std::size_t dimension() const noexcept { return states.empty() ? 0 : states.front().size(); }
  bool has_dense() const noexcept { return !segments_.empty(); }

  /// Interpolated state; requires dense output. Throws EmptyOverlap outside the span.
  std::vector<cplx> at(double time) const;
  cplx at(double time, std::size_t component) const;

  /// Component `k` of every sample.
  std::vector<cplx> component(std::size_t k) const;

  /// Keeps only components [first, first + count), including dense data.
  Trajectory slice(std::size_t first, std::size_t count) const;

private:
  friend class DenseRecorder;
  struct Segment {
    double t0;
    double h;
    std::vector<cplx> coeffs;  ///< 5 blocks of `dim` continuous-extension coefficients
  };
  std::vector<Segment> segments_;
  std::size_t dense_dim_ = 0;
};

using RhsFn = std::function<void(double, std::span<const cplx>, std::span<cplx>)>;
using StateHook = std::function<void(double, std::span<const cplx>)>;

struct IntegrateOptions {
  /// Sample times; empty means `sample_count` evenly spaced points over the span.
  std::vector<double> output_times;
  /// Runs at the start point and after each accepted step, before the
  /// magnitude check. May throw to abort.
  StateHook on_accept;
  /// Runs for every recorded sample, in order.
  StateHook on_sample;
};

/// Dormand-Prince 5(4) with PI step-size control and 4th-order dense output.
/// Local error per step is kept below 1 in the norm
///   max_i |e_i| / (abs_tol + rel_tol * max(|y_i|, |y_i_new|)).
/// Throws NumericalError: StepUnderflow, MaxSteps, BlowUp, or whatever `rhs` throws.
Trajectory integrate(const RhsFn& rhs, double t0, double t_end, std::vector<cplx> y0, const SolveConfig& cfg,
                     const IntegrateOptions& options = {});

using ScalarFn = std::function<cplx(double)>;

/// Adaptive Simpson quadrature of a complex integrand over [a, b] (a > b
/// allowed). Throws NumericalError(MaxDepth) when the subdivision limit is hit.
cplx quadrature(const ScalarFn& f, double a, double b, double tol, int max_depth = 50);

std::vector<double> uniform_grid(double a, double b, std::size_t count);

/// Reference trajectory of (y, y', ..., y^(N-1)).
Trajectory solve_companion(const LinearODE& ode, const IVP& ivp, const SolveConfig& cfg,
                           std::vector<double> output_times = {});

struct SplitSolution {
  std::string family;
  std::size_t gauge_state_size = 0;
  Trajectory raw;        ///< integrated state: gauge variables followed by the parts
  Trajectory split;      ///< parts y_1..y_N
  Trajectory companion;  ///< reconstructed (y, y', ..., y^(N-1))
  std::vector<GaugeSample> gauges;  ///< gauge values at each sample
  std::vector<double> abs_det;      ///< |D| at each sample
};

/// Integrates the split system (with co-integrated gauge state for dynamic
/// gauges) and reconstructs the companion state at every sample. Integrator
/// failures at a point where |D| has collapsed are reported as SingularGauge.
SplitSolution solve_split(const LinearODE& ode, const GaugeSpec& spec, const IVP& ivp, const SolveConfig& cfg,
                          std::vector<double> output_times = {});
SplitSolution solve_split(const LinearODE& ode, GaugeSet& gauge, const IVP& ivp, const SolveConfig& cfg,
                          std::vector<double> output_times = {});

}  // namespace odesplit
