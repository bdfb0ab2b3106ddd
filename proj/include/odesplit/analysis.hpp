#pragma once

// Closed-form approximations and trajectory metrics.

#include <array>
#include <optional>
#include <vector>

#include "odesplit/expr.hpp"
#include "odesplit/model.hpp"
#include "odesplit/solve.hpp"

namespace odesplit {

inline constexpr double kRelFloor = 1e-300;

struct ErrorReport {
  struct Row {
    double t;
    double abs;
    double rel;
  };
  double max_abs = 0.0;
  double max_rel = 0.0;       ///< pointwise: |a - b| / max(|b|, 1e-300)
  double max_rel_norm = 0.0;  ///< max_abs over the sup-norm of the reference
  double mean_abs = 0.0;
  double mean_rel = 0.0;
  double t_of_max = 0.0;      ///< where max_abs occurs
  std::vector<Row> rows;
};

/// WKB pair y_{1,2}(t) = y_{1,2}(t1) (f0(t1)/f0(t))^{1/4} exp(+-i int sqrt(f0)).
/// Needs order 2 with f_1 identically zero. Throws ZeroCoefficient where f_0 vanishes.
std::array<cplx, 2> wkb2(const LinearODE& ode, double t1, std::array<cplx, 2> y12, double t, double tol = 1e-12);

/// y_{1,2}(t1) sqrt(q(t1)/q(t)) exp(+-i int q - int f_1 / 2). Throws ZeroQ.
std::array<cplx, 2> phase_integral2(const LinearODE& ode, const ScalarFn& q, double t1, std::array<cplx, 2> y12,
                                    double t, double tol = 1e-12);
std::array<cplx, 2> phase_integral2(const LinearODE& ode, const Expr& q, double t1, std::array<cplx, 2> y12,
                                    double t, double tol = 1e-12);

/// Diagonal truncation of the third-order characteristic-gauge split system.
/// Returns the parts y_1..y_3 at t, started from the split of ivp.initial.
/// Throws RootCollision.
std::array<cplx, 3> wkb3_diagonal(const LinearODE& ode, const IVP& ivp, double t, double tol = 1e-12);

/// amplitude * exp(int_{t1}^t g).
cplx exp_solution(const ScalarFn& g, double t1, double t, cplx amplitude, double tol = 1e-12);
cplx exp_solution(const Expr& g, double t1, double t, cplx amplitude, double tol = 1e-12);

/// Deviation of W = y1 y2' - y2 y1' from W(t1) exp(-int f_1). Both
/// trajectories hold (y, y', ...) on the same grid; throws GridMismatch otherwise.
ErrorReport wronskian_abel(const Trajectory& a, const Trajectory& b, const Expr& f1, double tol = 1e-13);

/// Deviation of `a` from reference `b` on a's grid (restricted to the overlap).
/// B is evaluated by dense output when available, by matching sample times,
/// or by linear interpolation. `components` empty means all. Throws EmptyOverlap.
ErrorReport compare(const Trajectory& a, const Trajectory& b, const std::vector<std::size_t>& components = {});

}  // namespace odesplit
