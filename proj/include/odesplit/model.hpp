#pragma once

// Linear ODE of order N
//
//   y^(N) + f_{N-1}(t) y^(N-1) + ... + f_1(t) y' + f_0(t) y + f(t) = 0
//
// and its companion-form first-order system, which serves as the reference
// every split transformation is checked against. The companion matrix is
//
//   [ 0    1    0   ...  0       ]
//   [ ...                        ]
//   [ 0    0    0   ...  1       ]
//   [ -f0  -f1  -f2 ... -f_{N-1} ]
//
// with forcing (0, ..., 0, -f); the last row carries minus signs so that the
// system reproduces the equation above.

#include <span>
#include <string>
#include <vector>

#include "odesplit/expr.hpp"

namespace odesplit {

/// Coefficient values at a single t.
struct CoefficientSample {
  std::vector<cplx> f;   ///< f_0 .. f_{N-1}
  std::vector<cplx> df;  ///< f_0' .. f_{N-1}'
  cplx inhom{};          ///< f
};

class LinearODE {
public:
  LinearODE(std::vector<Expr> coeffs, Expr inhom);

  std::size_t order() const noexcept { return coeffs_.size(); }
  const Expr& coeff(std::size_t k) const { return coeffs_.at(k); }
  const Expr& coeff_derivative(std::size_t k) const { return dcoeffs_.at(k); }
  const std::vector<Expr>& coeffs() const noexcept { return coeffs_; }
  const Expr& inhom() const noexcept { return inhom_; }
  /// True when f is structurally the constant zero.
  bool homogeneous() const noexcept { return inhom_.is_zero(); }

  CoefficientSample sample(double t) const;

private:
  std::vector<Expr> coeffs_;
  std::vector<Expr> dcoeffs_;
  Expr inhom_;
};

/// (y, y', ..., y^(N-1)) at t.
struct CompanionState {
  double t = 0.0;
  std::vector<cplx> derivs;
};

struct IVP {
  double t1 = 0.0;
  CompanionState initial;
  double t_end = 1.0;

  /// Throws InvalidArgument unless t_end != t1, initial.t == t1 and the state
  /// length matches `order`.
  void validate(std::size_t order) const;
};

LinearODE make_ode(std::size_t order, const std::vector<std::string>& coeff_sources,
                   const std::string& inhom_source, const ParamTable& params = {});

/// d/dt of the companion state: (y', ..., y^(N-1), -sum f_k y^(k) - f).
std::vector<cplx> companion_rhs(const LinearODE& ode, const CompanionState& s);
void companion_rhs(const LinearODE& ode, double t, std::span<const cplx> state, std::span<cplx> out);

}  // namespace odesplit
