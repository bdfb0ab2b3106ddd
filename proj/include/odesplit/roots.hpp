#pragma once

// Roots of the pointwise characteristic polynomial
//
//   P(rho) = rho^N + f_{N-1}(t) rho^(N-1) + ... + f_1(t) rho + f_0(t)
//
// tracked continuously in t.

#include <optional>
#include <span>
#include <vector>

#include "odesplit/expr.hpp"
#include "odesplit/model.hpp"

namespace odesplit {

struct RootSet {
  double t = 0.0;
  std::vector<cplx> roots;
  std::vector<cplx> droots;  ///< d rho_n / dt
};

/// Relative separation below which two roots count as colliding.
inline constexpr double kRootCollisionTol = 1e-8;

/// Unordered roots of the monic polynomial with lower coefficients `f`
/// (f[k] multiplies rho^k). Closed forms for degree 2 and 3, companion-matrix
/// eigenvalues otherwise; every root gets a Newton polish.
std::vector<cplx> monic_roots(std::span<const cplx> f);

/// P(rho) for the monic polynomial with lower coefficients `f`.
cplx monic_value(std::span<const cplx> f, cplx rho);

/// Roots ordered by continuity with `prev` (or by (real, imag) without it),
/// with derivatives from implicit differentiation of P(rho(t), t) = 0.
/// Throws RootCollision when two roots coincide.
RootSet characteristic_roots(const CoefficientSample& coeffs, double t, const RootSet* prev = nullptr);
RootSet characteristic_roots(const LinearODE& ode, double t, const std::optional<RootSet>& prev = std::nullopt);

}  // namespace odesplit
