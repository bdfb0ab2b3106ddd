#pragma once

// Gauge families.
//
//   characteristic   g_{m,n} = rho_n^m, rho_n the continuity-tracked roots of
//                    the characteristic polynomial (the WKB choice)
//   riccati          (N = 2) g_n' = -(f_1 g_n + f_0 + g_n^2); the split system
//                    decouples into y_n' = g_n y_n + forcing
//   strong coupling  (N = 2) g_n' = -(f_1 g_n + f_0 + g_1 g_2); the diagonal
//                    terms vanish. Integrated as one Riccati equation for g_1
//                    plus g_2 = g_1 - C exp(-int f_1)
//   phase integral   (N = 2) g_{1,2} = +-i q - q'/(2q) - f_1/2; exact when q
//                    solves the q-equation, WKB-like for q = sqrt(f_0)
//   gen. Riccati     (N = 3) per branch n:
//                      g_{1,n}' = g_{2,n} - g_{1,n}^2
//                      g_{2,n}' = -(f_2 g_{2,n} + f_1 g_{1,n} + f_0 + g_{1,n} g_{2,n})
//                    the third-order system decouples

#include <array>
#include <memory>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include "odesplit/expr.hpp"
#include "odesplit/model.hpp"
#include "odesplit/roots.hpp"
#include "odesplit/transform.hpp"

namespace odesplit {

inline constexpr double kDefaultGaugeCap = 1e8;

// ---------------------------------------------------------------------------
// Pointwise right-hand sides and residuals

/// g' of the second-order Riccati equation.
cplx riccati_rhs(const CoefficientSample& c, cplx g);
cplx riccati_rhs(const LinearODE& ode, double t, cplx g);

struct StrongCouplingRhs {
  cplx dg1;
  cplx g2;
};

/// g_1' and g_2 of the strong-coupling gauge; `int_f1` is int_{t1}^t f_1.
StrongCouplingRhs strong_coupling_rhs(const CoefficientSample& c, cplx g1, cplx C, cplx int_f1);
StrongCouplingRhs strong_coupling_rhs(const LinearODE& ode, double t, cplx g1, cplx C, cplx int_f1);

/// Gauge pair from q; throws ZeroQ when q == 0.
std::pair<cplx, cplx> g_from_q(cplx q, cplx dq, cplx f1, double t = 0.0);

/// Left side of the q-equation
///   -q''/(2q) + 3 q'^2/(4 q^2) + f_0 - q^2 - f_1'/2 - f_1^2/4.
cplx q_residual(const Expr& q, const LinearODE& ode, double t);

/// q'' from the q-equation, for integrating q as an ODE.
cplx q_equation_rhs(const CoefficientSample& c, cplx q, cplx dq, double t = 0.0);

struct BranchRhs {
  cplx dg1;
  cplx dg2;
};

/// Generalised third-order Riccati system for one branch.
BranchRhs gen_riccati3_rhs(const CoefficientSample& c, cplx g1, cplx g2);
BranchRhs gen_riccati3_rhs(const LinearODE& ode, double t, cplx g1, cplx g2);

/// g'' + g'(3g + f_2) + f_1 g + f_0 + f_2 g^2 + g^3 for a closed-form g.
cplx gen_riccati3_residual(const Expr& g1, const LinearODE& ode, double t);

// ---------------------------------------------------------------------------
// Gauge specifications

struct CharacteristicSpec {};

struct RiccatiSpec {
  /// g_1(t1), g_2(t1); defaults to the characteristic roots at t1.
  std::optional<std::array<cplx, 2>> initial;
  std::optional<double> blowup_cap;
};

struct StrongCouplingSpec {
  /// Defaults to rho_1(t1) - rho_2(t1).
  std::optional<cplx> C;
  /// Defaults to a root of g^2 + (f_1 - C) g + f_0 at t1.
  std::optional<cplx> g1_initial;
  std::optional<double> blowup_cap;
};

struct PhaseIntegralSpec {
  enum class Mode { Analytic, Ode };
  Mode mode = Mode::Analytic;
  /// Analytic mode: q(t); defaults to sqrt(f_0).
  std::optional<Expr> q;
  /// Ode mode: q(t1), q'(t1); defaults to sqrt(f_0) and its derivative at t1.
  std::optional<std::array<cplx, 2>> q_initial;
  std::optional<double> blowup_cap;
};

struct GenRiccati3Spec {
  /// (g_{1,n}(t1), g_{2,n}(t1)) per branch; defaults to (rho_n, rho_n^2) at t1.
  std::optional<std::array<std::array<cplx, 2>, 3>> branches;
  std::optional<double> blowup_cap;
};

struct AnalyticSpec {
  std::vector<std::vector<Expr>> rows;
};

using GaugeSpec =
    std::variant<CharacteristicSpec, RiccatiSpec, StrongCouplingSpec, PhaseIntegralSpec, GenRiccati3Spec, AnalyticSpec>;

std::string_view family_name(const GaugeSpec& spec);

/// Builds the per-trajectory gauge for `ode` starting at t1. `default_cap`
/// applies where the spec leaves blowup_cap unset.
std::unique_ptr<GaugeSet> make_gauge(const LinearODE& ode, const GaugeSpec& spec, double t1,
                                     double default_cap = kDefaultGaugeCap);

// ---------------------------------------------------------------------------
// Gauge implementations

class CharacteristicGauge final : public GaugeSet {
public:
  explicit CharacteristicGauge(const LinearODE& ode);

  std::size_t order() const override { return ode_.order(); }
  std::string_view name() const override { return "characteristic"; }
  GaugeSample sample(double t, std::span<const cplx> state) const override;
  void accept(double t, std::span<const cplx> state) override;

  RootSet roots_at(double t) const;
  const std::optional<RootSet>& committed() const noexcept { return committed_; }

private:
  const LinearODE& ode_;
  std::optional<RootSet> committed_;
};

/// Common base for gauges whose values are co-integrated.
class DynamicGauge : public GaugeSet {
public:
  DynamicGauge(const LinearODE& ode, double cap) : ode_(ode), cap_(cap) {}
  void accept(double t, std::span<const cplx> state) override;

protected:
  /// Magnitudes checked against the cap after each accepted step.
  virtual std::vector<cplx> watched(double t, std::span<const cplx> state) const = 0;

  const LinearODE& ode_;
  double cap_;
};

class RiccatiGauge final : public DynamicGauge {
public:
  RiccatiGauge(const LinearODE& ode, std::array<cplx, 2> initial, double cap);

  std::size_t order() const override { return 2; }
  std::string_view name() const override { return "riccati"; }
  std::size_t state_size() const override { return 2; }
  std::vector<cplx> initial_state() const override { return {initial_[0], initial_[1]}; }
  void state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const override;
  GaugeSample sample(double t, std::span<const cplx> state) const override;

protected:
  std::vector<cplx> watched(double, std::span<const cplx> state) const override;

private:
  std::array<cplx, 2> initial_;
};

/// State: (g_1, int_{t1}^t f_1).
class StrongCouplingGauge final : public DynamicGauge {
public:
  StrongCouplingGauge(const LinearODE& ode, cplx C, cplx g1_initial, double cap);

  std::size_t order() const override { return 2; }
  std::string_view name() const override { return "strong_coupling"; }
  std::size_t state_size() const override { return 2; }
  std::vector<cplx> initial_state() const override { return {g1_initial_, cplx{}}; }
  void state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const override;
  GaugeSample sample(double t, std::span<const cplx> state) const override;

  cplx C() const noexcept { return C_; }

protected:
  std::vector<cplx> watched(double t, std::span<const cplx> state) const override;

private:
  cplx C_;
  cplx g1_initial_;
};

/// Analytic mode evaluates closed-form g from q; Ode mode carries (q, q').
class PhaseIntegralGauge final : public DynamicGauge {
public:
  PhaseIntegralGauge(const LinearODE& ode, Expr q, double cap);
  PhaseIntegralGauge(const LinearODE& ode, std::array<cplx, 2> q_initial, double cap);

  std::size_t order() const override { return 2; }
  std::string_view name() const override { return "phase_integral"; }
  std::size_t state_size() const override { return analytic_ ? 0 : 2; }
  std::vector<cplx> initial_state() const override;
  void state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const override;
  GaugeSample sample(double t, std::span<const cplx> state) const override;

  /// q(t) for the given state.
  cplx q(double t, std::span<const cplx> state) const;

protected:
  std::vector<cplx> watched(double t, std::span<const cplx> state) const override;

private:
  std::optional<AnalyticGauge> analytic_;
  std::optional<Expr> q_expr_;
  std::array<cplx, 2> q_initial_{};
};

/// State: (g_{1,1}, g_{2,1}, g_{1,2}, g_{2,2}, g_{1,3}, g_{2,3}).
class GenRiccati3Gauge final : public DynamicGauge {
public:
  GenRiccati3Gauge(const LinearODE& ode, std::array<std::array<cplx, 2>, 3> branches, double cap);

  std::size_t order() const override { return 3; }
  std::string_view name() const override { return "gen_riccati3"; }
  std::size_t state_size() const override { return 6; }
  std::vector<cplx> initial_state() const override;
  void state_rhs(double t, std::span<const cplx> state, std::span<cplx> out) const override;
  GaugeSample sample(double t, std::span<const cplx> state) const override;

protected:
  std::vector<cplx> watched(double, std::span<const cplx> state) const override;

private:
  std::array<std::array<cplx, 2>, 3> branches_;
};

/// Gauge rows g_{m,n} = rho_n^m for fixed nodes rho_n (Vandermonde).
std::vector<std::vector<Expr>> vandermonde_rows(std::span<const cplx> nodes);

}  // namespace odesplit
