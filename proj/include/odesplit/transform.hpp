#pragma once

// Split representation of an order-N linear ODE.
//
// The solution is written as y = y_1 + ... + y_N together with the N-1
// constraints y^(m) = sum_n g_{m,n} y_n (m = 1..N-1). With
//
//   M = [1 ... 1; g_{1,.}; ...; g_{N-1,.}]
//   F = [g_{1,.}; g_{2,.} - g'_{1,.}; ...; g_{N-1,.} - g'_{N-2,.}; L_.]
//   L_n = -g'_{N-1,n} - f_{N-1} g_{N-1,n} - ... - f_1 g_{1,n} - f_0
//   H = (0, ..., 0, -f)
//
// the parts obey M Y' = F Y + H. The representation is unique while
// D = det M stays away from zero.

#include <Eigen/Dense>
#include <array>
#include <span>
#include <string_view>
#include <vector>

#include "odesplit/expr.hpp"
#include "odesplit/model.hpp"

namespace odesplit {

using MatrixXc = Eigen::MatrixXcd;
using VectorXc = Eigen::VectorXcd;

/// Largest order the split machinery accepts.
inline constexpr std::size_t kMaxOrder = 6;

/// Gauge values g_{m,n} and derivatives at a single t. Row m-1 holds g_{m,.}.
struct GaugeSample {
  double t = 0.0;
  MatrixXc g;   ///< (N-1) x N
  MatrixXc dg;  ///< (N-1) x N

  std::size_t order() const noexcept { return static_cast<std::size_t>(g.cols()); }
};

struct SplitState {
  double t = 0.0;
  std::vector<cplx> parts;
};

struct GaugeMatrices {
  MatrixXc M;
  MatrixXc F;
  VectorXc H;
  cplx D;
};

/// x_1, x_2 of the second-order system: x_n = g_n' + f_1 g_n + f_0 + g_n^2.
struct CouplingTerms2 {
  cplx x1, x2;
};

/// x_1..x_6 of the third-order system (stored 0-based).
struct CouplingTerms3 {
  std::array<cplx, 6> x;
};

/// Source of gauge values along a trajectory. Analytic gauges have no state;
/// dynamic gauges carry `state_size()` complex values integrated alongside
/// the split parts.
class GaugeSet {
public:
  virtual ~GaugeSet() = default;

  virtual std::size_t order() const = 0;
  virtual std::string_view name() const = 0;

  virtual std::size_t state_size() const { return 0; }
  bool dynamic() const { return state_size() > 0; }

  virtual std::vector<cplx> initial_state() const { return {}; }
  virtual void state_rhs(double /*t*/, std::span<const cplx> /*state*/, std::span<cplx> /*out*/) const {}

  /// Values and derivatives at t for the given gauge state.
  virtual GaugeSample sample(double t, std::span<const cplx> state) const = 0;

  /// Invoked at t1 and after every accepted step; may throw to abort.
  virtual void accept(double /*t*/, std::span<const cplx> /*state*/) {}
};

/// Gauge given by closed-form expressions; derivatives are taken symbolically.
class AnalyticGauge final : public GaugeSet {
public:
  /// `rows[m-1][n-1]` is g_{m,n}; requires N-1 rows of N entries.
  explicit AnalyticGauge(std::vector<std::vector<Expr>> rows);

  std::size_t order() const override { return order_; }
  std::string_view name() const override { return "analytic"; }
  GaugeSample sample(double t, std::span<const cplx> state) const override;

private:
  std::size_t order_;
  std::vector<std::vector<Expr>> g_;
  std::vector<std::vector<Expr>> dg_;
};

/// Declared-singular bound: 1e-12 * max(1, ||M||_inf^N).
double singularity_threshold(const MatrixXc& M);

MatrixXc gauge_matrix(const GaugeSample& g);
cplx gauge_determinant(const GaugeSample& g);

GaugeMatrices gauge_matrices(const CoefficientSample& coeffs, const GaugeSample& g);
GaugeMatrices gauge_matrices(const LinearODE& ode, const GaugeSample& g);

/// Solves M Y = (y, y', ..., y^(N-1)). Throws SingularGauge.
SplitState split_initial(const GaugeSample& g, const CompanionState& s);

/// y = sum y_n, y^(m) = sum g_{m,n} y_n.
CompanionState reconstruct(const GaugeSample& g, const SplitState& sp);

/// Y' from M Y' = F Y + H by pivoted LU. Throws SingularGauge.
std::vector<cplx> split_rhs_general(const LinearODE& ode, const GaugeSample& g, const SplitState& sp);
void split_rhs_general(const CoefficientSample& coeffs, const GaugeSample& g, std::span<const cplx> parts,
                       std::span<cplx> out);

/// Coefficient form Y' = A Y + b of the split system.
struct SplitSystem {
  MatrixXc A;
  VectorXc b;
};
SplitSystem split_system(const CoefficientSample& coeffs, const GaugeSample& g);

CouplingTerms2 coupling_terms_n2(const CoefficientSample& coeffs, cplx g1, cplx g2, cplx dg1, cplx dg2);
CouplingTerms3 coupling_terms_n3(const CoefficientSample& coeffs, const GaugeSample& g);

/// Closed-form second-order split system.
std::array<cplx, 2> split_rhs_n2(const LinearODE& ode, cplx g1, cplx g2, cplx dg1, cplx dg2, const SplitState& sp);
std::array<cplx, 2> split_rhs_n2(const CoefficientSample& coeffs, double t, cplx g1, cplx g2, cplx dg1, cplx dg2,
                                 std::span<const cplx> parts);

/// Closed-form third-order split system.
std::array<cplx, 3> split_rhs_n3(const LinearODE& ode, const GaugeSample& g, const SplitState& sp);
std::array<cplx, 3> split_rhs_n3(const CoefficientSample& coeffs, const GaugeSample& g, std::span<const cplx> parts);

}  // namespace odesplit
