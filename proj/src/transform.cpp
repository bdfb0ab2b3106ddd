#include "odesplit/transform.hpp"

#include <cmath>

#include "odesplit/errors.hpp"

namespace odesplit {

namespace {

void check_shape(const GaugeSample& g) {
  const auto n = g.g.cols();
  if (n < 2 || static_cast<std::size_t>(n) > kMaxOrder || g.g.rows() != n - 1 || g.dg.rows() != g.g.rows() ||
      g.dg.cols() != n)
    throw InvalidArgument("gauge sample must be (N-1) x N with 2 <= N <= 6");
}

void check_coeffs(const CoefficientSample& c, std::size_t n) {
  if (c.f.size() != n) throw InvalidArgument("coefficient count differs from gauge order");
}

double inf_norm(const MatrixXc& M) { return M.cwiseAbs().rowwise().sum().maxCoeff(); }

}  // namespace

// ---------------------------------------------------------------------------

AnalyticGauge::AnalyticGauge(std::vector<std::vector<Expr>> rows) : order_(rows.size() + 1), g_(std::move(rows)) {
  if (order_ < 2 || order_ > kMaxOrder) throw InvalidArgument("analytic gauge needs 1..5 rows");
  for (const auto& row : g_) {
    if (row.size() != order_)
      throw InvalidArgument("analytic gauge row has " + std::to_string(row.size()) + " entries, expected " +
                            std::to_string(order_));
    std::vector<Expr> drow;
    drow.reserve(row.size());
    for (const auto& e : row) drow.push_back(differentiate(e));
    dg_.push_back(std::move(drow));
  }
}

GaugeSample AnalyticGauge::sample(double t, std::span<const cplx>) const {
  const auto n = static_cast<Eigen::Index>(order_);
  GaugeSample s{t, MatrixXc(n - 1, n), MatrixXc(n - 1, n)};
  for (Eigen::Index m = 0; m + 1 < n; ++m) {
    for (Eigen::Index k = 0; k < n; ++k) {
      s.g(m, k) = g_[m][k](t);
      s.dg(m, k) = dg_[m][k](t);
    }
  }
  return s;
}

// ---------------------------------------------------------------------------

double singularity_threshold(const MatrixXc& M) {
  const double norm = inf_norm(M);
  return 1e-12 * std::max(1.0, std::pow(norm, static_cast<double>(M.rows())));
}

MatrixXc gauge_matrix(const GaugeSample& g) {
  check_shape(g);
  const auto n = g.g.cols();
  MatrixXc M(n, n);
  M.row(0).setOnes();
  M.bottomRows(n - 1) = g.g;
  return M;
}

cplx gauge_determinant(const GaugeSample& g) { return gauge_matrix(g).partialPivLu().determinant(); }

GaugeMatrices gauge_matrices(const CoefficientSample& coeffs, const GaugeSample& g) {
  const auto n = g.g.cols();
  GaugeMatrices out;
  out.M = gauge_matrix(g);
  check_coeffs(coeffs, static_cast<std::size_t>(n));

  out.F.resize(n, n);
  out.F.row(0) = g.g.row(0);
  for (Eigen::Index m = 1; m + 1 < n; ++m) out.F.row(m) = g.g.row(m) - g.dg.row(m - 1);
  for (Eigen::Index k = 0; k < n; ++k) {
    // L_k = -g'_{N-1,k} - sum_{m=1}^{N-1} f_m g_{m,k} - f_0
    cplx L = -g.dg(n - 2, k) - coeffs.f[0];
    for (Eigen::Index m = 1; m < n; ++m) L -= coeffs.f[m] * g.g(m - 1, k);
    out.F(n - 1, k) = L;
  }
  out.H = VectorXc::Zero(n);
  out.H(n - 1) = -coeffs.inhom;
  out.D = out.M.partialPivLu().determinant();
  return out;
}

GaugeMatrices gauge_matrices(const LinearODE& ode, const GaugeSample& g) {
  return gauge_matrices(ode.sample(g.t), g);
}

// ---------------------------------------------------------------------------

SplitState split_initial(const GaugeSample& g, const CompanionState& s) {
  MatrixXc M = gauge_matrix(g);
  const auto n = M.rows();
  if (s.derivs.size() != static_cast<std::size_t>(n)) throw InvalidArgument("state length differs from gauge order");
  Eigen::PartialPivLU<MatrixXc> lu(M);
  const double absD = std::abs(lu.determinant());
  if (!(absD >= singularity_threshold(M))) throw SingularGauge(g.t, absD);
  VectorXc rhs = Eigen::Map<const VectorXc>(s.derivs.data(), n);
  VectorXc parts = lu.solve(rhs);
  return {s.t, std::vector<cplx>(parts.data(), parts.data() + n)};
}

CompanionState reconstruct(const GaugeSample& g, const SplitState& sp) {
  MatrixXc M = gauge_matrix(g);
  const auto n = M.rows();
  if (sp.parts.size() != static_cast<std::size_t>(n)) throw InvalidArgument("split state length differs from gauge order");
  VectorXc y = M * Eigen::Map<const VectorXc>(sp.parts.data(), n);
  return {sp.t, std::vector<cplx>(y.data(), y.data() + n)};
}

// ---------------------------------------------------------------------------

namespace {

// LU of M after the singularity check.
Eigen::PartialPivLU<MatrixXc> factor_checked(const GaugeMatrices& gm, double t) {
  Eigen::PartialPivLU<MatrixXc> lu(gm.M);
  const double absD = std::abs(gm.D);
  if (!(absD >= singularity_threshold(gm.M))) throw SingularGauge(t, absD);
  return lu;
}

void check_finite(const VectorXc& v, const Eigen::PartialPivLU<MatrixXc>& lu, double t) {
  if (!v.allFinite())
    throw NumericalError(NumericalErrorKind::LinearSolve, t,
                         "non-finite solution, reciprocal condition estimate " + std::to_string(lu.rcond()));
}

}  // namespace

void split_rhs_general(const CoefficientSample& coeffs, const GaugeSample& g, std::span<const cplx> parts,
                       std::span<cplx> out) {
  const GaugeMatrices gm = gauge_matrices(coeffs, g);
  const auto n = gm.M.rows();
  if (parts.size() != static_cast<std::size_t>(n) || out.size() != parts.size())
    throw InvalidArgument("split state length differs from gauge order");
  auto lu = factor_checked(gm, g.t);
  VectorXc rhs = gm.F * Eigen::Map<const VectorXc>(parts.data(), n) + gm.H;
  VectorXc d = lu.solve(rhs);
  check_finite(d, lu, g.t);
  for (Eigen::Index k = 0; k < n; ++k) out[k] = d(k);
}

std::vector<cplx> split_rhs_general(const LinearODE& ode, const GaugeSample& g, const SplitState& sp) {
  std::vector<cplx> out(sp.parts.size());
  split_rhs_general(ode.sample(g.t), g, sp.parts, out);
  return out;
}

SplitSystem split_system(const CoefficientSample& coeffs, const GaugeSample& g) {
  const GaugeMatrices gm = gauge_matrices(coeffs, g);
  auto lu = factor_checked(gm, g.t);
  SplitSystem sys{lu.solve(gm.F), lu.solve(gm.H)};
  check_finite(sys.b, lu, g.t);
  return sys;
}

// ---------------------------------------------------------------------------
// Closed forms

CouplingTerms2 coupling_terms_n2(const CoefficientSample& c, cplx g1, cplx g2, cplx dg1, cplx dg2) {
  check_coeffs(c, 2);
  return {dg1 + c.f[1] * g1 + c.f[0] + g1 * g1, dg2 + c.f[1] * g2 + c.f[0] + g2 * g2};
}

std::array<cplx, 2> split_rhs_n2(const CoefficientSample& c, double t, cplx g1, cplx g2, cplx dg1, cplx dg2,
                                 std::span<const cplx> parts) {
  if (parts.size() != 2) throw InvalidArgument("second-order split state needs two parts");
  const double norm = std::max(2.0, std::abs(g1) + std::abs(g2));
  const cplx diff = g1 - g2;
  if (!(std::abs(diff) >= 1e-12 * std::max(1.0, norm * norm))) throw SingularGauge(t, std::abs(diff));
  const auto [x1, x2] = coupling_terms_n2(c, g1, g2, dg1, dg2);
  const cplx y1 = parts[0], y2 = parts[1];
  const cplx cross = (y1 * x1 + y2 * x2 + c.inhom) / diff;
  return {y1 * g1 - cross, y2 * g2 + cross};
}

std::array<cplx, 2> split_rhs_n2(const LinearODE& ode, cplx g1, cplx g2, cplx dg1, cplx dg2, const SplitState& sp) {
  if (ode.order() != 2) throw InvalidArgument("split_rhs_n2 needs a second-order ODE");
  return split_rhs_n2(ode.sample(sp.t), sp.t, g1, g2, dg1, dg2, sp.parts);
}

CouplingTerms3 coupling_terms_n3(const CoefficientSample& c, const GaugeSample& g) {
  check_coeffs(c, 3);
  if (g.order() != 3) throw InvalidArgument("third-order coupling terms need an order-3 gauge");
  CouplingTerms3 out;
  for (int n = 0; n < 3; ++n) {
    out.x[n] = g.g(1, n) - g.dg(0, n);
    out.x[3 + n] = g.dg(1, n) + c.f[2] * g.g(1, n) + c.f[1] * g.g(0, n) + c.f[0];
  }
  return out;
}

std::array<cplx, 3> split_rhs_n3(const CoefficientSample& c, const GaugeSample& g, std::span<const cplx> parts) {
  if (parts.size() != 3) throw InvalidArgument("third-order split state needs three parts");
  const auto x = coupling_terms_n3(c, g).x;
  const MatrixXc M = gauge_matrix(g);
  const cplx D = M.partialPivLu().determinant();
  if (!(std::abs(D) >= singularity_threshold(M))) throw SingularGauge(g.t, std::abs(D));

  auto g1 = [&](int n) { return g.g(0, n); };
  auto g2 = [&](int n) { return g.g(1, n); };
  // Shorthands for the two bracketed factors multiplying each y_n.
  auto a = [&](int n) { return x[n] - g1(n) * g1(n); };
  auto b = [&](int n) { return x[3 + n] + g1(n) * g2(n); };

  // Row r uses the cyclic differences (g2_{r+1} - g2_{r+2}) and (g1_{r+2} - g1_{r+1}).
  std::array<cplx, 3> out;
  const cplx f = c.inhom;
  for (int r = 0; r < 3; ++r) {
    const int p = (r + 1) % 3, q = (r + 2) % 3;
    const cplx d2 = g2(p) - g2(q);
    const cplx d1 = g1(q) - g1(p);
    cplx acc = -f * d1;
    for (int n = 0; n < 3; ++n) {
      cplx coeff = d2 * a(n) - d1 * b(n);
      if (n == r) coeff += g1(n) * D;
      acc += coeff * parts[n];
    }
    out[r] = acc / D;
  }
  return out;
}

std::array<cplx, 3> split_rhs_n3(const LinearODE& ode, const GaugeSample& g, const SplitState& sp) {
  if (ode.order() != 3) throw InvalidArgument("split_rhs_n3 needs a third-order ODE");
  return split_rhs_n3(ode.sample(g.t), g, sp.parts);
}

}  // namespace odesplit
