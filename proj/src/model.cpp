#include "odesplit/model.hpp"

#include "odesplit/errors.hpp"

namespace odesplit {

LinearODE::LinearODE(std::vector<Expr> coeffs, Expr inhom) : coeffs_(std::move(coeffs)), inhom_(std::move(inhom)) {
  if (coeffs_.size() < 2) throw InvalidArgument("ODE order must be at least 2");
  dcoeffs_.reserve(coeffs_.size());
  for (const auto& c : coeffs_) dcoeffs_.push_back(differentiate(c));
}

CoefficientSample LinearODE::sample(double t) const {
  CoefficientSample s;
  s.f.reserve(order());
  s.df.reserve(order());
  for (std::size_t k = 0; k < order(); ++k) {
    s.f.push_back(coeffs_[k](t));
    s.df.push_back(dcoeffs_[k](t));
  }
  s.inhom = inhom_(t);
  return s;
}

void IVP::validate(std::size_t order) const {
  if (!(t_end != t1)) throw InvalidArgument("IVP span is empty: t_end == t1");
  if (initial.t != t1) throw InvalidArgument("initial state time differs from t1");
  if (initial.derivs.size() != order)
    throw InvalidArgument("initial state has " + std::to_string(initial.derivs.size()) +
                          " entries, ODE order is " + std::to_string(order));
}

LinearODE make_ode(std::size_t order, const std::vector<std::string>& coeff_sources, const std::string& inhom_source,
                   const ParamTable& params) {
  if (order < 2) throw InvalidArgument("ODE order must be at least 2");
  if (coeff_sources.size() != order)
    throw InvalidArgument("expected " + std::to_string(order) + " coefficients, got " +
                          std::to_string(coeff_sources.size()));
  std::vector<Expr> coeffs;
  coeffs.reserve(order);
  for (const auto& src : coeff_sources) coeffs.push_back(parse(src, params));
  return LinearODE(std::move(coeffs), parse(inhom_source, params));
}

void companion_rhs(const LinearODE& ode, double t, std::span<const cplx> state, std::span<cplx> out) {
  const std::size_t n = ode.order();
  if (state.size() != n || out.size() != n) throw InvalidArgument("companion state length differs from ODE order");
  for (std::size_t k = 0; k + 1 < n; ++k) out[k] = state[k + 1];
  cplx last = -ode.inhom()(t);
  for (std::size_t k = 0; k < n; ++k) last -= ode.coeff(k)(t) * state[k];
  out[n - 1] = last;
}

std::vector<cplx> companion_rhs(const LinearODE& ode, const CompanionState& s) {
  std::vector<cplx> out(ode.order());
  companion_rhs(ode, s.t, s.derivs, out);
  return out;
}

}  // namespace odesplit
