#include "odesplit/roots.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "odesplit/errors.hpp"

namespace odesplit {

namespace {

cplx monic_derivative(std::span<const cplx> f, cplx rho) {
  const std::size_t n = f.size();
  cplx acc = static_cast<double>(n);
  for (std::size_t k = n - 1; k >= 1; --k) acc = acc * rho + static_cast<double>(k) * f[k];
  return acc;
}

void polish(std::span<const cplx> f, cplx& rho) {
  cplx p = monic_value(f, rho);
  for (int it = 0; it < 4 && p != cplx{}; ++it) {
    const cplx dp = monic_derivative(f, rho);
    if (dp == cplx{}) return;
    const cplx next = rho - p / dp;
    const cplx pn = monic_value(f, next);
    if (!(std::abs(pn) < std::abs(p))) return;
    rho = next;
    p = pn;
  }
}

std::vector<cplx> quadratic_roots(cplx b, cplx c) {
  const cplx s = std::sqrt(b * b - 4.0 * c);
  const cplx q = -0.5 * (std::real(std::conj(b) * s) >= 0.0 ? b + s : b - s);
  if (q == cplx{}) return {cplx{}, cplx{}};
  return {q, c / q};
}

std::vector<cplx> cubic_roots(cplx a, cplx b, cplx c) {
  // rho = x - a/3 gives x^3 + p x + q = 0.
  const cplx p = b - a * a / 3.0;
  const cplx q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const cplx disc = std::sqrt(q * q / 4.0 + p * p * p / 27.0);
  cplx u3 = -q / 2.0 + disc;
  if (std::abs(-q / 2.0 - disc) > std::abs(u3)) u3 = -q / 2.0 - disc;
  const cplx shift = -a / 3.0;
  if (u3 == cplx{}) return {shift, shift, shift};
  const cplx u = std::pow(u3, 1.0 / 3.0);
  const cplx omega{-0.5, std::sqrt(3.0) / 2.0};
  std::vector<cplx> out;
  cplx uk = u;
  for (int k = 0; k < 3; ++k) {
    out.push_back(uk - p / (3.0 * uk) + shift);
    uk *= omega;
  }
  return out;
}

std::vector<cplx> eigen_roots(std::span<const cplx> f) {
  const auto n = static_cast<Eigen::Index>(f.size());
  Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(n, n);
  for (Eigen::Index k = 0; k + 1 < n; ++k) C(k, k + 1) = 1.0;
  for (Eigen::Index k = 0; k < n; ++k) C(n - 1, k) = -f[k];
  Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(C, false);
  const auto& ev = es.eigenvalues();
  return {ev.data(), ev.data() + n};
}

double root_scale(cplx a, cplx b) { return std::max({1.0, std::abs(a), std::abs(b)}); }

bool lex_less(cplx a, cplx b) {
  const double tol = 1e-12 * root_scale(a, b);
  if (std::abs(a.real() - b.real()) > tol) return a.real() < b.real();
  return a.imag() < b.imag();
}

// Permutation of `roots` minimising the summed distance to `prev`.
std::vector<cplx> match_previous(const std::vector<cplx>& roots, const std::vector<cplx>& prev) {
  std::vector<std::size_t> perm(roots.size());
  std::iota(perm.begin(), perm.end(), 0);
  std::vector<std::size_t> best = perm;
  double best_cost = std::numeric_limits<double>::infinity();
  do {
    double cost = 0.0;
    for (std::size_t n = 0; n < perm.size() && cost < best_cost; ++n) cost += std::abs(roots[perm[n]] - prev[n]);
    if (cost < best_cost) {
      best_cost = cost;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  std::vector<cplx> out(roots.size());
  for (std::size_t n = 0; n < out.size(); ++n) out[n] = roots[best[n]];
  return out;
}

}  // namespace

cplx monic_value(std::span<const cplx> f, cplx rho) {
  cplx acc{1.0};
  for (std::size_t k = f.size(); k-- > 0;) acc = acc * rho + f[k];
  return acc;
}

std::vector<cplx> monic_roots(std::span<const cplx> f) {
  std::vector<cplx> roots;
  switch (f.size()) {
    case 0:
    case 1: throw InvalidArgument("characteristic polynomial needs degree >= 2");
    case 2: roots = quadratic_roots(f[1], f[0]); break;
    case 3: roots = cubic_roots(f[2], f[1], f[0]); break;
    default: roots = eigen_roots(f); break;
  }
  for (auto& r : roots) polish(f, r);
  return roots;
}

RootSet characteristic_roots(const CoefficientSample& coeffs, double t, const RootSet* prev) {
  const std::size_t n = coeffs.f.size();
  std::vector<cplx> roots = monic_roots(coeffs.f);
  if (prev && prev->roots.size() == n) {
    roots = match_previous(roots, prev->roots);
  } else {
    std::sort(roots.begin(), roots.end(), lex_less);
  }

  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(roots[i] - roots[j]) < kRootCollisionTol * root_scale(roots[i], roots[j]))
        throw RootCollision(t, i, j);

  RootSet out{t, roots, std::vector<cplx>(n)};
  for (std::size_t i = 0; i < n; ++i) {
    const cplx r = roots[i];
    cplx num{}, rk{1.0};
    for (std::size_t k = 0; k < n; ++k) {
      num += coeffs.df[k] * rk;
      rk *= r;
    }
    out.droots[i] = -num / monic_derivative(coeffs.f, r);
  }
  return out;
}

RootSet characteristic_roots(const LinearODE& ode, double t, const std::optional<RootSet>& prev) {
  return characteristic_roots(ode.sample(t), t, prev ? &*prev : nullptr);
}

}  // namespace odesplit
