#include <algorithm>
#include <cmath>

#include "odesplit/errors.hpp"
#include "odesplit/solve.hpp"

namespace odesplit {

namespace {

// Dormand-Prince 5(4) tableau with the Hairer continuous extension.
constexpr double c2 = 0.2, c3 = 0.3, c4 = 0.8, c5 = 8.0 / 9.0;
constexpr double a21 = 0.2;
constexpr double a31 = 3.0 / 40.0, a32 = 9.0 / 40.0;
constexpr double a41 = 44.0 / 45.0, a42 = -56.0 / 15.0, a43 = 32.0 / 9.0;
constexpr double a51 = 19372.0 / 6561.0, a52 = -25360.0 / 2187.0, a53 = 64448.0 / 6561.0, a54 = -212.0 / 729.0;
constexpr double a61 = 9017.0 / 3168.0, a62 = -355.0 / 33.0, a63 = 46732.0 / 5247.0, a64 = 49.0 / 176.0,
                 a65 = -5103.0 / 18656.0;
constexpr double a71 = 35.0 / 384.0, a73 = 500.0 / 1113.0, a74 = 125.0 / 192.0, a75 = -2187.0 / 6784.0,
                 a76 = 11.0 / 84.0;
constexpr double e1 = 71.0 / 57600.0, e3 = -71.0 / 16695.0, e4 = 71.0 / 1920.0, e5 = -17253.0 / 339200.0,
                 e6 = 22.0 / 525.0, e7 = -1.0 / 40.0;
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

// PI controller constants.
constexpr double kSafety = 0.9;
constexpr double kBeta = 0.04;
constexpr double kExpo = 0.2 - kBeta * 0.75;
constexpr double kFacMin = 0.2;   // largest shrink 1/5
constexpr double kFacMax = 10.0;  // largest growth

using Vec = std::vector<cplx>;

cplx dense_eval(const cplx* r, std::size_t dim, double theta) {
  const double theta1 = 1.0 - theta;
  return r[0] + theta * (r[dim] + theta1 * (r[2 * dim] + theta * (r[3 * dim] + theta1 * r[4 * dim])));
}

}  // namespace

class DenseRecorder {
public:
  static void push(Trajectory& tr, double t0, double h, Vec coeffs, std::size_t dim) {
    tr.dense_dim_ = dim;
    tr.segments_.push_back({t0, h, std::move(coeffs)});
  }
};

// ---------------------------------------------------------------------------

void SolveConfig::validate() const {
  if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InvalidArgument("tolerances must be positive");
  if (!(h_min > 0.0) || !(h_max >= h_min)) throw InvalidArgument("step bounds need 0 < h_min <= h_max");
  if (h_init < 0.0) throw InvalidArgument("h_init must be non-negative");
  if (max_steps == 0) throw InvalidArgument("max_steps must be positive");
  if (!(blowup_cap > 0.0)) throw InvalidArgument("blowup_cap must be positive");
}

std::vector<double> uniform_grid(double a, double b, std::size_t count) {
  if (count < 2) return {a, b};
  std::vector<double> g(count);
  for (std::size_t i = 0; i < count; ++i) g[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
  g.back() = b;
  return g;
}

std::vector<cplx> Trajectory::at(double time) const {
  if (segments_.empty()) throw InvalidArgument("trajectory has no dense output");
  const double lo = std::min(t.front(), t.back()), hi = std::max(t.front(), t.back());
  if (time < lo || time > hi)
    throw NumericalError(NumericalErrorKind::EmptyOverlap, time, "outside the trajectory span");
  const bool forward = t.back() >= t.front();
  // First segment whose far end reaches `time`.
  auto it = std::lower_bound(segments_.begin(), segments_.end(), time, [forward](const Segment& s, double v) {
    const double end = s.t0 + s.h;
    return forward ? end < v : end > v;
  });
  if (it == segments_.end()) --it;
  const double theta = std::clamp((time - it->t0) / it->h, 0.0, 1.0);
  std::vector<cplx> out(dense_dim_);
  for (std::size_t i = 0; i < dense_dim_; ++i) out[i] = dense_eval(it->coeffs.data() + i, dense_dim_, theta);
  return out;
}

cplx Trajectory::at(double time, std::size_t component) const { return at(time).at(component); }

std::vector<cplx> Trajectory::component(std::size_t k) const {
  std::vector<cplx> out;
  out.reserve(states.size());
  for (const auto& s : states) out.push_back(s.at(k));
  return out;
}

Trajectory Trajectory::slice(std::size_t first, std::size_t count) const {
  Trajectory out;
  out.t = t;
  out.accepted = accepted;
  out.rejected = rejected;
  out.rhs_evaluations = rhs_evaluations;
  out.max_step = max_step;
  out.termination = termination;
  out.states.reserve(states.size());
  for (const auto& s : states) out.states.emplace_back(s.begin() + first, s.begin() + first + count);
  if (!segments_.empty()) {
    out.dense_dim_ = count;
    for (const auto& seg : segments_) {
      Vec c(5 * count);
      for (std::size_t b = 0; b < 5; ++b)
        std::copy_n(seg.coeffs.begin() + b * dense_dim_ + first, count, c.begin() + b * count);
      out.segments_.push_back({seg.t0, seg.h, std::move(c)});
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

Trajectory integrate(const RhsFn& rhs, double t0, double t_end, std::vector<cplx> y0, const SolveConfig& cfg,
                     const IntegrateOptions& options) {
  cfg.validate();
  if (t_end == t0) throw InvalidArgument("integration span is empty");
  const std::size_t n = y0.size();
  const double dir = t_end > t0 ? 1.0 : -1.0;
  const double span = std::abs(t_end - t0);
  const double h_max = std::min(cfg.h_max, span);

  // Output schedule.
  std::vector<double> outputs = options.output_times;
  if (outputs.empty()) outputs = uniform_grid(t0, t_end, std::max<std::size_t>(cfg.sample_count, 2));
  for (std::size_t i = 1; i < outputs.size(); ++i)
    if (!((outputs[i] - outputs[i - 1]) * dir > 0.0)) throw InvalidArgument("output times must be strictly monotone");
  for (double o : outputs)
    if ((o - t0) * dir < 0.0 || (o - t_end) * dir > 0.0) throw InvalidArgument("output time outside the span");

  Trajectory tr;
  auto evaluate = [&](double t, const Vec& y, Vec& out) {
    rhs(t, y, out);
    ++tr.rhs_evaluations;
  };
  auto record = [&](double t, const Vec& y) {
    if (!tr.t.empty() && !((t - tr.t.back()) * dir > 0.0)) return;
    tr.t.push_back(t);
    tr.states.push_back(y);
    if (options.on_sample) options.on_sample(t, y);
  };
  auto check_magnitude = [&](double t, const Vec& y) {
    for (const auto& v : y)
      if (!(std::abs(v) <= cfg.blowup_cap))
        throw NumericalError(NumericalErrorKind::BlowUp, t,
                             "state magnitude " + std::to_string(std::abs(v)) + " exceeds cap");
  };

  Vec y = std::move(y0);
  double t = t0;
  if (options.on_accept) options.on_accept(t, y);
  check_magnitude(t, y);

  std::size_t next_out = 0;
  while (next_out < outputs.size() && outputs[next_out] == t0) ++next_out;
  record(t0, y);

  Vec k1(n), k2(n), k3(n), k4(n), k5(n), k6(n), k7(n), ytmp(n), ynew(n), err(n);
  evaluate(t, y, k1);

  auto weight = [&](cplx a, cplx b) { return cfg.abs_tol + cfg.rel_tol * std::max(std::abs(a), std::abs(b)); };

  // Starting step.
  double h = cfg.h_init;
  if (h <= 0.0) {
    double dnf = 0.0, dny = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = weight(y[i], y[i]);
      dnf += std::norm(k1[i]) / (sk * sk);
      dny += std::norm(y[i]) / (sk * sk);
    }
    h = (dnf <= 1e-10 || dny <= 1e-10) ? 1e-6 : std::sqrt(dny / dnf) * 0.01;
    h = std::min(h, h_max);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + dir * h * k1[i];
    evaluate(t + dir * h, ytmp, k2);
    double der2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double sk = weight(y[i], y[i]);
      der2 += std::norm(k2[i] - k1[i]) / (sk * sk);
    }
    der2 = std::sqrt(der2) / h;
    const double der12 = std::max(der2, std::sqrt(dnf));
    const double h1 = der12 <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der12, 0.2);
    h = std::min({100.0 * h, h1, h_max});
  }
  h = std::max(std::min(h, h_max), cfg.h_min);

  double facold = 1e-4;
  bool last_rejected = false;
  std::size_t steps = 0;

  while ((t_end - t) * dir > 0.0) {
    if (++steps > cfg.max_steps)
      throw NumericalError(NumericalErrorKind::MaxSteps, t, "exceeded " + std::to_string(cfg.max_steps) + " steps");

    const double remaining = std::abs(t_end - t);
    bool final_step = false;
    if (h >= remaining * 0.999999) {
      h = remaining;
      final_step = true;
    }
    if (h < cfg.h_min && !final_step)
      throw NumericalError(NumericalErrorKind::StepUnderflow, t, "step size " + std::to_string(h) + " below h_min");
    const double hs = dir * h;
    if (!final_step && t + hs == t) throw NumericalError(NumericalErrorKind::StepUnderflow, t, "no progress");

    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * a21 * k1[i];
    evaluate(t + c2 * hs, ytmp, k2);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a31 * k1[i] + a32 * k2[i]);
    evaluate(t + c3 * hs, ytmp, k3);
    for (std::size_t i = 0; i < n; ++i) ytmp[i] = y[i] + hs * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    evaluate(t + c4 * hs, ytmp, k4);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    evaluate(t + c5 * hs, ytmp, k5);
    for (std::size_t i = 0; i < n; ++i)
      ytmp[i] = y[i] + hs * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    const double t_new = final_step ? t_end : t + hs;
    evaluate(t + hs, ytmp, k6);
    for (std::size_t i = 0; i < n; ++i)
      ynew[i] = y[i] + hs * (a71 * k1[i] + a73 * k3[i] + a74 * k4[i] + a75 * k5[i] + a76 * k6[i]);
    evaluate(t_new, ynew, k7);

    double err_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      err[i] = hs * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i] + e7 * k7[i]);
      err_norm = std::max(err_norm, std::abs(err[i]) / weight(y[i], ynew[i]));
    }
    if (!std::isfinite(err_norm)) {
      ++tr.rejected;
      last_rejected = true;
      h *= kFacMin;
      continue;
    }

    const double fac11 = std::pow(err_norm, kExpo);
    double fac = fac11 / std::pow(facold, kBeta);
    fac = std::clamp(fac / kSafety, 1.0 / kFacMax, 1.0 / kFacMin);
    double h_new = h / fac;

    if (err_norm <= 1.0) {
      facold = std::max(err_norm, 1e-4);
      ++tr.accepted;
      tr.max_step = std::max(tr.max_step, h);

      Vec coeffs;
      const bool need_dense = cfg.dense || next_out < outputs.size();
      if (need_dense) {
        coeffs.resize(5 * n);
        for (std::size_t i = 0; i < n; ++i) {
          const cplx ydiff = ynew[i] - y[i];
          const cplx bspl = hs * k1[i] - ydiff;
          coeffs[i] = y[i];
          coeffs[n + i] = ydiff;
          coeffs[2 * n + i] = bspl;
          coeffs[3 * n + i] = ydiff - hs * k7[i] - bspl;
          coeffs[4 * n + i] =
              hs * (d1 * k1[i] + d3 * k3[i] + d4 * k4[i] + d5 * k5[i] + d6 * k6[i] + d7 * k7[i]);
        }
      }

      const double t_old = t;
      y.swap(ynew);
      t = t_new;
      k1.swap(k7);

      if (options.on_accept) options.on_accept(t, y);
      check_magnitude(t, y);

      // Samples inside (t_old, t]; the step endpoint itself uses the exact state.
      while (next_out < outputs.size() && (outputs[next_out] - t) * dir <= 0.0) {
        const double to = outputs[next_out++];
        if (to == t) {
          record(t, y);
        } else {
          const double theta = (to - t_old) / hs;
          Vec yo(n);
          for (std::size_t i = 0; i < n; ++i) yo[i] = dense_eval(coeffs.data() + i, n, theta);
          record(to, yo);
        }
      }
      if (cfg.record_steps) record(t, y);
      if (cfg.dense) DenseRecorder::push(tr, t_old, hs, std::move(coeffs), n);

      if (last_rejected) h_new = std::min(h_new, h);
      last_rejected = false;
      h = std::min(h_new, h_max);
    } else {
      ++tr.rejected;
      last_rejected = true;
      h = h / std::min(1.0 / kFacMin, fac11 / kSafety);
    }
  }
  return tr;
}

// ---------------------------------------------------------------------------

namespace {

struct SimpsonPanel {
  double a, m, b;
  cplx fa, fm, fb;
  cplx whole;
};

cplx simpson(double a, double b, cplx fa, cplx fm, cplx fb) { return (b - a) / 6.0 * (fa + 4.0 * fm + fb); }

constexpr int kMinDepth = 4;

cplx adapt(const ScalarFn& f, const SimpsonPanel& p, double tol, int depth, int max_depth) {
  const double lm = 0.5 * (p.a + p.m), rm = 0.5 * (p.m + p.b);
  const cplx flm = f(lm), frm = f(rm);
  const cplx left = simpson(p.a, p.m, p.fa, flm, p.fm);
  const cplx right = simpson(p.m, p.b, p.fm, frm, p.fb);
  const cplx delta = left + right - p.whole;
  const double roundoff = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(left + right);
  if (depth >= kMinDepth && std::abs(delta) <= std::max(15.0 * tol, roundoff)) return left + right + delta / 15.0;
  if (depth >= max_depth)
    throw NumericalError(NumericalErrorKind::MaxDepth, p.m, "adaptive Simpson did not converge");
  return adapt(f, {p.a, lm, p.m, p.fa, flm, p.fm, left}, tol / 2.0, depth + 1, max_depth) +
         adapt(f, {p.m, rm, p.b, p.fm, frm, p.fb, right}, tol / 2.0, depth + 1, max_depth);
}

}  // namespace

cplx quadrature(const ScalarFn& f, double a, double b, double tol, int max_depth) {
  if (a == b) return {};
  if (!(tol > 0.0)) throw InvalidArgument("quadrature tolerance must be positive");
  const double m = 0.5 * (a + b);
  const cplx fa = f(a), fm = f(m), fb = f(b);
  return adapt(f, {a, m, b, fa, fm, fb, simpson(a, b, fa, fm, fb)}, tol, 0, max_depth);
}

}  // namespace odesplit
