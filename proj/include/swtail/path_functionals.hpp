#pragma once

#include <cmath>

#include "swtail/errors.hpp"
#include "swtail/jump_process.hpp"
#include "swtail/model.hpp"

namespace swtail {

// integral_0^dt e^{c u} du, exact at c = 0 and stable for |c dt| small.
// Series branch keeps full double precision where expm1(c dt)/c would lose
// low bits to the division.
inline double exp_integral(double c, double dt) {
  const double x = c * dt;
  if (x == 0.0) return dt;
  if (std::abs(x) < 1e-4)
    return dt * (1.0 + x * (0.5 + x * (1.0 / 6.0 + x * (1.0 / 24.0))));
  return std::expm1(x) / c;
}

struct StepCoefficients {
  double phi;      // exp of the integrated drift over the step
  double v;        // exact conditional variance accumulated over the step
  double log_phi;  // integrated drift, kept separately for long products
};

namespace detail {

struct Overlap {
  int state;
  double duration;
};

// Clips [s,t] against the path's segments; bounds checked with a small
// absolute slack for accumulated endpoint rounding.
inline void collect_overlaps(const JumpPath& path, double s, double t,
                             std::vector<Overlap>& out) {
  constexpr double kEdgeSlack = 1e-9;
  const double end = path.end_time();
  if (!(s <= t)) fail(Errc::bad_argument, "interval start exceeds end");
  if (s < path.start_time - kEdgeSlack || t > end + kEdgeSlack)
    fail(Errc::interval_outside_path, "query interval not covered by the path");
  out.clear();
  double seg_start = path.start_time;
  for (const auto& seg : path.segments) {
    const double seg_end = seg_start + seg.duration;
    const double lo = std::max(s, seg_start);
    const double hi = std::min(t, seg_end);
    if (hi > lo) out.push_back({seg.state, hi - lo});
    seg_start = seg_end;
    if (seg_start >= t) break;
  }
}

}  // namespace detail

inline double log_phi_over(const SwitchingModel& m, const JumpPath& path, double s, double t) {
  std::vector<detail::Overlap> parts;
  detail::collect_overlaps(path, s, t, parts);
  double acc = 0.0;
  for (const auto& p : parts) acc += m.a[p.state] * p.duration;
  return acc;
}

// Flow factor exp(integral_s^t a(X_u) du) of the drift ODE over [s,t].
inline double phi_over(const SwitchingModel& m, const JumpPath& path, double s, double t) {
  return std::exp(log_phi_over(m, path, s, t));
}

// Conditional variance integral_s^t exp(2 integral_u^t a) sigma^2(X_u) du,
// evaluated segmentwise in closed form. The sweep runs backward from t so the
// trailing drift exponent is accumulated once per segment.
inline double variance_over(const SwitchingModel& m, const JumpPath& path, double s, double t) {
  std::vector<detail::Overlap> parts;
  detail::collect_overlaps(path, s, t, parts);
  double v = 0.0;
  double trailing = 0.0;  // 2 * integral of a over segments after the current one
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    const double a = m.a[it->state];
    const double sig = m.sigma[it->state];
    v += sig * sig * std::exp(trailing) * exp_integral(2.0 * a, it->duration);
    trailing += 2.0 * a * it->duration;
  }
  return v;
}

// Coefficients of the exact one-step recursion Y' = phi * Y + sqrt(v) * xi
// for the step [step_start, step_start + delta].
inline StepCoefficients step_coefficients(const SwitchingModel& m, const JumpPath& path,
                                          double step_start, double delta) {
  if (!(delta > 0.0)) fail(Errc::bad_argument, "step size must be > 0");
  const double lp = log_phi_over(m, path, step_start, step_start + delta);
  return {std::exp(lp), variance_over(m, path, step_start, step_start + delta), lp};
}

}  // namespace swtail
