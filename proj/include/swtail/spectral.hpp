#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "swtail/errors.hpp"
#include "swtail/jump_process.hpp"
#include "swtail/linalg.hpp"
#include "swtail/model.hpp"
#include "swtail/parallel.hpp"
#include "swtail/path_functionals.hpp"
#include "swtail/rng.hpp"

namespace swtail {

enum class Regime { light, heavy };

inline const char* regime_name(Regime r) { return r == Regime::light ? "Light" : "Heavy"; }

// First pole of the moment kernel: s1 = min over expanding states of
// lambda(i)/a(i); +infinity iff no state has positive drift.
inline double pole_s1(const SwitchingModel& m) {
  double s1 = std::numeric_limits<double>::infinity();
  for (int i = 0; i < m.n_states(); ++i)
    if (m.a[i] > 0.0) s1 = std::min(s1, m.lambda[i] / m.a[i]);
  return s1;
}

// Generator of the exponentially tilted semigroup acting on the s-th moment
// of the flow: G_s = Q + s diag(a). Metzler for s >= 0.
inline Eigen::MatrixXd tilted_generator(const SwitchingModel& m, double s) {
  Eigen::MatrixXd g = generator(m).matrix;
  for (int i = 0; i < m.n_states(); ++i) g(i, i) += s * m.a[i];
  return g;
}

// Moment kernel M_s(i,j) = q(i,j) lambda(i) / (lambda(i) - s a(i)),
// the expected s-th power of the flow factor over one holding time, split by
// the landing state. Entrywise nonnegative and finite only for 0 <= s < s1.
inline Eigen::MatrixXd ms_matrix(const SwitchingModel& m, double s) {
  if (!(s >= 0.0) || s >= pole_s1(m))
    fail(Errc::bad_argument, "moment kernel defined only for 0 <= s < s1");
  const int n = m.n_states();
  Eigen::MatrixXd ms(n, n);
  for (int i = 0; i < n; ++i) {
    const double factor = m.lambda[i] / (m.lambda[i] - s * m.a[i]);
    for (int j = 0; j < n; ++j) ms(i, j) = m.q(i, j) * factor;
  }
  return ms;
}

// Perron growth rate Lambda(s) of the tilted semigroup: the s-th moment of
// the flow over a window of length t grows like exp(t Lambda(s)).
inline double perron_growth_rate(const SwitchingModel& m, double s) {
  return dominant_real_eigenpair(tilted_generator(m, s)).value;
}

// Tail dichotomy, assuming a stationary solution exists (alpha < 0):
// heavy iff some state has expanding drift.
inline Regime classify_regime(const SwitchingModel& m, double alpha) {
  if (!(alpha < 0.0))
    fail(Errc::ergodicity_violated,
         "requires mean drift alpha = sum_i a(i) mu(i) < 0; got alpha = " + std::to_string(alpha));
  return m.a.maxCoeff() > 0.0 ? Regime::heavy : Regime::light;
}

inline Regime classify_regime(const SwitchingModel& m) {
  return classify_regime(m, ergodicity_index(m, invariant_law(generator(m))));
}

struct KappaSolution {
  double kappa;        // the reported exponent (moment-kernel root)
  double kappa_ms;     // root of rho(M_s) = 1
  double kappa_gs;     // root of Lambda(s) = 0
  double residual_ms;  // |rho(M_kappa) - 1|
  double residual_gs;  // |Lambda(kappa)|
};

namespace detail {

// Bisection on (0, s1) for an increasing-through-zero criterion function.
// The upper bracket expands geometrically toward s1; tolerance is relative.
template <class F>
inline double root_in_pole_interval(F&& f, double s1) {
  double lo = 1e-8;
  for (int guard = 0; f(lo) >= 0.0; ++guard) {
    if (guard >= 8) fail(Errc::bracketing_failure, "criterion not negative near s = 0");
    lo *= 1e-2;
  }
  double hi = std::isfinite(s1) ? 0.5 * s1 : 1.0;
  for (int guard = 0; f(hi) <= 0.0; ++guard) {
    if (guard >= 200) fail(Errc::bracketing_failure, "criterion never becomes positive below s1");
    hi = std::isfinite(s1) ? s1 - 0.5 * (s1 - hi) : 2.0 * hi;
  }
  int it = 0;
  while (hi - lo > 1e-12 * std::max(1.0, 0.5 * (hi + lo)) && it++ < 200) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace detail

// Tail exponent of a heavy model by two independent routes: the unique root
// of rho(M_s) = 1 on (0, s1) and the unique root of Lambda(s) = 0. The routes
// share no intermediate quantities past the model itself; disagreement beyond
// 1e-8 aborts rather than averaging away a defect.
inline KappaSolution solve_kappa(const SwitchingModel& m) {
  const StationaryLaw law = invariant_law(generator(m));
  const double alpha = ergodicity_index(m, law);
  if (classify_regime(m, alpha) != Regime::heavy)
    fail(Errc::light_regime, "tail exponent exists only for heavy models");
  const double s1 = pole_s1(m);

  const double kappa_ms = detail::root_in_pole_interval(
      [&](double s) { return spectral_radius(ms_matrix(m, s)).value - 1.0; }, s1);
  const double kappa_gs = detail::root_in_pole_interval(
      [&](double s) { return perron_growth_rate(m, s); }, s1);

  if (std::abs(kappa_ms - kappa_gs) > 1e-8)
    fail(Errc::non_convergence,
         "moment-kernel and growth-rate roots disagree: " + std::to_string(kappa_ms) + " vs " +
             std::to_string(kappa_gs));

  KappaSolution out;
  out.kappa = kappa_ms;
  out.kappa_ms = kappa_ms;
  out.kappa_gs = kappa_gs;
  out.residual_ms = std::abs(spectral_radius(ms_matrix(m, kappa_ms)).value - 1.0);
  out.residual_gs = std::abs(perron_growth_rate(m, kappa_ms));
  return out;
}

// Default evaluation grid: geometric across (0, s1) for heavy models (the
// kernel blows up at the pole, so log spacing resolves both ends), linear on
// (0, 10] when s1 is infinite.
inline std::vector<double> default_s_grid(const SwitchingModel& m, int n = 64) {
  if (n < 2) fail(Errc::bad_argument, "grid needs at least 2 points");
  const double s1 = pole_s1(m);
  std::vector<double> grid(n);
  if (std::isfinite(s1)) {
    const double lo = s1 * 1e-3;
    const double hi = s1 * 0.999;
    const double ratio = std::pow(hi / lo, 1.0 / (n - 1));
    double s = lo;
    for (int k = 0; k < n; ++k, s *= ratio) grid[k] = s;
    grid.back() = hi;
  } else {
    for (int k = 0; k < n; ++k) grid[k] = 10.0 * (k + 1) / n;
  }
  return grid;
}

struct SpectralReport {
  double alpha = 0.0;
  Regime regime = Regime::light;
  double s1 = std::numeric_limits<double>::infinity();
  std::optional<KappaSolution> kappa;
  double delta = 1.0;
  double derivative_at_zero = 0.0;  // d/ds log rho(A_{s,delta}) at s = 0
  double semigroup_defect = 0.0;
  std::vector<std::array<double, 2>> rho_ms_curve;      // (s, rho(M_s))
  std::vector<std::array<double, 2>> log_rho_as_curve;  // (s, delta * Lambda(s))
};

// Full spectral picture of one model at window length delta: regime, exponent
// (when heavy), the two diagnostic curves, the one-sided derivative of
// log rho(A_{s,delta}) at zero, and the worst semigroup composition defect
// over a seeded set of (s, delta, gamma) triples.
inline SpectralReport diagnostics(const SwitchingModel& m, double delta,
                                  std::vector<double> s_grid = {}) {
  if (!(delta > 0.0)) fail(Errc::bad_argument, "delta must be > 0");
  const StationaryLaw law = invariant_law(generator(m));
  SpectralReport rep;
  rep.alpha = ergodicity_index(m, law);
  rep.regime = classify_regime(m, rep.alpha);
  rep.s1 = pole_s1(m);
  rep.delta = delta;
  if (rep.regime == Regime::heavy) rep.kappa = solve_kappa(m);

  if (s_grid.empty()) s_grid = default_s_grid(m);
  rep.rho_ms_curve.reserve(s_grid.size());
  rep.log_rho_as_curve.reserve(s_grid.size());
  for (const double s : s_grid) {
    if (s > 0.0 && s < rep.s1)
      rep.rho_ms_curve.push_back({s, spectral_radius(ms_matrix(m, s)).value});
    rep.log_rho_as_curve.push_back({s, delta * perron_growth_rate(m, s)});
  }

  // Right-side derivative of Lambda at 0 by the second-order one-sided
  // difference (Lambda(0) = 0 drops out). The first-order quotient carries
  // h |Lambda''(0)| / 2 truncation, which already exceeds 1e-6 for strongly
  // mixing drifts at this step.
  constexpr double kDerivStep = 1e-6;
  rep.derivative_at_zero = delta *
      (4.0 * perron_growth_rate(m, kDerivStep) - perron_growth_rate(m, 2.0 * kDerivStep)) /
      (2.0 * kDerivStep);

  Rng rng({12345, kStreamSaltCheck});
  const double s_cap = std::isfinite(rep.s1) ? std::min(2.0, 0.9 * rep.s1) : 2.0;
  double worst = 0.0;
  for (int k = 0; k < 6; ++k) {
    const double s = s_cap * rng.next_unit();
    const double d1 = 0.1 + rng.next_unit();
    const double d2 = 0.1 + rng.next_unit();
    const Eigen::MatrixXd g = tilted_generator(m, s);
    const double defect =
        (expm(d1 * g) * expm(d2 * g) - expm((d1 + d2) * g)).cwiseAbs().maxCoeff();
    worst = std::max(worst, defect);
  }
  rep.semigroup_defect = worst;
  return rep;
}

struct OperatorRowEstimate {
  int state = 0;
  double s = 0.0;
  double delta = 0.0;
  std::int64_t paths = 0;
  Eigen::VectorXd mean;  // estimate of row `state` of A_{s,delta}
  Eigen::VectorXd se;    // per-entry standard errors
};

// Direct Monte Carlo of A_{s,delta}(i,j) = E_i[ Phi^s ; X_delta = j ]:
// each replica simulates one jump path over [0, delta] from the fixed initial
// state and tallies the s-th power of its flow factor into the landing state.
// Replica streams are keyed by replica index, partial sums merged in chunk
// order, so the estimate is bit-identical for any worker count.
inline OperatorRowEstimate monte_carlo_operator_check(const SwitchingModel& m, double s,
                                                      double delta, int state,
                                                      std::int64_t n_paths,
                                                      std::uint64_t seed = 42, int workers = 0) {
  if (state < 0 || state >= m.n_states()) fail(Errc::bad_argument, "state out of range");
  if (n_paths <= 0) fail(Errc::bad_argument, "n_paths must be > 0");
  if (!(delta > 0.0)) fail(Errc::bad_argument, "delta must be > 0");
  const int n = m.n_states();
  constexpr std::int64_t kChunk = 1 << 16;
  const std::int64_t n_chunks = (n_paths + kChunk - 1) / kChunk;
  std::vector<double> partial_w(static_cast<std::size_t>(n_chunks) * n, 0.0);
  std::vector<double> partial_w2(static_cast<std::size_t>(n_chunks) * n, 0.0);

  run_chunked(n_paths, kChunk, workers, [&](std::int64_t chunk, std::int64_t begin, std::int64_t end) {
    double* sums = partial_w.data() + chunk * n;
    double* sums2 = partial_w2.data() + chunk * n;
    for (std::int64_t r = begin; r < end; ++r) {
      Rng rng({seed, kStreamSaltOperator + static_cast<std::uint64_t>(r)});
      int x = state;
      double t = 0.0;
      double log_phi = 0.0;
      for (;;) {
        const double hold = rng.next_exponential(m.lambda[x]);
        if (t + hold >= delta) {
          log_phi += m.a[x] * (delta - t);
          break;
        }
        log_phi += m.a[x] * hold;
        t += hold;
        x = sample_next_state(m, x, rng);
      }
      const double w = std::exp(s * log_phi);
      sums[x] += w;
      sums2[x] += w * w;
    }
  });

  OperatorRowEstimate out;
  out.state = state;
  out.s = s;
  out.delta = delta;
  out.paths = n_paths;
  out.mean = Eigen::VectorXd::Zero(n);
  out.se = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd total_w2 = Eigen::VectorXd::Zero(n);
  for (std::int64_t c = 0; c < n_chunks; ++c)
    for (int j = 0; j < n; ++j) {
      out.mean[j] += partial_w[c * n + j];
      total_w2[j] += partial_w2[c * n + j];
    }
  for (int j = 0; j < n; ++j) {
    const double mean = out.mean[j] / n_paths;
    const double var = std::max(0.0, total_w2[j] / n_paths - mean * mean);
    out.mean[j] = mean;
    out.se[j] = std::sqrt(var / n_paths);
  }
  return out;
}

}  // namespace swtail
