#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "swtail/errors.hpp"
#include "swtail/jump_process.hpp"
#include "swtail/model.hpp"
#include "swtail/parallel.hpp"
#include "swtail/path_functionals.hpp"
#include "swtail/rng.hpp"
#include "swtail/spectral.hpp"

namespace swtail {

struct SimulationPlan {
  double delta = 0.0;               // <= 0: 0.25 / max(lambda)
  std::int64_t burn_in_steps = 0;   // <= 0: ceil(40 / (delta |alpha|))
  std::int64_t n_samples = 100000;
  std::uint64_t seed = 42;
  bool antithetic = false;
  int workers = 0;                  // <= 0: hardware concurrency
};

inline double resolve_delta(const SwitchingModel& m, const SimulationPlan& plan) {
  return plan.delta > 0.0 ? plan.delta : 0.25 / m.lambda.maxCoeff();
}

// Burn-in long enough that the integrated contraction exp(n0 delta alpha)
// is below e^-40, making the start value Y0 = 0 irrelevant at output time.
inline std::int64_t burn_in_for(double delta, double alpha) {
  return static_cast<std::int64_t>(std::ceil(40.0 / (delta * std::abs(alpha))));
}

struct TailSampleSet {
  std::vector<double> values;   // one draw of the stationary variable per replica
  double delta = 0.0;
  std::int64_t burn_in_steps = 0;
};

namespace detail {

// Per-(model, delta) constants for the no-jump fast path of one full step.
struct StepTable {
  std::vector<double> phi_full;   // e^{a delta}
  std::vector<double> lp_full;    // a delta
  std::vector<double> e2a_full;   // e^{2 a delta}
  std::vector<double> v_full;     // sigma^2 * integral_0^delta e^{2 a u} du

  StepTable(const SwitchingModel& m, double delta) {
    const int n = m.n_states();
    phi_full.resize(n);
    lp_full.resize(n);
    e2a_full.resize(n);
    v_full.resize(n);
    for (int i = 0; i < n; ++i) {
      lp_full[i] = m.a[i] * delta;
      phi_full[i] = std::exp(lp_full[i]);
      e2a_full[i] = std::exp(2.0 * m.a[i] * delta);
      v_full[i] = m.sigma[i] * m.sigma[i] * exp_integral(2.0 * m.a[i], delta);
    }
  }
};

// Walks one continuous chain trajectory in fixed steps of length delta,
// carrying the residual holding clock across steps. Produces the exact
// one-step coefficients (phi, v) for the conditional Gaussian recursion.
class ChainStepper {
 public:
  ChainStepper(const SwitchingModel& m, const StepTable& table, double delta, int initial,
               Rng& rng)
      : m_(m), table_(table), delta_(delta), rng_(rng), state_(initial) {
    hold_ = rng_.next_exponential(m_.lambda[state_]);
  }

  int state() const { return state_; }

  StepCoefficients advance() {
    if (hold_ > delta_) {
      hold_ -= delta_;
      return {table_.phi_full[state_], table_.v_full[state_], table_.lp_full[state_]};
    }
    double rem = delta_;
    double lp = 0.0;
    double v = 0.0;
    while (hold_ <= rem) {
      const double a = m_.a[state_];
      const double sig = m_.sigma[state_];
      v = v * std::exp(2.0 * a * hold_) + sig * sig * exp_integral(2.0 * a, hold_);
      lp += a * hold_;
      rem -= hold_;
      state_ = sample_next_state(m_, state_, rng_);
      hold_ = rng_.next_exponential(m_.lambda[state_]);
    }
    if (rem > 0.0) {
      const double a = m_.a[state_];
      const double sig = m_.sigma[state_];
      v = v * std::exp(2.0 * a * rem) + sig * sig * exp_integral(2.0 * a, rem);
      lp += a * rem;
      hold_ -= rem;
    }
    return {std::exp(lp), v, lp};
  }

  // Drift integral only, for walk functionals that never touch the variance.
  double advance_log_phi() {
    if (hold_ > delta_) {
      hold_ -= delta_;
      return table_.lp_full[state_];
    }
    double rem = delta_;
    double lp = 0.0;
    while (hold_ <= rem) {
      lp += m_.a[state_] * hold_;
      rem -= hold_;
      state_ = sample_next_state(m_, state_, rng_);
      hold_ = rng_.next_exponential(m_.lambda[state_]);
    }
    if (rem > 0.0) {
      lp += m_.a[state_] * rem;
      hold_ -= rem;
    }
    return lp;
  }

 private:
  const SwitchingModel& m_;
  const StepTable& table_;
  double delta_;
  Rng& rng_;
  int state_;
  double hold_;
};

}  // namespace detail

// Samples the stationary variable by exact discretization: each replica runs
// one continuous path from Y = 0, X ~ mu through the burn-in and records the
// terminal value. Replica r consumes stream r, so the sample vector is
// bit-identical for any worker count. With antithetic pairing, replica pairs
// share one trajectory and the twin is the exact negation (Y0 = 0 makes the
// sign flip of every Gaussian increment equivalent to negating Y).
inline TailSampleSet sample_stationary(const SwitchingModel& m, const SimulationPlan& plan,
                                       std::int64_t extra_steps = 0) {
  const Generator gen = generator(m);
  const StationaryLaw law = invariant_law(gen);
  const double alpha = ergodicity_index(m, law);
  if (!(alpha < 0.0))
    fail(Errc::ergodicity_violated,
         "requires mean drift alpha = sum_i a(i) mu(i) < 0; got alpha = " + std::to_string(alpha));
  if (plan.n_samples <= 0) fail(Errc::bad_argument, "n_samples must be > 0");
  if (extra_steps < 0) fail(Errc::bad_argument, "extra_steps must be >= 0");

  const double delta = resolve_delta(m, plan);
  const std::int64_t burn_in =
      plan.burn_in_steps > 0 ? plan.burn_in_steps : burn_in_for(delta, alpha);
  const std::int64_t total_steps = burn_in + extra_steps;
  const detail::StepTable table(m, delta);

  TailSampleSet out;
  out.delta = delta;
  out.burn_in_steps = burn_in;
  out.values.assign(plan.n_samples, 0.0);

  auto run_replica = [&](std::int64_t stream) {
    Rng rng({plan.seed, kStreamSaltStationary + static_cast<std::uint64_t>(stream)});
    const int initial = sample_initial_state(law, rng);
    detail::ChainStepper stepper(m, table, delta, initial, rng);
    double y = 0.0;
    for (std::int64_t k = 0; k < total_steps; ++k) {
      const StepCoefficients c = stepper.advance();
      y = c.phi * y + std::sqrt(c.v) * rng.next_gaussian();
    }
    return y;
  };

  constexpr std::int64_t kChunk = 256;
  if (plan.antithetic) {
    const std::int64_t n_pairs = (plan.n_samples + 1) / 2;
    run_chunked(n_pairs, kChunk, plan.workers, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
      for (std::int64_t p = begin; p < end; ++p) {
        const double y = run_replica(p);
        out.values[2 * p] = y;
        if (2 * p + 1 < plan.n_samples) out.values[2 * p + 1] = -y;
      }
    });
  } else {
    run_chunked(plan.n_samples, kChunk, plan.workers, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
      for (std::int64_t r = begin; r < end; ++r) out.values[r] = run_replica(r);
    });
  }
  return out;
}

struct TailEstimate {
  double kappa_hat = 0.0;
  std::int64_t k_used = 0;
  double ci_low = 0.0;
  double ci_high = 0.0;
  double threshold = 0.0;                             // order statistic the estimator conditions on
  std::vector<std::array<double, 2>> ccdf;            // (t, P(|R| > t)) on a log grid
  std::vector<std::array<double, 2>> prefactor_track; // (t, t^kappa P(|R| > t)) over one decade
  std::optional<double> kappa_ref;                    // exponent used for the prefactor, if supplied
};

// Hill estimator on |values|: kappa_hat = k / sum log(top order statistics /
// threshold), threshold = the (n-k)-th order statistic, k = max(10,
// floor(k_frac n)). CI is the asymptotic kappa_hat (1 +- 1.96/sqrt(k)).
inline TailEstimate hill_estimate(const std::vector<double>& values, double k_frac = 0.005,
                                  std::optional<double> kappa_ref = std::nullopt) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  if (n < 100) fail(Errc::bad_argument, "tail estimation needs at least 100 samples");
  if (!(k_frac > 0.0) || !(k_frac < 1.0)) fail(Errc::bad_argument, "k_frac must be in (0,1)");
  std::vector<double> mag(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mag[i] = std::abs(values[i]);
  std::sort(mag.begin(), mag.end());

  const std::int64_t k = std::max<std::int64_t>(10, static_cast<std::int64_t>(k_frac * n));
  if (k >= n) fail(Errc::bad_argument, "k_frac leaves no bulk below the threshold");
  const double threshold = mag[n - k - 1];
  if (!(threshold > 0.0))
    fail(Errc::degenerate_sample, "top-k order statistics must be strictly positive");
  double log_sum = 0.0;
  const double log_threshold = std::log(threshold);
  for (std::int64_t i = n - k; i < n; ++i) log_sum += std::log(mag[i]) - log_threshold;
  if (!(log_sum > 0.0)) fail(Errc::degenerate_sample, "degenerate top-k spacing");

  TailEstimate est;
  est.kappa_hat = static_cast<double>(k) / log_sum;
  est.k_used = k;
  const double rel = 1.96 / std::sqrt(static_cast<double>(k));
  est.ci_low = est.kappa_hat * (1.0 - rel);
  est.ci_high = est.kappa_hat * (1.0 + rel);
  est.threshold = threshold;
  est.kappa_ref = kappa_ref;

  auto ccdf_at = [&](double t) {
    const auto it = std::upper_bound(mag.begin(), mag.end(), t);
    return static_cast<double>(mag.end() - it) / static_cast<double>(n);
  };

  const double t_lo = std::max(mag[n / 2], std::numeric_limits<double>::min());
  const double t_hi = mag[n - 11];  // keep >= 10 exceedances
  if (t_hi > t_lo) {
    constexpr int kCcdfPoints = 64;
    const double ratio = std::pow(t_hi / t_lo, 1.0 / (kCcdfPoints - 1));
    double t = t_lo;
    for (int j = 0; j < kCcdfPoints; ++j, t *= ratio) est.ccdf.push_back({t, ccdf_at(t)});
  }

  const double exponent = kappa_ref.value_or(est.kappa_hat);
  constexpr int kDecadePoints = 17;
  const double decade_ratio = std::pow(10.0, 1.0 / (kDecadePoints - 1));
  double t = threshold;
  for (int j = 0; j < kDecadePoints; ++j, t *= decade_ratio)
    est.prefactor_track.push_back({t, std::pow(t, exponent) * ccdf_at(t)});
  return est;
}

struct PlateauDiagnostic {
  std::vector<double> k_fracs;
  std::vector<double> estimates;
  double spread = 0.0;  // max / min over the estimates
  bool pass = false;    // spread <= 1.25
};

inline PlateauDiagnostic hill_plateau(const std::vector<double>& values,
                                      std::vector<double> k_fracs = {0.002, 0.005, 0.01, 0.02}) {
  PlateauDiagnostic diag;
  diag.k_fracs = std::move(k_fracs);
  for (const double f : diag.k_fracs)
    diag.estimates.push_back(hill_estimate(values, f).kappa_hat);
  const auto [lo, hi] = std::minmax_element(diag.estimates.begin(), diag.estimates.end());
  diag.spread = *hi / *lo;
  diag.pass = diag.spread <= 1.25;
  return diag;
}

struct MomentProbe {
  double order = 0.0;
  double m_quarter = 0.0;
  double m_half = 0.0;
  double m_full = 0.0;
  double ratio_half = 0.0;  // m_half / m_quarter
  double ratio_full = 0.0;  // m_full / m_half
  bool stable = false;      // both ratios within [0.8, 1.25]
};

// Prefix-mean stability of E|R|^order: a finite moment settles as the sample
// doubles, a divergent one keeps drifting with the largest order statistics.
inline std::vector<MomentProbe> moment_probe(const std::vector<double>& values,
                                             const std::vector<double>& orders) {
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  if (n < 4) fail(Errc::bad_argument, "moment probe needs at least 4 samples");
  std::vector<MomentProbe> out;
  out.reserve(orders.size());
  for (const double order : orders) {
    if (order < 0.0) fail(Errc::bad_argument, "moment order must be >= 0");
    MomentProbe p;
    p.order = order;
    double acc = 0.0;
    std::int64_t next_mark = n / 4;
    for (std::int64_t i = 0; i < n; ++i) {
      acc += std::pow(std::abs(values[i]), order);
      if (i + 1 == next_mark) {
        if (next_mark == n / 4) p.m_quarter = acc / (n / 4);
        else p.m_half = acc / (n / 2);
        next_mark = next_mark == n / 4 ? n / 2 : -1;
      }
    }
    p.m_full = acc / n;
    p.ratio_half = p.m_half / p.m_quarter;
    p.ratio_full = p.m_full / p.m_half;
    auto in_band = [](double r) { return r >= 0.8 && r <= 1.25; };
    p.stable = in_band(p.ratio_half) && in_band(p.ratio_full);
    out.push_back(p);
  }
  return out;
}

struct TailSymmetryPoint {
  double quantile = 0.0;  // |R| quantile level defining the threshold, 0 when t given directly
  double t = 0.0;
  double p_pos = 0.0;  // P(R > t)
  double p_neg = 0.0;  // P(R < -t)
  double z = 0.0;      // (k+ - k-) / sqrt(k+ + k-)
};

inline TailSymmetryPoint two_sided_tail(const std::vector<double>& values, double t) {
  TailSymmetryPoint pt;
  pt.t = t;
  std::int64_t pos = 0, neg = 0;
  for (const double v : values) {
    if (v > t) ++pos;
    else if (v < -t) ++neg;
  }
  const std::int64_t n = static_cast<std::int64_t>(values.size());
  pt.p_pos = static_cast<double>(pos) / n;
  pt.p_neg = static_cast<double>(neg) / n;
  pt.z = pos + neg > 0
             ? static_cast<double>(pos - neg) / std::sqrt(static_cast<double>(pos + neg))
             : 0.0;
  return pt;
}

// Balance of the two tails at |R| quantile thresholds; the stationary law is
// symmetric, so z is asymptotically standard normal at each threshold.
inline std::vector<TailSymmetryPoint> tail_symmetry_check(
    const std::vector<double>& values, const std::vector<double>& quantiles = {0.9, 0.99, 0.999}) {
  if (values.empty()) fail(Errc::bad_argument, "empty sample set");
  std::vector<double> mag(values.size());
  for (std::size_t i = 0; i < values.size(); ++i) mag[i] = std::abs(values[i]);
  std::sort(mag.begin(), mag.end());
  std::vector<TailSymmetryPoint> out;
  for (const double q : quantiles) {
    if (!(q >= 0.0) || !(q < 1.0)) fail(Errc::bad_argument, "quantile must be in [0,1)");
    const auto idx = static_cast<std::size_t>(q * (mag.size() - 1));
    TailSymmetryPoint pt = two_sided_tail(values, mag[idx]);
    pt.quantile = q;
    out.push_back(pt);
  }
  return out;
}

struct LadderEstimate {
  Eigen::MatrixXd h_hat;      // P(first ladder epoch lands in j | start i)
  Eigen::MatrixXd h_se;       // per-entry standard errors
  Eigen::VectorXd row_sums;
  double rho_h = 0.0;         // spectral radius of h_hat
  double rho_h_upper = 0.0;   // spectral radius of h_hat + 3 h_se
  std::vector<std::array<double, 3>> max_tail;  // (t, P(M > t), e^{kappa t} P(M > t))
  std::int64_t replicas = 0;
  double cutoff_drop = 0.0;
  double kappa = 0.0;
  double delta_walk = 1.0;
};

// Multiplicative random walk S_n = sum of unit-time drift integrals of the
// time-reversed chain, started from X ~ mu. Each replica records its running
// maximum M and the chain state at the first strict ascent above 0 (the
// ladder epoch), stopping once S falls cutoff_drop below the maximum (the
// negative-drift walk never returns that far up).
inline LadderEstimate simulate_walk_max(const SwitchingModel& m, double kappa,
                                        std::int64_t n_replicas, double cutoff_drop,
                                        std::uint64_t seed = 42, int workers = 0) {
  if (n_replicas <= 0) fail(Errc::bad_argument, "n_replicas must be > 0");
  if (!(cutoff_drop > 0.0)) fail(Errc::bad_argument, "cutoff_drop must be > 0");
  if (!(kappa > 0.0)) fail(Errc::bad_argument, "kappa must be > 0");
  const StationaryLaw law = invariant_law(generator(m));
  const double alpha = ergodicity_index(m, law);
  if (classify_regime(m, alpha) != Regime::heavy)
    fail(Errc::light_regime, "the running-maximum tail is exponential only for heavy models");
  const SwitchingModel reversed = time_reversed(m, law);
  const double delta_walk = 1.0;
  const detail::StepTable table(reversed, delta_walk);
  const int n = m.n_states();

  std::vector<double> maxima(n_replicas, 0.0);
  std::vector<std::int32_t> start_state(n_replicas, 0);
  std::vector<std::int32_t> ladder_state(n_replicas, -1);

  constexpr std::int64_t kChunk = 512;
  run_chunked(n_replicas, kChunk, workers, [&](std::int64_t, std::int64_t begin, std::int64_t end) {
    for (std::int64_t r = begin; r < end; ++r) {
      Rng rng({seed, kStreamSaltWalk + static_cast<std::uint64_t>(r)});
      const int initial = sample_initial_state(law, rng);
      detail::ChainStepper stepper(reversed, table, delta_walk, initial, rng);
      double s_walk = 0.0;
      double max_walk = 0.0;
      std::int32_t ladder = -1;
      constexpr std::int64_t kStepCap = 1 << 22;
      for (std::int64_t step = 0; step < kStepCap; ++step) {
        s_walk += stepper.advance_log_phi();
        if (ladder < 0 && s_walk > 0.0) ladder = static_cast<std::int32_t>(stepper.state());
        if (s_walk > max_walk) max_walk = s_walk;
        if (s_walk < max_walk - cutoff_drop) break;
      }
      maxima[r] = max_walk;
      start_state[r] = static_cast<std::int32_t>(initial);
      ladder_state[r] = ladder;
    }
  });

  LadderEstimate out;
  out.replicas = n_replicas;
  out.cutoff_drop = cutoff_drop;
  out.kappa = kappa;
  out.delta_walk = delta_walk;
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  Eigen::VectorXd initials = Eigen::VectorXd::Zero(n);
  for (std::int64_t r = 0; r < n_replicas; ++r) {
    initials[start_state[r]] += 1.0;
    if (ladder_state[r] >= 0) counts(start_state[r], ladder_state[r]) += 1.0;
  }
  out.h_hat = Eigen::MatrixXd::Zero(n, n);
  out.h_se = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    if (initials[i] <= 0.0) fail(Errc::degenerate_sample, "no replicas started in some state");
    for (int j = 0; j < n; ++j) {
      const double p = counts(i, j) / initials[i];
      out.h_hat(i, j) = p;
      out.h_se(i, j) = std::sqrt(p * (1.0 - p) / initials[i]);
    }
  }
  out.row_sums = out.h_hat.rowwise().sum();
  out.rho_h = spectral_radius(out.h_hat).value;
  out.rho_h_upper = spectral_radius(out.h_hat + 3.0 * out.h_se).value;

  std::vector<double> positive;
  positive.reserve(maxima.size());
  for (const double v : maxima)
    if (v > 0.0) positive.push_back(v);
  if (positive.size() >= 1000) {
    std::sort(positive.begin(), positive.end());
    const double t_lo = positive[positive.size() / 2];
    constexpr std::size_t kMinExceed = 200;
    const double t_hi = positive[positive.size() - kMinExceed];
    if (t_hi > t_lo) {
      constexpr int kPoints = 12;
      for (int j = 0; j < kPoints; ++j) {
        const double t = t_lo + (t_hi - t_lo) * j / (kPoints - 1);
        const auto it = std::upper_bound(positive.begin(), positive.end(), t);
        const double p = static_cast<double>(positive.end() - it) / static_cast<double>(n_replicas);
        out.max_tail.push_back({t, p, std::exp(kappa * t) * p});
      }
    }
  }
  return out;
}

inline double default_cutoff_drop(double kappa) { return std::max(30.0 / kappa, 20.0); }

}  // namespace swtail
