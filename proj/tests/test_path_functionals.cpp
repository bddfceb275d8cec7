#include <catch2/catch_amalgamated.hpp>

#include <gmp.h>
#include <mpfr.h>

#include <cmath>
#include <vector>

#include "support/model_zoo.hpp"
#include "swtail/path_functionals.hpp"

using namespace swtail;

namespace {

// 256-bit reference for integral_0^dt e^{c u} du = (e^{c dt} - 1) / c.
double exp_integral_reference(double c, double dt) {
  if (c == 0.0) return dt;
  mpfr_t x, num, out;
  mpfr_inits2(256, x, num, out, static_cast<mpfr_ptr>(nullptr));
  mpfr_set_d(x, c, MPFR_RNDN);
  mpfr_mul_d(x, x, dt, MPFR_RNDN);
  mpfr_expm1(num, x, MPFR_RNDN);
  mpfr_div_d(out, num, c, MPFR_RNDN);
  const double r = mpfr_get_d(out, MPFR_RNDN);
  mpfr_clears(x, num, out, static_cast<mpfr_ptr>(nullptr));
  return r;
}

// Simpson quadrature of the variance integrand, run separately over each
// holding interval (the integrand jumps at switch times), oblivious to the
// closed-form segment algebra under test.
double variance_quadrature(const SwitchingModel& m, const JumpPath& path, double s, double t,
                           int panels_per_segment) {
  auto trailing_drift = [&](double u) {
    // integral_u^t a(X_w) dw by segment walk
    double acc = 0.0;
    double seg_start = path.start_time;
    for (const auto& seg : path.segments) {
      const double seg_end = seg_start + seg.duration;
      const double lo = std::max(u, seg_start);
      const double hi = std::min(t, seg_end);
      if (hi > lo) acc += m.a[seg.state] * (hi - lo);
      seg_start = seg_end;
    }
    return acc;
  };
  double total = 0.0;
  double seg_start = path.start_time;
  for (const auto& seg : path.segments) {
    const double seg_end = seg_start + seg.duration;
    const double lo = std::max(s, seg_start);
    const double hi = std::min(t, seg_end);
    if (hi > lo) {
      const double sig2 = m.sigma[seg.state] * m.sigma[seg.state];
      auto integrand = [&](double u) { return sig2 * std::exp(2.0 * trailing_drift(u)); };
      const int n = panels_per_segment;
      const double h = (hi - lo) / n;
      double acc = integrand(lo) + integrand(hi);
      for (int k = 1; k < n; ++k) acc += integrand(lo + k * h) * (k % 2 == 1 ? 4.0 : 2.0);
      total += acc * h / 3.0;
    }
    seg_start = seg_end;
  }
  return total;
}

}  // namespace

TEST_CASE("exp_integral matches a 256-bit reference across magnitudes") {
  const std::vector<double> cs = {0.0,    1e-300, -1e-300, 1e-12, -1e-12, 1e-6, -1e-6,
                                  1e-4,   -1e-4,  2e-4,    0.1,   -0.1,   1.0,  -1.0,
                                  10.0,   -10.0,  300.0,   -300.0};
  const std::vector<double> dts = {1e-8, 1e-3, 0.1, 0.25, 1.0, 2.0};
  for (const double c : cs)
    for (const double dt : dts) {
      const double got = exp_integral(c, dt);
      const double want = exp_integral_reference(c, dt);
      REQUIRE(got == Catch::Approx(want).epsilon(1e-13));
    }
}

TEST_CASE("exp_integral is exact at c = 0 and continuous through it") {
  REQUIRE(exp_integral(0.0, 0.73) == 0.73);
  const double below = exp_integral(-1e-13, 0.73);
  const double above = exp_integral(1e-13, 0.73);
  REQUIRE(std::abs(above - below) <= 1e-13);
}

TEST_CASE("flow factor is multiplicative across a split point") {
  const auto m = zoo::three_state();
  Rng rng({21, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const JumpPath path = sample_path(m, trial % 3, 8.0, rng);
    const double s = 0.5, u = 3.25, t = 7.5;
    const double whole = log_phi_over(m, path, s, t);
    const double split = log_phi_over(m, path, s, u) + log_phi_over(m, path, u, t);
    REQUIRE(whole == Catch::Approx(split).margin(1e-12));
    REQUIRE(phi_over(m, path, s, t) ==
            Catch::Approx(phi_over(m, path, s, u) * phi_over(m, path, u, t)).epsilon(1e-12));
  }
}

TEST_CASE("variance satisfies the flow composition identity") {
  const auto m = zoo::three_state();
  Rng rng({22, 0});
  for (int trial = 0; trial < 20; ++trial) {
    const JumpPath path = sample_path(m, trial % 3, 6.0, rng);
    const double s = 0.25, u = 2.0, t = 5.75;
    const double v_whole = variance_over(m, path, s, t);
    const double phi_ut = phi_over(m, path, u, t);
    const double v_split = phi_ut * phi_ut * variance_over(m, path, s, u) + variance_over(m, path, u, t);
    REQUIRE(v_whole == Catch::Approx(v_split).epsilon(1e-12));
  }
}

TEST_CASE("variance agrees with direct quadrature of the integrand") {
  const auto m = zoo::three_state();
  Rng rng({23, 0});
  for (int trial = 0; trial < 5; ++trial) {
    const JumpPath path = sample_path(m, trial % 3, 3.0, rng);
    const double s = 0.0, t = 3.0;
    const double exact = variance_over(m, path, s, t);
    const double quad = variance_quadrature(m, path, s, t, 512);
    REQUIRE(exact == Catch::Approx(quad).epsilon(1e-10));
  }
}

TEST_CASE("step coefficients expose consistent phi, v and log_phi") {
  const auto m = zoo::three_state();
  Rng rng({24, 0});
  const JumpPath path = sample_path(m, 0, 10.0, rng);
  for (const double start : {0.0, 1.3, 4.75, 9.0}) {
    const StepCoefficients c = step_coefficients(m, path, start, 0.5);
    REQUIRE(c.phi == std::exp(c.log_phi));
    REQUIRE(c.phi == Catch::Approx(phi_over(m, path, start, start + 0.5)).epsilon(1e-14));
    REQUIRE(c.v == Catch::Approx(variance_over(m, path, start, start + 0.5)).epsilon(1e-14));
    REQUIRE(c.v >= 0.0);
  }
}

TEST_CASE("flow factor respects the drift bounds") {
  const auto m = zoo::three_state();
  Rng rng({25, 0});
  const JumpPath path = sample_path(m, 1, 4.0, rng);
  const double phi = phi_over(m, path, 0.0, 4.0);
  REQUIRE(phi >= std::exp(4.0 * m.a.minCoeff()) * (1.0 - 1e-12));
  REQUIRE(phi <= std::exp(4.0 * m.a.maxCoeff()) * (1.0 + 1e-12));
}

TEST_CASE("interval queries outside the path fail loudly") {
  const auto m = zoo::three_state();
  Rng rng({26, 0});
  const JumpPath path = sample_path(m, 0, 2.0, rng);
  REQUIRE_THROWS_AS(phi_over(m, path, -0.5, 1.0), Error);
  REQUIRE_THROWS_AS(phi_over(m, path, 0.0, 2.5), Error);
  REQUIRE_THROWS_AS(variance_over(m, path, 1.5, 1.0), Error);
}
