#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "support/model_zoo.hpp"
#include "swtail/check.hpp"
#include "swtail/spectral.hpp"

using namespace swtail;

TEST_CASE("tilted generator shifts the diagonal by s a(i)") {
  const auto m = zoo::three_state();
  const Eigen::MatrixXd g0 = tilted_generator(m, 0.0);
  REQUIRE((g0 - generator(m).matrix).cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd g = tilted_generator(m, 0.7);
  for (int i = 0; i < 3; ++i)
    REQUIRE(g(i, i) == Catch::Approx(-m.lambda[i] + 0.7 * m.a[i]).margin(1e-15));
}

TEST_CASE("pole location for mixed and light drift patterns") {
  REQUIRE(pole_s1(zoo::kappa_one_sixth()) == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(pole_s1(zoo::kappa_three_halves()) == Catch::Approx(3.0).margin(1e-15));
  REQUIRE(std::isinf(pole_s1(zoo::light_two_state())));
}

TEST_CASE("moment kernel rejects arguments at or past the pole") {
  const auto m = zoo::kappa_one_sixth();
  REQUIRE_NOTHROW(ms_matrix(m, 0.49));
  REQUIRE_THROWS_AS(ms_matrix(m, 0.5), Error);
  REQUIRE_THROWS_AS(ms_matrix(m, 1.0), Error);
  REQUIRE_THROWS_AS(ms_matrix(m, -0.1), Error);
}

TEST_CASE("regime classification follows the drift signs") {
  REQUIRE(classify_regime(zoo::kappa_one_sixth()) == Regime::heavy);
  REQUIRE(classify_regime(zoo::light_two_state()) == Regime::light);
  // boundary: a zero drift coordinate still counts as light
  REQUIRE(classify_regime(zoo::two_state(0.0, -1.0, 1.0, 1.0, 1.0, 1.0)) == Regime::light);
  // alpha >= 0 is refused outright
  const auto bad = zoo::two_state(3.0, -1.0, 1.0, 1.0, 1.0, 1.0);  // alpha = 1 > 0
  try {
    classify_regime(bad);
    FAIL("expected ErgodicityViolated");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::ergodicity_violated);
  }
}

TEST_CASE("closed-form exponents for the two-state swap family") {
  REQUIRE(solve_kappa(zoo::kappa_one_sixth()).kappa == Catch::Approx(1.0 / 6.0).margin(1e-10));
  REQUIRE(solve_kappa(zoo::kappa_three_halves()).kappa == Catch::Approx(1.5).margin(1e-10));
  REQUIRE(solve_kappa(zoo::kappa_one()).kappa == Catch::Approx(1.0).margin(1e-10));
  REQUIRE(solve_kappa(zoo::kappa_five_halves()).kappa == Catch::Approx(2.5).margin(1e-10));
}

TEST_CASE("solving a light model for the exponent is refused") {
  try {
    solve_kappa(zoo::light_two_state());
    FAIL("expected LightRegime");
  } catch (const Error& e) {
    REQUIRE(e.code() == Errc::light_regime);
  }
}

TEST_CASE("both kappa routes agree on random heavy models") {
  Rng rng({2025, 0});
  for (int trial = 0; trial < 8; ++trial) {
    const int n = 2 + static_cast<int>(rng.next_unit() * 5);
    const auto m = zoo::random_model(rng, n, true);
    const auto sol = solve_kappa(m);
    REQUIRE(std::abs(sol.kappa_ms - sol.kappa_gs) <= 1e-8);
    REQUIRE(sol.residual_ms <= 1e-9);
    REQUIRE(sol.residual_gs <= 1e-9);
    REQUIRE(sol.kappa > 0.0);
    REQUIRE(sol.kappa < pole_s1(m));
  }
}

TEST_CASE("growth rate is zero at s = 0 with slope alpha") {
  const auto m = zoo::three_state();
  const auto law = invariant_law(generator(m));
  const double alpha = ergodicity_index(m, law);
  REQUIRE(std::abs(perron_growth_rate(m, 0.0)) <= 1e-12);
  const double h = 1e-6;
  REQUIRE(perron_growth_rate(m, h) / h == Catch::Approx(alpha).margin(1e-5));
}

TEST_CASE("diagnostics report carries consistent fields for a heavy model") {
  const auto m = zoo::kappa_one_sixth();
  const auto rep = diagnostics(m, 1.0);
  REQUIRE(rep.regime == Regime::heavy);
  REQUIRE(rep.alpha == Catch::Approx(-0.5).margin(1e-12));
  REQUIRE(rep.s1 == Catch::Approx(0.5).margin(1e-15));
  REQUIRE(rep.kappa.has_value());
  REQUIRE(rep.kappa->kappa == Catch::Approx(1.0 / 6.0).margin(1e-10));
  REQUIRE(rep.rho_ms_curve.size() == 64);
  REQUIRE(rep.log_rho_as_curve.size() == 64);
  REQUIRE(rep.semigroup_defect <= 1e-10);
  REQUIRE(std::abs(rep.derivative_at_zero - rep.delta * rep.alpha) <= 1e-6);
  // the moment-kernel curve crosses 1 exactly once, at kappa
  int sign_changes = 0;
  for (std::size_t k = 1; k < rep.rho_ms_curve.size(); ++k) {
    const bool prev_above = rep.rho_ms_curve[k - 1][1] > 1.0;
    const bool here_above = rep.rho_ms_curve[k][1] > 1.0;
    if (prev_above != here_above) ++sign_changes;
  }
  REQUIRE(sign_changes == 1);
}

TEST_CASE("diagnostics report for a light model omits the exponent") {
  const auto rep = diagnostics(zoo::light_two_state(), 1.0);
  REQUIRE(rep.regime == Regime::light);
  REQUIRE(!rep.kappa.has_value());
  REQUIRE(std::isinf(rep.s1));
  for (const auto& pt : rep.rho_ms_curve) REQUIRE(pt[1] < 1.0);
}

TEST_CASE("window growth curve is convex on the report grid") {
  for (const auto& m : {zoo::kappa_one_sixth(), zoo::light_two_state(), zoo::three_state()}) {
    const auto rep = diagnostics(m, 1.0);
    std::vector<double> s, f;
    for (const auto& pt : rep.log_rho_as_curve) {
      s.push_back(pt[0]);
      f.push_back(pt[1]);
    }
    REQUIRE(swtail::detail::min_convexity_defect(s, f) >= -1e-9);
  }
}

TEST_CASE("monte carlo operator rows at s = 0 are transition probabilities") {
  const auto m = zoo::three_state();
  const double delta = 0.5;
  const Eigen::MatrixXd p = expm(Eigen::MatrixXd(delta * generator(m).matrix));
  for (int i = 0; i < 3; ++i) {
    const auto est = monte_carlo_operator_check(m, 0.0, delta, i, 200000, 4242 + i);
    REQUIRE(std::abs(est.mean.sum() - 1.0) <= 1e-12);  // weights are identically 1
    for (int j = 0; j < 3; ++j)
      REQUIRE(std::abs(est.mean[j] - p(i, j)) <= 3.5 * std::max(est.se[j], 1e-12));
  }
}

TEST_CASE("monte carlo operator matches the matrix exponential at s = 0.7") {
  const auto m = zoo::three_state();
  const double delta = 0.5;
  const Eigen::MatrixXd truth = expm(Eigen::MatrixXd(delta * tilted_generator(m, 0.7)));
  for (int i = 0; i < 3; ++i) {
    const auto est = monte_carlo_operator_check(m, 0.7, delta, i, 200000, 777 + i);
    for (int j = 0; j < 3; ++j)
      REQUIRE(std::abs(est.mean[j] - truth(i, j)) <= 3.5 * std::max(est.se[j], 1e-12));
  }
}

TEST_CASE("half-step estimates compose to the full step") {
  const auto m = zoo::three_state();
  const double delta = 0.5;
  Eigen::MatrixXd half(3, 3), half_se(3, 3);
  for (int i = 0; i < 3; ++i) {
    const auto est = monte_carlo_operator_check(m, 0.4, delta / 2, i, 200000, 888 + i);
    half.row(i) = est.mean.transpose();
    half_se.row(i) = est.se.transpose();
  }
  const Eigen::MatrixXd composed = half * half;
  const Eigen::MatrixXd truth = expm(Eigen::MatrixXd(delta * tilted_generator(m, 0.4)));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      // first-order error propagation through the product
      double var = 0.0;
      for (int k = 0; k < 3; ++k) {
        var += half_se(i, k) * half_se(i, k) * half(k, j) * half(k, j);
        var += half(i, k) * half(i, k) * half_se(k, j) * half_se(k, j);
      }
      REQUIRE(std::abs(composed(i, j) - truth(i, j)) <= 4.0 * std::max(std::sqrt(var), 1e-12));
    }
}

TEST_CASE("operator estimates are bit-identical across worker counts") {
  // path count spans several scheduling chunks, so the merge order matters
  const auto m = zoo::three_state();
  const auto a = monte_carlo_operator_check(m, 0.7, 0.5, 0, 150000, 99, 1);
  const auto b = monte_carlo_operator_check(m, 0.7, 0.5, 0, 150000, 99, 3);
  for (int j = 0; j < 3; ++j) {
    REQUIRE(a.mean[j] == b.mean[j]);
    REQUIRE(a.se[j] == b.se[j]);
  }
}
