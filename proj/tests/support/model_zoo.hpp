#pragma once

#include <cmath>

#include "swtail/model.hpp"
#include "swtail/rng.hpp"
#include "swtail/spectral.hpp"

namespace zoo {

inline swtail::SwitchingModel two_state(double a1, double a2, double s1, double s2, double l1,
                                        double l2) {
  swtail::SwitchingModel m;
  m.a = Eigen::Vector2d(a1, a2);
  m.sigma = Eigen::Vector2d(s1, s2);
  m.lambda = Eigen::Vector2d(l1, l2);
  m.q = Eigen::Matrix2d::Zero();
  m.q(0, 1) = 1.0;
  m.q(1, 0) = 1.0;
  return swtail::validate_model(std::move(m));
}

// kappa = lambda(0)/a(0) + lambda(1)/a(1) for the two-state swap kernel.
inline swtail::SwitchingModel kappa_one_sixth() { return two_state(2, -3, 1, 1, 1, 1); }
inline swtail::SwitchingModel kappa_three_halves() { return two_state(1, -2, 1, 1, 3, 3); }
inline swtail::SwitchingModel kappa_one() { return two_state(1, -2, 1, 1, 2, 2); }
inline swtail::SwitchingModel kappa_five_halves() { return two_state(1, -2, 1, 1, 3, 1); }
inline swtail::SwitchingModel light_two_state() { return two_state(-1, -2, 1, 1, 1, 1); }
inline swtail::SwitchingModel ou_two_state() { return two_state(-1, -1, 1, 1, 1, 1); }

// Fixed three-state model with one expanding state; alpha < 0, heavy.
inline swtail::SwitchingModel three_state() {
  swtail::SwitchingModel m;
  m.a = Eigen::Vector3d(1.2, -0.8, -2.0);
  m.sigma = Eigen::Vector3d(1.0, 0.8, 1.2);
  m.lambda = Eigen::Vector3d(2.0, 1.5, 3.0);
  m.q = Eigen::Matrix3d::Zero();
  m.q(0, 1) = 0.6;
  m.q(0, 2) = 0.4;
  m.q(1, 0) = 0.5;
  m.q(1, 2) = 0.5;
  m.q(2, 0) = 0.7;
  m.q(2, 1) = 0.3;
  return swtail::validate_model(std::move(m));
}

// Seeded random model with a dense kernel (hence irreducible). Heavy draws
// are rejected until alpha < -0.05 and the exponent sits inside the default
// diagnostic grid; light draws force every drift negative.
inline swtail::SwitchingModel random_model(swtail::Rng& rng, int n, bool heavy) {
  for (;;) {
    swtail::SwitchingModel m;
    m.a.resize(n);
    m.sigma.resize(n);
    m.lambda.resize(n);
    m.q = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
      m.a[i] = heavy ? -3.0 + 6.0 * rng.next_unit() : -3.0 + 2.9 * rng.next_unit();
      m.sigma[i] = 0.2 + 1.8 * rng.next_unit();
      m.lambda[i] = 0.5 + 3.5 * rng.next_unit();
      double row = 0.0;
      for (int j = 0; j < n; ++j) {
        if (j == i) continue;
        m.q(i, j) = 0.05 + 0.95 * rng.next_unit();
        row += m.q(i, j);
      }
      m.q.row(i) /= row;
    }
    m = swtail::validate_model(std::move(m));
    const auto law = swtail::invariant_law(swtail::generator(m));
    const double alpha = swtail::ergodicity_index(m, law);
    if (!(alpha < -0.05)) continue;
    if (heavy) {
      if (!(m.a.maxCoeff() > 0.05)) continue;
      const double s1 = swtail::pole_s1(m);
      const double kappa = swtail::solve_kappa(m).kappa;
      if (kappa < s1 * 2e-3 || kappa > s1 * 0.99) continue;
    }
    return m;
  }
}

}  // namespace zoo
