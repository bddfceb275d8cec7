#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <string>
#include <vector>

#include "swtail/errors.hpp"

namespace swtail {

// Finite-state switching diffusion dY = a(X_t) Y dt + sigma(X_t) dW.
// X is a continuous-time Markov chain with holding intensities lambda(i) > 0
// and embedded jump kernel q (zero diagonal, stochastic rows, irreducible).
struct SwitchingModel {
  Eigen::VectorXd a;       // per-state drift coefficients
  Eigen::VectorXd sigma;   // per-state volatilities, >= 0, not all zero
  Eigen::VectorXd lambda;  // per-state jump intensities, > 0
  Eigen::MatrixXd q;       // embedded jump kernel
  std::vector<std::string> names;  // optional state labels, empty or size N

  int n_states() const { return static_cast<int>(a.size()); }
};

// Infinitesimal generator Q(i,j) = lambda(i) q(i,j) off-diagonal,
// Q(i,i) = -lambda(i). Rows sum to zero.
struct Generator {
  Eigen::MatrixXd matrix;
  int n_states() const { return static_cast<int>(matrix.rows()); }
};

// Invariant law mu of the chain: mu^T Q = 0, sum mu = 1, mu > 0 componentwise.
struct StationaryLaw {
  Eigen::VectorXd mu;
};

// Strong connectivity of the support graph of q via transitive closure.
inline bool kernel_irreducible(const Eigen::MatrixXd& q) {
  const int n = static_cast<int>(q.rows());
  std::vector<char> reach(static_cast<std::size_t>(n) * n, 0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) reach[i * n + j] = q(i, j) > 0.0 ? 1 : 0;
  for (int k = 0; k < n; ++k)
    for (int i = 0; i < n; ++i) {
      if (!reach[i * n + k]) continue;
      for (int j = 0; j < n; ++j)
        if (reach[k * n + j]) reach[i * n + j] = 1;
    }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && !reach[i * n + j]) return false;
  return true;
}

// Validates raw model data and returns it unchanged. Checks are ordered so the
// first structural problem is reported; nothing is silently renormalized.
inline SwitchingModel validate_model(SwitchingModel m) {
  const int n = m.n_states();
  if (n < 2) fail(Errc::invalid_shape, "model needs at least 2 states");
  if (m.sigma.size() != n || m.lambda.size() != n)
    fail(Errc::invalid_shape, "a, sigma, lambda must have equal length");
  if (m.q.rows() != n || m.q.cols() != n)
    fail(Errc::invalid_shape, "q must be N x N with N = len(a)");
  if (!m.names.empty() && static_cast<int>(m.names.size()) != n)
    fail(Errc::invalid_shape, "names must be empty or length N");
  for (int i = 0; i < n; ++i) {
    if (!std::isfinite(m.a[i]) || !std::isfinite(m.sigma[i]) || !std::isfinite(m.lambda[i]))
      fail(Errc::invalid_shape, "non-finite model entry in state " + std::to_string(i));
    if (!(m.lambda[i] > 0.0))
      fail(Errc::zero_intensity, "lambda(" + std::to_string(i) + ") must be > 0");
    if (m.q(i, i) != 0.0)
      fail(Errc::nonzero_diagonal_kernel, "q(" + std::to_string(i) + "," + std::to_string(i) + ") must be 0");
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (!std::isfinite(m.q(i, j)))
        fail(Errc::invalid_shape, "non-finite kernel entry in row " + std::to_string(i));
      if (m.q(i, j) < 0.0)
        fail(Errc::negative_kernel_entry, "q(" + std::to_string(i) + "," + std::to_string(j) + ") < 0");
      row_sum += m.q(i, j);
    }
    if (std::abs(row_sum - 1.0) > 1e-12)
      fail(Errc::row_sum_violation, "row " + std::to_string(i) + " of q sums to " + std::to_string(row_sum));
    if (m.sigma[i] < 0.0)
      fail(Errc::negative_volatility, "sigma(" + std::to_string(i) + ") < 0");
  }
  if (m.sigma.maxCoeff() <= 0.0)
    fail(Errc::all_volatilities_zero, "at least one sigma(i) must be > 0");
  if (!kernel_irreducible(m.q)) fail(Errc::reducible_kernel, "jump kernel is not irreducible");
  return m;
}

inline Generator generator(const SwitchingModel& m) {
  const int n = m.n_states();
  Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j)
      if (j != i) g(i, j) = m.lambda[i] * m.q(i, j);
    g(i, i) = -m.lambda[i];
  }
  return Generator{std::move(g)};
}

// Solves mu^T Q = 0, sum mu = 1 as an overdetermined least-squares system;
// for irreducible Q the system is consistent and the solution exact.
inline StationaryLaw invariant_law(const Generator& gen) {
  const int n = gen.n_states();
  Eigen::MatrixXd A(n + 1, n);
  A.topRows(n) = gen.matrix.transpose();
  A.row(n).setOnes();
  Eigen::VectorXd b = Eigen::VectorXd::Zero(n + 1);
  b[n] = 1.0;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  if (qr.rank() < n) fail(Errc::singular_system, "invariant-law system is rank deficient");
  Eigen::VectorXd mu = qr.solve(b);
  const double sum = mu.sum();
  if (!(std::abs(sum - 1.0) <= 1e-8) || !(mu.minCoeff() > 0.0))
    fail(Errc::singular_system, "invariant-law solve produced an invalid distribution");
  mu /= sum;
  if ((gen.matrix.transpose() * mu).cwiseAbs().maxCoeff() > 1e-10)
    fail(Errc::singular_system, "invariant-law residual exceeds tolerance");
  return StationaryLaw{std::move(mu)};
}

// Mean drift under the invariant law; the process has a stationary solution
// iff this is < 0.
inline double ergodicity_index(const SwitchingModel& m, const StationaryLaw& law) {
  return m.a.dot(law.mu);
}

// Chain with the dynamics of X run backwards in time: same intensities and
// invariant law, kernel q~(i,j) = mu(j) lambda(j) q(j,i) / (mu(i) lambda(i)),
// rows renormalized to absorb floating-point drift.
inline SwitchingModel time_reversed(const SwitchingModel& m, const StationaryLaw& law) {
  const int n = m.n_states();
  SwitchingModel r = m;
  r.q = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    double row_sum = 0.0;
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      r.q(i, j) = law.mu[j] * m.lambda[j] * m.q(j, i) / (law.mu[i] * m.lambda[i]);
      row_sum += r.q(i, j);
    }
    r.q.row(i) /= row_sum;
  }
  return r;
}

}  // namespace swtail
