#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "swtail/errors.hpp"

namespace swtail {

struct DominantEigen {
  double value = 0.0;
  Eigen::VectorXd vec;  // componentwise positive, normalized to sum 1
  double residual = 0.0;
  int iterations = 0;
  bool used_fallback = false;
};

inline Eigen::MatrixXd expm(const Eigen::MatrixXd& m) { return m.exp(); }

namespace detail {

// Dense eigensolve used when power iteration stalls (tiny spectral gap,
// reducible empirical matrices). Picks the eigenvalue of maximal real part.
inline DominantEigen dominant_eigen_dense(const Eigen::MatrixXd& m) {
  Eigen::EigenSolver<Eigen::MatrixXd> solver(m);
  if (solver.info() != Eigen::Success) fail(Errc::non_convergence, "dense eigensolver failed");
  const auto values = solver.eigenvalues();
  int best = 0;
  for (int k = 1; k < values.size(); ++k)
    if (values[k].real() > values[best].real()) best = k;
  DominantEigen out;
  out.value = values[best].real();
  Eigen::VectorXd v = solver.eigenvectors().col(best).real();
  if (v.sum() < 0.0) v = -v;
  const double sum = v.sum();
  out.vec = sum != 0.0 ? Eigen::VectorXd(v / sum) : v;
  out.residual = (m * out.vec - out.value * out.vec).cwiseAbs().maxCoeff() /
                 std::max(1.0, std::abs(out.value));
  out.used_fallback = true;
  return out;
}

}  // namespace detail

// Dominant real eigenpair of a Metzler matrix (off-diagonal entries >= 0).
// Power iteration runs on the shifted matrix m + cI with c = max_i |m(i,i)| + 1:
// the shift makes the iterate matrix nonnegative with positive diagonal, which
// kills the oscillation of periodic kernels (e.g. the two-state swap), and the
// spectrum moves by exactly c. Convergence is declared when the eigenvalue
// estimate drifts < 1e-14 (relative) over 10 iterations and the relative
// residual is <= 1e-12; otherwise a dense eigensolve takes over.
inline DominantEigen dominant_real_eigenpair(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  if (n != m.cols() || n < 1) fail(Errc::bad_argument, "matrix must be square and nonempty");
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (i != j && m(i, j) < 0.0)
        fail(Errc::negative_entry, "off-diagonal entry is negative");
  if (n == 1) return {m(0, 0), Eigen::VectorXd::Ones(1), 0.0, 0, false};

  double c = 0.0;
  for (int i = 0; i < n; ++i) c = std::max(c, std::abs(m(i, i)));
  c += 1.0;
  const Eigen::MatrixXd b = m + c * Eigen::MatrixXd::Identity(n, n);

  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / n);
  constexpr int kMaxIter = 50000;
  constexpr int kWindow = 10;
  double history[kWindow];
  int filled = 0;
  double rho_shifted = 0.0;
  for (int it = 1; it <= kMaxIter; ++it) {
    Eigen::VectorXd w = b * v;
    const double norm = w.sum();  // positive vector, so the 1-norm
    if (!(norm > 0.0) || !std::isfinite(norm))
      return detail::dominant_eigen_dense(m);
    rho_shifted = norm;  // since v sums to 1
    v = w / norm;
    history[(it - 1) % kWindow] = rho_shifted;
    if (filled < kWindow) ++filled;
    if (filled == kWindow) {
      double lo = history[0], hi = history[0];
      for (int k = 1; k < kWindow; ++k) {
        lo = std::min(lo, history[k]);
        hi = std::max(hi, history[k]);
      }
      if (hi - lo <= 1e-14 * std::max(1.0, std::abs(hi))) {
        const double res = (b * v - rho_shifted * v).cwiseAbs().maxCoeff() /
                           std::max(1.0, rho_shifted);
        if (res <= 1e-12) return {rho_shifted - c, v, res, it, false};
        filled = 0;  // residual still poor: keep iterating
      }
    }
  }
  return detail::dominant_eigen_dense(m);
}

// Spectral radius of an entrywise nonnegative matrix with its Perron vector.
inline DominantEigen spectral_radius(const Eigen::MatrixXd& m) {
  const int n = static_cast<int>(m.rows());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      if (m(i, j) < 0.0) fail(Errc::negative_entry, "matrix entry is negative");
  return dominant_real_eigenpair(m);
}

}  // namespace swtail
