#pragma once

#include <stdexcept>
#include <string>

namespace swtail {

enum class Errc {
  invalid_shape,
  zero_intensity,
  nonzero_diagonal_kernel,
  negative_kernel_entry,
  row_sum_violation,
  reducible_kernel,
  negative_volatility,
  all_volatilities_zero,
  singular_system,
  interval_outside_path,
  negative_entry,
  non_convergence,
  bracketing_failure,
  ergodicity_violated,
  light_regime,
  degenerate_sample,
  io_error,
  bad_argument,
};

inline const char* errc_name(Errc c) {
  switch (c) {
    case Errc::invalid_shape: return "InvalidShape";
    case Errc::zero_intensity: return "ZeroIntensity";
    case Errc::nonzero_diagonal_kernel: return "NonzeroDiagonalKernel";
    case Errc::negative_kernel_entry: return "NegativeKernelEntry";
    case Errc::row_sum_violation: return "RowSumViolation";
    case Errc::reducible_kernel: return "ReducibleKernel";
    case Errc::negative_volatility: return "NegativeVolatility";
    case Errc::all_volatilities_zero: return "AllVolatilitiesZero";
    case Errc::singular_system: return "SingularSystem";
    case Errc::interval_outside_path: return "IntervalOutsidePath";
    case Errc::negative_entry: return "NegativeEntry";
    case Errc::non_convergence: return "NonConvergence";
    case Errc::bracketing_failure: return "BracketingFailure";
    case Errc::ergodicity_violated: return "ErgodicityViolated";
    case Errc::light_regime: return "LightRegime";
    case Errc::degenerate_sample: return "DegenerateSample";
    case Errc::io_error: return "IoError";
    case Errc::bad_argument: return "BadArgument";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(errc_name(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

// Process exit code contract: 0 success, 1 validation or I/O failure,
// 2 ergodicity violation, 3 degenerate sample data, 4 regime mismatch.
inline int exit_code_for(Errc c) {
  switch (c) {
    case Errc::ergodicity_violated: return 2;
    case Errc::degenerate_sample: return 3;
    case Errc::light_regime: return 4;
    default: return 1;
  }
}

}  // namespace swtail
