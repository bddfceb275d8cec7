#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <numbers>

#include "swtail/errors.hpp"

namespace swtail {

// Identifies one logical random stream. Streams with distinct (seed, stream_id)
// pairs are statistically independent and may be consumed concurrently.
struct RngStream {
  std::uint64_t seed = 0;
  std::uint64_t stream_id = 0;
};

// Splittable splitmix64 generator: each stream gets its own additive constant
// (odd, bit-mixed), so distinct streams are distinct sequences rather than
// offsets into a shared one. All derived draws (uniform, gaussian, exponential,
// discrete) are produced by fixed arithmetic on the raw 64-bit output and are
// bit-reproducible across platforms with IEEE doubles.
class Rng {
 public:
  explicit Rng(RngStream s) {
    const std::uint64_t h = mix64(s.seed + kGolden * (s.stream_id + 1));
    state_ = mix64(h ^ 0x6a09e667f3bcc909ULL);
    gamma_ = mix_gamma(h + kGolden);
  }

  std::uint64_t next_u64() {
    state_ += gamma_;
    return mix64(state_);
  }

  // Uniform strictly inside (0,1); never 0 or 1, so logs are always finite.
  double next_unit() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  // Box-Muller; the second variate of each pair is cached.
  double next_gaussian() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    const double u1 = next_unit();
    const double u2 = next_unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double t = 2.0 * std::numbers::pi * u2;
    cached_ = r * std::sin(t);
    has_cached_ = true;
    return r * std::cos(t);
  }

  double next_exponential(double rate) {
    if (!(rate > 0.0)) fail(Errc::bad_argument, "exponential rate must be > 0");
    return -std::log(next_unit()) / rate;
  }

  // CDF inversion over a probability row; weights must be nonnegative and sum
  // to ~1 (validated upstream). Falls through to the last positive index.
  int next_index(const double* weights, int n) {
    const double u = next_unit();
    double acc = 0.0;
    int last = 0;
    for (int j = 0; j < n; ++j) {
      if (weights[j] <= 0.0) continue;
      acc += weights[j];
      last = j;
      if (u <= acc) return j;
    }
    return last;
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

  static std::uint64_t mix64(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Gamma must be odd with enough bit transitions to act as a good increment.
  static std::uint64_t mix_gamma(std::uint64_t z) {
    z = (z ^ (z >> 33)) * 0xff51afd7ed558ccdULL;
    z = (z ^ (z >> 33)) * 0xc4ceb9fe1a85ec53ULL;
    z = (z ^ (z >> 33)) | 1ULL;
    if (std::popcount(z ^ (z >> 1)) < 24) z ^= 0xaaaaaaaaaaaaaaaaULL;
    return z;
  }

  std::uint64_t state_ = 0;
  std::uint64_t gamma_ = 0;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

// Stream-id salts keeping independent operations in disjoint stream spaces
// when they share one user seed.
inline constexpr std::uint64_t kStreamSaltStationary = 0;
inline constexpr std::uint64_t kStreamSaltWalk = 1ULL << 40;
inline constexpr std::uint64_t kStreamSaltOperator = 1ULL << 41;
inline constexpr std::uint64_t kStreamSaltCheck = 1ULL << 42;

}  // namespace swtail
