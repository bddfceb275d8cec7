#pragma once

#include <Eigen/Dense>
#include <vector>

#include "swtail/errors.hpp"
#include "swtail/model.hpp"
#include "swtail/rng.hpp"

namespace swtail {

struct Segment {
  int state;
  double duration;  // strictly positive
};

// One realized trajectory of the jump chain over a finite horizon. Segments
// are half-open in time: the state at a jump instant is the new one.
struct JumpPath {
  double start_time = 0.0;
  std::vector<Segment> segments;

  double total_duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
  double end_time() const { return start_time + total_duration(); }
};

inline int sample_initial_state(const StationaryLaw& law, Rng& rng) {
  return rng.next_index(law.mu.data(), static_cast<int>(law.mu.size()));
}

// CDF inversion over one kernel row, indexing the (column-major) matrix in
// place. Consumes exactly one uniform.
inline int sample_next_state(const SwitchingModel& m, int state, Rng& rng) {
  const int n = m.n_states();
  const double u = rng.next_unit();
  double acc = 0.0;
  int last = state == 0 ? 1 : 0;
  for (int j = 0; j < n; ++j) {
    const double w = m.q(state, j);
    if (w <= 0.0) continue;
    acc += w;
    last = j;
    if (u <= acc) return j;
  }
  return last;
}

// Holding times are exponential with the current state's intensity; the final
// segment is clipped at the horizon and its residual clock discarded. The
// clipped duration is horizon minus the running sum, so durations sum to the
// horizon exactly when re-accumulated in order.
inline JumpPath sample_path(const SwitchingModel& m, int initial, double horizon, Rng& rng) {
  if (initial < 0 || initial >= m.n_states()) fail(Errc::bad_argument, "initial state out of range");
  if (!(horizon > 0.0)) fail(Errc::bad_argument, "horizon must be > 0");
  JumpPath path;
  int state = initial;
  double t = 0.0;
  for (;;) {
    const double hold = rng.next_exponential(m.lambda[state]);
    if (t + hold >= horizon) {
      path.segments.push_back({state, horizon - t});
      break;
    }
    path.segments.push_back({state, hold});
    t += hold;
    state = sample_next_state(m, state, rng);
  }
  return path;
}

inline Eigen::VectorXd occupation_fractions(const JumpPath& path, int n_states) {
  if (path.segments.empty()) fail(Errc::bad_argument, "occupation fractions of an empty path");
  Eigen::VectorXd time_in = Eigen::VectorXd::Zero(n_states);
  for (const auto& s : path.segments) {
    if (s.state < 0 || s.state >= n_states) fail(Errc::bad_argument, "segment state out of range");
    time_in[s.state] += s.duration;
  }
  return time_in / time_in.sum();
}

}  // namespace swtail
