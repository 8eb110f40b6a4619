// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

namespace fwmiq {

/// Relative distance of an objective value to a reference value, in [0, 1].
/// A missing solution has gap 1.
inline double primal_gap(std::optional<double> tilde, double star) {
  if (!tilde) return 1.0;
  const double t = *tilde;
  if (t == 0.0 && star == 0.0) return 0.0;
  if (t * star < 0.0) return 1.0;
  return std::abs(t - star) / std::max(std::abs(t), std::abs(star));
}

struct TraceEvent {
  double time = 0.0;
  double objective = 0.0;  // original sense
};

struct IncumbentTrace {
  std::vector<TraceEvent> events;  // time-ordered
  double horizon = 0.0;
  std::optional<double> reference;
};

/// Integral over [0, T] of the gap of the incumbent active at each time, with
/// gap 1 before the first event. Without a reference value the last (best)
/// event serves as reference.
inline double primal_integral(const IncumbentTrace& trace) {
  const double T = trace.horizon;
  if (trace.events.empty()) return T;
  const double star = trace.reference ? *trace.reference : trace.events.back().objective;
  double total = 0.0, prev_t = 0.0, gap = 1.0;
  for (const auto& e : trace.events) {
    const double t = std::clamp(e.time, prev_t, T);
    total += gap * (t - prev_t);
    prev_t = t;
    gap = primal_gap(e.objective, star);
  }
  total += gap * (T - prev_t);
  return total;
}

/// Time of the first event, or `sentinel` when the trace is empty.
inline double time_to_first(const IncumbentTrace& trace, double sentinel) {
  return trace.events.empty() ? sentinel : trace.events.front().time;
}

inline double shifted_geomean(const std::vector<double>& values, double shift = 1.0) {
  if (values.empty()) throw std::invalid_argument("shifted_geomean: empty list");
  if (!(shift > 0.0)) throw std::invalid_argument("shifted_geomean: shift must be positive");
  double s = 0.0;
  for (double v : values) {
    if (v < 0.0) throw std::invalid_argument("shifted_geomean: negative value");
    s += std::log(v + shift);
  }
  return std::exp(s / static_cast<double>(values.size())) - shift;
}

}  // namespace fwmiq
