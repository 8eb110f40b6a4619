// SPDX-License-Identifier: Apache-2.0
#pragma once

// Exhaustive reference solver for small instances. Integer variables range
// over their bounds; continuous variables over a uniform grid that includes
// both bounds.

#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "fwmiq/model.hpp"

namespace fwmiq {

struct OracleResult {
  std::optional<double> value;  // minimization form; nullopt when infeasible
  std::vector<double> point;
  long long enumerated = 0;

  bool feasible() const { return value.has_value(); }
};

inline constexpr long long kOracleLimit = 1LL << 20;

inline OracleResult brute_force(const Problem& p, int grid_points_per_continuous_var = 0, double tol = 1e-9) {
  std::vector<std::vector<double>> axes(p.n);
  long long total = 1;
  for (int k = 0; k < p.n; ++k) {
    if (!std::isfinite(p.lb[k]) || !std::isfinite(p.ub[k]))
      throw std::invalid_argument("brute_force: variable " + std::to_string(k) + " is unbounded");
    if (is_integral_kind(p.kinds[k])) {
      for (double v = std::ceil(p.lb[k] - 1e-9); v <= p.ub[k] + 1e-9; v += 1.0) axes[k].push_back(v);
    } else {
      if (grid_points_per_continuous_var < 2)
        throw std::invalid_argument("brute_force: continuous variables need at least 2 grid points");
      const int g = grid_points_per_continuous_var;
      for (int s = 0; s < g; ++s) axes[k].push_back(p.lb[k] + (p.ub[k] - p.lb[k]) * s / (g - 1));
    }
    if (axes[k].empty()) return {};
    total *= static_cast<long long>(axes[k].size());
    if (total > kOracleLimit) throw std::invalid_argument("brute_force: enumeration too large");
  }

  OracleResult out;
  std::vector<std::size_t> idx(p.n, 0);
  std::vector<double> x(p.n);
  for (int k = 0; k < p.n; ++k) x[k] = axes[k][0];
  for (long long count = 0; count < total; ++count) {
    ++out.enumerated;
    if (check_feasibility(p, x, tol, 1e-9).feasible) {
      const double v = eval_objective(p, x);
      if (!out.value || v < *out.value) {
        out.value = v;
        out.point = x;
      }
    }
    for (int k = 0; k < p.n; ++k) {
      if (++idx[k] < axes[k].size()) {
        x[k] = axes[k][idx[k]];
        break;
      }
      idx[k] = 0;
      x[k] = axes[k][0];
    }
  }
  return out;
}

}  // namespace fwmiq
