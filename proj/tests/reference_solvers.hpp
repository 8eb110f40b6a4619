// SPDX-License-Identifier: Apache-2.0
#pragma once

// Independent reference computations used to check the solver components.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <vector>

#include "fwmiq/lp.hpp"
#include "fwmiq/penalty.hpp"
#include "fwmiq/util.hpp"
#include "random_instances.hpp"

namespace fwmiq::testing {

/// 0.5 x^T (A^T A + mu I) x + d^T x over [lo, hi]^n with continuous variables.
inline Problem convex_box_qp(Rng& rng, int n, double lo = -1.0, double hi = 1.0) {
  Problem p;
  p.resize(n);
  std::vector<double> a(n * n);
  for (auto& v : a) v = uniform(rng, -1, 1);
  for (int i = 0; i < n; ++i) {
    p.lb[i] = lo;
    p.ub[i] = hi;
    p.objective_linear[i] = uniform(rng, -2, 2);
    for (int j = i; j < n; ++j) {
      double q = 0.0;
      for (int k = 0; k < n; ++k) q += a[k * n + i] * a[k * n + j];
      if (i == j) q += 0.1;
      p.objective_terms.push_back({i, j, i == j ? 0.5 * q : q});
    }
  }
  return p;
}

/// Projected gradient with step 1/L, L bounded by the Frobenius norm of Q.
inline double projected_gradient_min(const Problem& p, double tol = 1e-11) {
  const SmoothObjective f(p);
  double lip = 0.0;
  for (const auto& t : p.objective_terms) lip += (t.i == t.j ? 4.0 : 2.0) * t.coef * t.coef;
  lip = std::sqrt(lip) + 1e-12;
  std::vector<double> x(p.n, 0.0), next(p.n);
  for (int k = 0; k < p.n; ++k) x[k] = std::clamp(0.0, p.lb[k], p.ub[k]);
  for (int it = 0; it < 5'000'000; ++it) {
    const auto g = f.gradient(x);
    double move = 0.0;
    for (int k = 0; k < p.n; ++k) {
      next[k] = std::clamp(x[k] - g[k] / lip, p.lb[k], p.ub[k]);
      move = std::max(move, std::abs(next[k] - x[k]));
    }
    x.swap(next);
    if (move < tol) break;
  }
  return f.value(x);
}

/// Random integer region with small domains; LE/GE rows with dense-ish support.
inline Region random_integer_region(Rng& rng, int n, int rows) {
  Region r;
  r.lb.resize(n);
  r.ub.resize(n);
  r.integer.assign(n, true);
  for (int k = 0; k < n; ++k) {
    r.lb[k] = uniform_int(rng, -1, 0);
    r.ub[k] = r.lb[k] + uniform_int(rng, 1, 2);
  }
  for (int i = 0; i < rows; ++i) {
    LinearRow row;
    for (int k = 0; k < n; ++k)
      if (uniform(rng, 0, 1) < 0.6) row.coefs.push_back({k, uniform(rng, -3, 3)});
    row.rhs = uniform(rng, -1, 3);
    row.sense = uniform(rng, 0, 1) < 0.25 ? Sense::GE : Sense::LE;
    r.rows.push_back(row);
  }
  return r;
}

/// Minimum of dir . x over the integer points of a pure-integer region.
inline std::optional<double> enumerate_integer_min(std::span<const double> dir, const Region& r) {
  const int n = r.dimension();
  std::vector<double> x = r.lb;
  std::optional<double> best;
  std::function<void(int)> rec = [&](int k) {
    if (k == n) {
      if (!r.contains(x, 1e-9)) return;
      const double v = dot(dir, x);
      if (!best || v < *best) best = v;
      return;
    }
    for (double v = r.lb[k]; v <= r.ub[k]; v += 1.0) {
      x[k] = v;
      rec(k + 1);
    }
    x[k] = r.lb[k];
  };
  rec(0);
  return best;
}

}  // namespace fwmiq::testing
