// SPDX-License-Identifier: Apache-2.0
#pragma once

// Blended pairwise conditional gradients with a secant line search.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <limits>
#include <vector>

#include "fwmiq/active_set.hpp"
#include "fwmiq/lmo.hpp"

namespace fwmiq {

/// Root of phi' on [0, gamma_max] by secant steps on a bracketing interval
/// (Illinois variant). Returns 0 when phi'(0) >= 0 and gamma_max when
/// phi'(gamma_max) <= 0.
template <class PhiPrime>
double secant_step(PhiPrime&& phi_prime, double gamma_max) {
  const double d0 = phi_prime(0.0);
  if (!(d0 < 0.0)) return 0.0;
  const double d1 = phi_prime(gamma_max);
  if (!(d1 > 0.0)) return gamma_max;
  double lo = 0.0, flo = d0, hi = gamma_max, fhi = d1;
  double gamma = gamma_max;
  int side = 0;
  for (int it = 0; it < 40; ++it) {
    gamma = lo - flo * (hi - lo) / (fhi - flo);
    gamma = std::clamp(gamma, lo, hi);
    const double fg = phi_prime(gamma);
    if (std::abs(fg) <= 1e-10) break;
    if (fg < 0.0) {
      lo = gamma;
      flo = fg;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = gamma;
      fhi = fg;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    if (hi - lo < 1e-12) break;
  }
  return std::clamp(gamma, 0.0, gamma_max);
}

struct FwOptions {
  int max_iter = 10;
  double eps = 1e-4;
  Clock::time_point deadline = Clock::time_point::max();
  const std::atomic<bool>* stop = nullptr;
  bool lazy = true;
  bool record_history = false;
};

struct FwResult {
  std::vector<double> x;
  ActiveSet active_set;
  double dual_gap = kInf;
  int iterations = 0;
  bool infeasible = false;
  std::vector<std::vector<double>> vertices;  // fresh LMO vertices
  std::vector<std::vector<double>> dropped;   // removed from the active set
  std::vector<double> history;                // objective after each step
};

namespace detail {

template <class Objective>
double safeguarded_step(const Objective& f, std::span<const double> x, std::span<const double> d, double gamma_max,
                        double fx, std::vector<double>& trial, std::vector<double>& grad) {
  const std::size_t n = x.size();
  auto move = [&](double gamma) {
    for (std::size_t k = 0; k < n; ++k) trial[k] = x[k] + gamma * d[k];
  };
  double gamma = secant_step(
      [&](double g) {
        move(g);
        f.gradient(trial, grad);
        return dot(grad, d);
      },
      gamma_max);
  auto descends = [&](double g) {
    if constexpr (requires { f.change(x, d, g); }) {
      return f.change(x, d, g) <= 0.0;
    } else {
      move(g);
      return f.value(trial) <= fx;
    }
  };
  while (gamma > 0.0) {
    if (descends(gamma)) break;
    gamma *= 0.5;
    if (gamma < 1e-12) gamma = 0.0;
  }
  move(gamma);
  return gamma;
}

}  // namespace detail

/// Blended pairwise conditional gradients. `Oracle` provides
/// `LmoResult minimize(direction)` and `const std::vector<double>* lazy(g, x, phi)`.
/// Each iteration takes a pairwise step inside the active set when its local
/// gap is at least the global gap estimate phi, and a Frank-Wolfe step towards
/// a (cached or fresh) LMO vertex otherwise. phi is the last computed
/// <grad, x - v> over a fresh LMO vertex v.
template <class Objective, class Oracle>
FwResult bpcg(const Objective& f, Oracle& oracle, ActiveSet warm, const FwOptions& opt = {}) {
  if (warm.empty()) throw std::invalid_argument("bpcg: warm start must contain a vertex");
  FwResult res;
  ActiveSet as = std::move(warm);
  const std::size_t n = as.iterate().size();
  std::vector<double> x = as.iterate();
  std::vector<double> grad(n), trial(n), scratch(n), d(n);
  double fx = f.value(x);
  if (opt.record_history) res.history.push_back(fx);
  f.gradient(x, grad);

  auto out_of_time = [&] {
    return (opt.stop && opt.stop->load(std::memory_order_relaxed)) || Clock::now() > opt.deadline;
  };

  LmoResult first = oracle.minimize(grad);
  if (!first.ok()) {
    res.infeasible = true;
    res.x = x;
    res.active_set = std::move(as);
    return res;
  }
  res.vertices.push_back(first.vertex);
  double phi = dot(grad, x) - dot(grad, first.vertex);
  std::vector<double> pending = std::move(first.vertex);  // fresh vertex for the current gradient
  bool have_pending = true;
  res.dual_gap = phi;

  while (phi > opt.eps && res.iterations < opt.max_iter && !out_of_time()) {
    std::size_t away = 0, toward = 0;
    double gmax = -kInf, gmin = kInf;
    for (std::size_t i = 0; i < as.size(); ++i) {
      const double gi = dot(grad, as.vertex(i));
      if (gi > gmax) {
        gmax = gi;
        away = i;
      }
      if (gi < gmin) {
        gmin = gi;
        toward = i;
      }
    }
    const double local_gap = gmax - gmin;
    double gamma;
    if (away != toward && local_gap >= phi) {
      const auto& a = as.vertex(away);
      const auto& s = as.vertex(toward);
      for (std::size_t k = 0; k < n; ++k) d[k] = s[k] - a[k];
      gamma = detail::safeguarded_step(f, x, d, as.weight(away), fx, trial, scratch);
      if (gamma <= 0.0) break;
      as.pairwise_step(away, toward, gamma, trial, &res.dropped);
    } else {
      std::vector<double> v;
      if (have_pending) {
        v = std::move(pending);
      } else if (const auto* cached = opt.lazy ? oracle.lazy(grad, x, phi) : nullptr) {
        v = *cached;
      } else {
        LmoResult r = oracle.minimize(grad);
        if (!r.ok()) {
          res.infeasible = true;
          break;
        }
        phi = dot(grad, x) - dot(grad, r.vertex);
        res.dual_gap = phi;
        res.vertices.push_back(r.vertex);
        v = std::move(r.vertex);
        if (phi <= opt.eps) break;
      }
      have_pending = false;
      for (std::size_t k = 0; k < n; ++k) d[k] = v[k] - x[k];
      gamma = detail::safeguarded_step(f, x, d, 1.0, fx, trial, scratch);
      if (gamma <= 0.0) break;
      as.frank_wolfe_step(v, gamma, trial, &res.dropped);
    }
    have_pending = false;
    ++res.iterations;
    x = as.iterate();
    fx = f.value(x);
    if (opt.record_history) res.history.push_back(fx);
    f.gradient(x, grad);
  }
  res.x = std::move(x);
  res.active_set = std::move(as);
  return res;
}

}  // namespace fwmiq
