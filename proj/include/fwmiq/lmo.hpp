// SPDX-License-Identifier: Apache-2.0
#pragma once

// Linear minimization oracles over the mixed-integer hull of a Region.

#include <atomic>
#include <chrono>
#include <deque>
#include <optional>
#include <unordered_set>
#include <vector>

#include "fwmiq/lp.hpp"
#include "fwmiq/util.hpp"

namespace fwmiq {

/// Box vertex minimizing direction^T v: lower bound on positive or zero
/// components, upper bound on negative ones.
inline std::vector<double> box_lmo(std::span<const double> direction, std::span<const double> lb,
                                   std::span<const double> ub) {
  std::vector<double> v(direction.size());
  for (std::size_t k = 0; k < direction.size(); ++k) v[k] = direction[k] < 0.0 ? ub[k] : lb[k];
  return v;
}

inline std::vector<double> box_lmo(std::span<const double> direction, const Region& region) {
  return box_lmo(direction, region.lb, region.ub);
}

enum class LmoStatus {
  Optimal,     // proven optimal vertex
  Feasible,    // budget exhausted, best integer vertex found so far
  Untrusted,   // budget exhausted with no integer vertex; box vertex ignoring rows
  Infeasible,
};

struct LmoOptions {
  double time_budget = 1.0;  // seconds per call
  long node_cap = 1'000'000;
  const std::atomic<bool>* stop = nullptr;
};

struct LmoResult {
  LmoStatus status = LmoStatus::Infeasible;
  std::vector<double> vertex;
  double value = 0.0;
  long nodes = 0;

  bool ok() const { return status != LmoStatus::Infeasible; }
  bool trusted() const { return status == LmoStatus::Optimal || status == LmoStatus::Feasible; }
};

/// Most fractional integer coordinate (max of min(frac, 1 - frac)) among those
/// with frac in (tol, 1 - tol); ties (within 1e-12) go to the lowest index.
inline std::optional<int> most_fractional(std::span<const double> x, const std::vector<bool>& integer,
                                          double tol = 1e-6) {
  std::optional<int> best;
  double best_score = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!integer[k]) continue;
    const double frac = x[k] - std::floor(x[k]);
    if (frac <= tol || frac >= 1.0 - tol) continue;
    const double score = std::min(frac, 1.0 - frac);
    if (!best || score > best_score + 1e-12) {
      best = static_cast<int>(k);
      best_score = score;
    }
  }
  return best;
}

/// Optimal mixed-integer vertex of  min direction^T x  over the region by a
/// depth-first LP branch-and-bound (most fractional branching, down branch first).
inline LmoResult mip_lmo(std::span<const double> direction, const Region& region, const LmoOptions& opt = {}) {
  const int n = region.dimension();
  LmoResult out;
  for (int k = 0; k < n; ++k)
    if (region.lb[k] > region.ub[k] + 1e-9) return out;

  if (!region.has_rows()) {
    out.vertex = box_lmo(direction, region);
    out.value = dot(direction, out.vertex);
    out.status = LmoStatus::Optimal;
    out.nodes = 1;
    return out;
  }

  const auto deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                           std::chrono::duration<double>(opt.time_budget));
  const bool has_continuous = std::find(region.integer.begin(), region.integer.end(), false) != region.integer.end();
  struct Bounds {
    std::vector<double> lb, ub;
  };
  std::vector<Bounds> stack;
  stack.push_back({region.lb, region.ub});
  for (int k = 0; k < n; ++k) {
    if (region.integer[k]) {
      stack.back().lb[k] = std::ceil(stack.back().lb[k] - 1e-9);
      stack.back().ub[k] = std::floor(stack.back().ub[k] + 1e-9);
    }
  }
  std::optional<std::vector<double>> incumbent;
  double incumbent_value = kInf;
  bool exhausted = true;

  while (!stack.empty()) {
    if (Clock::now() > deadline || out.nodes >= opt.node_cap ||
        (opt.stop && opt.stop->load(std::memory_order_relaxed))) {
      exhausted = false;
      break;
    }
    Bounds node = std::move(stack.back());
    stack.pop_back();
    ++out.nodes;
    LpResult lp = solve_lp_bounds(direction, region, node.lb, node.ub, &deadline);
    if (lp.status == LpStatus::Error) exhausted = false;
    if (lp.status != LpStatus::Optimal) continue;
    if (incumbent && lp.value >= incumbent_value - 1e-9) continue;

    const auto branch = most_fractional(lp.x, region.integer);
    if (!branch) {
      std::vector<double> v = lp.x;
      bool moved = false;
      for (int k = 0; k < n; ++k) {
        if (!region.integer[k]) continue;
        const double r = std::round(v[k]);
        moved = moved || r != v[k];
        v[k] = r;
      }
      double value = dot(direction, v);
      if (moved && has_continuous) {
        std::vector<double> flb = node.lb, fub = node.ub;
        for (int k = 0; k < n; ++k)
          if (region.integer[k]) flb[k] = fub[k] = v[k];
        LpResult fixed = solve_lp_bounds(direction, region, flb, fub, &deadline);
        if (fixed.status != LpStatus::Optimal) continue;
        v = std::move(fixed.x);
        for (int k = 0; k < n; ++k)
          if (region.integer[k]) v[k] = flb[k];
        value = fixed.value;
      }
      if (!region.contains(v)) continue;
      if (!incumbent || value < incumbent_value) {
        incumbent = std::move(v);
        incumbent_value = value;
      }
      continue;
    }
    const int k = *branch;
    Bounds up = node;
    up.lb[k] = std::ceil(lp.x[k]);
    node.ub[k] = std::floor(lp.x[k]);
    stack.push_back(std::move(up));
    stack.push_back(std::move(node));
  }

  if (incumbent) {
    out.vertex = std::move(*incumbent);
    out.value = incumbent_value;
    out.status = exhausted ? LmoStatus::Optimal : LmoStatus::Feasible;
  } else if (!exhausted) {
    out.vertex = box_lmo(direction, region);
    out.value = dot(direction, out.vertex);
    out.status = LmoStatus::Untrusted;
  }
  return out;
}

/// Previously returned vertices, most recent last, deduplicated on a 1e-9 grid.
class VertexCache {
 public:
  /// Stores `v` if it lies in `region` (rows and bounds within 1e-7, integrality
  /// within 1e-6). Returns whether a new vertex was stored.
  bool insert(std::span<const double> v, const Region& region) {
    if (!region.contains(v)) return false;
    PointKey key(v);
    if (!keys_.insert(key).second) return false;
    vertices_.emplace_back(v.begin(), v.end());
    return true;
  }

  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  const std::deque<std::vector<double>>& vertices() const { return vertices_; }

  /// Most recently added vertex v inside `region` with <gradient, x - v> >= phi / 2.
  const std::vector<double>* lookup(std::span<const double> gradient, std::span<const double> x, double phi,
                                    const Region& region) const {
    const double gx = dot(gradient, x);
    for (auto it = vertices_.rbegin(); it != vertices_.rend(); ++it) {
      if (gx - dot(gradient, *it) < 0.5 * phi) continue;
      if (!region.contains(*it)) continue;
      return &*it;
    }
    return nullptr;
  }

 private:
  std::deque<std::vector<double>> vertices_;
  std::unordered_set<PointKey, PointKeyHash> keys_;
};

inline std::optional<std::vector<double>> lazy_lookup(const VertexCache& cache, std::span<const double> gradient,
                                                      std::span<const double> x, double phi, const Region& region) {
  if (const auto* v = cache.lookup(gradient, x, phi, region)) return *v;
  return std::nullopt;
}

/// LMO bound to one node's region, with an optional shared vertex cache.
class LinearOracle {
 public:
  LinearOracle(const Region& region, VertexCache* cache = nullptr, LmoOptions opt = {})
      : region_(&region), cache_(cache), opt_(opt) {}

  const Region& region() const { return *region_; }

  LmoResult minimize(std::span<const double> direction) {
    ++calls_;
    LmoResult r = mip_lmo(direction, *region_, opt_);
    if (cache_ && region_->has_rows() && r.trusted()) cache_->insert(r.vertex, *region_);
    return r;
  }

  const std::vector<double>* lazy(std::span<const double> gradient, std::span<const double> x, double phi) {
    if (!cache_ || !region_->has_rows()) return nullptr;
    const auto* v = cache_->lookup(gradient, x, phi, *region_);
    if (v) ++cache_hits_;
    return v;
  }

  long calls() const { return calls_; }
  long cache_hits() const { return cache_hits_; }

 private:
  const Region* region_;
  VertexCache* cache_;
  LmoOptions opt_;
  long calls_ = 0;
  long cache_hits_ = 0;
};

}  // namespace fwmiq
