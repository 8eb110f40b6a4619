// SPDX-License-Identifier: Apache-2.0
#pragma once

// Candidate evaluation, the per-worker solution pool and the incumbent store
// shared by all workers.

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "fwmiq/lp.hpp"
#include "fwmiq/presolve.hpp"
#include "fwmiq/util.hpp"

namespace fwmiq {

struct IncumbentEvent {
  double time = 0.0;   // seconds since the store was created
  double value = 0.0;  // minimization form
};

struct IncumbentSnapshot {
  double value = kInf;
  std::vector<double> point;           // reformulated space
  std::vector<double> original_point;  // original space
};

/// Monotone best-solution store. offer() is a compare-and-improve: it succeeds
/// only for strictly better values and records an event for each success.
class IncumbentStore {
 public:
  explicit IncumbentStore(Clock::time_point start = Clock::now()) : start_(start) {}

  Clock::time_point start() const { return start_; }
  double best() const { return best_.load(std::memory_order_acquire); }
  bool has_incumbent() const { return best() < kInf; }

  bool offer(double value, std::span<const double> point, std::span<const double> original_point) {
    if (!(value < best())) return false;
    std::lock_guard lock(mutex_);
    if (!(value < best_.load(std::memory_order_relaxed))) return false;
    const double t = std::chrono::duration<double>(Clock::now() - start_).count();
    events_.push_back({t, value});
    snapshot_.value = value;
    snapshot_.point.assign(point.begin(), point.end());
    snapshot_.original_point.assign(original_point.begin(), original_point.end());
    best_.store(value, std::memory_order_release);
    return true;
  }

  std::optional<IncumbentSnapshot> snapshot() const {
    std::lock_guard lock(mutex_);
    if (snapshot_.value == kInf) return std::nullopt;
    return snapshot_;
  }

  std::vector<IncumbentEvent> events() const {
    std::lock_guard lock(mutex_);
    return events_;
  }

 private:
  Clock::time_point start_;
  std::atomic<double> best_{kInf};
  mutable std::mutex mutex_;
  std::vector<IncumbentEvent> events_;
  IncumbentSnapshot snapshot_;
};

struct PoolEntry {
  std::vector<double> point;           // reformulated space
  std::vector<double> original_point;  // original space
  double objective = kInf;             // original objective, minimization form
  FeasibilityReport report;
};

struct SubmitResult {
  bool feasible = false;
  bool duplicate = false;
  bool improved = false;  // new incumbent in this pool
  double objective = kInf;
};

/// All integer-feasible candidates met by one worker, keyed by their rounded
/// coordinates. Every candidate is mapped back to the original model and
/// checked there; only original-feasible points become incumbents.
class SolutionPool {
 public:
  SolutionPool(const PresolveResult& presolved, IncumbentStore* store = nullptr, double tol = kDefaultConsTol)
      : pre_(&presolved), store_(store), tol_(tol) {}

  const PresolveResult& presolved() const { return *pre_; }
  IncumbentStore* store() const { return store_; }

  SubmitResult submit(std::span<const double> x) {
    const Problem& ref = pre_->reformulated;
    std::vector<double> v(x.begin(), x.end());
    for (int k = 0; k < ref.n; ++k) {
      if (!is_integral_kind(ref.kinds[k])) continue;
      const double r = std::round(v[k]);
      if (std::abs(v[k] - r) <= kDefaultIntTol) v[k] = r;
    }
    ++submissions_;
    SubmitResult out;
    PointKey key(v);
    if (auto it = index_.find(key); it != index_.end()) {
      const auto& e = entries_[it->second];
      out.duplicate = true;
      out.feasible = e.report.feasible;
      out.objective = e.objective;
      return out;
    }
    PoolEntry e;
    e.original_point = pre_->to_original(v);
    e.point = std::move(v);
    e.report = check_feasibility(pre_->original, e.original_point, tol_, kDefaultIntTol);
    e.objective = eval_objective(pre_->original, e.original_point);
    out.feasible = e.report.feasible;
    out.objective = e.objective;
    if (e.report.integral) {
      const std::size_t at = entries_.size();
      if (e.report.feasible && (!incumbent_ || e.objective < entries_[*incumbent_].objective)) {
        incumbent_ = at;
        out.improved = true;
        if (store_) store_->offer(e.objective, e.point, e.original_point);
      }
      if (!best_any_ || better_any(e, entries_[*best_any_])) best_any_ = at;
      index_.emplace(std::move(key), at);
      entries_.push_back(std::move(e));
    }
    return out;
  }

  std::size_t size() const { return entries_.size(); }
  long submissions() const { return submissions_; }
  const std::vector<PoolEntry>& entries() const { return entries_; }

  const PoolEntry* incumbent() const { return incumbent_ ? &entries_[*incumbent_] : nullptr; }

  /// Least violated integral entry, ties broken by objective; feasible entries first.
  const PoolEntry* best_any() const { return best_any_ ? &entries_[*best_any_] : nullptr; }

 private:
  static bool better_any(const PoolEntry& a, const PoolEntry& b) {
    if (a.report.feasible != b.report.feasible) return a.report.feasible;
    if (a.report.max_violation != b.report.max_violation) return a.report.max_violation < b.report.max_violation;
    return a.objective < b.objective;
  }

  const PresolveResult* pre_;
  IncumbentStore* store_;
  double tol_;
  std::vector<PoolEntry> entries_;
  std::unordered_map<PointKey, std::size_t, PointKeyHash> index_;
  std::optional<std::size_t> incumbent_;
  std::optional<std::size_t> best_any_;
  long submissions_ = 0;
};

enum class SolveStatus { Feasible, NoSolution, Error };

inline std::string to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::Feasible: return "feasible";
    case SolveStatus::NoSolution: return "no_solution";
    case SolveStatus::Error: return "error";
  }
  return "error";
}

struct SolveTrace {
  double time_limit = 0.0;
  std::vector<IncumbentEvent> events;  // minimization form, strictly decreasing
  std::optional<double> best;          // minimization form
  std::vector<double> best_point;      // original space
  long nodes = 0;
  long restarts = 0;
  double elapsed = 0.0;
  SolveStatus status = SolveStatus::NoSolution;
  std::string reason;
};

}  // namespace fwmiq
