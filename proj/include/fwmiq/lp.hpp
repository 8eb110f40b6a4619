// SPDX-License-Identifier: Apache-2.0
#pragma once

// Feasible region description and a dense bounded-variable primal simplex.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "fwmiq/model.hpp"

namespace fwmiq {

using Clock = std::chrono::steady_clock;

struct LinearRow {
  std::vector<LinTerm> coefs;
  double rhs = 0.0;
  Sense sense = Sense::LE;  // coefs . x (sense) rhs
};

/// Bounds, linear rows and integrality of an LMO domain.
struct Region {
  std::vector<double> lb;
  std::vector<double> ub;
  std::vector<LinearRow> rows;
  std::vector<bool> integer;

  int dimension() const { return static_cast<int>(lb.size()); }
  bool has_rows() const { return !rows.empty(); }

  /// Bounds plus every linear constraint of the model.
  static Region from_problem(const Problem& p) {
    Region r;
    r.lb = p.lb;
    r.ub = p.ub;
    r.integer.resize(p.n);
    for (int k = 0; k < p.n; ++k) r.integer[k] = is_integral_kind(p.kinds[k]);
    for (const auto& c : p.constraints) {
      if (!c.is_linear()) continue;
      r.rows.push_back({c.linear, -c.constant, c.sense});
    }
    return r;
  }

  double row_activity(std::size_t i, std::span<const double> x) const { return eval_linear(rows[i].coefs, x); }

  double row_violation(std::size_t i, std::span<const double> x) const {
    const double a = row_activity(i, x);
    const auto& row = rows[i];
    switch (row.sense) {
      case Sense::LE: return std::max(0.0, a - row.rhs);
      case Sense::GE: return std::max(0.0, row.rhs - a);
      case Sense::EQ: return std::abs(a - row.rhs);
    }
    return 0.0;
  }

  /// Rows and bounds within `tol`; integrality within `int_tol` when requested.
  bool contains(std::span<const double> x, double tol = 1e-7, double int_tol = 1e-6, bool check_int = true) const {
    for (int k = 0; k < dimension(); ++k) {
      if (x[k] < lb[k] - tol || x[k] > ub[k] + tol) return false;
      if (check_int && integer[k] && std::abs(x[k] - std::round(x[k])) > int_tol) return false;
    }
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (row_violation(i, x) > tol) return false;
    return true;
  }
};

enum class LpStatus { Optimal, Infeasible, Error };

struct LpResult {
  LpStatus status = LpStatus::Error;
  std::vector<double> x;
  double value = 0.0;
  int iterations = 0;
  std::string diagnostics;
};

struct Fixing {
  int index = 0;
  double value = 0.0;
};

namespace detail {

// Dense tableau simplex for  min c^T x  s.t.  A x + s = rhs,  l <= x <= u,
// with slack bounds encoding the row sense. Nonbasic variables sit at a
// finite bound; phase 1 drives artificial variables to zero.
class BoundedSimplex {
 public:
  BoundedSimplex(std::span<const double> cost, const Region& region, std::span<const double> lb,
                 std::span<const double> ub)
      : n_(region.dimension()), m_(static_cast<int>(region.rows.size())), cols_(n_ + 2 * m_) {
    lo_.assign(cols_, 0.0);
    hi_.assign(cols_, 0.0);
    x_.assign(cols_, 0.0);
    at_upper_.assign(cols_, false);
    basic_row_.assign(cols_, -1);
    basis_.assign(m_, -1);
    cost_.assign(cost.begin(), cost.end());
    tab_.assign(static_cast<std::size_t>(m_) * cols_, 0.0);

    for (int j = 0; j < n_; ++j) {
      lo_[j] = lb[j];
      hi_[j] = ub[j];
      x_[j] = lb[j];
    }
    for (int i = 0; i < m_; ++i) {
      const auto& row = region.rows[i];
      double activity = 0.0;
      for (const auto& t : row.coefs) {
        at(i, t.index) += t.coef;
      }
      for (int j = 0; j < n_; ++j) activity += at(i, j) * x_[j];
      const int s = n_ + i, a = n_ + m_ + i;
      switch (row.sense) {
        case Sense::LE: lo_[s] = 0.0; hi_[s] = kInf; break;
        case Sense::GE: lo_[s] = -kInf; hi_[s] = 0.0; break;
        case Sense::EQ: lo_[s] = 0.0; hi_[s] = 0.0; break;
      }
      at(i, s) = 1.0;
      const double r = row.rhs - activity;
      if (r >= lo_[s] - 1e-12 && r <= hi_[s] + 1e-12) {
        x_[s] = std::clamp(r, lo_[s], hi_[s]);
        set_basic(i, s);
        lo_[a] = hi_[a] = 0.0;
      } else {
        const double sv = r < lo_[s] ? lo_[s] : hi_[s];
        x_[s] = sv;
        at_upper_[s] = sv == hi_[s] && sv != lo_[s];
        const double sigma = r - sv > 0 ? 1.0 : -1.0;
        for (int j = 0; j < cols_; ++j) at(i, j) *= sigma;
        at(i, a) = 1.0;
        x_[a] = std::abs(r - sv);
        lo_[a] = 0.0;
        hi_[a] = kInf;
        set_basic(i, a);
        needs_phase1_ = true;
      }
    }
  }

  LpResult solve(const Clock::time_point* deadline) {
    LpResult res;
    if (needs_phase1_) {
      std::vector<double> c1(cols_, 0.0);
      for (int i = 0; i < m_; ++i) c1[n_ + m_ + i] = 1.0;
      const auto st = iterate(c1, deadline, res);
      if (st != LpStatus::Optimal) {
        res.status = st;
        return res;
      }
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i) infeas += x_[n_ + m_ + i];
      if (infeas > 1e-7) {
        res.status = LpStatus::Infeasible;
        return res;
      }
      for (int i = 0; i < m_; ++i) {
        const int a = n_ + m_ + i;
        hi_[a] = 0.0;
        x_[a] = 0.0;
        at_upper_[a] = false;
      }
    }
    std::vector<double> c2(cols_, 0.0);
    std::copy(cost_.begin(), cost_.end(), c2.begin());
    const auto st = iterate(c2, deadline, res);
    if (st != LpStatus::Optimal) {
      res.status = st;
      return res;
    }
    res.x.assign(x_.begin(), x_.begin() + n_);
    for (int j = 0; j < n_; ++j) res.x[j] = std::clamp(res.x[j], lo_[j], hi_[j]);
    res.value = 0.0;
    for (int j = 0; j < n_; ++j) res.value += cost_[j] * res.x[j];
    res.status = LpStatus::Optimal;
    return res;
  }

 private:
  double& at(int i, int j) { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }
  double at(int i, int j) const { return tab_[static_cast<std::size_t>(i) * cols_ + j]; }

  void set_basic(int row, int col) {
    basis_[row] = col;
    basic_row_[col] = row;
  }

  LpStatus iterate(const std::vector<double>& c, const Clock::time_point* deadline, LpResult& res) {
    constexpr double kDualTol = 1e-9;
    constexpr double kPivotTol = 1e-9;
    std::vector<double> reduced(cols_);
    const int max_iter = 50 * (cols_ + m_) + 1000;
    int degenerate_run = 0;
    bool bland = false;
    for (int iter = 0;; ++iter, ++res.iterations) {
      if (iter > max_iter) {
        res.diagnostics = "iteration limit reached";
        return LpStatus::Error;
      }
      if (deadline && (iter & 63) == 63 && Clock::now() > *deadline) {
        res.diagnostics = "time limit reached";
        return LpStatus::Error;
      }
      for (int j = 0; j < cols_; ++j) {
        if (basic_row_[j] >= 0) {
          reduced[j] = 0.0;
          continue;
        }
        double d = c[j];
        for (int i = 0; i < m_; ++i) {
          const double t = at(i, j);
          if (t != 0.0) d -= c[basis_[i]] * t;
        }
        reduced[j] = d;
      }
      // Pricing: Dantzig (ties go to the later column) or Bland after a run of
      // degenerate pivots.
      int enter = -1;
      double best = 0.0;
      for (int j = 0; j < cols_; ++j) {
        if (basic_row_[j] >= 0 || hi_[j] - lo_[j] <= 0.0) continue;
        double score = 0.0;
        if (!at_upper_[j] && reduced[j] < -kDualTol) score = -reduced[j];
        if (at_upper_[j] && reduced[j] > kDualTol) score = reduced[j];
        if (score <= 0.0) continue;
        if (bland) {
          enter = j;
          break;
        }
        if (score >= best) {
          best = score;
          enter = j;
        }
      }
      if (enter < 0) return LpStatus::Optimal;

      const double dir = at_upper_[enter] ? -1.0 : 1.0;
      double theta = hi_[enter] - lo_[enter];
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        const double t = at(i, enter);
        if (std::abs(t) <= kPivotTol) continue;
        const int b = basis_[i];
        const double rate = -dir * t;  // change of x_b per unit step
        double limit;
        bool to_upper;
        if (rate < 0) {
          if (!std::isfinite(lo_[b])) continue;
          limit = std::max(0.0, x_[b] - lo_[b]) / -rate;
          to_upper = false;
        } else {
          if (!std::isfinite(hi_[b])) continue;
          limit = std::max(0.0, hi_[b] - x_[b]) / rate;
          to_upper = true;
        }
        bool take = limit < theta - 1e-12;
        if (!take && leave_row >= 0 && limit <= theta + 1e-12)
          take = bland ? b < basis_[leave_row] : std::abs(t) > std::abs(at(leave_row, enter));
        if (take) {
          theta = limit;
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }
      if (!std::isfinite(theta)) {
        res.diagnostics = "unbounded direction in a bounded region";
        return LpStatus::Error;
      }
      if (theta <= 1e-12) {
        if (++degenerate_run > 2 * n_) bland = true;
      } else {
        degenerate_run = 0;
      }

      x_[enter] += dir * theta;
      for (int i = 0; i < m_; ++i) {
        const double t = at(i, enter);
        if (t != 0.0) x_[basis_[i]] -= dir * theta * t;
      }
      if (leave_row < 0) {
        at_upper_[enter] = !at_upper_[enter];
        x_[enter] = at_upper_[enter] ? hi_[enter] : lo_[enter];
        continue;
      }
      const int leave = basis_[leave_row];
      x_[leave] = leave_to_upper ? hi_[leave] : lo_[leave];
      at_upper_[leave] = leave_to_upper && hi_[leave] != lo_[leave];
      basic_row_[leave] = -1;
      const double piv = at(leave_row, enter);
      if (std::abs(piv) < 1e-11) {
        res.diagnostics = "numerically singular pivot";
        return LpStatus::Error;
      }
      for (int j = 0; j < cols_; ++j) at(leave_row, j) /= piv;
      for (int i = 0; i < m_; ++i) {
        if (i == leave_row) continue;
        const double f = at(i, enter);
        if (f == 0.0) continue;
        double* dst = &tab_[static_cast<std::size_t>(i) * cols_];
        const double* src = &tab_[static_cast<std::size_t>(leave_row) * cols_];
        for (int j = 0; j < cols_; ++j) dst[j] -= f * src[j];
        dst[enter] = 0.0;
      }
      set_basic(leave_row, enter);
      at_upper_[enter] = false;
    }
  }

  int n_, m_, cols_;
  std::vector<double> lo_, hi_, x_, cost_, tab_;
  std::vector<bool> at_upper_;
  std::vector<int> basic_row_, basis_;
  bool needs_phase1_ = false;
};

}  // namespace detail

/// Bounded simplex solve of  min direction^T x  over rows and the given bounds.
inline LpResult solve_lp_bounds(std::span<const double> direction, const Region& region, std::span<const double> lb,
                                std::span<const double> ub, const Clock::time_point* deadline = nullptr) {
  const int n = region.dimension();
  for (int k = 0; k < n; ++k) {
    if (lb[k] > ub[k] + 1e-9) return {LpStatus::Infeasible, {}, 0.0, 0, "empty variable domain"};
  }
  std::vector<double> lo(lb.begin(), lb.end()), hi(ub.begin(), ub.end());
  for (int k = 0; k < n; ++k) {
    if (!std::isfinite(lo[k]) || !std::isfinite(hi[k]))
      return {LpStatus::Error, {}, 0.0, 0, "variable " + std::to_string(k) + " has an infinite bound"};
    if (hi[k] < lo[k]) hi[k] = lo[k];
  }
  detail::BoundedSimplex simplex(direction, region, lo, hi);
  LpResult res = simplex.solve(deadline);
  if (res.status != LpStatus::Optimal) return res;
  double worst = 0.0;
  std::size_t worst_row = 0;
  for (std::size_t i = 0; i < region.rows.size(); ++i) {
    const double v = region.row_violation(i, res.x);
    if (v > worst) {
      worst = v;
      worst_row = i;
    }
  }
  if (worst > 1e-7) {
    std::ostringstream os;
    os << "row " << worst_row << " violated by " << worst << " after " << res.iterations << " iterations";
    res.status = LpStatus::Error;
    res.diagnostics = os.str();
  }
  return res;
}

inline LpResult solve_lp(std::span<const double> direction, const Region& region, std::span<const Fixing> fixings = {},
                         const Clock::time_point* deadline = nullptr) {
  std::vector<double> lb = region.lb, ub = region.ub;
  for (const auto& f : fixings) {
    if (f.value < region.lb[f.index] - 1e-9 || f.value > region.ub[f.index] + 1e-9)
      throw std::invalid_argument("solve_lp: fixing outside variable bounds");
    lb[f.index] = ub[f.index] = f.value;
  }
  return solve_lp_bounds(direction, region, lb, ub, deadline);
}

}  // namespace fwmiq
