// SPDX-License-Identifier: Apache-2.0
#pragma once

// Presolve: linear bound propagation, structural reformulations of
// complementarity and perspective constraints, and the binary-QP shift that
// convexifies a chosen share of the objective spectrum.

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "fwmiq/eigen.hpp"
#include "fwmiq/model.hpp"

namespace fwmiq {

inline constexpr double kArtificialBound = 1e5;

enum class PresolveStatus { Ok, Infeasible };

struct PropagationResult {
  std::vector<double> lb;
  std::vector<double> ub;
  PresolveStatus status = PresolveStatus::Ok;
  int rounds = 0;
  int tightenings = 0;
};

struct AppliedTransform {
  std::string kind;
  std::string detail;
};

/// Activity-based bound strengthening over the linear constraints. Integer
/// bounds are rounded inward. Stops at a fixpoint or after max_rounds rounds.
inline PropagationResult propagate_bounds(const Problem& p, int max_rounds = 10) {
  PropagationResult r{p.lb, p.ub};
  auto infeasible = [&] {
    for (int k = 0; k < p.n; ++k)
      if (r.lb[k] > r.ub[k] + 1e-9) return true;
    return false;
  };
  if (infeasible()) {
    r.status = PresolveStatus::Infeasible;
    return r;
  }
  for (int k = 0; k < p.n; ++k) {
    if (is_integral_kind(p.kinds[k])) {
      r.lb[k] = std::ceil(r.lb[k] - 1e-9);
      r.ub[k] = std::floor(r.ub[k] + 1e-9);
    }
  }
  for (; r.rounds < max_rounds; ++r.rounds) {
    bool changed = false;
    for (const auto& c : p.constraints) {
      if (!c.is_linear() || c.sense != Sense::LE || c.linear.empty()) continue;
      const double rhs = -c.constant;
      double finite_min = 0.0;
      int inf_count = 0;
      int inf_index = -1;
      for (const auto& t : c.linear) {
        const double bound = t.coef > 0 ? r.lb[t.index] : r.ub[t.index];
        if (!std::isfinite(bound)) {
          ++inf_count;
          inf_index = t.index;
        } else {
          finite_min += t.coef * bound;
        }
      }
      if (inf_count == 0 && finite_min > rhs + 1e-9 * (1.0 + std::abs(rhs))) {
        r.status = PresolveStatus::Infeasible;
        return r;
      }
      if (inf_count > 1) continue;
      for (const auto& t : c.linear) {
        const int k = t.index;
        double rest;
        if (inf_count == 0) {
          rest = finite_min - t.coef * (t.coef > 0 ? r.lb[k] : r.ub[k]);
        } else if (k == inf_index) {
          rest = finite_min;
        } else {
          continue;
        }
        const double bound = (rhs - rest) / t.coef;
        const bool integral = is_integral_kind(p.kinds[k]);
        if (t.coef > 0) {
          const double nb = integral ? std::floor(bound + 1e-9) : bound;
          if (nb < r.ub[k] - 1e-9 * (1.0 + std::abs(nb))) {
            r.ub[k] = nb;
            changed = true;
            ++r.tightenings;
          }
        } else {
          const double nb = integral ? std::ceil(bound - 1e-9) : bound;
          if (nb > r.lb[k] + 1e-9 * (1.0 + std::abs(nb))) {
            r.lb[k] = nb;
            changed = true;
            ++r.tightenings;
          }
        }
        if (r.lb[k] > r.ub[k] + 1e-9) {
          r.status = PresolveStatus::Infeasible;
          return r;
        }
      }
    }
    if (!changed) break;
  }
  return r;
}

/// Replaces every complementarity x_i x_j = 0 (both variables nonnegative with
/// finite upper bounds) by a fresh binary z and the big-M rows
/// x_i <= ub_i z and x_j <= ub_j (1 - z), with i the smaller index.
inline Problem reformulate_complementarity(const Problem& p, std::vector<AppliedTransform>* log = nullptr) {
  Problem out = p;
  out.constraints.clear();
  for (const auto& c : p.constraints) {
    const bool pattern = c.tag == ConstraintTag::Complementarity ||
                         (c.sense == Sense::EQ && is_complementarity_pattern(c.terms, c.linear, c.constant));
    if (!pattern) {
      out.constraints.push_back(c);
      continue;
    }
    const int i = std::min(c.terms[0].i, c.terms[0].j);
    const int j = std::max(c.terms[0].i, c.terms[0].j);
    const bool ok = p.lb[i] >= 0.0 && p.lb[j] >= 0.0 && std::isfinite(p.ub[i]) && std::isfinite(p.ub[j]);
    if (!ok) {
      out.constraints.push_back(c);
      continue;
    }
    const int z = out.add_variable(VarKind::Binary, 0.0, 1.0);
    const double mi = p.ub[i], mj = p.ub[j];
    out.constraints.push_back({c.name + ".z0", {}, {{i, 1.0}, {z, -mi}}, 0.0, Sense::LE, ConstraintTag::Indicator});
    out.constraints.push_back({c.name + ".z1", {}, {{j, 1.0}, {z, mj}}, -mj, Sense::LE, ConstraintTag::Indicator});
    if (log)
      log->push_back({"complementarity", c.name + ": x" + std::to_string(i) + "*x" + std::to_string(j) +
                                             "=0 -> z=x" + std::to_string(z)});
  }
  return out;
}

/// Epigraph variable removed by the perspective rewrite. Its value is
/// recovered as x^2 when z = 1 and 0 otherwise.
struct RemovedEpigraph {
  int w_original = -1;  // index in the problem before the rewrite
  int x = -1;           // indices in the rewritten problem
  int z = -1;
};

namespace detail {

/// Drops variable `w` and renumbers the remaining ones.
inline Problem remove_variable(const Problem& p, int w) {
  auto remap = [w](int k) { return k > w ? k - 1 : k; };
  Problem out;
  out.name = p.name;
  out.maximize = p.maximize;
  out.n = p.n - 1;
  out.objective_constant = p.objective_constant;
  for (int k = 0; k < p.n; ++k) {
    if (k == w) continue;
    out.objective_linear.push_back(p.objective_linear[k]);
    out.lb.push_back(p.lb[k]);
    out.ub.push_back(p.ub[k]);
    out.kinds.push_back(p.kinds[k]);
  }
  for (auto t : p.objective_terms) {
    t.i = remap(t.i);
    t.j = remap(t.j);
    out.objective_terms.push_back(t);
  }
  for (auto c : p.constraints) {
    for (auto& t : c.terms) {
      t.i = remap(t.i);
      t.j = remap(t.j);
    }
    for (auto& t : c.linear) t.index = remap(t.index);
    out.constraints.push_back(std::move(c));
  }
  return out;
}

struct PerspectiveMatch {
  int constraint = -1;
  int x = -1, z = -1, w = -1;
  double obj_coef = 0.0;
};

inline std::optional<PerspectiveMatch> match_perspective(const Problem& p, int ci) {
  const auto& c = p.constraints[ci];
  if (c.sense != Sense::LE || !c.linear.empty() || c.constant != 0.0 || c.terms.size() != 2) return std::nullopt;
  const QuadTerm* sq = nullptr;
  const QuadTerm* bl = nullptr;
  for (const auto& t : c.terms) (t.i == t.j ? sq : bl) = &t;
  if (!sq || !bl || sq->coef <= 0.0 || std::abs(bl->coef + sq->coef) > 1e-12 * sq->coef) return std::nullopt;
  const int x = sq->i;
  int z = -1, w = -1;
  if (p.kinds[bl->i] == VarKind::Binary && p.kinds[bl->j] == VarKind::Continuous) {
    z = bl->i;
    w = bl->j;
  } else if (p.kinds[bl->j] == VarKind::Binary && p.kinds[bl->i] == VarKind::Continuous) {
    z = bl->j;
    w = bl->i;
  } else {
    return std::nullopt;
  }
  if (x == z || x == w) return std::nullopt;
  if (p.lb[x] < 0.0 || !std::isfinite(p.ub[x])) return std::nullopt;
  if (p.lb[w] != 0.0 || p.ub[w] < p.ub[x] * p.ub[x]) return std::nullopt;
  const double c_w = p.objective_linear[w];
  if (!(c_w > 0.0)) return std::nullopt;
  for (const auto& t : p.objective_terms)
    if (t.i == w || t.j == w) return std::nullopt;
  for (int other = 0; other < static_cast<int>(p.constraints.size()); ++other) {
    if (other == ci) continue;
    const auto& oc = p.constraints[other];
    for (const auto& t : oc.terms)
      if (t.i == w || t.j == w) return std::nullopt;
    for (const auto& t : oc.linear)
      if (t.index == w) return std::nullopt;
  }
  return PerspectiveMatch{ci, x, z, w, c_w};
}

}  // namespace detail

struct PerspectiveRewrite {
  Problem problem;
  std::vector<RemovedEpigraph> removed;  // in application order
};

/// Rewrites x^2 <= z w (x >= 0, w >= 0, z binary, w only here and linearly in
/// the objective with c > 0) into the objective term c x^2 plus the activation
/// row x <= ub(x) z.
inline PerspectiveRewrite reformulate_perspective_detailed(const Problem& p,
                                                           std::vector<AppliedTransform>* log = nullptr) {
  PerspectiveRewrite out{p, {}};
  for (bool again = true; again;) {
    again = false;
    Problem& cur = out.problem;
    for (int ci = 0; ci < static_cast<int>(cur.constraints.size()); ++ci) {
      auto m = detail::match_perspective(cur, ci);
      if (!m) continue;
      const std::string name = cur.constraints[ci].name;
      cur.constraints.erase(cur.constraints.begin() + ci);
      cur.objective_linear[m->w] = 0.0;
      cur.objective_terms.push_back({m->x, m->x, m->obj_coef});
      cur.objective_terms = canonical_terms(std::move(cur.objective_terms));
      cur.constraints.push_back(
          {name + ".act", {}, {{m->x, 1.0}, {m->z, -cur.ub[m->x]}}, 0.0, Sense::LE, ConstraintTag::Indicator});
      Problem reduced = detail::remove_variable(cur, m->w);
      auto remap = [w = m->w](int k) { return k > w ? k - 1 : k; };
      out.removed.push_back({m->w, remap(m->x), remap(m->z)});
      if (log)
        log->push_back({"perspective", name + ": x" + std::to_string(m->x) + "^2 <= x" + std::to_string(m->z) +
                                           "*x" + std::to_string(m->w) + " -> objective term"});
      out.problem = std::move(reduced);
      again = true;
      break;
    }
  }
  return out;
}

inline Problem reformulate_perspective(const Problem& p, std::vector<AppliedTransform>* log = nullptr) {
  return reformulate_perspective_detailed(p, log).problem;
}

/// Symmetric Q with objective = 0.5 x^T Q x + ... under the term convention.
inline DenseMatrix objective_matrix(const Problem& p) {
  DenseMatrix q(p.n);
  for (const auto& t : p.objective_terms) {
    if (t.i == t.j) {
      q(t.i, t.i) += 2.0 * t.coef;
    } else {
      q(t.i, t.j) += t.coef;
      q(t.j, t.i) += t.coef;
    }
  }
  return q;
}

struct ConvexifyResult {
  Problem problem;
  double shift = 0.0;
  double ell = 0.0;
  std::vector<double> eigenvalues;  // of the original Q, ascending
};

/// Number of eigenvalues made nonnegative for proportion ell, i.e. ceil(ell * n)
/// with a tolerance against representation error in ell * n.
inline int convexified_count(double ell, int n) {
  return std::clamp(static_cast<int>(std::ceil(ell * n - 1e-9)), 0, n);
}

/// Shifts Q by s I and d by -s/2 so that a proportion ell of the spectrum is
/// nonnegative. Exact on binary points since x_i^2 = x_i.
inline ConvexifyResult convexify_binary(const Problem& p, double ell) {
  if (!p.all_binary()) throw std::invalid_argument("convexify_binary: every variable must be binary");
  if (!(ell >= 0.0 && ell <= 1.0)) throw std::invalid_argument("convexify_binary: ell must lie in [0,1]");
  ConvexifyResult out{p, 0.0, ell, {}};
  if (p.n == 0) return out;
  const Spectrum spec = eigen_symmetric(objective_matrix(p));
  out.eigenvalues = spec.eigenvalues;
  const int count = convexified_count(ell, p.n);
  if (count == 0) return out;
  const int target = p.n - count;  // 0-based position of lambda_(n - count + 1)
  out.shift = std::max(0.0, -spec.eigenvalues[target]);
  if (out.shift == 0.0) return out;
  for (int k = 0; k < p.n; ++k) {
    out.problem.objective_terms.push_back({k, k, 0.5 * out.shift});
    out.problem.objective_linear[k] -= 0.5 * out.shift;
  }
  out.problem.objective_terms = canonical_terms(std::move(out.problem.objective_terms));
  return out;
}

struct PresolveOptions {
  int max_rounds = 10;
  bool complementarity = true;
  bool perspective = true;
};

/// Output of the full presolve pipeline plus the map back to the original
/// variable space.
struct PresolveResult {
  Problem original;
  Problem reformulated;
  PresolveStatus status = PresolveStatus::Ok;
  std::vector<AppliedTransform> transforms;
  bool artificial_bounds = false;
  // Perspective rewrites in application order; indices refer to the model at
  // the time of the rewrite (before later removals).
  std::vector<RemovedEpigraph> removed;
  int aux_count = 0;  // trailing auxiliary binaries added for complementarities

  /// Maps a point of the reformulated model to the original variable space.
  std::vector<double> to_original(std::span<const double> x) const {
    std::vector<double> v(x.begin(), x.end() - aux_count);
    for (auto it = removed.rbegin(); it != removed.rend(); ++it) {
      const double xv = v[it->x];
      const double zv = v[it->z];
      const double wv = zv >= 0.5 ? xv * xv : 0.0;
      v.insert(v.begin() + it->w_original, wv);
    }
    return v;
  }
};

inline PresolveResult presolve(const Problem& original, const PresolveOptions& opt = {}) {
  PresolveResult r;
  r.original = original;
  Problem cur = original;

  auto apply_propagation = [&](Problem& p) {
    auto prop = propagate_bounds(p, opt.max_rounds);
    if (prop.status == PresolveStatus::Infeasible) {
      r.status = PresolveStatus::Infeasible;
      return false;
    }
    if (prop.tightenings > 0)
      r.transforms.push_back({"propagation", std::to_string(prop.tightenings) + " bound changes in " +
                                                 std::to_string(prop.rounds + 1) + " rounds"});
    p.lb = std::move(prop.lb);
    p.ub = std::move(prop.ub);
    return true;
  };

  if (!apply_propagation(cur)) {
    r.reformulated = cur;
    return r;
  }
  // Perspective first: it removes variables, complementarity only appends.
  if (opt.perspective) {
    auto pr = reformulate_perspective_detailed(cur, &r.transforms);
    cur = std::move(pr.problem);
    r.removed = std::move(pr.removed);
  }
  if (opt.complementarity) {
    const int before = cur.n;
    cur = reformulate_complementarity(cur, &r.transforms);
    r.aux_count = cur.n - before;
  }
  if (!apply_propagation(cur)) {
    r.reformulated = cur;
    return r;
  }
  for (int k = 0; k < cur.n; ++k) {
    if (!std::isfinite(cur.lb[k])) {
      cur.lb[k] = std::min(-kArtificialBound, cur.ub[k]);
      r.artificial_bounds = true;
    }
    if (!std::isfinite(cur.ub[k])) {
      cur.ub[k] = std::max(kArtificialBound, cur.lb[k]);
      r.artificial_bounds = true;
    }
  }
  if (r.artificial_bounds) r.transforms.push_back({"artificial_bounds", "infinite bounds replaced by +-1e5"});
  r.reformulated = std::move(cur);
  return r;
}

}  // namespace fwmiq
