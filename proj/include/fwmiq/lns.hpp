// SPDX-License-Identifier: Apache-2.0
#pragma once

// Primal heuristics: roundings, follow-the-gradient and the neighborhood
// searches run from inside the tree.

#include <algorithm>
#include <functional>
#include <optional>
#include <queue>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fwmiq/active_set.hpp"
#include "fwmiq/fw.hpp"
#include "fwmiq/lmo.hpp"
#include "fwmiq/model.hpp"

namespace fwmiq {

using Rng = std::mt19937_64;

struct SubproblemBudget {
  long node_cap = 200;
  double time_slice = 2.0;  // seconds
  int depth_cap = 1;
};

/// Restricted bounds for a sub-solve together with the agreement statistics
/// that triggered it.
struct Neighborhood {
  std::vector<double> lb, ub;
  int agreeing = 0;
  int total = 0;

  double fraction() const { return total == 0 ? 0.0 : static_cast<double>(agreeing) / total; }
};

/// Sub-solve over a neighborhood. Returns the best original-feasible point it
/// found (reformulated space), if any.
using SubSolve = std::function<std::optional<std::vector<double>>(const Neighborhood&)>;

inline bool strict_majority(int agreeing, int total) { return total > 0 && 2 * agreeing > total; }

/// Integer coordinates rounded half-up and clamped to their bounds.
inline std::vector<double> standard_rounding(std::span<const double> x, const Problem& p) {
  std::vector<double> v(x.begin(), x.end());
  for (int k = 0; k < p.n; ++k) {
    if (!is_integral_kind(p.kinds[k])) continue;
    const double lo = std::ceil(p.lb[k] - 1e-9), hi = std::floor(p.ub[k] + 1e-9);
    v[k] = std::clamp(std::floor(v[k] + 0.5), lo, hi);
  }
  return v;
}

/// `trials` random roundings: each binary is set to 1 with probability
/// clamp(x_k, 0, 1), other integers are rounded. When continuous variables
/// remain and an objective is given they are re-optimized by a short bpcg run
/// over `region` with the integers fixed.
template <class Objective>
std::vector<std::vector<double>> probability_rounding(std::span<const double> x, const Problem& p, const Region& region,
                                                      int trials, Rng& rng, const Objective* f = nullptr,
                                                      int fw_iter = 50) {
  bool has_continuous = false;
  for (int k = 0; k < p.n; ++k) has_continuous = has_continuous || !is_integral_kind(p.kinds[k]);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::vector<double>> out;
  for (int t = 0; t < trials; ++t) {
    std::vector<double> v = standard_rounding(x, p);
    for (int k = 0; k < p.n; ++k) {
      if (p.kinds[k] != VarKind::Binary) continue;
      const double prob = std::clamp(x[k], 0.0, 1.0);
      v[k] = unit(rng) < prob ? 1.0 : 0.0;
      v[k] = std::clamp(v[k], region.lb[k], region.ub[k]);
    }
    if (has_continuous && f) {
      Region sub = region;
      for (int k = 0; k < p.n; ++k)
        if (is_integral_kind(p.kinds[k])) sub.lb[k] = sub.ub[k] = v[k];
      LinearOracle oracle(sub);
      LmoResult start = oracle.minimize(f->gradient(v));
      if (start.ok()) {
        FwOptions opt;
        opt.max_iter = fw_iter;
        opt.lazy = false;
        v = bpcg(*f, oracle, ActiveSet(std::move(start.vertex)), opt).x;
      }
    }
    out.push_back(std::move(v));
  }
  return out;
}

struct FtgResult {
  std::vector<std::vector<double>> visited;
  std::optional<std::size_t> best;
  int steps = 0;
  bool cycled = false;
};

/// Unit-step Frank-Wolfe: v0 = LMO(start), v_{t+1} = LMO(grad f(v_t)), stopping
/// on a revisited vertex or after `budget` steps. `score` ranks the visited
/// vertices (lower is better).
template <class Objective, class Oracle, class Score>
FtgResult follow_the_gradient(const Objective& f, Oracle& oracle, std::span<const double> start_direction, int budget,
                              Score&& score) {
  if (budget < 1) throw std::invalid_argument("follow_the_gradient: budget must be at least 1");
  FtgResult out;
  LmoResult r = oracle.minimize(start_direction);
  if (!r.ok()) return out;
  std::unordered_set<PointKey, PointKeyHash> seen;
  seen.insert(PointKey(r.vertex));
  out.visited.push_back(std::move(r.vertex));
  while (out.steps < budget) {
    ++out.steps;
    r = oracle.minimize(f.gradient(out.visited.back()));
    if (!r.ok()) break;
    if (!seen.insert(PointKey(r.vertex)).second) {
      out.cycled = true;
      break;
    }
    out.visited.push_back(std::move(r.vertex));
  }
  double best = kInf;
  for (std::size_t i = 0; i < out.visited.size(); ++i) {
    const double s = score(out.visited[i]);
    if (!out.best || s < best) {
      best = s;
      out.best = i;
    }
  }
  return out;
}

template <class Objective, class Oracle>
FtgResult follow_the_gradient(const Objective& f, Oracle& oracle, std::span<const double> start_direction,
                              int budget = 50) {
  return follow_the_gradient(f, oracle, start_direction, budget,
                             [&](const std::vector<double>& v) { return f.value(v); });
}

/// Variables on which all active-set vertices agree are fixed; the others are
/// boxed by the hull of the vertices. None unless strictly more than half agree.
inline std::optional<Neighborhood> asens_neighborhood(const ActiveSet& as, const Problem& p, double tol = 1e-6) {
  if (as.size() < 2) return std::nullopt;
  Neighborhood nb;
  nb.total = p.n;
  nb.lb.resize(p.n);
  nb.ub.resize(p.n);
  for (int k = 0; k < p.n; ++k) {
    double lo = kInf, hi = -kInf;
    for (const auto& v : as.vertices()) {
      lo = std::min(lo, v[k]);
      hi = std::max(hi, v[k]);
    }
    const bool integral = is_integral_kind(p.kinds[k]);
    if (hi - lo <= tol) {
      ++nb.agreeing;
      const double c = integral ? std::round(lo) : lo;
      nb.lb[k] = nb.ub[k] = std::clamp(c, p.lb[k], p.ub[k]);
    } else if (integral) {
      nb.lb[k] = std::max(std::floor(lo + tol), std::ceil(p.lb[k] - 1e-9));
      nb.ub[k] = std::min(std::ceil(hi - tol), std::floor(p.ub[k] + 1e-9));
    } else {
      nb.lb[k] = std::max(lo, p.lb[k]);
      nb.ub[k] = std::min(hi, p.ub[k]);
    }
  }
  if (!strict_majority(nb.agreeing, nb.total)) return std::nullopt;
  return nb;
}

inline std::optional<std::vector<double>> asens(const ActiveSet& as, const Problem& p, const SubSolve& solve) {
  auto nb = asens_neighborhood(as, p);
  if (!nb) return std::nullopt;
  return solve(*nb);
}

/// Variables where incumbent and relaxation agree within `tol` are fixed to the
/// incumbent value. None unless strictly more than half agree.
inline std::optional<Neighborhood> rins_neighborhood(std::span<const double> incumbent, std::span<const double> relax,
                                                     const Problem& p, double tol = 1e-6) {
  Neighborhood nb;
  nb.total = p.n;
  nb.lb = p.lb;
  nb.ub = p.ub;
  for (int k = 0; k < p.n; ++k) {
    if (std::abs(incumbent[k] - relax[k]) > tol) continue;
    ++nb.agreeing;
    nb.lb[k] = nb.ub[k] = incumbent[k];
  }
  if (!strict_majority(nb.agreeing, nb.total)) return std::nullopt;
  return nb;
}

inline std::optional<std::vector<double>> rins(std::span<const double> incumbent, std::span<const double> relax,
                                               const Problem& p, const SubSolve& solve) {
  auto nb = rins_neighborhood(incumbent, relax, p);
  if (!nb) return std::nullopt;
  return solve(*nb);
}

/// Variables of quadratic terms (objective and quadratic constraints), with an
/// edge per bilinear pair and squared variables marked as forced.
struct NonlinearityGraph {
  int n = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<bool> in_graph;
  std::vector<bool> forced;

  static NonlinearityGraph build(const Problem& p) {
    NonlinearityGraph g;
    g.n = p.n;
    g.in_graph.assign(p.n, false);
    g.forced.assign(p.n, false);
    std::set<std::pair<int, int>> seen;
    auto add = [&](const std::vector<QuadTerm>& terms) {
      for (const auto& t : terms) {
        if (t.coef == 0.0) continue;
        g.in_graph[t.i] = g.in_graph[t.j] = true;
        if (t.i == t.j)
          g.forced[t.i] = true;
        else if (seen.insert({std::min(t.i, t.j), std::max(t.i, t.j)}).second)
          g.edges.push_back({std::min(t.i, t.j), std::max(t.i, t.j)});
      }
    };
    add(p.objective_terms);
    for (const auto& c : p.constraints) add(c.terms);
    return g;
  }

  std::vector<int> degree() const {
    std::vector<int> d(n, 0);
    for (auto [i, j] : edges) {
      ++d[i];
      ++d[j];
    }
    return d;
  }

  bool is_cover(const std::vector<bool>& cover) const {
    for (int k = 0; k < n; ++k)
      if (forced[k] && !cover[k]) return false;
    for (auto [i, j] : edges)
      if (!cover[i] && !cover[j]) return false;
    return true;
  }
};

/// Forced variables plus, repeatedly, the endpoint of largest remaining degree
/// (lowest index on ties) until every edge is covered.
inline std::vector<bool> greedy_cover(const NonlinearityGraph& g) {
  std::vector<bool> cover = g.forced;
  for (;;) {
    std::vector<int> deg(g.n, 0);
    for (auto [i, j] : g.edges) {
      if (cover[i] || cover[j]) continue;
      ++deg[i];
      ++deg[j];
    }
    const auto it = std::max_element(deg.begin(), deg.end());
    if (it == deg.end() || *it == 0) break;
    cover[it - deg.begin()] = true;
  }
  return cover;
}

struct CoverResult {
  std::vector<bool> cover;
  bool optimal = false;
};

/// Minimum vertex cover containing the forced set, by the internal MIP; falls
/// back to the greedy cover when the MIP does not finish in `time_budget`.
inline CoverResult min_vertex_cover(const NonlinearityGraph& g, double time_budget = 1.0) {
  Region r;
  r.lb.assign(g.n, 0.0);
  r.ub.assign(g.n, 0.0);
  r.integer.assign(g.n, true);
  for (int k = 0; k < g.n; ++k) {
    if (g.in_graph[k]) r.ub[k] = 1.0;
    if (g.forced[k]) r.lb[k] = 1.0;
  }
  for (auto [i, j] : g.edges) r.rows.push_back({{{i, 1.0}, {j, 1.0}}, 1.0, Sense::GE});
  const std::vector<double> ones(g.n, 1.0);
  LmoOptions opt;
  opt.time_budget = time_budget;
  LmoResult res = mip_lmo(ones, r, opt);
  CoverResult out;
  if (res.status == LmoStatus::Optimal) {
    out.cover.resize(g.n);
    for (int k = 0; k < g.n; ++k) out.cover[k] = res.vertex[k] > 0.5;
    out.optimal = true;
  } else {
    out.cover = greedy_cover(g);
  }
  return out;
}

/// Quadratic terms (objective and constraints) whose variables are all free
/// under the given bounds.
inline int free_quadratic_terms(const Problem& p, std::span<const double> lb, std::span<const double> ub) {
  auto fixed = [&](int k) { return lb[k] == ub[k]; };
  int count = 0;
  auto scan = [&](const std::vector<QuadTerm>& terms) {
    for (const auto& t : terms)
      if (t.coef != 0.0 && !fixed(t.i) && !fixed(t.j)) ++count;
  };
  scan(p.objective_terms);
  for (const auto& c : p.constraints) scan(c.terms);
  return count;
}

/// The model with the fixings in (lb, ub) substituted: a linear objective and
/// a region whose rows include the linearized quadratic constraints. Throws if
/// a quadratic term has two free variables.
struct Linearization {
  std::vector<double> direction;
  double constant = 0.0;
  Region region;
};

inline Linearization linearize(const Problem& p, std::span<const double> lb, std::span<const double> ub) {
  auto fixed = [&](int k) { return lb[k] == ub[k]; };
  Linearization out;
  out.region.lb.assign(lb.begin(), lb.end());
  out.region.ub.assign(ub.begin(), ub.end());
  out.region.integer.resize(p.n);
  for (int k = 0; k < p.n; ++k) out.region.integer[k] = is_integral_kind(p.kinds[k]);

  auto substitute = [&](const std::vector<QuadTerm>& terms, std::vector<double>& lin, double& constant) {
    for (const auto& t : terms) {
      if (fixed(t.i) && fixed(t.j))
        constant += t.coef * lb[t.i] * lb[t.j];
      else if (fixed(t.i))
        lin[t.j] += t.coef * lb[t.i];
      else if (fixed(t.j))
        lin[t.i] += t.coef * lb[t.j];
      else
        throw std::logic_error("linearize: quadratic term between free variables");
    }
  };
  out.direction = p.objective_linear;
  out.constant = p.objective_constant;
  substitute(p.objective_terms, out.direction, out.constant);
  for (const auto& c : p.constraints) {
    std::vector<double> lin(p.n, 0.0);
    double constant = c.constant;
    for (const auto& t : c.linear) lin[t.index] += t.coef;
    substitute(c.terms, lin, constant);
    LinearRow row;
    for (int k = 0; k < p.n; ++k)
      if (lin[k] != 0.0) row.coefs.push_back({k, lin[k]});
    row.rhs = -constant;
    row.sense = c.sense;
    out.region.rows.push_back(std::move(row));
  }
  return out;
}

struct UndercoverResult {
  CoverResult cover;
  std::vector<double> lb, ub;
  std::optional<std::vector<double>> candidate;
};

/// Fixes a vertex cover of the nonlinearity graph to the reference values and
/// solves the remaining MILP with the internal MIP.
inline UndercoverResult undercover(const Problem& p, std::span<const double> reference,
                                   const SubproblemBudget& budget = {}) {
  UndercoverResult out;
  const auto g = NonlinearityGraph::build(p);
  out.cover = min_vertex_cover(g, std::min(1.0, budget.time_slice));
  out.lb = p.lb;
  out.ub = p.ub;
  for (int k = 0; k < p.n; ++k) {
    if (!out.cover.cover[k]) continue;
    double v = std::clamp(reference[k], p.lb[k], p.ub[k]);
    if (is_integral_kind(p.kinds[k])) v = std::clamp(std::round(v), std::ceil(p.lb[k] - 1e-9), std::floor(p.ub[k] + 1e-9));
    out.lb[k] = out.ub[k] = v;
  }
  Linearization lin = linearize(p, out.lb, out.ub);
  LmoOptions opt;
  opt.time_budget = budget.time_slice;
  opt.node_cap = budget.node_cap * 50;
  LmoResult r = mip_lmo(lin.direction, lin.region, opt);
  if (r.trusted()) out.candidate = std::move(r.vertex);
  return out;
}

struct QuboResult {
  std::vector<double> point;
  int sweeps = 0;
  std::vector<double> values;  // objective after each half-sweep
};

/// Two-coloring of the bilinear interaction graph; throws when it is not bipartite.
inline std::vector<int> bipartition(int n, std::span<const QuadTerm> terms) {
  std::vector<std::vector<int>> adj(n);
  for (const auto& t : terms) {
    if (t.i == t.j || t.coef == 0.0) continue;
    adj[t.i].push_back(t.j);
    adj[t.j].push_back(t.i);
  }
  std::vector<int> color(n, -1);
  for (int s = 0; s < n; ++s) {
    if (color[s] >= 0) continue;
    color[s] = 0;
    std::queue<int> q;
    q.push(s);
    while (!q.empty()) {
      const int u = q.front();
      q.pop();
      for (int w : adj[u]) {
        if (color[w] < 0) {
          color[w] = 1 - color[u];
          q.push(w);
        } else if (color[w] == color[u]) {
          throw std::invalid_argument("bipartite_qubo_improve: interaction graph is not bipartite");
        }
      }
    }
  }
  return color;
}

inline double qubo_value(std::span<const QuadTerm> terms, std::span<const double> d, std::span<const double> x) {
  return eval_terms(terms, x) + dot(d, x);
}

/// Alternating exact minimization over the two sides of a bipartite binary
/// quadratic: with one side fixed the objective is separable in the other.
/// A zero effective coefficient keeps the current value.
inline QuboResult bipartite_qubo_improve(std::span<const QuadTerm> terms, std::span<const double> d,
                                         std::span<const double> x0, int max_sweeps = 100) {
  const int n = static_cast<int>(x0.size());
  const auto color = bipartition(n, terms);
  std::vector<double> diag(n, 0.0);
  std::vector<std::vector<std::pair<int, double>>> adj(n);
  for (const auto& t : terms) {
    if (t.i == t.j) {
      diag[t.i] += t.coef;
    } else {
      adj[t.i].push_back({t.j, t.coef});
      adj[t.j].push_back({t.i, t.coef});
    }
  }
  QuboResult out;
  out.point.assign(x0.begin(), x0.end());
  auto& x = out.point;
  while (out.sweeps < max_sweeps) {
    ++out.sweeps;
    bool changed = false;
    for (int side = 0; side < 2; ++side) {
      for (int i = 0; i < n; ++i) {
        if (color[i] != side) continue;
        double coef = d[i] + diag[i];
        for (auto [j, q] : adj[i]) coef += q * x[j];
        const double next = coef < 0.0 ? 1.0 : coef > 0.0 ? 0.0 : x[i];
        changed = changed || next != x[i];
        x[i] = next;
      }
      out.values.push_back(qubo_value(terms, d, x));
    }
    if (!changed) break;
  }
  return out;
}

}  // namespace fwmiq
