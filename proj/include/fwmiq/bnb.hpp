// SPDX-License-Identifier: Apache-2.0
#pragma once

// Depth-first branch-and-bound with Frank-Wolfe node relaxations, run as a
// primal heuristic: nodes are never pruned by bounds, every vertex and rounded
// iterate goes through the solution pool, and the tree is restarted
// periodically.

#include <atomic>
#include <chrono>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include "fwmiq/active_set.hpp"
#include "fwmiq/fw.hpp"
#include "fwmiq/lmo.hpp"
#include "fwmiq/lns.hpp"
#include "fwmiq/penalty.hpp"
#include "fwmiq/pool.hpp"
#include "fwmiq/presolve.hpp"

namespace fwmiq {

struct Node {
  std::vector<double> lb, ub;
  ActiveSet active_set;            // inherited; may be empty
  std::vector<double> direction;   // LMO direction used when the inherited set is empty
  int depth = 0;
  long index = 0;
};

/// Integer variable maximizing min(frac, 1 - frac) among those with frac in
/// (1e-6, 1 - 1e-6); ties go to the lowest index.
inline std::optional<int> select_branching_variable(std::span<const double> x, const std::vector<bool>& integer,
                                                    std::span<const double> lb, std::span<const double> ub) {
  std::vector<bool> candidates = integer;
  for (std::size_t k = 0; k < x.size(); ++k)
    if (lb[k] == ub[k]) candidates[k] = false;
  return most_fractional(x, candidates, 1e-6);
}

/// Splits `node` on x_k: the down child gets ub_k = floor(x_k), the up child
/// lb_k = ceil(x_k). The parent's vertices go to the child whose bounds they
/// satisfy; a child without vertices will start from a fresh LMO call along
/// the gradient at the parent iterate.
inline std::pair<Node, Node> branch(const Node& node, int k, std::span<const double> x,
                                    std::span<const double> gradient, long& next_index) {
  const double down_ub = std::floor(x[k]);
  const double up_lb = std::ceil(x[k]);
  Node down, up;
  down.lb = up.lb = node.lb;
  down.ub = up.ub = node.ub;
  down.ub[k] = down_ub;
  up.lb[k] = up_lb;
  down.depth = up.depth = node.depth + 1;
  down.index = next_index++;
  up.index = next_index++;

  std::vector<std::vector<double>> dv, uv;
  std::vector<double> dw, uw;
  const auto& as = node.active_set;
  for (std::size_t i = 0; i < as.size(); ++i) {
    const auto& v = as.vertex(i);
    if (v[k] <= down_ub + 1e-9) {
      dv.push_back(v);
      dw.push_back(as.weight(i));
    } else if (v[k] >= up_lb - 1e-9) {
      uv.push_back(v);
      uw.push_back(as.weight(i));
    }
  }
  if (!dv.empty()) down.active_set = ActiveSet(dv, dw);
  if (!uv.empty()) up.active_set = ActiveSet(uv, uw);
  down.direction.assign(gradient.begin(), gradient.end());
  up.direction = down.direction;
  return {std::move(down), std::move(up)};
}

enum class RestartAction { Continue, Warm, Random };

struct RestartState {
  long nodes = 0;
  bool has_incumbent = false;
  RestartAction last = RestartAction::Continue;  // most recent restart kind
};

/// Every `interval` nodes a restart: warm (from the incumbent) and random
/// alternate, warm first when an incumbent exists, random without one.
inline RestartAction restart_policy(const RestartState& s, long interval) {
  if (interval <= 0 || s.nodes == 0 || s.nodes % interval != 0) return RestartAction::Continue;
  if (!s.has_incumbent) return RestartAction::Random;
  return s.last == RestartAction::Warm ? RestartAction::Random : RestartAction::Warm;
}

struct SolverOptions {
  double p = 1.5;
  std::optional<double> ell;  // convexification proportion, all-binary models only
  int fw_iter = 10;
  double fw_eps = 1e-4;
  long restart_interval = 100;  // 0 disables restarts
  std::uint64_t seed = 0;
  long node_limit = 0;  // 0 means unlimited
  double time_limit = 300.0;
  double lmo_time_budget = 1.0;
  bool rounding = true;
  int probability_trials = 10;
  bool ftg = true;
  int ftg_budget = 50;
  bool asens = true;
  bool undercover = true;
  bool rins = true;
  bool qubo_bipartite = false;
  SubproblemBudget sub_budget;
};

struct SearchStats {
  long nodes = 0;
  long restarts = 0;
  std::string reason;
  bool root_infeasible = false;
  std::optional<double> best_value;  // best original-feasible value submitted by this search
  std::vector<double> best_point;    // reformulated space
  long asens_runs = 0, rins_runs = 0, undercover_runs = 0, ftg_runs = 0;
};

/// One depth-first tree over a region of the reformulated model. Sub-solves
/// for the neighborhood heuristics are nested TreeSearch instances sharing the
/// pool.
class TreeSearch {
 public:
  TreeSearch(const SmoothObjective& f, const Problem& model, Region region, SolutionPool& pool,
             const SolverOptions& opt, Clock::time_point deadline, const std::atomic<bool>* stop = nullptr,
             int depth = 0)
      : f_(f), model_(model), root_(std::move(region)), pool_(pool), opt_(opt), deadline_(deadline), stop_(stop),
        depth_(depth), rng_(opt.seed) {
    has_binary_ = std::find(model.kinds.begin(), model.kinds.end(), VarKind::Binary) != model.kinds.end();
    if (opt_.qubo_bipartite && model.all_binary() && model.constraints.empty()) {
      try {
        bipartition(model.n, model.objective_terms);
        qubo_ok_ = true;
      } catch (const std::invalid_argument&) {
        qubo_ok_ = false;
      }
    }
  }

  SearchStats run() {
    SearchStats& st = stats_;
    std::vector<Node> stack;
    stack.push_back(root_node(RestartAction::Continue));
    long next_index = 1;
    RestartAction last = RestartAction::Continue;
    bool first = true;
    while (true) {
      if (out_of_time()) {
        st.reason = "time_limit";
        break;
      }
      if (opt_.node_limit > 0 && st.nodes >= opt_.node_limit) {
        st.reason = "node_limit";
        break;
      }
      if (stack.empty()) {
        st.reason = "tree_exhausted";
        break;
      }
      Node node = std::move(stack.back());
      stack.pop_back();
      const bool epoch_root = node.depth == 0;
      const bool feasible = process(node, stack, next_index, epoch_root);
      if (first && !feasible) {
        st.root_infeasible = true;
        st.reason = "root_infeasible";
        ++st.nodes;
        break;
      }
      first = false;
      ++st.nodes;

      const bool boundary = opt_.restart_interval > 0 && st.nodes % opt_.restart_interval == 0;
      if (!boundary) continue;
      if (auto* store = pool_.store()) shared_ = store->snapshot();
      RestartState rs{st.nodes, known_incumbent().has_value(), last};
      const RestartAction action = restart_policy(rs, opt_.restart_interval);
      ++st.restarts;
      last = action;
      stack.clear();
      undercover_done_ = false;
      stack.push_back(root_node(action));
    }
    return st;
  }

  const SearchStats& stats() const { return stats_; }

 private:
  bool out_of_time() const {
    return (stop_ && stop_->load(std::memory_order_relaxed)) || Clock::now() >= deadline_;
  }

  /// Best feasible point this worker knows: its own pool or the shared value
  /// read at the last restart.
  std::optional<std::vector<double>> known_incumbent() const {
    const PoolEntry* own = pool_.incumbent();
    if (shared_ && (!own || shared_->value < own->objective)) return shared_->point;
    if (own) return own->point;
    return std::nullopt;
  }

  Node root_node(RestartAction kind) {
    Node n;
    n.lb = root_.lb;
    n.ub = root_.ub;
    n.index = 0;
    if (kind == RestartAction::Warm) {
      if (auto inc = known_incumbent(); inc && root_.contains(*inc)) n.active_set = ActiveSet(*inc);
    }
    if (kind == RestartAction::Random) {
      std::normal_distribution<double> normal(0.0, 1.0);
      n.direction.resize(model_.n);
      for (auto& d : n.direction) d = normal(rng_);
    } else {
      std::vector<double> center(model_.n);
      for (int k = 0; k < model_.n; ++k) center[k] = 0.5 * (root_.lb[k] + root_.ub[k]);
      n.direction = f_.gradient(center);
    }
    return n;
  }

  void submit(std::span<const double> x) {
    const SubmitResult r = pool_.submit(x);
    if (r.feasible && (!stats_.best_value || r.objective < *stats_.best_value)) {
      stats_.best_value = r.objective;
      stats_.best_point.assign(x.begin(), x.end());
    }
  }

  LmoOptions lmo_options() const {
    LmoOptions o;
    const double remaining = std::chrono::duration<double>(deadline_ - Clock::now()).count();
    o.time_budget = std::max(0.0, std::min(opt_.lmo_time_budget, remaining));
    o.stop = stop_;
    return o;
  }

  Region node_region(const Node& node) const {
    Region r = root_;
    r.lb = node.lb;
    r.ub = node.ub;
    return r;
  }

  /// Relaxes, evaluates and branches one node. Returns false when the node's
  /// region turned out to be empty.
  bool process(Node& node, std::vector<Node>& stack, long& next_index, bool epoch_root) {
    const Region region = node_region(node);
    LinearOracle oracle(region, &cache_, lmo_options());

    if (epoch_root && opt_.ftg && depth_ < opt_.sub_budget.depth_cap) {
      ++stats_.ftg_runs;
      auto ftg = follow_the_gradient(f_, oracle, node.direction, opt_.ftg_budget);
      for (const auto& v : ftg.visited) submit(v);
    }

    ActiveSet start = std::move(node.active_set);
    if (start.empty()) {
      LmoResult r = oracle.minimize(node.direction);
      if (!r.ok()) return false;
      submit(r.vertex);
      start = ActiveSet(std::move(r.vertex));
    }
    FwOptions fw;
    fw.max_iter = opt_.fw_iter;
    fw.eps = opt_.fw_eps;
    fw.deadline = deadline_;
    fw.stop = stop_;
    FwResult res = bpcg(f_, oracle, std::move(start), fw);
    if (res.infeasible) return false;

    for (const auto& v : res.vertices) submit(v);
    for (const auto& v : res.active_set.vertices()) submit(v);
    if (opt_.rounding) {
      const auto rounded = standard_rounding(res.x, model_);
      submit(rounded);
      if (qubo_ok_) submit(bipartite_qubo_improve(model_.objective_terms, model_.objective_linear, rounded).point);
      if (has_binary_ && opt_.probability_trials > 0) {
        for (const auto& c : probability_rounding(res.x, model_, region, opt_.probability_trials, rng_, &f_))
          submit(c);
      }
    }
    if (depth_ < opt_.sub_budget.depth_cap) run_neighborhood_heuristics(res);

    const auto k = select_branching_variable(res.x, root_.integer, node.lb, node.ub);
    if (!k) return true;
    node.active_set = std::move(res.active_set);
    auto [down, up] = branch(node, *k, res.x, f_.gradient(res.x), next_index);
    stack.push_back(std::move(up));
    stack.push_back(std::move(down));
    return true;
  }

  void run_neighborhood_heuristics(const FwResult& res) {
    if (out_of_time()) return;
    if (opt_.asens) {
      if (auto nb = asens_neighborhood(res.active_set, model_); nb && remember(*nb)) {
        ++stats_.asens_runs;
        sub_solve(*nb);
      }
    }
    const auto incumbent = known_incumbent();
    if (opt_.rins && incumbent && !out_of_time()) {
      if (auto nb = rins_neighborhood(*incumbent, res.x, model_); nb && remember(*nb)) {
        ++stats_.rins_runs;
        sub_solve(*nb);
      }
    }
    if (opt_.undercover && !undercover_done_ && !out_of_time()) {
      std::optional<std::vector<double>> reference = incumbent;
      if (!reference)
        if (const PoolEntry* any = pool_.best_any()) reference = any->point;
      if (reference) {
        undercover_done_ = true;
        ++stats_.undercover_runs;
        SubproblemBudget b = opt_.sub_budget;
        b.time_slice = std::min(b.time_slice, std::chrono::duration<double>(deadline_ - Clock::now()).count());
        if (b.time_slice > 0.0) {
          auto uc = undercover(model_, *reference, b);
          if (uc.candidate) submit(*uc.candidate);
        }
      }
    }
  }

  bool remember(const Neighborhood& nb) {
    std::vector<double> key = nb.lb;
    key.insert(key.end(), nb.ub.begin(), nb.ub.end());
    return tried_.insert(PointKey(key)).second;
  }

  std::optional<std::vector<double>> sub_solve(const Neighborhood& nb) {
    Region sub = root_;
    sub.lb = nb.lb;
    sub.ub = nb.ub;
    SolverOptions so = opt_;
    so.asens = so.rins = so.undercover = so.ftg = false;
    so.restart_interval = 0;
    so.node_limit = opt_.sub_budget.node_cap;
    so.seed = opt_.seed + 0x9e3779b9ULL * static_cast<std::uint64_t>(++sub_solves_);
    const auto slice = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(opt_.sub_budget.time_slice));
    const auto deadline = std::min(deadline_, Clock::now() + slice);
    TreeSearch child(f_, model_, std::move(sub), pool_, so, deadline, stop_, depth_ + 1);
    const SearchStats cs = child.run();
    if (cs.best_value && (!stats_.best_value || *cs.best_value < *stats_.best_value)) {
      stats_.best_value = cs.best_value;
      stats_.best_point = cs.best_point;
    }
    if (!cs.best_value) return std::nullopt;
    return cs.best_point;
  }

  const SmoothObjective& f_;
  const Problem& model_;
  Region root_;
  SolutionPool& pool_;
  SolverOptions opt_;
  Clock::time_point deadline_;
  const std::atomic<bool>* stop_;
  int depth_;
  Rng rng_;
  VertexCache cache_;
  SearchStats stats_;
  std::optional<IncumbentSnapshot> shared_;
  std::unordered_set<PointKey, PointKeyHash> tried_;
  bool undercover_done_ = false;
  bool has_binary_ = false;
  bool qubo_ok_ = false;
  long sub_solves_ = 0;
};

/// Model handed to the Frank-Wolfe relaxation: the reformulated model, with
/// the convexification shift applied when `ell` is set and every variable is
/// binary.
inline Problem relaxation_model(const Problem& reformulated, std::optional<double> ell) {
  if (ell && reformulated.all_binary()) return convexify_binary(reformulated, *ell).problem;
  return reformulated;
}

/// Runs one worker on an already presolved model.
inline SolveTrace solve_presolved(const PresolveResult& pre, const SolverOptions& opt, IncumbentStore* store = nullptr,
                                  const std::atomic<bool>* stop = nullptr, SearchStats* stats_out = nullptr) {
  IncumbentStore local;
  IncumbentStore* st = store ? store : &local;
  const auto start = st->start();
  SolveTrace trace;
  trace.time_limit = opt.time_limit;
  const auto deadline = start + std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(opt.time_limit));

  auto finish = [&](std::string reason, const SolutionPool* pool) {
    trace.reason = std::move(reason);
    trace.events = st->events();
    if (auto snap = st->snapshot()) {
      trace.best = snap->value;
      trace.best_point = snap->original_point;
    } else if (pool && pool->incumbent()) {
      trace.best = pool->incumbent()->objective;
      trace.best_point = pool->incumbent()->original_point;
    }
    trace.status = trace.best ? SolveStatus::Feasible : SolveStatus::NoSolution;
    trace.elapsed = std::chrono::duration<double>(Clock::now() - start).count();
    return trace;
  };

  if (!(opt.time_limit > 0.0)) return finish("time_limit", nullptr);
  if (pre.status == PresolveStatus::Infeasible) return finish("presolve_infeasible", nullptr);

  const Problem relax = relaxation_model(pre.reformulated, opt.ell);
  PenaltyOptions po;
  po.p = opt.p;
  const SmoothObjective f(relax, po);
  SolutionPool pool(pre, st);
  TreeSearch search(f, pre.reformulated, Region::from_problem(pre.reformulated), pool, opt, deadline, stop);
  const SearchStats s = search.run();
  trace.nodes = s.nodes;
  trace.restarts = s.restarts;
  if (stats_out) *stats_out = s;
  return finish(s.reason, &pool);
}

/// Presolves and runs a single worker.
inline SolveTrace solve(const Problem& problem, const SolverOptions& opt, IncumbentStore* store = nullptr,
                        const std::atomic<bool>* stop = nullptr, SearchStats* stats_out = nullptr) {
  const PresolveResult pre = presolve(problem);
  return solve_presolved(pre, opt, store, stop, stats_out);
}

}  // namespace fwmiq
