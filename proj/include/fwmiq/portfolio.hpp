// SPDX-License-Identifier: Apache-2.0
#pragma once

// Parallel portfolio: W workers with different penalty exponents or
// convexification proportions share one incumbent store.

#include <atomic>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "fwmiq/bnb.hpp"
#include "fwmiq/report.hpp"

namespace fwmiq {

struct PortfolioConfig {
  double time_limit = 300.0;
  int workers = 8;
  std::vector<double> p_grid{1.2, 1.3, 1.4, 1.5, 1.6, 1.7, 1.8};
  std::vector<double> ell_grid{0.6, 0.7, 0.8, 0.9, 1.0};
  int fw_iter = 10;
  long restart_interval = 100;
  std::uint64_t seed = 0;
  long node_limit = 0;
  bool asens = true;
  bool undercover = true;
  bool rins = true;
  bool ftg = true;
  bool qubo_bipartite = false;
  std::optional<double> reference;

  void validate() const {
    if (workers < 1) throw std::invalid_argument("workers must be at least 1");
    if (!(time_limit >= 0.0)) throw std::invalid_argument("time limit must be nonnegative");
    if (p_grid.empty()) throw std::invalid_argument("p grid is empty");
    for (double p : p_grid)
      if (!(p > 1.0) || !std::isfinite(p)) throw std::invalid_argument("p values must lie in (1, inf)");
    if (ell_grid.empty()) throw std::invalid_argument("ell grid is empty");
    for (double l : ell_grid)
      if (!(l >= 0.0 && l <= 1.0)) throw std::invalid_argument("ell values must lie in [0, 1]");
    if (fw_iter < 1) throw std::invalid_argument("fw-iter must be at least 1");
    if (restart_interval < 0) throw std::invalid_argument("restart interval must be nonnegative");
  }
};

struct WorkerAssignment {
  double p = 1.5;
  std::optional<double> ell;
  std::uint64_t seed = 0;
};

enum class GridKind { Penalty, Convexification, Default };

/// The penalty grid applies when quadratic constraints exist, the
/// convexification grid to all-binary models without them.
inline GridKind grid_kind(const Problem& p) {
  if (p.has_quadratic_constraints()) return GridKind::Penalty;
  if (p.all_binary()) return GridKind::Convexification;
  return GridKind::Default;
}

/// Static round-robin assignment; worker i gets seed base + i.
inline std::vector<WorkerAssignment> assign_workers(const Problem& p, const PortfolioConfig& cfg) {
  const GridKind kind = grid_kind(p);
  std::vector<WorkerAssignment> out(cfg.workers);
  for (int w = 0; w < cfg.workers; ++w) {
    out[w].seed = cfg.seed + static_cast<std::uint64_t>(w);
    if (kind == GridKind::Penalty) out[w].p = cfg.p_grid[w % cfg.p_grid.size()];
    if (kind == GridKind::Convexification) out[w].ell = cfg.ell_grid[w % cfg.ell_grid.size()];
  }
  return out;
}

inline SolverOptions worker_options(const PortfolioConfig& cfg, const WorkerAssignment& a) {
  SolverOptions o;
  o.p = a.p;
  o.ell = a.ell;
  o.seed = a.seed;
  o.fw_iter = cfg.fw_iter;
  o.restart_interval = cfg.restart_interval;
  o.node_limit = cfg.node_limit;
  o.time_limit = cfg.time_limit;
  o.asens = cfg.asens;
  o.undercover = cfg.undercover;
  o.rins = cfg.rins;
  o.ftg = cfg.ftg;
  o.qubo_bipartite = cfg.qubo_bipartite;
  return o;
}

inline ConfigEcho config_echo(const PortfolioConfig& cfg, const std::vector<WorkerAssignment>& assignments) {
  ConfigEcho e;
  e.time_limit = cfg.time_limit;
  e.workers = cfg.workers;
  for (const auto& a : assignments) {
    e.p.push_back(a.p);
    e.ell.push_back(a.ell);
    e.seeds.push_back(a.seed);
  }
  e.fw_iter = cfg.fw_iter;
  e.restart_interval = cfg.restart_interval;
  e.node_limit = cfg.node_limit;
  e.heuristics = {{"asens", cfg.asens},
                  {"undercover", cfg.undercover},
                  {"rins", cfg.rins},
                  {"ftg", cfg.ftg},
                  {"qubo_bipartite", cfg.qubo_bipartite}};
  return e;
}

struct PortfolioResult {
  SolveTrace trace;
  std::vector<WorkerAssignment> assignments;
  std::vector<SearchStats> workers;
  RunReport report;
};

/// Presolves once and runs the workers until the time limit, the node limit
/// or exhaustion of every tree. The merged trace is the shared store's event
/// list.
inline PortfolioResult run_portfolio(const Problem& problem, const PortfolioConfig& cfg,
                                     const std::atomic<bool>* external_stop = nullptr) {
  cfg.validate();
  PortfolioResult out;
  out.assignments = assign_workers(problem, cfg);
  IncumbentStore store;
  const PresolveResult pre = presolve(problem);
  out.workers.resize(cfg.workers);
  std::vector<SolveTrace> traces(cfg.workers);

  auto work = [&](int w) {
    traces[w] = solve_presolved(pre, worker_options(cfg, out.assignments[w]), &store, external_stop, &out.workers[w]);
  };
  if (cfg.workers == 1) {
    work(0);
  } else {
    std::vector<std::thread> threads;
    for (int w = 0; w < cfg.workers; ++w) threads.emplace_back(work, w);
    for (auto& t : threads) t.join();
  }

  SolveTrace& t = out.trace;
  t.time_limit = cfg.time_limit;
  t.events = store.events();
  if (auto snap = store.snapshot()) {
    t.best = snap->value;
    t.best_point = snap->original_point;
  }
  t.status = t.best ? SolveStatus::Feasible : SolveStatus::NoSolution;
  for (const auto& s : traces) {
    t.nodes += s.nodes;
    t.restarts += s.restarts;
  }
  t.reason = traces.empty() ? "" : traces.front().reason;
  for (const auto& s : traces)
    if (s.reason == "time_limit") t.reason = "time_limit";
  t.elapsed = std::chrono::duration<double>(Clock::now() - store.start()).count();
  out.report = make_report(t, problem.maximize, problem.name, config_echo(cfg, out.assignments), cfg.reference);
  return out;
}

}  // namespace fwmiq
