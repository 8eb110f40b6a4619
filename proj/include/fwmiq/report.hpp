// SPDX-License-Identifier: Apache-2.0
#pragma once

// Run reports: a JSON document per solver run with the incumbent trace, the
// configuration and the derived metrics.

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "fwmiq/metrics.hpp"
#include "fwmiq/pool.hpp"

namespace fwmiq {

struct ConfigEcho {
  double time_limit = 0.0;
  int workers = 1;
  std::vector<double> p;                   // per worker
  std::vector<std::optional<double>> ell;  // per worker
  std::vector<std::uint64_t> seeds;        // per worker
  int fw_iter = 10;
  long restart_interval = 100;
  long node_limit = 0;
  std::map<std::string, bool> heuristics;
};

struct RunReport {
  std::string instance;
  SolveStatus status = SolveStatus::NoSolution;
  std::optional<double> best_objective;  // original sense
  std::vector<TraceEvent> events;        // original sense
  ConfigEcho config;
  std::optional<double> reference;
  double ttf = 0.0;
  std::optional<double> gap;  // fraction in [0, 1]; only with a reference
  double primal_integral = 0.0;
  long nodes = 0;
  long restarts = 0;
  double elapsed = 0.0;
  std::string reason;
  std::string error;
};

inline double round_ms(double seconds) { return std::round(seconds * 1000.0) / 1000.0; }

/// Converts a trace to a report: objective values in the original sense, times
/// at millisecond resolution, metrics over the horizon [0, time limit].
inline RunReport make_report(const SolveTrace& trace, bool maximize, std::string instance, ConfigEcho config,
                             std::optional<double> reference = std::nullopt) {
  RunReport r;
  r.instance = std::move(instance);
  r.status = trace.status;
  r.config = std::move(config);
  r.reference = reference;
  const double sign = maximize ? -1.0 : 1.0;
  if (trace.best) r.best_objective = sign * *trace.best;
  for (const auto& e : trace.events) r.events.push_back({round_ms(e.time), sign * e.value});
  IncumbentTrace it{r.events, trace.time_limit, reference};
  r.ttf = round_ms(time_to_first(it, trace.time_limit));
  if (reference) r.gap = primal_gap(r.best_objective, *reference);
  r.primal_integral = primal_integral(it);
  r.nodes = trace.nodes;
  r.restarts = trace.restarts;
  r.elapsed = round_ms(trace.elapsed);
  r.reason = trace.reason;
  return r;
}

inline RunReport error_report(std::string instance, std::string message, double time_limit) {
  RunReport r;
  r.instance = std::move(instance);
  r.status = SolveStatus::Error;
  r.error = std::move(message);
  r.config.time_limit = time_limit;
  r.ttf = time_limit;
  r.primal_integral = time_limit;
  r.reason = "error";
  return r;
}

namespace detail {

inline nlohmann::ordered_json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

inline std::optional<double> optional_double(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
  return j.at(key).get<double>();
}

inline SolveStatus status_from_string(const std::string& s) {
  if (s == "feasible") return SolveStatus::Feasible;
  if (s == "no_solution") return SolveStatus::NoSolution;
  return SolveStatus::Error;
}

}  // namespace detail

/// JSON text with a fixed field order.
inline std::string write_report(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["instance"] = r.instance;
  j["status"] = to_string(r.status);
  j["best_objective"] = detail::optional_json(r.best_objective);
  ordered_json events = ordered_json::array();
  for (const auto& e : r.events) events.push_back({{"time", e.time}, {"objective", e.objective}});
  j["incumbents"] = std::move(events);

  ordered_json cfg;
  cfg["time_limit"] = r.config.time_limit;
  cfg["workers"] = r.config.workers;
  cfg["p"] = r.config.p;
  ordered_json ell = ordered_json::array();
  for (const auto& e : r.config.ell) ell.push_back(detail::optional_json(e));
  cfg["ell"] = std::move(ell);
  cfg["seeds"] = r.config.seeds;
  cfg["fw_iter"] = r.config.fw_iter;
  cfg["restart_interval"] = r.config.restart_interval;
  cfg["node_limit"] = r.config.node_limit;
  ordered_json heur = ordered_json::object();
  for (const auto& [k, v] : r.config.heuristics) heur[k] = v;
  cfg["heuristics"] = std::move(heur);
  j["config"] = std::move(cfg);

  ordered_json m;
  m["reference"] = detail::optional_json(r.reference);
  m["ttf"] = r.ttf;
  m["gap"] = detail::optional_json(r.gap);
  m["primal_integral"] = r.primal_integral;
  j["metrics"] = std::move(m);

  j["nodes"] = r.nodes;
  j["restarts"] = r.restarts;
  j["elapsed"] = r.elapsed;
  j["termination"] = r.reason;
  if (!r.error.empty()) j["error"] = r.error;
  return j.dump(2) + "\n";
}

/// Parses a report written by write_report. Throws nlohmann::json exceptions on
/// malformed input.
inline RunReport read_report(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  RunReport r;
  r.instance = j.value("instance", "");
  r.status = detail::status_from_string(j.value("status", "error"));
  r.best_objective = detail::optional_double(j, "best_objective");
  for (const auto& e : j.at("incumbents")) r.events.push_back({e.at("time").get<double>(), e.at("objective").get<double>()});
  const auto& cfg = j.at("config");
  r.config.time_limit = cfg.value("time_limit", 0.0);
  r.config.workers = cfg.value("workers", 1);
  if (cfg.contains("p")) r.config.p = cfg.at("p").get<std::vector<double>>();
  if (cfg.contains("ell"))
    for (const auto& e : cfg.at("ell")) r.config.ell.push_back(e.is_null() ? std::nullopt : std::optional<double>(e.get<double>()));
  if (cfg.contains("seeds")) r.config.seeds = cfg.at("seeds").get<std::vector<std::uint64_t>>();
  r.config.fw_iter = cfg.value("fw_iter", 10);
  r.config.restart_interval = cfg.value("restart_interval", 100L);
  r.config.node_limit = cfg.value("node_limit", 0L);
  if (cfg.contains("heuristics"))
    for (const auto& [k, v] : cfg.at("heuristics").items()) r.config.heuristics[k] = v.get<bool>();
  const auto& m = j.at("metrics");
  r.reference = detail::optional_double(m, "reference");
  r.ttf = m.value("ttf", r.config.time_limit);
  r.gap = detail::optional_double(m, "gap");
  r.primal_integral = m.value("primal_integral", r.config.time_limit);
  r.nodes = j.value("nodes", 0L);
  r.restarts = j.value("restarts", 0L);
  r.elapsed = j.value("elapsed", 0.0);
  r.reason = j.value("termination", "");
  r.error = j.value("error", "");
  return r;
}

}  // namespace fwmiq
