// SPDX-License-Identifier: Apache-2.0
// Command-line front end: `solve` runs the portfolio on one instance,
// `metrics` aggregates run reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fwmiq/fwmiq.hpp"

namespace {

int run_solve(const std::string& path, const std::string& format, const fwmiq::PortfolioConfig& cfg,
              const std::string& out_path) {
  std::string text;
  int code = 1;
  try {
    const fwmiq::Problem problem = fwmiq::load_problem(path, format);
    auto res = fwmiq::run_portfolio(problem, cfg);
    if (res.report.instance.empty()) res.report.instance = path;
    text = fwmiq::write_report(res.report);
    code = res.report.status == fwmiq::SolveStatus::Feasible ? 0 : 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    text = fwmiq::write_report(fwmiq::error_report(path, e.what(), cfg.time_limit));
    code = 1;
  }
  if (out_path.empty()) {
    std::cout << text;
  } else {
    std::ofstream out(out_path);
    if (!out) {
      std::cerr << "error: cannot write " << out_path << "\n";
      return 1;
    }
    out << text;
  }
  return code;
}

std::string fmt(double v, int precision = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", precision, v);
  return buf;
}

int run_metrics(const std::vector<std::string>& paths) {
  std::vector<fwmiq::RunReport> reports;
  for (const auto& p : paths) {
    try {
      reports.push_back(fwmiq::read_report(fwmiq::read_file(p)));
    } catch (const std::exception& e) {
      std::cerr << "error: " << p << ": " << e.what() << "\n";
      return 1;
    }
  }
  std::printf("%-32s %6s %10s %9s %10s\n", "instance", "Found", "TTF", "Gap", "PI");
  std::vector<double> ttf, gap, pi;
  int found = 0;
  for (const auto& r : reports) {
    const bool ok = r.status == fwmiq::SolveStatus::Feasible;
    found += ok;
    ttf.push_back(r.ttf);
    pi.push_back(r.primal_integral);
    std::string g = "-";
    if (r.gap) {
      gap.push_back(100.0 * *r.gap);
      g = fmt(100.0 * *r.gap) + "%";
    }
    std::printf("%-32s %6s %10s %9s %10s\n", r.instance.c_str(), ok ? "yes" : "no", fmt(r.ttf).c_str(), g.c_str(),
                fmt(r.primal_integral).c_str());
  }
  if (reports.empty()) return 0;
  const std::string gap_mean = gap.empty() ? "-" : fmt(fwmiq::shifted_geomean(gap, 1.0)) + "%";
  std::printf("%-32s %6d %10s %9s %10s\n", "shifted geomean", found, fmt(fwmiq::shifted_geomean(ttf, 1.0)).c_str(),
              gap_mean.c_str(), fmt(fwmiq::shifted_geomean(pi, 1.0)).c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frank-Wolfe branch-and-bound primal heuristic for MIQCQPs"};
  app.require_subcommand(1);

  fwmiq::PortfolioConfig cfg;
  std::string path, format, out_path;
  double reference = 0.0;
  bool no_asens = false, no_undercover = false, no_rins = false, no_ftg = false;
  auto* solve = app.add_subcommand("solve", "solve one instance");
  solve->add_option("path", path, "instance file")->required();
  solve->add_option("--format", format, "canonical or qplib (default: from extension)")
      ->check(CLI::IsMember({"canonical", "qplib"}));
  solve->add_option("--time-limit", cfg.time_limit, "seconds")->check(CLI::NonNegativeNumber);
  solve->add_option("--workers", cfg.workers, "parallel workers")->check(CLI::PositiveNumber);
  solve->add_option("--p", cfg.p_grid, "penalty exponents")->delimiter(',');
  solve->add_option("--ell", cfg.ell_grid, "convexification proportions")->delimiter(',');
  solve->add_option("--fw-iter", cfg.fw_iter, "Frank-Wolfe iterations per node")->check(CLI::PositiveNumber);
  solve->add_option("--restart", cfg.restart_interval, "nodes between restarts (0 disables)");
  solve->add_option("--node-limit", cfg.node_limit, "nodes per worker (0 = unlimited)");
  solve->add_option("--seed", cfg.seed, "base seed");
  auto* ref_opt = solve->add_option("--ref", reference, "reference objective for gap and primal integral");
  solve->add_flag("--no-asens", no_asens);
  solve->add_flag("--no-undercover", no_undercover);
  solve->add_flag("--no-rins", no_rins);
  solve->add_flag("--no-ftg", no_ftg);
  solve->add_flag("--qubo-bipartite", cfg.qubo_bipartite);
  solve->add_option("--out", out_path, "report file (default: stdout)");

  std::vector<std::string> reports;
  auto* metrics = app.add_subcommand("metrics", "aggregate run reports");
  metrics->add_option("reports", reports, "report files")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (*solve) {
    cfg.asens = !no_asens;
    cfg.undercover = !no_undercover;
    cfg.rins = !no_rins;
    cfg.ftg = !no_ftg;
    if (*ref_opt) cfg.reference = reference;
    try {
      cfg.validate();
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 1;
    }
    return run_solve(path, format, cfg, out_path);
  }
  return run_metrics(reports);
}
