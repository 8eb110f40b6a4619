// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "fwmiq/metrics.hpp"
#include "fwmiq/report.hpp"
#include "random_instances.hpp"

using namespace fwmiq;
using Catch::Approx;

TEST_CASE("primal gap", "[metrics]") {
  CHECK(primal_gap(std::nullopt, 5.0) == 1.0);
  CHECK(primal_gap(0.0, 0.0) == 0.0);
  CHECK(primal_gap(-1.0, 2.0) == 1.0);
  CHECK(primal_gap(90.0, 100.0) == Approx(0.1));
  CHECK(primal_gap(100.0, 90.0) == Approx(0.1));
  CHECK(primal_gap(-90.0, -100.0) == Approx(0.1));
  CHECK(primal_gap(0.0, 3.0) == 1.0);
}

TEST_CASE("primal gap is bounded", "[metrics][property]") {
  testing::Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double a = testing::uniform(rng, -1e3, 1e3), b = testing::uniform(rng, -1e3, 1e3);
    const double g = primal_gap(a, b);
    CHECK(g >= 0.0);
    CHECK(g <= 1.0);
    CHECK(primal_gap(b, a) == g);
    CHECK(primal_gap(a, a) == 0.0);
  }
}

TEST_CASE("primal integral", "[metrics]") {
  CHECK(primal_integral({{}, 300.0, std::nullopt}) == 300.0);
  CHECK(primal_integral({{{10.0, 100.0}}, 100.0, 100.0}) == Approx(10.0));
  // gap 1 on [0, 10], 0.1 on [10, 50], 0 afterwards
  const IncumbentTrace t{{{10.0, 90.0}, {50.0, 100.0}}, 100.0, 100.0};
  CHECK(primal_integral(t) == Approx(10.0 + 0.1 * 40.0));
  // without a reference the last value is used
  const IncumbentTrace u{{{10.0, 90.0}, {50.0, 100.0}}, 100.0, std::nullopt};
  CHECK(primal_integral(u) == Approx(primal_integral(t)));
  // events after the horizon do not count
  CHECK(primal_integral({{{200.0, 1.0}}, 100.0, 1.0}) == Approx(100.0));
}

TEST_CASE("primal integral against a Riemann sum", "[metrics][property]") {
  testing::Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const double T = testing::uniform(rng, 1, 50);
    const int m = testing::uniform_int(rng, 0, 6);
    std::vector<double> times(m);
    for (auto& v : times) v = testing::uniform(rng, 0, T);
    std::sort(times.begin(), times.end());
    IncumbentTrace tr;
    tr.horizon = T;
    double val = testing::uniform(rng, 10, 20);
    for (double t : times) {
      val -= testing::uniform(rng, 0, 2);
      tr.events.push_back({t, val});
    }
    tr.reference = val - testing::uniform(rng, 0, 1);
    const int steps = 200000;
    double riemann = 0.0;
    for (int s = 0; s < steps; ++s) {
      const double t = (s + 0.5) * T / steps;
      std::optional<double> cur;
      for (const auto& e : tr.events)
        if (e.time <= t) cur = e.objective;
      riemann += primal_gap(cur, *tr.reference) * T / steps;
    }
    const double pi = primal_integral(tr);
    CHECK(pi == Approx(riemann).margin(1e-3 * T));
    CHECK(pi >= 0.0);
    CHECK(pi <= T + 1e-12);
  }
}

TEST_CASE("time to first solution", "[metrics]") {
  CHECK(time_to_first({{}, 10.0, std::nullopt}, 10.0) == 10.0);
  CHECK(time_to_first({{{2.5, 1.0}, {3.0, 0.5}}, 10.0, std::nullopt}, 10.0) == 2.5);
}

TEST_CASE("shifted geometric mean", "[metrics]") {
  CHECK(shifted_geomean({0.0, 0.0}) == Approx(0.0).margin(1e-15));
  CHECK(shifted_geomean({3.0}) == Approx(3.0));
  CHECK(shifted_geomean({1.0, 7.0}) == Approx(3.0));  // sqrt(2 * 8) - 1
  CHECK(shifted_geomean({0.0, 8.0}, 2.0) == Approx(std::sqrt(20.0) - 2.0));
  CHECK_THROWS_AS(shifted_geomean({}), std::invalid_argument);
  CHECK_THROWS_AS(shifted_geomean({-1.0}), std::invalid_argument);
  CHECK_THROWS_AS(shifted_geomean({1.0}, 0.0), std::invalid_argument);
}

TEST_CASE("shifted geometric mean lies between min and max", "[metrics][property]") {
  testing::Rng rng(3);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> v(testing::uniform_int(rng, 1, 10));
    for (auto& x : v) x = testing::uniform(rng, 0, 100);
    const double g = shifted_geomean(v);
    CHECK(g >= *std::min_element(v.begin(), v.end()) - 1e-9);
    CHECK(g <= *std::max_element(v.begin(), v.end()) + 1e-9);
  }
}

TEST_CASE("report from a trace", "[metrics][report]") {
  SolveTrace t;
  t.time_limit = 10.0;
  t.events = {{1.23456, -5.0}, {4.0, -8.0}};
  t.best = -8.0;
  t.status = SolveStatus::Feasible;
  t.nodes = 12;
  t.reason = "time_limit";
  ConfigEcho cfg;
  cfg.time_limit = 10.0;
  cfg.p = {1.5};
  cfg.ell = {std::nullopt};
  cfg.seeds = {7};
  const RunReport r = make_report(t, true, "demo", cfg, 10.0);
  REQUIRE(r.best_objective);
  CHECK(*r.best_objective == 8.0);
  REQUIRE(r.events.size() == 2);
  CHECK(r.events[0].time == 1.235);
  CHECK(r.events[0].objective == 5.0);
  CHECK(r.ttf == 1.235);
  REQUIRE(r.gap);
  CHECK(*r.gap == Approx(0.2));
  CHECK(r.primal_integral == Approx(1.235 + 0.5 * (4.0 - 1.235) + 0.2 * 6.0));
}

TEST_CASE("reports survive a JSON round trip", "[metrics][report]") {
  SolveTrace t;
  t.time_limit = 5.0;
  t.events = {{0.5, 3.0}};
  t.best = 3.0;
  t.status = SolveStatus::Feasible;
  t.nodes = 4;
  t.restarts = 1;
  t.elapsed = 5.0004;
  t.reason = "time_limit";
  ConfigEcho cfg;
  cfg.time_limit = 5.0;
  cfg.workers = 2;
  cfg.p = {1.2, 1.8};
  cfg.ell = {0.5, std::nullopt};
  cfg.seeds = {1, 2};
  cfg.heuristics = {{"asens", true}, {"rins", false}};
  const RunReport a = make_report(t, false, "x.txt", cfg);
  const RunReport b = read_report(write_report(a));
  CHECK(b.instance == "x.txt");
  CHECK(b.status == SolveStatus::Feasible);
  CHECK(b.best_objective == a.best_objective);
  CHECK(b.events.size() == 1);
  CHECK(b.config.p == a.config.p);
  CHECK(b.config.ell == a.config.ell);
  CHECK(b.config.seeds == a.config.seeds);
  CHECK(b.config.heuristics == a.config.heuristics);
  CHECK_FALSE(b.reference);
  CHECK_FALSE(b.gap);
  CHECK(b.primal_integral == a.primal_integral);
  CHECK(b.elapsed == 5.0);
  CHECK(b.restarts == 1);
  CHECK(write_report(b) == write_report(a));

  const RunReport e = read_report(write_report(error_report("bad", "parse failure", 5.0)));
  CHECK(e.status == SolveStatus::Error);
  CHECK(e.error == "parse failure");
  CHECK(e.primal_integral == 5.0);
  CHECK_THROWS(read_report("{not json"));
}

TEST_CASE("metric example table", "[metrics]") {
  CHECK(primal_gap(0.0, 0.0) == 0.0);
  CHECK(primal_gap(5.0, -3.0) == 1.0);
  CHECK(primal_gap(12.0, 10.0) == 2.0 / 12.0);
  CHECK(primal_integral({{}, 300.0, std::nullopt}) == 300.0);
  CHECK(primal_integral({{{10.0, 20.0}}, 20.0, 10.0}) == 15.0);  // gap 0.5 from t = 10
  CHECK(primal_integral({{{0.0, 7.0}}, 20.0, 7.0}) == 0.0);
  CHECK(shifted_geomean({0.0, 0.0, 0.0}, 1.0) == 0.0);
  CHECK(shifted_geomean({1.0, 1.0}, 1.0) == Approx(1.0).margin(1e-12));
  CHECK(std::abs(shifted_geomean({3.0, 8.0}, 1.0) - 5.0) <= 1e-12);
}

TEST_CASE("an earlier improving incumbent never raises the integral", "[metrics][property]") {
  testing::Rng rng(4);
  for (int trial = 0; trial < 500; ++trial) {
    const double T = 100.0;
    IncumbentTrace tr;
    tr.horizon = T;
    tr.reference = 1.0;
    double t = 0.0, v = 50.0;
    for (int k = testing::uniform_int(rng, 0, 5); k > 0; --k) {
      t = testing::uniform(rng, t, T);
      v = testing::uniform(rng, 1.0, v);
      tr.events.push_back({t, v});
    }
    // insert an event that improves on whatever is active at time s
    const double s = testing::uniform(rng, 0, T);
    double active = 60.0;
    std::size_t at = 0;
    while (at < tr.events.size() && tr.events[at].time <= s) active = tr.events[at++].objective;
    IncumbentTrace more = tr;
    more.events.insert(more.events.begin() + static_cast<long>(at), {s, testing::uniform(rng, 1.0, active)});
    // later events that are now worse than the inserted one are dropped
    for (std::size_t k = at + 1; k < more.events.size();)
      if (more.events[k].objective >= more.events[at].objective) more.events.erase(more.events.begin() + static_cast<long>(k));
      else ++k;
    CHECK(primal_integral(more) <= primal_integral(tr) + 1e-9);
  }
}
