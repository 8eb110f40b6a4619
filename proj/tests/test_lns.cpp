// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "fwmiq/lns.hpp"
#include "fwmiq/penalty.hpp"
#include "random_instances.hpp"

using namespace fwmiq;
using Catch::Approx;

namespace {

Problem binaries(int n) {
  Problem p;
  p.resize(n);
  for (int k = 0; k < n; ++k) {
    p.kinds[k] = VarKind::Binary;
    p.ub[k] = 1.0;
  }
  return p;
}

// Minimum cover size by enumeration over subsets.
int brute_cover_size(const NonlinearityGraph& g) {
  int best = g.n + 1;
  for (long mask = 0; mask < (1L << g.n); ++mask) {
    std::vector<bool> c(g.n);
    for (int k = 0; k < g.n; ++k) c[k] = (mask >> k) & 1;
    if (g.is_cover(c)) best = std::min(best, static_cast<int>(std::count(c.begin(), c.end(), true)));
  }
  return best;
}

}  // namespace

TEST_CASE("standard rounding", "[lns]") {
  Problem p;
  p.resize(3);
  p.kinds = {VarKind::Integer, VarKind::Integer, VarKind::Continuous};
  p.lb = {-5, 0, 0};
  p.ub = {5, 2, 5};
  CHECK(standard_rounding(std::vector<double>{0.4, 2.6, 1.3}, p) == std::vector<double>{0.0, 2.0, 1.3});
  p.ub[1] = 5;
  CHECK(standard_rounding(std::vector<double>{0.4, 2.6, 1.3}, p) == std::vector<double>{0.0, 3.0, 1.3});
  CHECK(standard_rounding(std::vector<double>{0.5, 0.5, 0.5}, p) == std::vector<double>{1.0, 1.0, 0.5});
  CHECK(standard_rounding(std::vector<double>{-0.5, 0.0, 0.0}, p)[0] == 0.0);
}

TEST_CASE("probability rounding", "[lns]") {
  Problem p = binaries(3);
  const Region region = Region::from_problem(p);
  Rng rng(9);
  const auto c = probability_rounding<SmoothObjective>(std::vector<double>{1.0, 0.0, 0.5}, p, region, 10, rng);
  REQUIRE(c.size() == 10);
  int ones = 0;
  for (const auto& v : c) {
    CHECK(v[0] == 1.0);
    CHECK(v[1] == 0.0);
    CHECK((v[2] == 0.0 || v[2] == 1.0));
    ones += v[2] == 1.0;
  }
  CHECK(ones > 0);
  CHECK(ones < 10);
}

TEST_CASE("probability rounding re-optimizes continuous variables", "[lns]") {
  Problem p;
  p.resize(2);
  p.kinds = {VarKind::Binary, VarKind::Continuous};
  p.ub = {1, 4};
  p.objective_terms = {{1, 1, 1.0}};
  p.objective_linear = {0.0, -3.0};  // continuous optimum at 1.5
  add_constraint(p, "link", {}, {{1, 1.0}, {0, -4.0}}, 0.0, Sense::LE);
  const Region region = Region::from_problem(p);
  const SmoothObjective f(p);
  Rng rng(1);
  const auto c = probability_rounding(std::vector<double>{1.0, 0.3}, p, region, 3, rng, &f);
  REQUIRE(c.size() == 3);
  for (const auto& v : c) {
    CHECK(v[0] == 1.0);
    CHECK(v[1] == Approx(1.5).margin(1e-2));
  }
}

TEST_CASE("follow the gradient cycles on the square", "[lns]") {
  Problem p = binaries(2);
  p.objective_terms = {{0, 0, 1.0}, {1, 1, 1.0}};
  p.objective_linear = {-1.0, -1.0};
  p.objective_constant = 0.5;
  const SmoothObjective f(p);
  const Region region = Region::from_problem(p);
  LinearOracle oracle(region);
  const auto r = follow_the_gradient(f, oracle, std::vector<double>{1.0, 1.0}, 50);
  REQUIRE(r.visited.size() == 2);
  CHECK(r.visited[0] == std::vector<double>{0.0, 0.0});
  CHECK(r.visited[1] == std::vector<double>{1.0, 1.0});
  CHECK(r.cycled);
  CHECK(r.steps == 2);
  REQUIRE(r.best);
  CHECK(f.value(r.visited[*r.best]) == Approx(0.5));
}

TEST_CASE("follow the gradient on a linear objective", "[lns]") {
  Problem p = binaries(2);
  p.objective_linear = {1.0, -1.0};
  const SmoothObjective f(p);
  const Region region = Region::from_problem(p);
  LinearOracle oracle(region);
  const auto r = follow_the_gradient(f, oracle, std::vector<double>{1.0, -1.0});
  CHECK(r.visited.size() == 1);
  CHECK(r.steps == 1);
  CHECK(r.cycled);

  const auto one = follow_the_gradient(f, oracle, std::vector<double>{-1.0, 1.0}, 1);
  CHECK(one.steps == 1);
  CHECK(one.visited.size() == 2);
  CHECK_FALSE(one.cycled);
  CHECK_THROWS_AS(follow_the_gradient(f, oracle, std::vector<double>{1.0, 1.0}, 0), std::invalid_argument);
}

TEST_CASE("ASENS neighborhood", "[lns]") {
  Problem p;
  p.resize(3);
  p.kinds = {VarKind::Binary, VarKind::Binary, VarKind::Continuous};
  p.ub = {1, 1, 1};
  const ActiveSet as({{1.0, 0.0, 0.2}, {1.0, 0.0, 0.7}}, {0.5, 0.5});
  const auto nb = asens_neighborhood(as, p);
  REQUIRE(nb);
  CHECK(nb->agreeing == 2);
  CHECK(nb->lb == std::vector<double>{1.0, 0.0, 0.2});
  CHECK(nb->ub == std::vector<double>{1.0, 0.0, 0.7});

  const ActiveSet apart({{0.0, 1.0, 0.2}, {1.0, 0.0, 0.7}}, {0.5, 0.5});
  CHECK_FALSE(asens_neighborhood(apart, p));
  CHECK_FALSE(asens_neighborhood(ActiveSet(std::vector<double>{1.0, 0.0, 0.2}), p));
}

TEST_CASE("ASENS needs a strict majority", "[lns]") {
  Problem p = binaries(4);
  const ActiveSet half({{1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 1.0, 0.0}}, {0.5, 0.5});
  CHECK_FALSE(asens_neighborhood(half, p));
  const ActiveSet more({{1.0, 0.0, 0.0, 1.0}, {1.0, 0.0, 0.0, 0.0}}, {0.5, 0.5});
  CHECK(asens_neighborhood(more, p));

  bool called = false;
  const SubSolve solve = [&](const Neighborhood&) {
    called = true;
    return std::optional<std::vector<double>>{};
  };
  CHECK_FALSE(asens(half, p, solve));
  CHECK_FALSE(called);
  asens(more, p, solve);
  CHECK(called);
}

TEST_CASE("ASENS integer hull", "[lns]") {
  Problem p;
  p.resize(3);
  p.kinds = {VarKind::Integer, VarKind::Integer, VarKind::Integer};
  p.ub = {9, 9, 9};
  const ActiveSet as({{2.0, 3.0, 1.0}, {2.0, 3.0, 4.0}}, {0.5, 0.5});
  const auto nb = asens_neighborhood(as, p);
  REQUIRE(nb);
  CHECK(nb->lb[2] == 1.0);
  CHECK(nb->ub[2] == 4.0);
}

TEST_CASE("RINS neighborhood", "[lns]") {
  Problem p = binaries(3);
  const std::vector<double> inc{1.0, 0.0, 1.0};
  const auto nb = rins_neighborhood(inc, std::vector<double>{1.0, 0.0, 0.4}, p);
  REQUIRE(nb);
  CHECK(nb->lb == std::vector<double>{1.0, 0.0, 0.0});
  CHECK(nb->ub == std::vector<double>{1.0, 0.0, 1.0});

  const auto all = rins_neighborhood(inc, inc, p);
  REQUIRE(all);
  CHECK(all->lb == all->ub);
  CHECK(all->fraction() == 1.0);

  Problem q = binaries(4);
  CHECK_FALSE(rins_neighborhood(std::vector<double>{1.0, 0.0, 1.0, 1.0}, std::vector<double>{1.0, 0.0, 0.5, 0.5}, q));
  CHECK(rins_neighborhood(std::vector<double>{1.0, 0.0, 1.0, 1.0}, std::vector<double>{1.0, 0.0, 1.0, 0.5}, q));
}

TEST_CASE("strict majority boundary", "[lns]") {
  CHECK_FALSE(strict_majority(1, 2));
  CHECK_FALSE(strict_majority(5, 10));
  CHECK(strict_majority(6, 10));
  CHECK(strict_majority(2, 3));
  CHECK_FALSE(strict_majority(0, 0));
}

TEST_CASE("undercover on a path", "[lns]") {
  Problem p = binaries(3);
  p.objective_terms = {{0, 1, 1.0}, {1, 2, 1.0}};
  p.objective_linear = {-1.0, 0.5, -1.0};
  const auto g = NonlinearityGraph::build(p);
  CHECK(g.edges.size() == 2);
  const auto cover = min_vertex_cover(g);
  CHECK(cover.optimal);
  CHECK(cover.cover == std::vector<bool>{false, true, false});

  const auto uc = undercover(p, std::vector<double>{0.0, 0.0, 0.0});
  CHECK(free_quadratic_terms(p, uc.lb, uc.ub) == 0);
  CHECK(uc.lb[1] == 0.0);
  CHECK(uc.ub[1] == 0.0);
  REQUIRE(uc.candidate);
  CHECK(*uc.candidate == std::vector<double>{1.0, 0.0, 1.0});
}

TEST_CASE("undercover forced and empty covers", "[lns]") {
  Problem p = binaries(2);
  p.objective_terms = {{0, 0, 1.0}};
  auto g = NonlinearityGraph::build(p);
  CHECK(g.forced[0]);
  CHECK(min_vertex_cover(g).cover == std::vector<bool>{true, false});

  Problem lin = binaries(2);
  lin.objective_linear = {-1.0, 2.0};
  add_constraint(lin, "r", {}, {{0, 1.0}, {1, 1.0}}, -1.0, Sense::LE);
  const auto uc = undercover(lin, std::vector<double>{0.0, 0.0});
  CHECK(std::count(uc.cover.cover.begin(), uc.cover.cover.end(), true) == 0);
  REQUIRE(uc.candidate);
  CHECK(*uc.candidate == std::vector<double>{1.0, 0.0});
}

TEST_CASE("linearize rejects free bilinear terms", "[lns]") {
  Problem p = binaries(2);
  p.objective_terms = {{0, 1, 1.0}};
  CHECK_THROWS_AS(linearize(p, p.lb, p.ub), std::logic_error);
  const std::vector<double> lb{1.0, 0.0}, ub{1.0, 1.0};
  const auto l = linearize(p, lb, ub);
  CHECK(l.direction == std::vector<double>{0.0, 1.0});
}

TEST_CASE("covers leave no free quadratic term", "[lns][property]") {
  testing::Rng rng(21);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = testing::uniform_int(rng, 1, 9);
    Problem p;
    p.resize(n);
    for (int k = 0; k < n; ++k) {
      p.kinds[k] = k % 3 ? VarKind::Integer : VarKind::Continuous;
      p.lb[k] = -2;
      p.ub[k] = 2;
    }
    const int terms = testing::uniform_int(rng, 0, 2 * n);
    for (int t = 0; t < terms; ++t) {
      const int i = testing::uniform_int(rng, 0, n - 1), j = testing::uniform_int(rng, 0, n - 1);
      if (testing::uniform(rng, 0, 1) < 0.2 || i == j)
        p.objective_terms.push_back({i, i, 1.0});
      else
        p.objective_terms.push_back({std::min(i, j), std::max(i, j), testing::uniform(rng, -2, 2)});
    }
    p.objective_terms = canonical_terms(std::move(p.objective_terms));
    if (trial % 2) {
      auto row = testing::random_quadratic_row(rng, n, 2);
      add_constraint(p, "q", row.terms, row.linear, row.constant - 20.0, Sense::LE);
    }
    const auto g = NonlinearityGraph::build(p);
    const auto greedy = greedy_cover(g);
    CHECK(g.is_cover(greedy));
    const auto best = min_vertex_cover(g);
    CHECK(g.is_cover(best.cover));
    if (best.optimal) CHECK(std::count(best.cover.begin(), best.cover.end(), true) == brute_cover_size(g));

    std::vector<double> ref(n);
    for (auto& v : ref) v = testing::uniform(rng, -2, 2);
    const auto uc = undercover(p, ref);
    CHECK(free_quadratic_terms(p, uc.lb, uc.ub) == 0);
    CHECK_NOTHROW(linearize(p, uc.lb, uc.ub));
    if (uc.candidate) {
      const auto report = check_feasibility(p, *uc.candidate, 1e-6);
      CHECK(report.feasible);
    }
  }
}

TEST_CASE("bipartite QUBO alternation", "[lns]") {
  const std::vector<QuadTerm> terms{{0, 1, 1.0}};
  const std::vector<double> d{-0.6, -0.6};
  const auto r = bipartite_qubo_improve(terms, d, std::vector<double>{1.0, 1.0});
  CHECK(r.point == std::vector<double>{0.0, 1.0});
  CHECK(qubo_value(terms, d, r.point) == Approx(-0.6));

  const auto still = bipartite_qubo_improve(terms, d, std::vector<double>{0.0, 1.0});
  CHECK(still.point == std::vector<double>{0.0, 1.0});
  CHECK(still.sweeps == 1);

  const std::vector<QuadTerm> none;
  const std::vector<double> zero{0.0, 0.0, 0.0};
  const auto flat = bipartite_qubo_improve(none, zero, std::vector<double>{1.0, 0.0, 1.0});
  CHECK(flat.point == std::vector<double>{1.0, 0.0, 1.0});
  CHECK(qubo_value(none, zero, flat.point) == 0.0);

  const std::vector<QuadTerm> triangle{{0, 1, 1.0}, {1, 2, 1.0}, {0, 2, 1.0}};
  CHECK_THROWS_AS(bipartite_qubo_improve(triangle, zero, zero), std::invalid_argument);
}

TEST_CASE("bipartite QUBO never increases the objective", "[lns][property]") {
  testing::Rng rng(23);
  for (int trial = 0; trial < 100; ++trial) {
    const int a = testing::uniform_int(rng, 1, 5), b = testing::uniform_int(rng, 1, 5);
    const int n = a + b;
    std::vector<QuadTerm> terms;
    for (int i = 0; i < a; ++i) {
      terms.push_back({i, i, testing::uniform(rng, -1, 1)});
      for (int j = a; j < n; ++j)
        if (testing::uniform(rng, 0, 1) < 0.5) terms.push_back({i, j, testing::uniform(rng, -2, 2)});
    }
    std::vector<double> d(n), x0(n);
    for (int k = 0; k < n; ++k) {
      d[k] = testing::uniform(rng, -1, 1);
      x0[k] = testing::uniform_int(rng, 0, 1);
    }
    const auto r = bipartite_qubo_improve(terms, d, x0);
    double prev = qubo_value(terms, d, x0);
    for (double v : r.values) {
      CHECK(v <= prev + 1e-12);
      prev = v;
    }
  }
}
