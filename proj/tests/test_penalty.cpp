// SPDX-License-Identifier: Apache-2.0
#include <catch_amalgamated.hpp>

#include "fwmiq/penalty.hpp"
#include "random_instances.hpp"

using namespace fwmiq;
using Catch::Approx;

namespace {

Problem random_qcqp(testing::Rng& rng, int n) {
  Problem p;
  p.resize(n);
  for (int k = 0; k < n; ++k) {
    p.kinds[k] = k % 2 ? VarKind::Integer : VarKind::Continuous;
    p.lb[k] = -3;
    p.ub[k] = 3;
  }
  testing::dense_objective(p, rng);
  const int rows = testing::uniform_int(rng, 1, 3);
  for (int r = 0; r < rows; ++r) {
    auto row = testing::random_quadratic_row(rng, n, testing::uniform_int(rng, 1, 4));
    add_constraint(p, "q" + std::to_string(r), row.terms, row.linear, row.constant,
                   r == 2 ? Sense::GE : Sense::LE);
  }
  add_constraint(p, "lin", {}, {{0, 1.0}}, -1.0, Sense::LE);
  return p;
}

std::vector<double> central_difference(const SmoothObjective& f, std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double keep = x[k];
    x[k] = keep + h;
    const double up = f.value(x);
    x[k] = keep - h;
    const double down = f.value(x);
    x[k] = keep;
    g[k] = (up - down) / (2 * h);
  }
  return g;
}

bool away_from_kinks(const Problem& p, const std::vector<double>& x) {
  for (const auto& c : p.constraints)
    if (!c.is_linear() && std::abs(eval_constraint(c, x)) <= 1e-3) return false;
  return true;
}

}  // namespace

TEST_CASE("penalty value", "[penalty]") {
  CHECK(penalty_value(3.0, 1.5) == Approx(5.196152422706632).epsilon(1e-14));
  CHECK(penalty_value(-2.0, 1.5) == 0.0);
  CHECK(penalty_value(-2.0, 1.8) == 0.0);
  CHECK(penalty_value(0.0, 1.2) == 0.0);
}

TEST_CASE("penalty on x^2 - 1 at x = 2", "[penalty]") {
  Problem p;
  p.resize(1);
  p.lb[0] = -5;
  p.ub[0] = 5;
  add_constraint(p, "c", {{0, 0, 1.0}}, {}, -1.0, Sense::LE);
  const SmoothObjective f(p);
  const std::vector<double> x{2.0};
  CHECK(f.value(x) == Approx(std::pow(3.0, 1.5)));
  CHECK(f.gradient(x)[0] == Approx(6.0 * std::sqrt(3.0)));
  CHECK(f.value_evaluations() == 1);
  CHECK(f.gradient_evaluations() == 1);
}

TEST_CASE("linear rows are not penalized", "[penalty]") {
  Problem p;
  p.resize(2);
  p.ub = {1, 1};
  add_constraint(p, "lin", {}, {{0, 1.0}, {1, 1.0}}, -1.0, Sense::LE);
  add_constraint(p, "quad", {{0, 1, 1.0}}, {}, -0.5, Sense::LE);
  const SmoothObjective f(p);
  REQUIRE(f.penalized().size() == 1);
  CHECK(f.penalized()[0] == 1);
  CHECK(f.value(std::vector<double>{5.0, 0.0}) == 0.0);
}

TEST_CASE("exponent must exceed one", "[penalty]") {
  Problem p;
  p.resize(1);
  CHECK_THROWS_AS(SmoothObjective(p, {1.0}), std::invalid_argument);
  CHECK_NOTHROW(SmoothObjective(p, {1.2}));
}

TEST_CASE("auto scaling divides by the largest coefficient", "[penalty]") {
  Problem p;
  p.resize(1);
  add_constraint(p, "c", {{0, 0, 4.0}}, {{0, 2.0}}, -1.0, Sense::LE);
  add_constraint(p, "d", {{0, 0, 0.5}}, {}, -1.0, Sense::LE);
  const SmoothObjective f(p, {1.5, true});
  REQUIRE(f.weights().size() == 2);
  CHECK(f.weights()[0] == 0.25);
  CHECK(f.weights()[1] == 1.0);
}

TEST_CASE("untransformed complementarity is penalized on both sides", "[penalty]") {
  Problem p;
  p.resize(2);
  p.lb = {-1, 0};
  p.ub = {1, 1};
  add_constraint(p, "comp", {{0, 1, 1.0}}, {}, 0.0, Sense::EQ);
  const SmoothObjective f(p, {2.0});
  CHECK(f.value(std::vector<double>{-0.5, 1.0}) == Approx(0.25));
  CHECK(f.value(std::vector<double>{0.5, 1.0}) == Approx(0.25));
  CHECK(f.gradient(std::vector<double>{-0.5, 1.0})[0] == Approx(-1.0));
}

TEST_CASE("gradient agrees with central differences", "[penalty][property]") {
  testing::Rng rng(5);
  int checked = 0;
  for (int trial = 0; trial < 40; ++trial) {
    const Problem p = random_qcqp(rng, testing::uniform_int(rng, 1, 8));
    for (double pe : {1.2, 1.5, 1.8}) {
      const SmoothObjective f(p, {pe});
      for (int s = 0; s < 10; ++s) {
        std::vector<double> x(p.n);
        for (auto& v : x) v = testing::uniform(rng, -3, 3);
        if (!away_from_kinks(p, x)) continue;
        const auto a = f.gradient(x);
        const auto fd = central_difference(f, x, 1e-6);
        double diff = 0.0, norm = 0.0;
        for (int k = 0; k < p.n; ++k) {
          diff += (a[k] - fd[k]) * (a[k] - fd[k]);
          norm += a[k] * a[k];
        }
        CHECK(std::sqrt(diff) <= 1e-5 * std::max(1.0, std::sqrt(norm)));
        ++checked;
      }
    }
  }
  CHECK(checked > 500);
}

TEST_CASE("relaxation property", "[penalty][property]") {
  testing::Rng rng(6);
  for (int trial = 0; trial < 50; ++trial) {
    const Problem p = random_qcqp(rng, testing::uniform_int(rng, 1, 6));
    const SmoothObjective f(p);
    for (int s = 0; s < 20; ++s) {
      std::vector<double> x(p.n);
      for (auto& v : x) v = testing::uniform(rng, -3, 3);
      const double base = eval_objective(p, x);
      CHECK(f.value(x) >= base);
      bool quad_feasible = true;
      for (const auto& c : p.constraints)
        if (!c.is_linear() && eval_constraint(c, x) > 0.0) quad_feasible = false;
      if (quad_feasible) CHECK(f.value(x) == base);
    }
  }
}

TEST_CASE("penalty gradient vanishes at the boundary", "[penalty][property]") {
  testing::Rng rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const int n = testing::uniform_int(rng, 1, 5);
    Problem p;
    p.resize(n);
    for (int k = 0; k < n; ++k) {
      p.lb[k] = -3;
      p.ub[k] = 3;
    }
    auto row = testing::random_quadratic_row(rng, n, 3);
    row.constant = 0.0;
    add_constraint(p, "c", row.terms, row.linear, 0.0, Sense::LE);
    const auto& c = p.constraints[0];
    // along a ray x = t d, g(t d) is 0 at t = 0; walk towards 0 from the positive side
    std::vector<double> d(n);
    for (auto& v : d) v = testing::uniform(rng, -1, 1);
    auto at = [&](double t) {
      std::vector<double> x(n);
      for (int k = 0; k < n; ++k) x[k] = t * d[k];
      return x;
    };
    double t_pos = 0.0;
    for (double t : {1e-1, -1e-1})
      if (eval_constraint(c, at(t)) > 0.0) t_pos = t;
    if (t_pos == 0.0) continue;
    const auto near = at(t_pos * 1e-2), nearer = at(t_pos * 1e-12);
    if (eval_constraint(c, near) <= 0.0 || eval_constraint(c, nearer) <= 0.0) continue;
    for (double pe : {1.2, 1.5, 1.8}) {
      const SmoothObjective f(p, {pe});
      auto norm = [&](const std::vector<double>& x) {
        double s = 0.0;
        for (double v : f.gradient(x)) s += v * v;
        return std::sqrt(s);
      };
      CHECK(norm(nearer) <= 0.05 * norm(near));
    }
  }
}

TEST_CASE("change along a direction matches value differences", "[penalty][property]") {
  testing::Rng rng(8);
  for (int trial = 0; trial < 60; ++trial) {
    const Problem p = random_qcqp(rng, testing::uniform_int(rng, 1, 8));
    const SmoothObjective f(p, {testing::uniform(rng, 1.2, 1.8)});
    std::vector<double> x(p.n), d(p.n), y(p.n);
    for (auto& v : x) v = testing::uniform(rng, -3, 3);
    for (auto& v : d) v = testing::uniform(rng, -1, 1);
    for (double gamma : {0.0, 1e-3, 0.3, 1.0}) {
      for (int k = 0; k < p.n; ++k) y[k] = x[k] + gamma * d[k];
      const double expect = f.value(y) - f.value(x);
      CHECK(f.change(x, d, gamma) == Approx(expect).margin(1e-9 * (1 + std::abs(f.value(x)))));
    }
  }
}
