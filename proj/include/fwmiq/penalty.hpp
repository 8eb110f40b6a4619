// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "fwmiq/model.hpp"

namespace fwmiq {

/// max(g, 0)^p for p > 1.
inline double penalty_value(double g, double p) { return g > 0.0 ? std::pow(g, p) : 0.0; }

/// d/dg of max(g, 0)^p.
inline double penalty_derivative(double g, double p) { return g > 0.0 ? p * std::pow(g, p - 1.0) : 0.0; }

struct PenaltyOptions {
  double p = 1.5;
  bool auto_scale = false;  // w_i = 1 / max(1, max |coef in constraint i|)
};

/// f(x) + sum_i w_i max(g_i(x), 0)^p over the quadratic constraints of a model.
/// Linear constraints are left to the feasible region. An equality that is
/// still present (an untransformed complementarity) is penalized as |g|^p.
class SmoothObjective {
 public:
  SmoothObjective(const Problem& problem, PenaltyOptions opt = {}) : problem_(&problem), p_(opt.p) {
    if (!(opt.p > 1.0)) throw std::invalid_argument("SmoothObjective: exponent must exceed 1");
    for (int i = 0; i < static_cast<int>(problem.constraints.size()); ++i) {
      const auto& c = problem.constraints[i];
      if (c.is_linear()) continue;
      double w = 1.0;
      if (opt.auto_scale) {
        double m = 1.0;
        for (const auto& t : c.terms) m = std::max(m, std::abs(t.coef));
        for (const auto& t : c.linear) m = std::max(m, std::abs(t.coef));
        w = 1.0 / m;
      }
      penalized_.push_back(i);
      weights_.push_back(w);
    }
  }

  const Problem& problem() const { return *problem_; }
  int dimension() const { return problem_->n; }
  double exponent() const { return p_; }
  std::span<const int> penalized() const { return penalized_; }
  std::span<const double> weights() const { return weights_; }
  long value_evaluations() const { return value_evals_; }
  long gradient_evaluations() const { return grad_evals_; }

  double penalty(std::span<const double> x) const {
    double v = 0.0;
    for (std::size_t k = 0; k < penalized_.size(); ++k) {
      const auto& c = problem_->constraints[penalized_[k]];
      const double g = eval_constraint(c, x);
      v += weights_[k] * (c.sense == Sense::EQ ? penalty_value(std::abs(g), p_) : penalty_value(g, p_));
    }
    return v;
  }

  double value(std::span<const double> x) const {
    ++value_evals_;
    return eval_objective(*problem_, x) + penalty(x);
  }

  void gradient(std::span<const double> x, std::span<double> grad) const {
    ++grad_evals_;
    const auto& pr = *problem_;
    for (int k = 0; k < pr.n; ++k) grad[k] = pr.objective_linear[k];
    add_terms_gradient(pr.objective_terms, x, 1.0, grad);
    for (std::size_t k = 0; k < penalized_.size(); ++k) {
      const auto& c = pr.constraints[penalized_[k]];
      const double g = eval_constraint(c, x);
      double scale;
      if (c.sense == Sense::EQ)
        scale = weights_[k] * penalty_derivative(std::abs(g), p_) * (g < 0.0 ? -1.0 : 1.0);
      else
        scale = weights_[k] * penalty_derivative(g, p_);
      if (scale == 0.0) continue;
      add_terms_gradient(c.terms, x, scale, grad);
      for (const auto& t : c.linear) grad[t.index] += scale * t.coef;
    }
  }

  /// f(x + gamma d) - f(x). Quadratic parts are expanded in gamma so that the
  /// difference carries no cancellation error from the size of f.
  double change(std::span<const double> x, std::span<const double> d, double gamma) const {
    ++value_evals_;
    const auto& pr = *problem_;
    auto shift = [&](const std::vector<QuadTerm>& terms, const std::vector<LinTerm>& linear, std::span<const double> lin) {
      double slope = 0.0, curv = 0.0;
      for (const auto& t : terms) {
        slope += t.coef * (x[t.i] * d[t.j] + x[t.j] * d[t.i]);
        curv += t.coef * d[t.i] * d[t.j];
      }
      for (const auto& t : linear) slope += t.coef * d[t.index];
      for (std::size_t k = 0; k < lin.size(); ++k) slope += lin[k] * d[k];
      return gamma * slope + gamma * gamma * curv;
    };
    double delta = shift(pr.objective_terms, {}, pr.objective_linear);
    for (std::size_t k = 0; k < penalized_.size(); ++k) {
      const auto& c = pr.constraints[penalized_[k]];
      const double g0 = eval_constraint(c, x);
      const double g1 = g0 + shift(c.terms, c.linear, {});
      if (c.sense == Sense::EQ)
        delta += weights_[k] * (penalty_value(std::abs(g1), p_) - penalty_value(std::abs(g0), p_));
      else
        delta += weights_[k] * (penalty_value(g1, p_) - penalty_value(g0, p_));
    }
    return delta;
  }

  std::vector<double> gradient(std::span<const double> x) const {
    std::vector<double> g(problem_->n);
    gradient(x, g);
    return g;
  }

  std::pair<double, std::vector<double>> value_and_gradient(std::span<const double> x) const {
    return {value(x), gradient(x)};
  }

 private:
  const Problem* problem_;
  double p_;
  std::vector<int> penalized_;
  std::vector<double> weights_;
  mutable long value_evals_ = 0;
  mutable long grad_evals_ = 0;
};

}  // namespace fwmiq
