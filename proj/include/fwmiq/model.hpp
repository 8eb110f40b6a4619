// SPDX-License-Identifier: Apache-2.0
#pragma once

// In-memory MIQCQP model.
//
// Term convention: a quadratic term (i, j, q) with i <= j contributes q * x_i * x_j.
// The objective value is  sum_{(i,j,q)} q x_i x_j + d^T x + c0, which equals
// 0.5 x^T Q x + d^T x + c0 for the symmetric matrix with Q_ij = Q_ji = q (i < j)
// and Q_ii = 2q. Constraint left-hand sides use the same convention.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fwmiq {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kDefaultConsTol = 1e-6;
inline constexpr double kDefaultIntTol = 1e-6;

enum class VarKind { Continuous, Integer, Binary };
enum class Sense { LE, GE, EQ };
enum class ConstraintTag { Generic, Complementarity, Perspective, Indicator };

inline bool is_integral_kind(VarKind k) { return k != VarKind::Continuous; }

struct QuadTerm {
  int i = 0;
  int j = 0;
  double coef = 0.0;
  friend bool operator==(const QuadTerm&, const QuadTerm&) = default;
};

struct LinTerm {
  int index = 0;
  double coef = 0.0;
  friend bool operator==(const LinTerm&, const LinTerm&) = default;
};

struct QuadConstraint {
  std::string name;
  std::vector<QuadTerm> terms;
  std::vector<LinTerm> linear;
  double constant = 0.0;
  Sense sense = Sense::LE;
  ConstraintTag tag = ConstraintTag::Generic;

  bool is_linear() const { return terms.empty(); }
};

struct Problem {
  std::string name;
  int n = 0;
  std::vector<QuadTerm> objective_terms;
  std::vector<double> objective_linear;
  double objective_constant = 0.0;
  std::vector<QuadConstraint> constraints;
  std::vector<double> lb;
  std::vector<double> ub;
  std::vector<VarKind> kinds;
  bool maximize = false;  // original sense; internals always minimize

  void resize(int count) {
    n = count;
    objective_linear.assign(n, 0.0);
    lb.assign(n, 0.0);
    ub.assign(n, kInf);
    kinds.assign(n, VarKind::Continuous);
  }

  int add_variable(VarKind kind, double lower, double upper) {
    objective_linear.push_back(0.0);
    lb.push_back(lower);
    ub.push_back(upper);
    kinds.push_back(kind);
    return n++;
  }

  bool has_quadratic_constraints() const {
    return std::any_of(constraints.begin(), constraints.end(),
                       [](const QuadConstraint& c) { return !c.is_linear(); });
  }

  bool all_binary() const {
    return std::all_of(kinds.begin(), kinds.end(), [](VarKind k) { return k == VarKind::Binary; });
  }

  bool all_integral() const {
    return std::all_of(kinds.begin(), kinds.end(), is_integral_kind);
  }
};

struct FeasibilityReport {
  double max_violation = 0.0;
  std::optional<int> worst_constraint;
  bool integral = true;
  bool in_bounds = true;
  bool feasible = true;
};

/// Canonical form for a quadratic term: i <= j. Returns false for zero coefficients.
inline bool normalize_term(QuadTerm& t) {
  if (t.i > t.j) std::swap(t.i, t.j);
  return t.coef != 0.0;
}

/// Merge duplicates, order (i <= j), drop zeros, sort by (i, j).
inline std::vector<QuadTerm> canonical_terms(std::vector<QuadTerm> terms) {
  for (auto& t : terms)
    if (t.i > t.j) std::swap(t.i, t.j);
  std::sort(terms.begin(), terms.end(),
            [](const QuadTerm& a, const QuadTerm& b) { return std::pair(a.i, a.j) < std::pair(b.i, b.j); });
  std::vector<QuadTerm> out;
  for (const auto& t : terms) {
    if (!out.empty() && out.back().i == t.i && out.back().j == t.j)
      out.back().coef += t.coef;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const QuadTerm& t) { return t.coef == 0.0; });
  return out;
}

inline std::vector<LinTerm> canonical_linear(std::vector<LinTerm> lin) {
  std::sort(lin.begin(), lin.end(), [](const LinTerm& a, const LinTerm& b) { return a.index < b.index; });
  std::vector<LinTerm> out;
  for (const auto& t : lin) {
    if (!out.empty() && out.back().index == t.index)
      out.back().coef += t.coef;
    else
      out.push_back(t);
  }
  std::erase_if(out, [](const LinTerm& t) { return t.coef == 0.0; });
  return out;
}

inline double eval_terms(std::span<const QuadTerm> terms, std::span<const double> x) {
  double v = 0.0;
  for (const auto& t : terms) v += t.coef * x[t.i] * x[t.j];
  return v;
}

inline double eval_linear(std::span<const LinTerm> lin, std::span<const double> x) {
  double v = 0.0;
  for (const auto& t : lin) v += t.coef * x[t.index];
  return v;
}

/// Adds the gradient of sum q x_i x_j, scaled by `scale`, into `grad`.
inline void add_terms_gradient(std::span<const QuadTerm> terms, std::span<const double> x, double scale,
                               std::span<double> grad) {
  for (const auto& t : terms) {
    if (t.i == t.j) {
      grad[t.i] += scale * 2.0 * t.coef * x[t.i];
    } else {
      grad[t.i] += scale * t.coef * x[t.j];
      grad[t.j] += scale * t.coef * x[t.i];
    }
  }
}

inline double eval_objective(const Problem& p, std::span<const double> x) {
  if (static_cast<int>(x.size()) != p.n)
    throw std::invalid_argument("eval_objective: dimension mismatch");
  double v = p.objective_constant + eval_terms(p.objective_terms, x);
  for (int k = 0; k < p.n; ++k) v += p.objective_linear[k] * x[k];
  return v;
}

/// Objective reported in the instance's original sense.
inline double original_sense_value(const Problem& p, double internal) { return p.maximize ? -internal : internal; }

inline double eval_constraint(const QuadConstraint& c, std::span<const double> x) {
  return eval_terms(c.terms, x) + eval_linear(c.linear, x) + c.constant;
}

inline double eval_constraint(const Problem& p, int idx, std::span<const double> x) {
  if (idx < 0 || idx >= static_cast<int>(p.constraints.size()))
    throw std::out_of_range("eval_constraint: index out of range");
  if (static_cast<int>(x.size()) != p.n)
    throw std::invalid_argument("eval_constraint: dimension mismatch");
  return eval_constraint(p.constraints[idx], x);
}

/// Violation of one stored constraint: LE -> max(g, 0); EQ -> |g|; GE -> max(-g, 0).
inline double constraint_violation(const QuadConstraint& c, double g) {
  switch (c.sense) {
    case Sense::LE: return std::max(g, 0.0);
    case Sense::GE: return std::max(-g, 0.0);
    case Sense::EQ: return std::abs(g);
  }
  return 0.0;
}

inline FeasibilityReport check_feasibility(const Problem& p, std::span<const double> x,
                                           double tol_cons = kDefaultConsTol, double tol_int = kDefaultIntTol) {
  if (static_cast<int>(x.size()) != p.n)
    throw std::invalid_argument("check_feasibility: dimension mismatch");
  FeasibilityReport r;
  double bound_violation = 0.0;
  for (int k = 0; k < p.n; ++k) {
    const double below = p.lb[k] - x[k];
    const double above = x[k] - p.ub[k];
    bound_violation = std::max({bound_violation, below, above});
    if (is_integral_kind(p.kinds[k]) && std::abs(x[k] - std::round(x[k])) > tol_int) r.integral = false;
  }
  r.in_bounds = bound_violation <= tol_cons;
  r.max_violation = bound_violation;
  for (int i = 0; i < static_cast<int>(p.constraints.size()); ++i) {
    const double v = constraint_violation(p.constraints[i], eval_constraint(p.constraints[i], x));
    if (v > r.max_violation) {
      r.max_violation = v;
      r.worst_constraint = i;
    }
  }
  if (r.max_violation <= 0.0) {
    r.max_violation = 0.0;
    r.worst_constraint.reset();
  }
  r.feasible = r.integral && r.in_bounds && r.max_violation <= tol_cons;
  return r;
}

/// True for x_i * x_j = 0 with no linear part and zero constant.
inline bool is_complementarity_pattern(const std::vector<QuadTerm>& terms, const std::vector<LinTerm>& linear,
                                       double constant) {
  return terms.size() == 1 && terms[0].i != terms[0].j && linear.empty() && constant == 0.0;
}

/// Adds `terms + linear + constant (sense) 0`, normalized: GE becomes the negated LE;
/// EQ becomes two LE rows unless it is a complementarity x_i x_j = 0.
inline void add_constraint(Problem& p, std::string name, std::vector<QuadTerm> terms, std::vector<LinTerm> linear,
                           double constant, Sense sense) {
  terms = canonical_terms(std::move(terms));
  linear = canonical_linear(std::move(linear));
  for (const auto& t : terms)
    if (t.i < 0 || t.j >= p.n) throw std::out_of_range("add_constraint: variable index out of range");
  for (const auto& t : linear)
    if (t.index < 0 || t.index >= p.n) throw std::out_of_range("add_constraint: variable index out of range");

  auto negated = [&] {
    QuadConstraint c{name, terms, linear, -constant, Sense::LE, ConstraintTag::Generic};
    for (auto& t : c.terms) t.coef = -t.coef;
    for (auto& t : c.linear) t.coef = -t.coef;
    return c;
  };
  switch (sense) {
    case Sense::LE:
      p.constraints.push_back({std::move(name), std::move(terms), std::move(linear), constant, Sense::LE,
                               ConstraintTag::Generic});
      break;
    case Sense::GE:
      p.constraints.push_back(negated());
      break;
    case Sense::EQ:
      if (is_complementarity_pattern(terms, linear, constant)) {
        p.constraints.push_back({std::move(name), std::move(terms), std::move(linear), constant, Sense::EQ,
                                 ConstraintTag::Complementarity});
      } else {
        auto neg = negated();
        neg.name = name + ".ge";
        p.constraints.push_back({name + ".le", std::move(terms), std::move(linear), constant, Sense::LE,
                                 ConstraintTag::Generic});
        p.constraints.push_back(std::move(neg));
      }
      break;
  }
}

/// Checks the structural invariants of a model. Throws std::invalid_argument on failure.
inline void validate(const Problem& p) {
  const auto n = static_cast<std::size_t>(p.n);
  if (p.objective_linear.size() != n || p.lb.size() != n || p.ub.size() != n || p.kinds.size() != n)
    throw std::invalid_argument("problem: vector sizes do not match n");
  for (const auto& t : p.objective_terms) {
    if (t.i > t.j || t.coef == 0.0) throw std::invalid_argument("problem: objective term not canonical");
    if (t.i < 0 || t.j >= p.n) throw std::invalid_argument("problem: objective term index out of range");
  }
  for (int k = 0; k < p.n; ++k) {
    if (p.kinds[k] == VarKind::Binary && (p.lb[k] < 0.0 || p.ub[k] > 1.0))
      throw std::invalid_argument("problem: binary variable bounds outside [0,1]");
  }
}

inline bool bounds_finite(const Problem& p) {
  for (int k = 0; k < p.n; ++k)
    if (!std::isfinite(p.lb[k]) || !std::isfinite(p.ub[k]) || p.lb[k] > p.ub[k]) return false;
  return true;
}

}  // namespace fwmiq
