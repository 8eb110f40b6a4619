// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "fwmiq/util.hpp"

namespace fwmiq {

/// Convex combination of region vertices representing a Frank-Wolfe iterate.
class ActiveSet {
 public:
  ActiveSet() = default;

  explicit ActiveSet(std::vector<double> vertex) {
    x_ = vertex;
    keys_.emplace_back(vertex);
    vertices_.push_back(std::move(vertex));
    weights_.push_back(1.0);
  }

  /// Builds a set from weighted vertices, merging duplicates and renormalizing.
  ActiveSet(const std::vector<std::vector<double>>& vertices, const std::vector<double>& weights) {
    if (vertices.size() != weights.size()) throw std::invalid_argument("ActiveSet: size mismatch");
    for (std::size_t i = 0; i < vertices.size(); ++i) {
      if (weights[i] < 0.0) throw std::invalid_argument("ActiveSet: negative weight");
      if (weights[i] == 0.0) continue;
      if (int at = find(vertices[i]); at >= 0) {
        weights_[at] += weights[i];
      } else {
        vertices_.push_back(vertices[i]);
        keys_.emplace_back(vertices[i]);
        weights_.push_back(weights[i]);
      }
    }
    renormalize();
  }

  std::size_t size() const { return vertices_.size(); }
  bool empty() const { return vertices_.empty(); }
  int dimension() const { return static_cast<int>(x_.size()); }
  const std::vector<double>& vertex(std::size_t i) const { return vertices_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  const std::vector<std::vector<double>>& vertices() const { return vertices_; }
  const std::vector<double>& weights() const { return weights_; }
  const std::vector<double>& iterate() const { return x_; }

  int find(std::span<const double> v) const {
    PointKey key(v);
    for (std::size_t i = 0; i < keys_.size(); ++i)
      if (keys_[i] == key) return static_cast<int>(i);
    return -1;
  }

  /// x <- (1 - gamma) x + gamma v. Vertices whose weight reaches zero are
  /// removed and appended to `dropped`.
  void frank_wolfe_step(std::span<const double> v, double gamma, std::span<const double> new_x,
                        std::vector<std::vector<double>>* dropped = nullptr) {
    for (auto& w : weights_) w *= (1.0 - gamma);
    if (int at = find(v); at >= 0) {
      weights_[at] += gamma;
    } else {
      vertices_.emplace_back(v.begin(), v.end());
      keys_.emplace_back(v);
      weights_.push_back(gamma);
    }
    x_.assign(new_x.begin(), new_x.end());
    prune(dropped);
  }

  /// Moves weight gamma from `away` to `toward`.
  void pairwise_step(std::size_t away, std::size_t toward, double gamma, std::span<const double> new_x,
                     std::vector<std::vector<double>>* dropped = nullptr) {
    weights_[toward] += gamma;
    weights_[away] -= gamma;
    if (weights_[away] < 1e-15) weights_[away] = 0.0;
    x_.assign(new_x.begin(), new_x.end());
    prune(dropped);
  }

  void renormalize() {
    const double total = std::accumulate(weights_.begin(), weights_.end(), 0.0);
    if (total <= 0.0) throw std::invalid_argument("ActiveSet: weights sum to zero");
    for (auto& w : weights_) w /= total;
    recompute_iterate();
  }

  void recompute_iterate() {
    if (vertices_.empty()) {
      x_.clear();
      return;
    }
    x_.assign(vertices_[0].size(), 0.0);
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      for (std::size_t k = 0; k < x_.size(); ++k) x_[k] += weights_[i] * vertices_[i][k];
  }

  /// Weights nonnegative and summing to one, iterate equal to the combination,
  /// no duplicate vertices.
  bool check_invariants(double tol = 1e-9) const {
    if (vertices_.empty()) return true;
    double total = 0.0;
    for (double w : weights_) {
      if (w < 0.0) return false;
      total += w;
    }
    if (std::abs(total - 1.0) > tol) return false;
    std::vector<double> combo(x_.size(), 0.0);
    for (std::size_t i = 0; i < vertices_.size(); ++i)
      for (std::size_t k = 0; k < x_.size(); ++k) combo[k] += weights_[i] * vertices_[i][k];
    for (std::size_t k = 0; k < x_.size(); ++k)
      if (std::abs(combo[k] - x_[k]) > tol * (1.0 + std::abs(x_[k]))) return false;
    for (std::size_t i = 0; i < keys_.size(); ++i)
      for (std::size_t j = i + 1; j < keys_.size(); ++j)
        if (keys_[i] == keys_[j]) return false;
    return true;
  }

 private:
  void prune(std::vector<std::vector<double>>* dropped) {
    for (std::size_t i = vertices_.size(); i-- > 0;) {
      if (weights_[i] > 0.0) continue;
      if (dropped) dropped->push_back(std::move(vertices_[i]));
      vertices_.erase(vertices_.begin() + i);
      keys_.erase(keys_.begin() + i);
      weights_.erase(weights_.begin() + i);
    }
  }

  std::vector<std::vector<double>> vertices_;
  std::vector<PointKey> keys_;
  std::vector<double> weights_;
  std::vector<double> x_;
};

}  // namespace fwmiq
