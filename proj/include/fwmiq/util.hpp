// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace fwmiq {

inline double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

/// Coordinates rounded to a 1e-9 grid; identifies points up to that resolution.
struct PointKey {
  std::vector<std::int64_t> c;

  explicit PointKey(std::span<const double> x) : c(x.size()) {
    for (std::size_t k = 0; k < x.size(); ++k) c[k] = std::llround(x[k] * 1e9);
  }
  friend bool operator==(const PointKey&, const PointKey&) = default;
};

struct PointKeyHash {
  std::size_t operator()(const PointKey& k) const {
    std::uint64_t h = 1469598103934665603ULL;
    for (auto v : k.c) {
      h ^= static_cast<std::uint64_t>(v) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    }
    return static_cast<std::size_t>(h);
  }
};

}  // namespace fwmiq
