// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace fwmiq {

/// Dense row-major square matrix.
struct DenseMatrix {
  int n = 0;
  std::vector<double> a;

  DenseMatrix() = default;
  explicit DenseMatrix(int size) : n(size), a(static_cast<std::size_t>(size) * size, 0.0) {}

  double& operator()(int i, int j) { return a[static_cast<std::size_t>(i) * n + j]; }
  double operator()(int i, int j) const { return a[static_cast<std::size_t>(i) * n + j]; }

  double frobenius() const {
    double s = 0.0;
    for (double v : a) s += v * v;
    return std::sqrt(s);
  }
};

struct Spectrum {
  std::vector<double> eigenvalues;  // ascending
  DenseMatrix eigenvectors;         // column k belongs to eigenvalues[k]
  int sweeps = 0;
};

/// Symmetric eigendecomposition by cyclic Jacobi rotations. Stops once the
/// largest off-diagonal magnitude is at most 1e-10 * ||Q||_F.
inline Spectrum eigen_symmetric(const DenseMatrix& q, int max_sweeps = 100) {
  const int n = q.n;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (std::abs(q(i, j) - q(j, i)) > 1e-9) throw std::invalid_argument("eigen_symmetric: matrix is not symmetric");

  DenseMatrix a = q;
  DenseMatrix v(n);
  for (int i = 0; i < n; ++i) v(i, i) = 1.0;
  const double threshold = 1e-10 * q.frobenius();

  auto max_offdiag = [&] {
    double m = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) m = std::max(m, std::abs(a(i, j)));
    return m;
  };

  int sweep = 0;
  for (; sweep < max_sweeps && max_offdiag() > threshold; ++sweep) {
    for (int p = 0; p < n - 1; ++p) {
      for (int r = p + 1; r < n; ++r) {
        const double apr = a(p, r);
        if (std::abs(apr) <= 0.01 * threshold) continue;
        // Rutishauser's formulation of the rotation.
        const double theta = (a(r, r) - a(p, p)) / (2.0 * apr);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        const double tau = s / (1.0 + c);
        a(p, p) -= t * apr;
        a(r, r) += t * apr;
        a(p, r) = a(r, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          if (k != p && k != r) {
            const double akp = a(k, p), akr = a(k, r);
            a(k, p) = a(p, k) = akp - s * (akr + tau * akp);
            a(k, r) = a(r, k) = akr + s * (akp - tau * akr);
          }
          const double vkp = v(k, p), vkr = v(k, r);
          v(k, p) = vkp - s * (vkr + tau * vkp);
          v(k, r) = vkr + s * (vkp - tau * vkr);
        }
      }
    }
  }
  if (max_offdiag() > threshold) throw std::runtime_error("eigen_symmetric: Jacobi sweeps did not converge");

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int x, int y) { return a(x, x) < a(y, y); });
  Spectrum out;
  out.sweeps = sweep;
  out.eigenvalues.resize(n);
  out.eigenvectors = DenseMatrix(n);
  for (int k = 0; k < n; ++k) {
    out.eigenvalues[k] = a(order[k], order[k]);
    for (int i = 0; i < n; ++i) out.eigenvectors(i, k) = v(i, order[k]);
  }
  return out;
}

/// V diag(lambda) V^T, used to validate a decomposition.
inline DenseMatrix reconstruct(const Spectrum& s) {
  const int n = static_cast<int>(s.eigenvalues.size());
  DenseMatrix out(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      for (int k = 0; k < n; ++k) acc += s.eigenvectors(i, k) * s.eigenvalues[k] * s.eigenvectors(j, k);
      out(i, j) = acc;
    }
  return out;
}

}  // namespace fwmiq
