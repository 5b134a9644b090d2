#pragma once

// Finite-difference weights on arbitrary stencils and local polynomial
// interpolation on strictly increasing abscissae.

#include <algorithm>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace epdiff::stencil {

/// Fornberg's recursion: weights c[d][j] such that
/// f^{(d)}(x0) ~ sum_j c[d][j] f(x[j]) for d = 0..max_order.
template <class T = double>
inline std::vector<std::vector<T>> fornberg(T x0, std::span<const T> x, int max_order) {
  const std::size_t n = x.size();
  std::vector<std::vector<T>> c(max_order + 1, std::vector<T>(n, T(0)));
  T c1 = 1.0;
  T c4 = x[0] - x0;
  c[0][0] = 1.0;
  for (std::size_t i = 1; i < n; ++i) {
    const int mn = std::min<int>(static_cast<int>(i), max_order);
    T c2 = 1.0;
    const T c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const T c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (int k = mn; k >= 1; --k) c[k][i] = c1 * (k * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
        c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
      }
      for (int k = mn; k >= 1; --k) c[k][j] = (c4 * c[k][j] - k * c[k - 1][j]) / c3;
      c[0][j] = c4 * c[0][j] / c3;
    }
    c1 = c2;
  }
  return c;
}

/// Degree (width-1) Lagrange interpolation of (xs, ys) at x, using the `width`
/// nodes nearest to x. xs must be strictly increasing.
inline double lagrange(std::span<const double> xs, std::span<const double> ys, double x, std::size_t width = 6) {
  const std::size_t n = xs.size();
  if (n != ys.size() || n < 2) throw std::invalid_argument("lagrange: bad sample arrays");
  width = std::min(width, n);
  const auto it = std::lower_bound(xs.begin(), xs.end(), x);
  const std::size_t pos = static_cast<std::size_t>(it - xs.begin());
  std::size_t lo = pos > width / 2 ? pos - width / 2 : 0;
  lo = std::min(lo, n - width);
  double sum = 0.0;
  for (std::size_t j = lo; j < lo + width; ++j) {
    double l = 1.0;
    for (std::size_t m = lo; m < lo + width; ++m) {
      if (m != j) l *= (x - xs[m]) / (xs[j] - xs[m]);
    }
    sum += l * ys[j];
  }
  return sum;
}

}  // namespace epdiff::stencil
