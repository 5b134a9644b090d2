#pragma once

// Radial grids on [0, R_max] and the quadrature used for every kernel integral.
//
// Nodes are r_i = R_max * x_i^g with x_i = i/(N-1) uniform (g = 1 is the uniform
// grid). Integrals are taken in the computational coordinate x, where the rule
// is the trapezoid rule with 6th-order Gregory end corrections (five nodes at
// each end); segments with fewer than ten nodes use closed Newton-Cotes rules.
// Integrals over [0, r_i] and [r_i, R_max] are split exactly at the node r_i.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace epdiff {

class RadialGrid {
 public:
  static RadialGrid uniform(std::size_t n_nodes, double r_max) { return graded(n_nodes, r_max, 1.0); }

  /// r_i = R_max (i/(N-1))^g, g in [1, 2].
  static RadialGrid graded(std::size_t n_nodes, double r_max, double grading) {
    if (n_nodes < 8) throw std::invalid_argument("RadialGrid: need at least 8 nodes");
    if (!(r_max > 0.0) || !std::isfinite(r_max)) throw std::invalid_argument("RadialGrid: R_max must be > 0");
    if (!(grading >= 1.0 && grading <= 2.0)) {
      throw std::invalid_argument("RadialGrid: grading exponent must lie in [1, 2], got " + std::to_string(grading));
    }
    RadialGrid g;
    g.grading_ = grading;
    g.hx_ = 1.0 / static_cast<double>(n_nodes - 1);
    g.r_.resize(n_nodes);
    g.jac_.resize(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) {
      const double x = static_cast<double>(i) * g.hx_;
      if (grading == 1.0) {
        g.r_[i] = r_max * x;
        g.jac_[i] = r_max;
      } else {
        g.r_[i] = r_max * std::pow(x, grading);
        g.jac_[i] = r_max * grading * std::pow(x, grading - 1.0);
      }
    }
    g.r_.back() = r_max;
    return g;
  }

  std::size_t size() const { return r_.size(); }
  double r_max() const { return r_.back(); }
  double operator[](std::size_t i) const { return r_[i]; }
  std::span<const double> nodes() const { return r_; }
  /// dr/dx at each node.
  std::span<const double> jacobian() const { return jac_; }
  double hx() const { return hx_; }
  double grading() const { return grading_; }
  bool is_uniform() const { return grading_ == 1.0; }
  /// Spacing of the uniform grid (only meaningful when is_uniform()).
  double h() const { return r_max() * hx_; }

  /// Full-range quadrature weights: integral of f ~ sum_i w_i f(r_i).
  std::vector<double> weights() const;

 private:
  std::vector<double> r_;
  std::vector<double> jac_;
  double hx_ = 0.0;
  double grading_ = 1.0;
};

namespace quad {

namespace detail {

template <class T>
inline T newton_cotes(std::size_t len, std::size_t m) {
  // closed rules on len intervals, symmetric: index by distance from the nearer end
  static constexpr long num[9][5] = {{0},
                                     {1},
                                     {1, 4},
                                     {3, 9},
                                     {14, 64, 24},
                                     {95, 375, 250},
                                     {41, 216, 27, 272},
                                     {751 * 7, 3577 * 7, 1323 * 7, 2989 * 7},
                                     {989 * 8, 5888 * 8, -928 * 8, 10496 * 8, -4540 * 8}};
  static constexpr long den[9] = {1, 2, 3, 8, 45, 288, 140, 17280, 28350};
  const std::size_t e = std::min(m, len - m);
  return T(num[len][e]) / T(den[len]);
}

template <class T>
inline T gregory_end(std::size_t e) {
  static constexpr long num[5] = {95, 317, 23, 793, 157};
  static constexpr long den[5] = {288, 240, 30, 720, 160};
  return T(num[e]) / T(den[e]);
}

}  // namespace detail

inline constexpr std::size_t kGregoryNodes = 5;
inline constexpr std::size_t kShortSegment = 2 * kGregoryNodes - 1;

/// Weight of local node m on a segment of `len` intervals (unit spacing).
template <class T = double>
inline T segment_weight(std::size_t len, std::size_t m) {
  if (len < kShortSegment) return detail::newton_cotes<T>(len, m);
  const std::size_t e = std::min(m, len - m);
  return e < kGregoryNodes ? detail::gregory_end<T>(e) : T(1);
}

/// Gregory end correction relative to weight 1 at distance e from a segment end.
inline double end_correction(std::size_t e) { return detail::gregory_end<double>(e) - 1.0; }

/// Integral over [r_a, r_b] of samples f.
inline double integrate(const RadialGrid& grid, std::span<const double> f, std::size_t a, std::size_t b) {
  const auto jac = grid.jacobian();
  double sum = 0.0;
  const std::size_t len = b - a;
  for (std::size_t m = a; m <= b; ++m) sum += segment_weight(len, m - a) * f[m] * jac[m];
  return sum * grid.hx();
}

inline double integrate(const RadialGrid& grid, std::span<const double> f) {
  return integrate(grid, f, 0, grid.size() - 1);
}

/// H_i = sum_{m<=i} w^{[0,i]}_m g_m exp(e_m - e_i), the integral over [0, r_i]
/// of an integrand whose exponential factor e^{e(s)} is split off and
/// re-expressed relative to the upper limit. Pass an empty `expo` for none.
/// `g` must already include the Jacobian; the result is multiplied by hx.
inline std::vector<double> head_scaled(std::span<const double> g, std::span<const double> expo, double hx) {
  const std::size_t n = g.size();
  const bool scaled = !expo.empty();
  auto rel = [&](std::size_t m, std::size_t i) { return scaled ? std::exp(expo[m] - expo[i]) : 1.0; };
  std::vector<double> out(n, 0.0);
  double running = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    running = (i == 0 ? 0.0 : running * rel(i - 1, i)) + g[i];
    if (i < kShortSegment) {
      double s = 0.0;
      for (std::size_t m = 0; m <= i; ++m) s += segment_weight(i, m) * g[m] * rel(m, i);
      out[i] = s * hx;
      continue;
    }
    double corr = 0.0;
    for (std::size_t e = 0; e < kGregoryNodes; ++e) {
      corr += end_correction(e) * (g[e] * rel(e, i) + g[i - e] * rel(i - e, i));
    }
    out[i] = (running + corr) * hx;
  }
  return out;
}

/// T_i = sum_{m>=i} w^{[i,N-1]}_m g_m exp(e_i - e_m): integral over [r_i, R_max].
inline std::vector<double> tail_scaled(std::span<const double> g, std::span<const double> expo, double hx) {
  const std::size_t n = g.size();
  const bool scaled = !expo.empty();
  auto rel = [&](std::size_t m, std::size_t i) { return scaled ? std::exp(expo[i] - expo[m]) : 1.0; };
  std::vector<double> out(n, 0.0);
  const std::size_t last = n - 1;
  double running = 0.0;
  for (std::size_t ii = 0; ii < n; ++ii) {
    const std::size_t i = last - ii;
    running = (ii == 0 ? 0.0 : running * rel(i + 1, i)) + g[i];
    const std::size_t len = last - i;
    if (len < kShortSegment) {
      double s = 0.0;
      for (std::size_t m = i; m <= last; ++m) s += segment_weight(len, m - i) * g[m] * rel(m, i);
      out[i] = s * hx;
      continue;
    }
    double corr = 0.0;
    for (std::size_t e = 0; e < kGregoryNodes; ++e) {
      corr += end_correction(e) * (g[last - e] * rel(last - e, i) + g[i + e] * rel(i + e, i));
    }
    out[i] = (running + corr) * hx;
  }
  return out;
}

/// Integral over [0, r_i] for every node i.
inline std::vector<double> head_integrals(const RadialGrid& grid, std::span<const double> f) {
  std::vector<double> g(f.size());
  const auto jac = grid.jacobian();
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] * jac[i];
  return head_scaled(g, {}, grid.hx());
}

/// Integral over [r_i, R_max] for every node i.
inline std::vector<double> tail_integrals(const RadialGrid& grid, std::span<const double> f) {
  std::vector<double> g(f.size());
  const auto jac = grid.jacobian();
  for (std::size_t i = 0; i < f.size(); ++i) g[i] = f[i] * jac[i];
  return tail_scaled(g, {}, grid.hx());
}

}  // namespace quad

inline std::vector<double> RadialGrid::weights() const {
  std::vector<double> w(size());
  const std::size_t len = size() - 1;
  for (std::size_t i = 0; i < size(); ++i) w[i] = quad::segment_weight(len, i) * jac_[i] * hx_;
  return w;
}

}  // namespace epdiff
