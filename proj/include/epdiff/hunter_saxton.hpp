#pragma once

// Exact radial Hunter-Saxton flow (sigma = 0, k = 1) in any dimension n.
//
//   q(t,r) = gamma^{n-1} rho / r^{n-1} = (1 + (t/2) Theta0(r))^2,  Theta0(r) = int_r^R omega0,
//   gamma^n(t,r) = n int_0^r s^{n-1} q(t,s) ds,
//
// and the flow breaks down at T* = 2/K, K = max(-min Theta0, 0), at the point
// where Theta0 is smallest.

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "epdiff/grid.hpp"
#include "epdiff/liouville.hpp"

namespace epdiff {

struct HSFlow {
  std::vector<double> gamma;
  std::vector<double> rho;
};

class HSExactSolution {
 public:
  HSExactSolution(const RadialGrid& grid, int n, std::span<const double> omega0) : grid_(grid), n_(n) {
    if (n < 1) throw std::invalid_argument("HSExactSolution: dimension must be >= 1");
    if (omega0.size() != grid.size()) throw std::invalid_argument("HSExactSolution: size mismatch");
    theta0_ = tail_integral(grid, omega0);
    blowup_ = liouville_blowup_time(theta0_);
    rpow_.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) rpow_[i] = std::pow(grid[i], n - 1);
  }

  int dimension() const { return n_; }
  const RadialGrid& grid() const { return grid_; }
  std::span<const double> theta0() const { return theta0_; }

  double breakdown_time() const { return blowup_.T; }
  std::size_t breakdown_index() const { return blowup_.argmin; }
  double breakdown_radius() const { return grid_[blowup_.argmin]; }

  std::vector<double> q(double t) const { return liouville_exact(theta0_, t); }

  /// gamma^n is accumulated as r^n q(t,0) + n int_0^r s^{n-1}(q - q(t,0)) so that
  /// the r -> 0 behaviour gamma ~ q(t,0)^{1/n} r is exact.
  HSFlow flow(double t) const {
    const std::size_t size = grid_.size();
    const auto qt = q(t);
    const double q0 = qt[0];
    std::vector<double> f(size);
    for (std::size_t i = 0; i < size; ++i) f[i] = rpow_[i] * (qt[i] - q0);
    const auto head = quad::head_integrals(grid_, f);
    HSFlow out{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
    const double inv_n = 1.0 / n_;
    out.rho[0] = std::pow(q0, inv_n);
    for (std::size_t i = 1; i < size; ++i) {
      const double r = grid_[i];
      const double gn = rpow_[i] * r * q0 + n_ * head[i];
      out.gamma[i] = std::pow(gn, inv_n);
      out.rho[i] = n_ == 1 ? qt[i] : qt[i] * std::pow(r / out.gamma[i], n_ - 1);
    }
    return out;
  }

 private:
  RadialGrid grid_;
  int n_;
  std::vector<double> theta0_;
  std::vector<double> rpow_;
  LiouvilleBlowup blowup_;
};

inline std::vector<double> hs_q(const RadialGrid& grid, int n, std::span<const double> omega0, double t) {
  return HSExactSolution(grid, n, omega0).q(t);
}

inline HSFlow hs_flow(const RadialGrid& grid, int n, std::span<const double> omega0, double t) {
  return HSExactSolution(grid, n, omega0).flow(t);
}

inline double hs_breakdown_time(const RadialGrid& grid, int n, std::span<const double> omega0) {
  return HSExactSolution(grid, n, omega0).breakdown_time();
}

}  // namespace epdiff
