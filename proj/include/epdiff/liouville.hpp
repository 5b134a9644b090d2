#pragma once

// Liouville's equation  d/dt ln q(t,r) = int_r^R z0(s)/q(t,s) ds,  q(0,.) = 1,
// whose solution is q = (1 + (t/2) Theta0(r))^2 with Theta0(r) = int_r^R z0.
// Blowup (q -> 0) happens at T = 2/K, K = max(-min Theta0, 0).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <vector>

#include "epdiff/grid.hpp"

namespace epdiff {

/// A non-negative weight w(r) on the grid and its tail integral W(r) = int_r^R w.
struct MomentumWeightProfile {
  std::vector<double> w;
  std::vector<double> tail;

  static MomentumWeightProfile from_samples(const RadialGrid& grid, std::span<const double> w) {
    if (w.size() != grid.size()) throw std::invalid_argument("MomentumWeightProfile: size mismatch");
    for (double v : w) {
      if (!(v >= 0.0)) throw std::invalid_argument("MomentumWeightProfile: weight must be >= 0");
    }
    MomentumWeightProfile p;
    p.w.assign(w.begin(), w.end());
    p.tail = quad::tail_integrals(grid, w);
    return p;
  }
};

/// Theta0(r_i) = int_{r_i}^{R_max} z0(s) ds.
inline std::vector<double> tail_integral(const RadialGrid& grid, std::span<const double> z0) {
  if (z0.size() != grid.size()) throw std::invalid_argument("tail_integral: size mismatch");
  return quad::tail_integrals(grid, z0);
}

inline double liouville_exact(double theta0, double t) {
  const double f = 1.0 + 0.5 * t * theta0;
  return f * f;
}

inline std::vector<double> liouville_exact(std::span<const double> theta0, double t) {
  std::vector<double> q(theta0.size());
  for (std::size_t i = 0; i < q.size(); ++i) q[i] = liouville_exact(theta0[i], t);
  return q;
}

struct LiouvilleBlowup {
  double K = 0.0;
  double T = std::numeric_limits<double>::infinity();
  std::size_t argmin = 0;  // node where Theta0 is smallest
};

inline LiouvilleBlowup liouville_blowup_time(std::span<const double> theta0) {
  if (theta0.empty()) throw std::invalid_argument("liouville_blowup_time: empty profile");
  LiouvilleBlowup b;
  const auto it = std::min_element(theta0.begin(), theta0.end());
  b.argmin = static_cast<std::size_t>(it - theta0.begin());
  b.K = std::max(-*it, 0.0);
  if (b.K > 0.0) b.T = 2.0 / b.K;
  return b;
}

struct PicardTrajectory {
  std::vector<double> t;
  std::vector<double> min_q;
  std::vector<std::vector<double>> snapshots;  // q at the recorded steps
  std::vector<double> q_final;
  double dt = 0.0;
  bool aborted = false;  // min q fell below the oracle floor
};

/// RK4 on ln q. dt <= 0 picks the step from max|RHS(0)| * dt <= 1e-3; the step
/// is then shrunk so that an integer number of steps lands on `horizon`.
/// `record_every` > 0 stores a q snapshot every that many steps (and the last).
inline PicardTrajectory liouville_picard_oracle(const RadialGrid& grid, std::span<const double> z0, double horizon,
                                                double dt = 0.0, std::size_t record_every = 0) {
  constexpr double kFloor = 1e-3;
  if (z0.size() != grid.size()) throw std::invalid_argument("liouville_picard_oracle: size mismatch");
  if (!(horizon >= 0.0)) throw std::invalid_argument("liouville_picard_oracle: horizon must be >= 0");
  const std::size_t n = grid.size();

  std::vector<double> scratch(n);
  auto rhs = [&](const std::vector<double>& lnq) {
    for (std::size_t i = 0; i < n; ++i) scratch[i] = z0[i] * std::exp(-lnq[i]);
    return quad::tail_integrals(grid, scratch);
  };

  std::vector<double> lnq(n, 0.0);
  if (dt <= 0.0) {
    const auto r0 = rhs(lnq);
    double m = 0.0;
    for (double v : r0) m = std::max(m, std::abs(v));
    dt = m > 0.0 ? 1e-3 / m : horizon;
  }
  const std::size_t steps = horizon > 0.0 ? static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9)) : 0;
  PicardTrajectory out;
  out.dt = steps ? horizon / static_cast<double>(steps) : 0.0;
  const double h = out.dt;

  auto record = [&](double t, bool snapshot) {
    std::vector<double> q(n);
    for (std::size_t i = 0; i < n; ++i) q[i] = std::exp(lnq[i]);
    out.t.push_back(t);
    out.min_q.push_back(*std::min_element(q.begin(), q.end()));
    if (snapshot) out.snapshots.push_back(q);
    return q;
  };
  record(0.0, record_every > 0);

  std::vector<double> stage(n);
  for (std::size_t s = 1; s <= steps; ++s) {
    const auto k1 = rhs(lnq);
    for (std::size_t i = 0; i < n; ++i) stage[i] = lnq[i] + 0.5 * h * k1[i];
    const auto k2 = rhs(stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = lnq[i] + 0.5 * h * k2[i];
    const auto k3 = rhs(stage);
    for (std::size_t i = 0; i < n; ++i) stage[i] = lnq[i] + h * k3[i];
    const auto k4 = rhs(stage);
    for (std::size_t i = 0; i < n; ++i) lnq[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
    const bool snap = record_every > 0 && (s % record_every == 0 || s == steps);
    record(static_cast<double>(s) * h, snap);
    if (out.min_q.back() < kFloor) {
      out.aborted = true;
      break;
    }
  }
  out.q_final.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.q_final[i] = std::exp(lnq[i]);
  return out;
}

}  // namespace epdiff
