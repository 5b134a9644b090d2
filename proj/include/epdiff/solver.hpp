#pragma once

// Lagrangian particle-trajectory solver for the radial EPDiff equation.
//
// The unknowns are the flow gamma(t, r) and rho = d gamma/dr, integrated as
// (gamma, ln rho) from the identity. With z0 = r^{n-1} omega0,
//
//   d gamma/dt (r)  = int_0^r delta(g(s), g(r)) z0/rho ds + int_r^R delta(g(r), g(s)) z0/rho ds
//   d ln rho/dt (r) = int_0^r d2delta(g(s), g(r)) z0/rho ds + int_r^R d1delta(g(r), g(s)) z0/rho ds
//
// Each delta is a short sum of products A_j(x) B_j(y), so both integrals reduce
// to running sums over the grid: O(N) per right-hand side.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "epdiff/grid.hpp"
#include "epdiff/kernel.hpp"
#include "epdiff/stencil.hpp"

namespace epdiff {

/// gamma(t, R_support) has reached 0.9 R_max: the truncated domain no longer
/// contains the moving support.
class TruncationGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct InitialData {
  int n = 1;
  std::vector<double> omega0;
  std::vector<double> z0;
  bool all_nonpositive = true;
  bool all_nonnegative = true;
  std::size_t support_index = 0;  // last node with omega0 != 0
  double support_radius = 0.0;

  bool is_zero() const { return all_nonpositive && all_nonnegative; }

  static InitialData from_omega(const RadialGrid& grid, int n, std::vector<double> omega0) {
    if (omega0.size() != grid.size()) throw std::invalid_argument("InitialData: omega0/grid size mismatch");
    InitialData d;
    d.n = n;
    d.omega0 = std::move(omega0);
    d.z0.resize(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const double w = d.omega0[i];
      if (!std::isfinite(w)) throw std::invalid_argument("InitialData: non-finite omega0 sample");
      d.z0[i] = (n == 1 ? 1.0 : std::pow(grid[i], n - 1)) * w;
      if (w > 0.0) d.all_nonpositive = false;
      if (w < 0.0) d.all_nonnegative = false;
      if (w != 0.0) d.support_index = i;
    }
    d.support_radius = grid[d.support_index];
    if (d.support_radius > 0.6 * grid.r_max()) {
      throw std::invalid_argument("InitialData: omega0 support reaches r = " + std::to_string(d.support_radius) +
                                  " > 0.6 R_max; enlarge R_max");
    }
    return d;
  }
};

struct FlowState {
  double t = 0.0;
  std::vector<double> gamma;
  std::vector<double> log_rho;

  static FlowState identity(const RadialGrid& grid) {
    FlowState s;
    s.gamma.assign(grid.nodes().begin(), grid.nodes().end());
    s.log_rho.assign(grid.size(), 0.0);
    return s;
  }

  std::vector<double> rho() const {
    std::vector<double> r(log_rho.size());
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::exp(log_rho[i]);
    return r;
  }

  std::size_t argmin_rho() const {
    return static_cast<std::size_t>(std::min_element(log_rho.begin(), log_rho.end()) - log_rho.begin());
  }
  double min_rho() const { return std::exp(log_rho[argmin_rho()]); }
};

struct FlowRates {
  std::vector<double> dgamma;
  std::vector<double> dlog_rho;
};

enum class RunStatus { completed, blowup_detected, guard_tripped };

inline const char* to_string(RunStatus s) {
  switch (s) {
    case RunStatus::completed: return "completed";
    case RunStatus::blowup_detected: return "blowup_detected";
    case RunStatus::guard_tripped: return "guard_tripped";
  }
  return "unknown";
}

struct TrajectoryRow {
  double t = 0.0;
  double min_rho = 1.0;
  double argmin_rho_r = 0.0;
  double energy = 0.0;
  double margin = std::numeric_limits<double>::quiet_NaN();
};

struct TrajectoryRecord {
  std::vector<TrajectoryRow> rows;

  void push(const TrajectoryRow& row) {
    if (!rows.empty() && !(row.t > rows.back().t)) {
      throw std::logic_error("TrajectoryRecord: timestamps must be strictly increasing");
    }
    rows.push_back(row);
  }
};

struct RunOptions {
  double dt = 1e-3;
  double horizon = 1.0;
  double epsilon = 0.05;
  std::size_t record_every = 1;
  /// Optional comparison margin evaluated at every recorded state.
  std::function<double(const FlowState&)> margin;
};

struct RunResult {
  TrajectoryRecord trajectory;
  FlowState final_state;
  RunStatus status = RunStatus::completed;
  std::string diagnostic;
  std::size_t steps = 0;
  std::size_t rejected = 0;
  /// Linear extrapolation of sqrt(min rho) to zero from the last two steps;
  /// NaN unless blowup was detected.
  double t_blowup_estimate = std::numeric_limits<double>::quiet_NaN();
};

class LagrangianSolver {
 public:
  static constexpr int kMaxHalvings = 20;

  LagrangianSolver(KernelSpec spec, RadialGrid grid, InitialData init)
      : spec_(spec), grid_(std::move(grid)), init_(std::move(init)) {
    spec_.validate();
    if (init_.n != spec_.n) throw std::invalid_argument("LagrangianSolver: initial data dimension differs from spec");
    if (init_.omega0.size() != grid_.size()) throw std::invalid_argument("LagrangianSolver: data/grid size mismatch");
  }

  const KernelSpec& spec() const { return spec_; }
  const RadialGrid& grid() const { return grid_; }
  const InitialData& initial_data() const { return init_; }

  void check_guard(const FlowState& s) const {
    const double g = s.gamma[init_.support_index];
    if (!(g < 0.9 * grid_.r_max())) {
      throw TruncationGuardError("truncation guard: gamma(t, R_support) = " + std::to_string(g) +
                                 " >= 0.9 R_max = " + std::to_string(0.9 * grid_.r_max()) + " at t = " +
                                 std::to_string(s.t));
    }
  }

  static bool is_monotone(const FlowState& s) {
    for (std::size_t i = 1; i < s.gamma.size(); ++i) {
      if (!(s.gamma[i] > s.gamma[i - 1])) return false;
    }
    return std::all_of(s.log_rho.begin(), s.log_rho.end(), [](double v) { return std::isfinite(v); });
  }

  FlowRates rhs(const FlowState& s) const {
    check_guard(s);
    const std::size_t size = grid_.size();
    const auto jac = grid_.jacobian();
    const double nm1 = spec_.n - 1.0;
    FlowRates out{std::vector<double>(size, 0.0), std::vector<double>(size, 0.0)};
    if (init_.is_zero()) return out;

    std::vector<kernel::Factors<double>> fac(size);
    std::vector<double> inv_rho(size), stretch(size), expo;
    for (std::size_t i = 0; i < size; ++i) {
      fac[i] = kernel::factors(spec_, s.gamma[i]);
      inv_rho[i] = std::exp(-s.log_rho[i]);
      // (r/gamma)^{n-1}, with r/gamma -> 1/rho at the origin
      const double ratio = i == 0 ? inv_rho[0] : grid_[i] / s.gamma[i];
      stretch[i] = nm1 == 0.0 ? 1.0 : std::pow(ratio, nm1);
    }
    if (spec_.sigma == 1) expo.assign(s.gamma.begin(), s.gamma.end());

    std::vector<double> gh(size), gt(size);
    for (std::size_t j = 0; j < fac[0].count; ++j) {
      for (std::size_t i = 0; i < size; ++i) {
        // A_j(gamma) z0 / rho  and  gamma^n b_j(gamma) omega0 (r/gamma)^{n-1} / rho
        gh[i] = s.gamma[i] * fac[i].a[j] * init_.z0[i] * inv_rho[i] * jac[i];
        gt[i] = fac[i].bt[j] * init_.omega0[i] * stretch[i] * inv_rho[i] * jac[i];
      }
      const auto head = quad::head_scaled(gh, expo, grid_.hx());
      const auto tail = quad::tail_scaled(gt, expo, grid_.hx());
      for (std::size_t i = 0; i < size; ++i) {
        const auto& f = fac[i];
        const double g = s.gamma[i];
        out.dgamma[i] += g * f.a[j] * tail[i];
        out.dlog_rho[i] += (f.a[j] + g * f.da[j]) * tail[i];
        if (i > 0) {
          out.dgamma[i] += g * f.b[j] * head[i];
          out.dlog_rho[i] += (f.b[j] + g * f.db[j]) * head[i];
        }
      }
    }
    return out;
  }

  /// One RK4 step of size dt, or nothing if a stage leaves the admissible set.
  std::optional<FlowState> try_step(const FlowState& s, double dt, const FlowRates* k1_in = nullptr,
                                    std::string* why = nullptr) const {
    auto reject = [&](const std::string& reason) {
      if (why) *why = reason;
      return std::nullopt;
    };
    const std::size_t size = grid_.size();
    try {
      const FlowRates k1 = k1_in ? *k1_in : rhs(s);
      FlowState stage = s;
      auto make_stage = [&](const FlowRates& k, double h) {
        for (std::size_t i = 0; i < size; ++i) {
          stage.gamma[i] = s.gamma[i] + h * k.dgamma[i];
          stage.log_rho[i] = s.log_rho[i] + h * k.dlog_rho[i];
        }
        stage.t = s.t + h;
        return is_monotone(stage);
      };
      if (!make_stage(k1, 0.5 * dt)) return reject("gamma lost monotonicity in stage 2");
      const FlowRates k2 = rhs(stage);
      if (!make_stage(k2, 0.5 * dt)) return reject("gamma lost monotonicity in stage 3");
      const FlowRates k3 = rhs(stage);
      if (!make_stage(k3, dt)) return reject("gamma lost monotonicity in stage 4");
      const FlowRates k4 = rhs(stage);
      FlowState next = s;
      next.t = s.t + dt;
      for (std::size_t i = 0; i < size; ++i) {
        next.gamma[i] += dt / 6.0 * (k1.dgamma[i] + 2.0 * k2.dgamma[i] + 2.0 * k3.dgamma[i] + k4.dgamma[i]);
        next.log_rho[i] +=
            dt / 6.0 * (k1.dlog_rho[i] + 2.0 * k2.dlog_rho[i] + 2.0 * k3.dlog_rho[i] + k4.dlog_rho[i]);
      }
      next.gamma[0] = 0.0;
      if (!is_monotone(next)) return reject("gamma lost monotonicity after the step");
      check_guard(next);
      return next;
    } catch (const TruncationGuardError& e) {
      return reject(e.what());
    }
  }

  /// RK4 step with up to 20 halvings on rejection. The returned state may have
  /// advanced by less than dt. Throws TruncationGuardError when every attempt fails.
  FlowState step(const FlowState& s, double dt, std::size_t* rejected = nullptr,
                 const FlowRates* k1 = nullptr) const {
    if (!(dt > 0.0)) throw std::invalid_argument("step: dt must be > 0");
    double h = dt;
    std::string why;
    for (int attempt = 0; attempt <= kMaxHalvings; ++attempt, h *= 0.5) {
      if (auto next = try_step(s, h, k1, &why)) return *next;
      if (rejected) ++*rejected;
    }
    throw TruncationGuardError("step rejected " + std::to_string(kMaxHalvings) + " times at t = " +
                               std::to_string(s.t) + "; last reason: " + why);
  }

  /// E = int z0 (d gamma/dt) / rho dr.
  double energy(const FlowState& s, const FlowRates& rates) const {
    std::vector<double> f(grid_.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = init_.z0[i] * rates.dgamma[i] * std::exp(-s.log_rho[i]);
    return quad::integrate(grid_, f);
  }

  double energy(const FlowState& s) const { return energy(s, rhs(s)); }

  /// max_i |gamma^{n-1} rho^2 omega(t, gamma_i) - z0_i| / max|z0|, with omega(t, .)
  /// recovered by interpolating u = d gamma/dt onto the fixed grid and applying
  /// the operator. Only nodes whose images sit well inside the interpolation
  /// range are compared.
  double transport_residual(const FlowState& s) const {
    const std::size_t size = grid_.size();
    double zmax = 0.0;
    for (double v : init_.z0) zmax = std::max(zmax, std::abs(v));
    if (zmax == 0.0) return 0.0;
    const FlowRates rates = rhs(s);
    const double reach = std::min(s.gamma.back(), grid_.r_max());
    std::vector<double> u(size, 0.0);
    for (std::size_t j = 1; j < size; ++j) {
      u[j] = stencil::lagrange(s.gamma, rates.dgamma, std::min(grid_[j], s.gamma.back()));
    }
    const auto omega = apply_operator(spec_, grid_, u);
    const double inner = 0.9 * reach;
    double worst = 0.0;
    for (std::size_t i = 1; i < size; ++i) {
      if (s.gamma[i] > inner) break;
      const double w = stencil::lagrange(grid_.nodes(), omega, s.gamma[i]);
      const double rho = std::exp(s.log_rho[i]);
      const double lhs = std::pow(s.gamma[i], spec_.n - 1) * rho * rho * w;
      worst = std::max(worst, std::abs(lhs - init_.z0[i]));
    }
    return worst / zmax;
  }

  RunResult run(const RunOptions& opt) const {
    if (!(opt.dt > 0.0)) throw std::invalid_argument("run: dt must be > 0");
    if (!(opt.horizon >= 0.0)) throw std::invalid_argument("run: horizon must be >= 0");
    if (!(opt.epsilon > 0.0 && opt.epsilon < 1.0)) throw std::invalid_argument("run: epsilon must lie in (0, 1)");
    RunResult res;
    FlowState s = FlowState::identity(grid_);
    s.t = 0.0;
    const std::size_t every = std::max<std::size_t>(opt.record_every, 1);
    double prev_t = 0.0, prev_min = 1.0;

    auto make_row = [&](const FlowState& st, const FlowRates& k) {
      TrajectoryRow row;
      row.t = st.t;
      const std::size_t am = st.argmin_rho();
      row.min_rho = std::exp(st.log_rho[am]);
      row.argmin_rho_r = grid_[am];
      row.energy = energy(st, k);
      if (opt.margin) row.margin = opt.margin(st);
      return row;
    };

    FlowRates k1;
    try {
      k1 = rhs(s);
    } catch (const TruncationGuardError& e) {
      res.status = RunStatus::guard_tripped;
      res.diagnostic = e.what();
      res.final_state = s;
      return res;
    }
    res.trajectory.push(make_row(s, k1));
    const double t_tol = 1e-12 * std::max(1.0, opt.horizon);

    while (true) {
      if (s.min_rho() <= opt.epsilon) {
        res.status = RunStatus::blowup_detected;
        const double a = std::sqrt(prev_min), b = std::sqrt(s.min_rho());
        if (a > b) res.t_blowup_estimate = s.t + b * (s.t - prev_t) / (a - b);
        break;
      }
      if (s.t >= opt.horizon - t_tol) {
        res.status = RunStatus::completed;
        break;
      }
      const double h = std::min(opt.dt, opt.horizon - s.t);
      FlowState next;
      try {
        next = step(s, h, &res.rejected, &k1);
        k1 = rhs(next);
      } catch (const TruncationGuardError& e) {
        res.status = RunStatus::guard_tripped;
        res.diagnostic = e.what();
        break;
      }
      prev_t = s.t;
      prev_min = s.min_rho();
      s = std::move(next);
      ++res.steps;
      const bool terminal = s.min_rho() <= opt.epsilon || s.t >= opt.horizon - t_tol;
      if (res.steps % every == 0 || terminal) res.trajectory.push(make_row(s, k1));
    }
    if (res.trajectory.rows.back().t != s.t) res.trajectory.push(make_row(s, k1));
    res.final_state = std::move(s);
    return res;
  }

 private:
  KernelSpec spec_;
  RadialGrid grid_;
  InitialData init_;
};

}  // namespace epdiff
