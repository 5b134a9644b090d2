#pragma once

// Numerical verification of the blowup criterion for a kernel:
//   (a) phi > 0 on D = {s >= r >= 0} \ {(0,0)},
//   (b) ln phi is supermodular on D,
//   (c) S(r) >= C > 0,
// followed by the Liouville comparison majorant
//   q~(t, r) = (1 - (C t / 2) M(r))^2,  M(r) = int_r^R s^{n-1} |omega0(s)| / Q(s) ds,
// which vanishes first at t = T_bound = 2 / (C M(0)).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <sstream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "epdiff/grid.hpp"
#include "epdiff/kernel.hpp"
#include "epdiff/solver.hpp"

namespace epdiff {

struct ConditionResult {
  bool pass = false;
  double worst = std::numeric_limits<double>::quiet_NaN();  // smallest sampled value
  double r = 0.0;
  double s = 0.0;
};

struct CertifierOptions {
  std::size_t mesh = 200;            // log-spaced points per axis on [r_floor, R_max]
  double r_floor = 1e-3;
  std::size_t s_samples = 2000;      // log-spaced r samples for S, plus r = 0
  double safety = 1e-9;              // C = min S - safety
  double supermodular_tol = 1e-9;    // accepted undershoot of the mixed log difference
  double h = 1e-3;
};

struct BlowupCertificate {
  KernelSpec spec;
  bool applicable = false;  // omega0 <= 0 and not identically zero
  bool pass = false;
  double C = std::numeric_limits<double>::quiet_NaN();
  double s_min_r = 0.0;
  ConditionResult positivity;
  ConditionResult supermodularity;
  ConditionResult s_bound;
  std::vector<double> r;  // grid nodes
  std::vector<double> Q;
  std::vector<double> M;
  double T_bound = std::numeric_limits<double>::infinity();
  std::string note;

  std::string to_text(const std::string& prefix = "") const;
};

namespace cert_detail {

inline std::vector<double> log_mesh(double lo, double hi, std::size_t count) {
  std::vector<double> x(count);
  const double a = std::log(lo), b = std::log(hi);
  for (std::size_t i = 0; i < count; ++i) {
    x[i] = std::exp(a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1));
  }
  x.back() = hi;
  return x;
}

inline void track(ConditionResult& c, double v, double r, double s) {
  if (std::isnan(c.worst) || v < c.worst || std::isnan(v)) {
    c.worst = v;
    c.r = r;
    c.s = s;
  }
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace cert_detail

/// Checks (a)-(c) for the kernel on [0, r_max]. Independent of omega0.
inline BlowupCertificate certify_kernel(const KernelSpec& spec, double r_max, const CertifierOptions& opt = {}) {
  spec.validate();
  BlowupCertificate c;
  c.spec = spec;
  auto mesh = cert_detail::log_mesh(opt.r_floor, r_max, opt.mesh);
  std::vector<double> rows{0.0};
  rows.insert(rows.end(), mesh.begin(), mesh.end());

  // (a) and (b) on the mesh
  for (double r : rows) {
    for (double s : mesh) {
      if (s < r) continue;
      cert_detail::track(c.positivity, phi(spec, {r, s}), r, s);
      if (s > r) {
        const double h = std::min(opt.h, (s - r) / 4.0);
        cert_detail::track(c.supermodularity, log_mixed_difference(spec, r, s, h), r, s);
      }
    }
  }
  // near-diagonal band
  for (double r : rows) {
    for (double off : {4e-3, 6e-3, 1e-2, 2e-2, 5e-2}) {
      const double s = r + off;
      if (s > r_max) continue;
      cert_detail::track(c.positivity, phi(spec, {r, s}), r, s);
      cert_detail::track(c.supermodularity, log_mixed_difference(spec, r, s, std::min(opt.h, off / 4.0)), r,
                         s);
    }
  }
  c.positivity.pass = c.positivity.worst > 0.0;
  c.supermodularity.pass = c.supermodularity.worst >= -opt.supermodular_tol;

  // (c)
  std::vector<double> sr{0.0};
  const auto smesh = cert_detail::log_mesh(opt.r_floor * 1e-3, r_max, opt.s_samples);
  sr.insert(sr.end(), smesh.begin(), smesh.end());
  for (double r : sr) cert_detail::track(c.s_bound, s_criterion(spec, r), r, r);
  c.C = c.s_bound.worst - opt.safety;
  c.s_min_r = c.s_bound.r;
  c.s_bound.pass = c.C > 0.0;

  c.pass = c.positivity.pass && c.supermodularity.pass && c.s_bound.pass;
  return c;
}

/// Full certificate for data omega0 on a grid: kernel conditions plus the
/// majorant data Q, M and T_bound. Mixed-sign data is marked not applicable.
inline BlowupCertificate certify(const KernelSpec& spec, const RadialGrid& grid, std::span<const double> omega0,
                                 const CertifierOptions& opt = {}) {
  if (omega0.size() != grid.size()) throw std::invalid_argument("certify: omega0/grid size mismatch");
  BlowupCertificate c = certify_kernel(spec, grid.r_max(), opt);
  const std::size_t size = grid.size();
  c.r.assign(grid.nodes().begin(), grid.nodes().end());
  c.Q.resize(size);
  bool nonpositive = true, nonzero = false;
  for (double w : omega0) {
    if (w > 0.0) nonpositive = false;
    if (w != 0.0) nonzero = true;
  }
  c.applicable = nonpositive && nonzero;
  if (!nonpositive) c.note = "omega0 changes sign; comparison not applicable";
  if (!nonzero) c.note = "omega0 vanishes identically";

  // s^{n-1} / Q(s) = s^{n-1-m} / Qreg(s) stays finite at 0
  const int m = q_power(spec);
  std::vector<double> f(size);
  for (std::size_t i = 0; i < size; ++i) {
    const double r = grid[i];
    c.Q[i] = q_weight(spec, r);
    const int p = spec.n - 1 - m;
    const double lead = p == 0 ? 1.0 : std::pow(r, p);
    f[i] = lead * std::abs(omega0[i]) / q_regular(spec, r);
  }
  // right-to-left cumulative trapezoid: non-increasing for f >= 0
  c.M.assign(size, 0.0);
  for (std::size_t i = size - 1; i-- > 0;) c.M[i] = c.M[i + 1] + 0.5 * (grid[i + 1] - grid[i]) * (f[i] + f[i + 1]);
  if (c.applicable && c.pass) c.T_bound = 2.0 / (c.C * c.M[0]);
  return c;
}

inline std::vector<double> majorant(const BlowupCertificate& c, double t) {
  std::vector<double> q(c.M.size());
  for (std::size_t i = 0; i < q.size(); ++i) {
    const double f = 1.0 - 0.5 * c.C * t * c.M[i];
    q[i] = f * f;
  }
  return q;
}

/// q(t, r) = Q(gamma) rho / Q(r), extended to r = 0 through gamma/r -> rho(t, 0).
inline std::vector<double> monitored_quantity(const BlowupCertificate& c, const FlowState& s) {
  if (s.gamma.size() != c.r.size()) throw std::invalid_argument("monitored_quantity: state/certificate size mismatch");
  std::vector<double> q(s.gamma.size());
  const double rho0 = std::exp(s.log_rho[0]);
  for (std::size_t i = 0; i < q.size(); ++i) {
    q[i] = q_ratio(c.spec, s.gamma[i], c.r[i], rho0) * std::exp(s.log_rho[i]);
  }
  return q;
}

/// min_i [q~(t, r_i) - q(t, r_i)].
inline double dominance_margin(const BlowupCertificate& c, const FlowState& s) {
  const auto qt = majorant(c, s.t);
  const auto q = monitored_quantity(c, s);
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < q.size(); ++i) m = std::min(m, qt[i] - q[i]);
  return m;
}

struct DominanceReport {
  bool pass = true;
  double worst_margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  std::size_t checked = 0;
};

inline constexpr double kDominanceTol = 1e-4;

/// Reads the margin column of a trajectory recorded with dominance_margin attached.
inline DominanceReport check_dominance(const TrajectoryRecord& rec, double tol = kDominanceTol) {
  DominanceReport out;
  for (const auto& row : rec.rows) {
    if (std::isnan(row.margin)) continue;
    ++out.checked;
    if (row.margin < out.worst_margin) {
      out.worst_margin = row.margin;
      out.worst_t = row.t;
    }
  }
  out.pass = out.checked > 0 && out.worst_margin >= -tol;
  return out;
}

/// Pointwise H^2 Riccati bounds on r > 0:
///   lambda_a' >= 0, lambda_a <= 1/2 + sqrt(1/4 + r^2/n^2),
///   lambda_b' >= 0, lambda_b >= sqrt(1/4 + r^2/n^2) - 1/2,
/// with lambda_a(0) = 1. Returns the number of violated samples.
inline std::size_t riccati_violations(int n, std::span<const double> rs, double rel_tol = 1e-12) {
  std::size_t bad = 0;
  const auto at0 = riccati_ratios(n, 0.0);
  if (std::abs(at0.lambda_a - 1.0) > rel_tol) ++bad;
  for (double r : rs) {
    const auto v = riccati_ratios(n, r);
    const double root = std::sqrt(0.25 + r * r / (static_cast<double>(n) * n));
    const double up = 0.5 + root, lo = root - 0.5;
    if (v.dlambda_a < 0.0) ++bad;
    if (v.dlambda_b < 0.0) ++bad;
    if (v.lambda_a > up * (1.0 + rel_tol)) ++bad;
    if (v.lambda_b < lo * (1.0 - rel_tol)) ++bad;
  }
  return bad;
}

inline std::string BlowupCertificate::to_text(const std::string& prefix) const {
  using cert_detail::fmt;
  std::ostringstream os;
  auto line = [&](const std::string& k, const std::string& v) { os << prefix << k << ": " << v << '\n'; };
  auto cond = [&](const std::string& name, const ConditionResult& c) {
    line(name + ".pass", c.pass ? "true" : "false");
    line(name + ".worst", fmt(c.worst));
    line(name + ".r", fmt(c.r));
    line(name + ".s", fmt(c.s));
  };
  line("certificate.spec", spec.label());
  line("certificate.applicable", applicable ? "true" : "false");
  line("certificate.pass", pass ? "true" : "false");
  line("certificate.C", fmt(C));
  line("certificate.s_min_r", fmt(s_min_r));
  cond("certificate.positivity", positivity);
  cond("certificate.log_supermodularity", supermodularity);
  cond("certificate.s_bound", s_bound);
  line("certificate.M0", M.empty() ? "nan" : fmt(M[0]));
  line("certificate.T_bound", fmt(T_bound));
  if (!note.empty()) line("certificate.note", note);
  return os.str();
}

}  // namespace epdiff
