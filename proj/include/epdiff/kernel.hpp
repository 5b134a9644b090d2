#pragma once

// Green kernels of the inertia operators (sigma - Delta)^k acting on radial
// vector fields u(r) d_r in R^n, for sigma in {0, 1} and k in {1, 2}.
//
// The inverse operator is
//
//   u(r) = int_0^r delta(s, r) s^{n-1} w(s) ds + int_r^inf delta(r, s) s^{n-1} w(s) ds,
//   delta(r, s) = r s phi(r, s),   defined for s >= r.
//
// Every phi used here is a sum of at most two separable terms a_j(r) b_j(s).
// The term list is the single source for the kernel, its partial derivatives,
// the weight Q and the criterion S, and the solver's O(N) right-hand side.

#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "epdiff/bessel.hpp"
#include "epdiff/grid.hpp"
#include "epdiff/stencil.hpp"

namespace epdiff {

/// Which inertia operator: (sigma - Delta)^k on R^n.
struct KernelSpec {
  int sigma = 0;
  int k = 1;
  int n = 1;

  void validate() const {
    if (sigma != 0 && sigma != 1) throw std::invalid_argument("KernelSpec: sigma must be 0 or 1");
    if (k != 1 && k != 2) throw std::invalid_argument("KernelSpec: k must be 1 or 2");
    if (n < 1) throw std::invalid_argument("KernelSpec: dimension n must be >= 1");
    if (k == 2 && n < 3) {
      throw std::invalid_argument("KernelSpec: k = 2 requires n >= 3 (the radial operator is not invertible for n < 3)");
    }
  }

  std::string label() const {
    return "sigma=" + std::to_string(sigma) + ",k=" + std::to_string(k) + ",n=" + std::to_string(n);
  }

  friend bool operator==(const KernelSpec&, const KernelSpec&) = default;
};

/// A point of D = {s >= r >= 0} \ {(0,0)}.
struct KernelPoint {
  double r = 0.0;
  double s = 0.0;

  void validate() const {
    if (!(r >= 0.0) || !(s >= r) || s == 0.0 || !std::isfinite(s)) {
      throw std::domain_error("KernelPoint: (" + std::to_string(r) + ", " + std::to_string(s) +
                              ") is outside D = {s >= r >= 0} \\ {(0,0)}");
    }
  }
};

namespace kernel {

inline constexpr std::size_t kMaxTerms = 2;

/// Values of the separable factors at one radius x. For sigma = 1 the
/// exponential part is split off: a = a_hat e^{x}, b = b_hat e^{-x}; for
/// sigma = 0 the hats are the plain values.
///   a, da : a_j(x), a_j'(x)
///   b, db : b_j(x), b_j'(x)      (not defined at x = 0)
///   bt    : x^n b_j(x)           (regular at x = 0)
template <class T = double>
struct Factors {
  std::size_t count = 0;
  std::array<T, kMaxTerms> a{}, da{}, b{}, db{}, bt{};
};

template <class T = double>
inline Factors<T> factors(const KernelSpec& spec, T x) {
  namespace bs = epdiff::bessel;
  Factors<T> f;
  const T n = spec.n;
  const T inf = std::numeric_limits<T>::infinity();
  const bool at_zero = (x == 0);
  if (spec.sigma == 0 && spec.k == 1) {
    f.count = 1;
    f.a[0] = 1;
    f.da[0] = 0;
    f.b[0] = at_zero ? inf : std::pow(x, -n) / n;
    f.db[0] = at_zero ? -inf : -std::pow(x, -n - 1);
    f.bt[0] = 1 / n;
  } else if (spec.sigma == 0 && spec.k == 2) {
    f.count = 2;
    const T c1 = 1 / (2 * n * (n - 2));
    const T c2 = -1 / (2 * n * (n + 2));
    f.a[0] = 1;
    f.da[0] = 0;
    f.b[0] = at_zero ? inf : c1 * std::pow(x, 2 - n);
    f.db[0] = at_zero ? -inf : c1 * (2 - n) * std::pow(x, 1 - n);
    f.bt[0] = c1 * x * x;
    f.a[1] = x * x;
    f.da[1] = 2 * x;
    f.b[1] = at_zero ? -inf : c2 * std::pow(x, -n);
    f.db[1] = at_zero ? inf : -c2 * n * std::pow(x, -n - 1);
    f.bt[1] = c2;
  } else if (spec.sigma == 1 && spec.k == 1) {
    f.count = 1;
    f.a[0] = bs::alpha_hat(n, x);
    f.da[0] = x / (n + 2) * bs::alpha_hat(n + 2, x);
    f.b[0] = at_zero ? inf : bs::beta_hat(n, x);
    f.db[0] = at_zero ? -inf : -(n + 2) * x * bs::beta_hat(n + 2, x);
    f.bt[0] = bs::beta_scaled(n, x) * std::exp(x);
  } else {
    // phi = (1/2n) [alpha_n(r) beta_{n-2}(s) - j(r) beta_n(s)],  j = n r^2 alpha_{n+2}/(n+2)
    f.count = 2;
    const T an = bs::alpha_hat(n, x);
    const T an2 = bs::alpha_hat(n + 2, x);
    const T an4 = bs::alpha_hat(n + 4, x);
    const T inv2n = 1 / (2 * n);
    f.a[0] = an;
    f.da[0] = x / (n + 2) * an2;
    f.a[1] = n / (n + 2) * x * x * an2;
    f.da[1] = n / (n + 2) * (2 * x * an2 + x * x * x / (n + 4) * an4);
    const T ex = std::exp(x);
    f.bt[0] = inv2n * x * x * bs::beta_scaled(n - 2, x) * ex;
    f.bt[1] = -inv2n * bs::beta_scaled(n, x) * ex;
    if (at_zero) {
      f.b[0] = inf;
      f.db[0] = -inf;
      f.b[1] = -inf;
      f.db[1] = inf;
    } else {
      const T bn = bs::beta_hat(n, x);
      f.b[0] = inv2n * bs::beta_hat(n - 2, x);
      f.db[0] = -x * bn / 2;  // beta_{n-2}' = -n x beta_n
      f.b[1] = -inv2n * bn;
      f.db[1] = inv2n * (n + 2) * x * bs::beta_hat(n + 2, x);
    }
  }
  return f;
}

/// e^{sigma (r - s)}: the exponential factor of a_j(r) b_j(s).
inline double exp_factor(const KernelSpec& spec, double r, double s) {
  return spec.sigma == 1 ? std::exp(r - s) : 1.0;
}

}  // namespace kernel

/// phi(r, s) on D; strictly positive there.
inline double phi(const KernelSpec& spec, KernelPoint pt) {
  spec.validate();
  pt.validate();
  const auto fr = kernel::factors(spec, pt.r);
  const auto fs = kernel::factors(spec, pt.s);
  double sum = 0.0;
  for (std::size_t j = 0; j < fr.count; ++j) sum += fr.a[j] * fs.b[j];
  return sum * kernel::exp_factor(spec, pt.r, pt.s);
}

/// delta(r, s) = r s phi(r, s).
inline double delta(const KernelSpec& spec, KernelPoint pt) { return pt.r * pt.s * phi(spec, pt); }

/// d delta / d r; at s = r this is the one-sided limit from inside D.
inline double d1_delta(const KernelSpec& spec, KernelPoint pt) {
  spec.validate();
  pt.validate();
  const auto fr = kernel::factors(spec, pt.r);
  const auto fs = kernel::factors(spec, pt.s);
  double sum = 0.0;
  for (std::size_t j = 0; j < fr.count; ++j) sum += (fr.a[j] + pt.r * fr.da[j]) * fs.b[j];
  return pt.s * sum * kernel::exp_factor(spec, pt.r, pt.s);
}

/// d delta / d s.
inline double d2_delta(const KernelSpec& spec, KernelPoint pt) {
  spec.validate();
  pt.validate();
  const auto fr = kernel::factors(spec, pt.r);
  const auto fs = kernel::factors(spec, pt.s);
  double sum = 0.0;
  for (std::size_t j = 0; j < fr.count; ++j) sum += fr.a[j] * (fs.b[j] + pt.s * fs.db[j]);
  return pt.r * sum * kernel::exp_factor(spec, pt.r, pt.s);
}

/// Leading power m of Q(r) = r^m Qreg(r) near r = 0.
inline int q_power(const KernelSpec& spec) { return spec.k == 1 ? spec.n - 1 : spec.n - 3; }

/// Regular part of Q: Q(r) = r^m Qreg(r), Qreg(0) > 0.
inline double q_regular(const KernelSpec& spec, double r) {
  const double n = spec.n;
  if (spec.sigma == 0) return spec.k == 1 ? n : 2.0 * n * (n - 2.0);
  if (spec.k == 1) return 1.0 / bessel::beta_scaled(n, r);
  return 2.0 * n / bessel::beta_scaled(n - 2.0, r);
}

/// Q(r) = 1 / (r phi(0, r)), continuously extended to r = 0.
inline double q_weight(const KernelSpec& spec, double r) {
  spec.validate();
  if (!(r >= 0.0)) throw std::domain_error("q_weight: r must be >= 0");
  const int m = q_power(spec);
  const double lead = (m == 0) ? 1.0 : std::pow(r, m);
  return lead * q_regular(spec, r);
}

/// Q(gamma)/Q(r), with the r = 0 node handled through the limit gamma/r -> rho(0).
inline double q_ratio(const KernelSpec& spec, double gamma, double r, double rho0) {
  const int m = q_power(spec);
  const double stretch = (r == 0.0) ? rho0 : gamma / r;
  const double lead = (m == 0) ? 1.0 : std::pow(stretch, m);
  return lead * q_regular(spec, gamma) / q_regular(spec, r);
}

/// lim_{r->0} S(r).
inline double s_criterion_limit(const KernelSpec& spec) {
  const double n = spec.n;
  if (spec.k == 1) return n;
  return 2.0 * (n - 2.0) / (n + 2.0);
}

/// H^2 Riccati ratios lambda_a = alpha_{n-2}/alpha_n and
/// lambda_b = beta_{n-2}/(n^2 beta_n), with their derivatives.
struct RiccatiRatios {
  double lambda_a, dlambda_a, lambda_b, dlambda_b;
};

inline RiccatiRatios riccati_ratios(int dim, double r) {
  namespace bs = epdiff::bessel;
  const double n = dim;
  RiccatiRatios out{};
  const double an = bs::alpha_hat(n, r);
  const double anm2 = bs::alpha_hat(n - 2.0, r);
  const double anp2 = bs::alpha_hat(n + 2.0, r);
  out.lambda_a = anm2 / an;
  out.dlambda_a = r * (an * an / n - anm2 * anp2 / (n + 2.0)) / (an * an);
  if (r == 0.0) {
    out.lambda_b = 0.0;
    out.dlambda_b = 0.0;
    return out;
  }
  const double sn = bs::beta_scaled(n, r);
  const double snm2 = bs::beta_scaled(n - 2.0, r);
  const double snp2 = bs::beta_scaled(n + 2.0, r);
  out.lambda_b = r * r * snm2 / (n * n * sn);
  // beta_p = s_p r^{-p}; combine the quotient rule over a common r^{-2n}.
  out.dlambda_b = r * (-n * sn * sn + (n + 2.0) * snm2 * snp2) / (n * n * sn * sn);
  return out;
}

/// Closed forms of S(r): n; 2(n-2)/(n+2); 1/(r^n beta_n(r)); and the
/// j / lambda_b expression for the H^2 kernel.
inline double s_criterion_closed(const KernelSpec& spec, double r) {
  spec.validate();
  if (r == 0.0) return s_criterion_limit(spec);
  const double n = spec.n;
  if (spec.sigma == 0) return s_criterion_limit(spec);
  if (spec.k == 1) return 1.0 / bessel::beta_scaled(n, r);
  // S = j/(n lambda_b^2) [lambda_b^2 + lambda_b - r^2/n^2], j = n r^2 alpha_{n+2}/(n+2)
  const double lb = riccati_ratios(spec.n, r).lambda_b;
  const double j = n * r * r * bessel::alpha(n + 2.0, r) / (n + 2.0);
  return j / (n * lb * lb) * (lb * lb + lb - r * r / (n * n));
}

/// S(r) = [r d1phi(r,r) phi(0,r) - r phi(r,r) d2phi(0,r)] / phi(0,r)^2.
/// The general quotient is used for r >= 1e-3; below that the closed forms
/// (which have no cancellation near 0) are returned.
inline double s_criterion(const KernelSpec& spec, double r) {
  spec.validate();
  if (!(r >= 0.0)) throw std::domain_error("s_criterion: r must be >= 0");
  if (r < 1e-3) return s_criterion_closed(spec, r);
  const auto f0 = kernel::factors(spec, 0.0);
  const auto fr = kernel::factors(spec, r);
  double d1phi_rr = 0.0, phi_rr = 0.0, phi_0r = 0.0, d2phi_0r = 0.0;
  for (std::size_t j = 0; j < fr.count; ++j) {
    d1phi_rr += fr.da[j] * fr.b[j];
    phi_rr += fr.a[j] * fr.b[j];
    phi_0r += f0.a[j] * fr.b[j];
    d2phi_0r += f0.a[j] * fr.db[j];
  }
  // hats: phi(0,r) and d2phi(0,r) carry e^{-sigma r}; phi(r,r), d1phi(r,r) carry none.
  const double s_hat = r * (d1phi_rr * phi_0r - phi_rr * d2phi_0r) / (phi_0r * phi_0r);
  return spec.sigma == 1 ? s_hat * std::exp(r) : s_hat;
}

/// Mixed second difference of ln phi on the square [r, r+h] x [s, s+h]:
/// ln[phi(r+h,s+h) phi(r,s) / (phi(r+h,s) phi(r,s+h))] / h^2.
/// The cross-ratio numerator is expanded over the separable terms, where the
/// diagonal products cancel identically, so separable kernels give exactly 0.
inline double log_mixed_difference(const KernelSpec& spec, double r, double s, double h) {
  const auto fr0 = kernel::factors(spec, r);
  const auto fr1 = kernel::factors(spec, r + h);
  const auto fs0 = kernel::factors(spec, s);
  const auto fs1 = kernel::factors(spec, s + h);
  double phi10 = 0.0, phi01 = 0.0;
  for (std::size_t j = 0; j < fr0.count; ++j) {
    phi10 += fr1.a[j] * fs0.b[j];
    phi01 += fr0.a[j] * fs1.b[j];
  }
  double numer = 0.0;
  for (std::size_t j = 0; j < fr0.count; ++j) {
    for (std::size_t m = j + 1; m < fr0.count; ++m) {
      const double da = fr1.a[j] * fr0.a[m] - fr1.a[m] * fr0.a[j];
      const double db = fs1.b[j] * fs0.b[m] - fs1.b[m] * fs0.b[j];
      numer += da * db;
    }
  }
  return std::log1p(numer / (phi10 * phi01)) / (h * h);
}

// ---------------------------------------------------------------------------
// Operator inversion and application on grid profiles.

/// Warning text when omega has support features (sign changes or support
/// edges) closer than 8 grid spacings; empty when resolved.
inline std::optional<std::string> resolution_warning(const RadialGrid& grid, std::span<const double> omega) {
  auto sign = [](double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); };
  std::optional<std::size_t> last_feature;
  for (std::size_t i = 1; i < omega.size(); ++i) {
    if (sign(omega[i]) == sign(omega[i - 1])) continue;
    if (last_feature && i - *last_feature < 8) {
      return "invert_operator: omega has features closer than 8 grid spacings near r = " + std::to_string(grid[i]) +
             "; quadrature is under-resolved";
    }
    last_feature = i;
  }
  return std::nullopt;
}

/// u = (sigma - Delta)^{-k} omega by direct quadrature of the Green kernel,
/// split at s = r_i. Assumes omega is supported inside [0, R_max]. T may be
/// long double when u is to be differentiated numerically afterwards.
template <class T = double>
inline std::vector<T> invert_operator(const KernelSpec& spec, const RadialGrid& grid, std::span<const T> omega,
                                      std::string* warning = nullptr) {
  spec.validate();
  const std::size_t n_nodes = grid.size();
  if (omega.size() != n_nodes) throw std::invalid_argument("invert_operator: omega/grid size mismatch");
  if (spec.sigma == 1 && grid.r_max() > 600.0) {
    throw std::invalid_argument("invert_operator: R_max > 600 overflows the unscaled Bessel tables");
  }
  if (warning) {
    std::vector<double> w(omega.begin(), omega.end());
    *warning = resolution_warning(grid, w).value_or("");
  }

  const auto jac = grid.jacobian();
  const T n = spec.n;
  // Unscaled factor tables: a_j(r), r^n a_j(r) omega jac, b_j(r), r^n b_j(r) omega jac.
  std::size_t terms = 0;
  std::vector<std::array<T, kernel::kMaxTerms>> a(n_nodes), b(n_nodes), head_g(n_nodes), tail_g(n_nodes);
  for (std::size_t m = 0; m < n_nodes; ++m) {
    const T r = grid[m];
    const auto f = kernel::factors<T>(spec, r);
    terms = f.count;
    const T up = spec.sigma == 1 ? std::exp(r) : T(1);
    const T rn = std::pow(r, n);
    for (std::size_t j = 0; j < f.count; ++j) {
      a[m][j] = f.a[j] * up;
      b[m][j] = f.b[j] / up;
      head_g[m][j] = rn * a[m][j] * omega[m] * jac[m];
      tail_g[m][j] = f.bt[j] / up * omega[m] * jac[m];
    }
  }

  std::vector<T> u(n_nodes, T(0));
  for (std::size_t i = 1; i < n_nodes; ++i) {
    const std::size_t tail_len = n_nodes - 1 - i;
    T total = 0;
    for (std::size_t j = 0; j < terms; ++j) {
      T head = 0;
      for (std::size_t m = 0; m <= i; ++m) head += quad::segment_weight<T>(i, m) * head_g[m][j];
      T tail = 0;
      for (std::size_t m = i; m < n_nodes; ++m) tail += quad::segment_weight<T>(tail_len, m - i) * tail_g[m][j];
      total += b[i][j] * head + a[i][j] * tail;
    }
    u[i] = T(grid[i]) * total * T(grid.hx());
  }
  return u;
}

inline std::vector<double> invert_operator(const KernelSpec& spec, const RadialGrid& grid,
                                           const std::vector<double>& omega, std::string* warning = nullptr) {
  return invert_operator<double>(spec, grid, std::span<const double>(omega), warning);
}

namespace detail {

/// One application of L w = sigma w - w'' - (n+1) w'/r to the even profile
/// w = u/r, using (sigma - Delta_vec)(r w) = r L w. Stencils are 5 points
/// drawn from the nodes and their mirror images, skipping r = 0, so no
/// quantity is divided by r^2 and the value at the origin is never needed.
template <class T>
inline std::vector<T> apply_even(const KernelSpec& spec, const RadialGrid& grid, std::span<const T> w) {
  constexpr long W = 5;
  const long n_nodes = static_cast<long>(grid.size());
  const T np1 = spec.n + 1;
  // signed index q -> position: q > 0 is node q, q < 0 its mirror image
  auto pos = [&](long q) { return q > 0 ? T(grid[q]) : -T(grid[-q]); };
  auto val = [&](long q) { return w[q > 0 ? q : -q]; };
  std::vector<T> out(grid.size(), T(0));
  std::array<T, W> xs{};
  std::array<T, W> vs{};
  for (long i = 1; i < n_nodes; ++i) {
    long lo = std::min(i - W / 2, n_nodes - W);
    for (int q = 0, c = 0; c < W; ++q) {
      long idx = lo + q;
      if (lo <= 0) idx = (lo + q <= 0) ? lo + q - 1 : lo + q;  // skip 0
      if (idx == 0) continue;
      xs[c] = pos(idx);
      vs[c] = val(idx);
      ++c;
    }
    const auto c = stencil::fornberg<T>(T(grid[i]), xs, 2);
    T d1 = 0, d2 = 0;
    for (int q = 0; q < W; ++q) {
      d1 += c[1][q] * vs[q];
      d2 += c[2][q] * vs[q];
    }
    out[i] = T(spec.sigma) * w[i] - d2 - np1 * d1 / T(grid[i]);
  }
  return out;
}

}  // namespace detail

/// omega = (sigma - Delta_vec)^k u, Delta_vec u = u'' + (n-1)u'/r - (n-1)u/r^2,
/// by 4th-order finite differences on u/r. u must be odd through r = 0.
template <class T = double>
inline std::vector<T> apply_operator(const KernelSpec& spec, const RadialGrid& grid, std::span<const T> u) {
  spec.validate();
  if (u.size() != grid.size()) throw std::invalid_argument("apply_operator: u/grid size mismatch");
  std::vector<T> w(u.size(), T(0));
  for (std::size_t i = 1; i < u.size(); ++i) w[i] = u[i] / T(grid[i]);
  for (int pass = 0; pass < spec.k; ++pass) w = detail::apply_even<T>(spec, grid, std::span<const T>(w));
  for (std::size_t i = 0; i < w.size(); ++i) w[i] *= T(grid[i]);
  return w;
}

inline std::vector<double> apply_operator(const KernelSpec& spec, const RadialGrid& grid, const std::vector<double>& u) {
  return apply_operator<double>(spec, grid, std::span<const double>(u));
}

}  // namespace epdiff
