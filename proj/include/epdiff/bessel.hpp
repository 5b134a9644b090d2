#pragma once

// Scaled modified Bessel functions used by the radial Green kernels:
//
//   alpha_p(r) = c_p r^{-p/2} I_{p/2}(r),   beta_p(r) = c_p^{-1} r^{-p/2} K_{p/2}(r),
//   c_p = 2^{p/2} Gamma(p/2 + 1),
//
// normalized so that alpha_p(0) = 1 and r^p beta_p(r) -> 1/p as r -> 0.
//
// alpha grows like e^r and beta decays like e^{-r}; the *_hat variants return
// e^{-r} alpha_p(r) and e^{r} beta_p(r) so that products alpha_p(r) beta_q(s)
// with s >= r can be formed without intermediate overflow.
//
// Every function is a template on the floating type; the double overloads are
// what mixed int/double call sites resolve to. long double is used where
// finite differences of kernel integrals must sit below double roundoff.

#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string>

namespace epdiff::bessel {

namespace detail {

template <class T>
inline constexpr T kEps = std::numeric_limits<T>::epsilon();

template <class T>
inline void require_order(T p) {
  if (!(p >= 0.0) || !std::isfinite(p)) {
    throw std::domain_error("bessel: order p must be finite and >= 0, got " + std::to_string(static_cast<T>(p)));
  }
}

/// c_p = 2^{p/2} Gamma(p/2 + 1).
template <class T>
inline T normalization(T p) {
  const T nu = p / 2;
  return std::exp2(nu) * std::tgamma(nu + 1);
}

/// Radius above which alpha switches from the power series to the large-r
/// expansion. The expansion of I_nu drops an e^{-2r} relative term, so the
/// switch sits high enough that this term is below T precision.
template <class T>
inline T alpha_switch(T p) {
  return (std::numeric_limits<T>::digits > 53 ? T(30) : T(25)) + 2 * p;
}

/// 0F1(; nu+1; r^2/4): all terms positive, no cancellation.
template <class T>
inline T alpha_series(T p, T r) {
  const T nu = 0.5 * p;
  const T x = 0.25 * r * r;
  T term = 1.0;
  T sum = 1.0;
  for (int k = 1; k < 1000; ++k) {
    term *= x / (k * (nu + k));
    sum += term;
    if (term < 0.25 * kEps<T> * sum) break;
  }
  return sum;
}

/// e^{-r} alpha_p(r) from the Hankel expansion of I_nu.
template <class T>
inline T alpha_hat_asymptotic(T p, T r) {
  const T nu = 0.5 * p;
  const T mu = 4.0 * nu * nu;
  T term = 1.0;
  T sum = 1.0;
  T last = 1.0;
  for (int k = 1; k < 200; ++k) {
    const T odd = 2.0 * k - 1.0;
    term *= -(mu - odd * odd) / (8.0 * k * r);
    if (std::abs(term) > last) break;  // divergent tail
    sum += term;
    last = std::abs(term);
    if (last < 0.25 * kEps<T> * std::abs(sum)) break;
  }
  return normalization(p) * std::pow(r, -nu) * sum / std::sqrt(2 * std::numbers::pi_v<T> * r);
}

/// 1/Gamma(1+x) - 1/Gamma(1-x) related coefficients for Temme's series.
template <class T>
struct TemmeGammas {
  T gam1;    // (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu)
  T gam2;    // (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2
  T gampl;   // 1/Gamma(1+mu)
  T gammi;   // 1/Gamma(1-mu)
};

template <class T>
inline TemmeGammas<T> temme_gammas(T mu) {
  TemmeGammas<T> g{};
  g.gampl = 1.0 / std::tgamma(1.0 + mu);
  g.gammi = 1.0 / std::tgamma(1.0 - mu);
  g.gam2 = 0.5 * (g.gammi + g.gampl);
  if (std::abs(mu) < 1e-3) {
    // Taylor coefficients of 1/Gamma(1+x) = 1 + c2 x + c3 x^2 + c4 x^3 + ...
    constexpr T c2 = 0.57721566490153286061L;
    constexpr T c4 = -0.04200263503409523553L;
    constexpr T c6 = -0.04219773455554433675L;
    constexpr T c8 = 0.00721894324666309954L;
    const T m2 = mu * mu;
    g.gam1 = -(c2 + m2 * (c4 + m2 * (c6 + m2 * c8)));
  } else {
    g.gam1 = (g.gammi - g.gampl) / (2.0 * mu);
  }
  return g;
}

/// e^x K_mu(x), e^x K_{mu+1}(x) for |mu| <= 1/2 (Temme series for x <= 2,
/// Steed's continued fraction otherwise).
template <class T>
inline void k_pair_hat(T mu, T x, T& kmu, T& kmu1) {
  constexpr T pi = std::numbers::pi_v<T>;
  if (x <= 2.0) {
    const TemmeGammas g = temme_gammas(mu);
    const T x2 = 0.5 * x;
    const T pimu = pi * mu;
    const T fact = std::abs(pimu) < kEps<T> ? 1.0 : pimu / std::sin(pimu);
    T d = -std::log(x2);
    T e = mu * d;
    const T fact2 = std::abs(e) < kEps<T> ? 1.0 : std::sinh(e) / e;
    T ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    T sum = ff;
    e = std::exp(e);
    T p = 0.5 * e / g.gampl;
    T q = 0.5 / (e * g.gammi);
    T c = 1.0;
    d = x2 * x2;
    T sum1 = p;
    for (int i = 1; i < 500; ++i) {
      ff = (i * ff + p + q) / (i * i - mu * mu);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const T del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps<T>) break;
    }
    const T ex = std::exp(x);
    kmu = sum * ex;
    kmu1 = sum1 * (2.0 / x) * ex;
    return;
  }
  T b = 2.0 * (1.0 + x);
  T d = 1.0 / b;
  T h = d;
  T delh = d;
  T q1 = 0.0;
  T q2 = 1.0;
  const T a1 = 0.25 - mu * mu;
  T q = a1;
  T c = a1;
  T a = -a1;
  T s = 1.0 + q * delh;
  for (int i = 2; i < 10000; ++i) {
    a -= 2.0 * (i - 1);
    c = -a * c / i;
    const T qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const T dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps<T>) break;
  }
  h *= a1;
  kmu = std::sqrt(pi / (2.0 * x)) / s;
  kmu1 = kmu * (mu + x + 0.5 - h) / x;
}

/// True when nu is a half-integer m + 1/2.
template <class T>
inline bool is_half_integer(T nu, int& m) {
  const T t = nu - 0.5;
  const T rt = std::round(t);
  if (rt >= 0.0 && std::abs(t - rt) < 1e-14) {
    m = static_cast<int>(rt);
    return true;
  }
  return false;
}

/// e^x K_{m+1/2}(x) as a finite sum (elementary closed form).
template <class T>
inline T k_half_integer_hat(int m, T x) {
  T term = 1.0;
  T sum = 1.0;
  for (int k = 1; k <= m; ++k) {
    // (m+k)! / (k! (m-k)! (2x)^k) from the previous term
    term *= static_cast<T>((m + k) * (m - k + 1)) / (k * 2 * x);
    sum += term;
  }
  return std::sqrt(std::numbers::pi_v<T> / (2 * x)) * sum;
}

/// e^x K_nu(x) through Temme/Steed at the reduced order and upward recurrence.
template <class T>
inline T k_hat_general(T nu, T x) {
  const int nl = static_cast<int>(std::floor(nu + 0.5));
  const T mu = nu - nl;
  T kmu = 0.0;
  T kmu1 = 0.0;
  k_pair_hat(mu, x, kmu, kmu1);
  const T xi2 = 2.0 / x;
  for (int i = 1; i <= nl; ++i) {
    const T next = (mu + i) * xi2 * kmu1 + kmu;
    kmu = kmu1;
    kmu1 = next;
  }
  return kmu;
}

}  // namespace detail

/// e^{x} K_nu(x) for nu >= 0, x > 0. Half-integer orders use the closed form.
template <std::floating_point T>
inline T k_hat(T nu, T x) {
  int m = 0;
  if (detail::is_half_integer(nu, m)) return detail::k_half_integer_hat(m, x);
  return detail::k_hat_general(nu, x);
}

/// e^{-r} alpha_p(r).
template <std::floating_point T>
inline T alpha_hat(T p, T r) {
  detail::require_order(p);
  if (!(r >= 0)) throw std::domain_error("alpha: radius must be >= 0");
  if (r <= detail::alpha_switch(p)) return detail::alpha_series(p, r) * std::exp(-r);
  return detail::alpha_hat_asymptotic(p, r);
}

/// alpha_p(r); finite for r up to ~700 in double.
template <std::floating_point T>
inline T alpha(T p, T r) {
  detail::require_order(p);
  if (!(r >= 0)) throw std::domain_error("alpha: radius must be >= 0");
  if (r <= detail::alpha_switch(p)) return detail::alpha_series(p, r);
  return detail::alpha_hat_asymptotic(p, r) * std::exp(r);
}

/// e^{r} beta_p(r), r > 0.
template <std::floating_point T>
inline T beta_hat(T p, T r) {
  detail::require_order(p);
  if (!(r > 0)) throw std::domain_error("beta: radius must be > 0 (beta_p diverges at 0)");
  const T nu = p / 2;
  return k_hat(nu, r) * std::pow(r, -nu) / detail::normalization(p);
}

template <std::floating_point T>
inline T beta(T p, T r) {
  return beta_hat(p, r) * std::exp(-r);
}

/// r^p beta_p(r), continuously extended to 1/p at r = 0.
template <std::floating_point T>
inline T beta_scaled(T p, T r) {
  detail::require_order(p);
  if (!(r >= 0)) throw std::domain_error("beta_scaled: radius must be >= 0");
  if (r == 0) {
    if (p == 0) throw std::domain_error("beta_scaled: p = 0 diverges at r = 0");
    return 1 / p;
  }
  const T nu = p / 2;
  return k_hat(nu, r) * std::exp(-r) * std::pow(r, nu) / detail::normalization(p);
}

/// alpha_p'(r) = r/(p+2) alpha_{p+2}(r).
template <std::floating_point T>
inline T alpha_prime(T p, T r) {
  if (r == 0) return 0;
  return r / (p + 2) * alpha(p + 2, r);
}

/// beta_p'(r) = -(p+2) r beta_{p+2}(r).
template <std::floating_point T>
inline T beta_prime(T p, T r) {
  return -(p + 2) * r * beta(p + 2, r);
}

/// beta_p alpha_p' - alpha_p beta_p' - r^{-p-1}; zero in exact arithmetic.
/// Evaluated from the scaled pieces so it stays finite for large r.
template <std::floating_point T>
inline T wronskian_residual(T p, T r) {
  if (!(r > 0)) throw std::domain_error("wronskian_residual: radius must be > 0");
  const T bh = beta_hat(p, r);
  const T ah = alpha_hat(p, r);
  const T dah = r / (p + 2) * alpha_hat(p + 2, r);
  const T dbh = -(p + 2) * r * beta_hat(p + 2, r);
  return bh * dah - ah * dbh - std::pow(r, -p - 1);
}

inline double k_hat(double nu, double x) { return k_hat<double>(nu, x); }
inline double alpha_hat(double p, double r) { return alpha_hat<double>(p, r); }
inline double alpha(double p, double r) { return alpha<double>(p, r); }
inline double beta_hat(double p, double r) { return beta_hat<double>(p, r); }
inline double beta(double p, double r) { return beta<double>(p, r); }
inline double beta_scaled(double p, double r) { return beta_scaled<double>(p, r); }
inline double alpha_prime(double p, double r) { return alpha_prime<double>(p, r); }
inline double beta_prime(double p, double r) { return beta_prime<double>(p, r); }
inline double wronskian_residual(double p, double r) { return wronskian_residual<double>(p, r); }

}  // namespace epdiff::bessel
