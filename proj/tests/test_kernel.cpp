#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "epdiff/kernel.hpp"

using namespace epdiff;

namespace {

double bump(double r, double lo, double hi) {
  const double x = (2.0 * r - lo - hi) / (hi - lo);
  return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
}

double rel_linf(const std::vector<double>& a, const std::vector<double>& b, std::size_t lo, std::size_t hi) {
  double err = 0.0, ref = 0.0;
  for (std::size_t i = lo; i < hi; ++i) {
    err = std::max(err, std::abs(a[i] - b[i]));
    ref = std::max(ref, std::abs(b[i]));
  }
  return err / ref;
}

}  // namespace

TEST(Kernel, SpecValidation) {
  EXPECT_THROW((KernelSpec{0, 2, 2}.validate()), std::invalid_argument);
  EXPECT_THROW((KernelSpec{2, 1, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((KernelSpec{0, 3, 3}.validate()), std::invalid_argument);
  EXPECT_THROW((KernelSpec{0, 1, 0}.validate()), std::invalid_argument);
  EXPECT_NO_THROW((KernelSpec{1, 2, 3}.validate()));
  EXPECT_THROW(phi({0, 1, 3}, {2.0, 1.0}), std::domain_error);
  EXPECT_THROW(phi({0, 1, 3}, {0.0, 0.0}), std::domain_error);
}

TEST(Kernel, HomogeneousClosedForms) {
  EXPECT_NEAR(phi({0, 1, 3}, {1, 2}), 1.0 / 24, 1e-15);
  EXPECT_NEAR(phi({0, 2, 3}, {1, 2}), 19.0 / 240, 1e-15);
  // delta = r/6 - r^3/(30 s^2): d/dr at (1,1) is 1/6 - 1/10
  EXPECT_NEAR(d1_delta({0, 2, 3}, {1, 1}), 1.0 / 15, 1e-15);
  for (int n = 1; n <= 5; ++n) {
    const double r = 0.7, s = 1.9;
    EXPECT_NEAR(delta({0, 1, n}, {r, s}), r * std::pow(s, 1.0 - n) / n, 1e-14);
    EXPECT_NEAR(d2_delta({0, 1, n}, {r, s}), (1.0 - n) / n * r * std::pow(s, -n), 1e-14);
  }
}

TEST(Kernel, CamassaHolm) {
  const KernelSpec ch{1, 1, 1};
  EXPECT_NEAR(phi(ch, {1, 2}), std::sinh(1.0) * std::exp(-2.0) / 2.0, 1e-15);
  for (double r : {0.0, 0.4, 2.0}) {
    for (double s : {2.0, 3.5, 9.0}) {
      EXPECT_NEAR(delta(ch, {r, s}), std::exp(-s) * std::sinh(r), 1e-15);
      EXPECT_NEAR(d1_delta(ch, {r, s}), std::exp(-s) * std::cosh(r), 1e-15);
      EXPECT_NEAR(d2_delta(ch, {r, s}), -std::exp(-s) * std::sinh(r), 1e-15);
    }
  }
  for (double r : {0.0, 0.5, 3.0}) EXPECT_NEAR(q_weight(ch, r), std::exp(r), 1e-13 * std::exp(r));
}

// Reference values: tests/oracles/kernel_oracle.py (three-term H^2 formula, mpmath).
TEST(Kernel, InhomogeneousAgainstReference) {
  EXPECT_NEAR(phi({1, 2, 4}, {0.7, 1.9}), 0.005036931370893068756, 1e-16);
  EXPECT_NEAR(d1_delta({1, 2, 4}, {0.7, 1.9}), 0.0087156103879042361536, 1e-15);
  EXPECT_NEAR(d2_delta({1, 2, 4}, {0.7, 1.9}), -0.0084811092062661905685, 1e-15);
  EXPECT_NEAR(phi({1, 1, 3}, {1.5, 4}), 0.00059328041560311996607, 1e-17);
  EXPECT_NEAR(d1_delta({1, 1, 3}, {1.5, 4}), 0.0033785720069911577898, 1e-16);
  EXPECT_NEAR(d2_delta({1, 1, 3}, {1.5, 4}), -0.0046275872417043357353, 1e-16);
  EXPECT_NEAR(phi({0, 2, 5}, {0.3, 2}), 0.0041264880952380952381, 1e-16);
  EXPECT_NEAR(d1_delta({0, 2, 5}, {0.3, 2}), 0.0080922619047619047619, 1e-16);
  EXPECT_NEAR(d2_delta({0, 2, 5}, {0.3, 2}), -0.0024517857142857142857, 1e-16);
}

TEST(Kernel, SCriterion) {
  for (int n = 1; n <= 5; ++n) {
    for (double r : {0.0, 1e-4, 0.5, 3.0}) EXPECT_NEAR(s_criterion({0, 1, n}, r), n, 1e-12);
  }
  for (int n = 3; n <= 5; ++n) {
    for (double r : {0.0, 0.01, 0.5, 3.0}) EXPECT_NEAR(s_criterion({0, 2, n}, r), 2.0 * (n - 2) / (n + 2), 1e-12);
  }
  struct Ref { int k, n; double r, s; };
  const Ref refs[] = {
      {2, 3, 0.5, 0.50899081082585938405}, {2, 3, 2, 1.0555682656602534811}, {2, 3, 10, 289.42775945688593652},
      {2, 4, 0.5, 0.70628941093576419466}, {2, 4, 2, 1.1376506517041538061}, {2, 4, 10, 184.2720336052102717},
      {2, 5, 0.5, 0.87716284251735927615}, {2, 5, 2, 1.2237575783716710743}, {2, 5, 10, 126.07102635054769914},
      {1, 2, 0.5, 2.4148156862901525592},  {1, 2, 2, 7.1497064688857486241}, {1, 2, 10, 10724.56590752204488},
      {1, 3, 0.5, 3.2974425414002562937},  {1, 3, 2, 7.3890560989306502272}, {1, 3, 10, 6007.2179440381954137},
  };
  for (const auto& ref : refs) {
    const KernelSpec spec{1, ref.k, ref.n};
    EXPECT_NEAR(s_criterion(spec, ref.r), ref.s, 1e-11 * ref.s) << spec.label() << " r=" << ref.r;
    EXPECT_NEAR(s_criterion_closed(spec, ref.r), ref.s, 1e-11 * ref.s) << spec.label() << " r=" << ref.r;
  }
  // continuity across the switch to the closed forms
  for (int n = 3; n <= 5; ++n) {
    const KernelSpec spec{1, 2, n};
    EXPECT_NEAR(s_criterion(spec, 1e-3), s_criterion(spec, 0.999e-3), 1e-6);
    EXPECT_NEAR(s_criterion(spec, 1e-7), s_criterion_limit(spec), 1e-6);
  }
}

TEST(Kernel, QWeight) {
  for (int n = 1; n <= 5; ++n) EXPECT_NEAR(q_weight({0, 1, n}, 1.3), n * std::pow(1.3, n - 1), 1e-12);
  EXPECT_EQ(q_weight({0, 2, 3}, 0.0), 6.0);
  EXPECT_EQ(q_weight({0, 2, 3}, 4.0), 6.0);
  for (const KernelSpec spec : {KernelSpec{1, 1, 3}, KernelSpec{1, 2, 4}}) {
    for (double r : {0.2, 1.0, 6.0}) EXPECT_NEAR(q_weight(spec, r), 1.0 / (r * phi(spec, {0.0, r})), 1e-12 * q_weight(spec, r));
  }
}

TEST(Kernel, LogSupermodularSeparableIsExactlyZero) {
  for (const KernelSpec spec : {KernelSpec{0, 1, 3}, KernelSpec{1, 1, 2}}) {
    EXPECT_EQ(log_mixed_difference(spec, 0.3, 0.30001, 2.5e-6), 0.0);
  }
  EXPECT_GT(log_mixed_difference({0, 2, 3}, 0.3, 0.5, 1e-3), 0.0);
  EXPECT_GT(log_mixed_difference({1, 2, 3}, 0.3, 0.5, 1e-3), 0.0);
}

TEST(Kernel, RiccatiRatiosAtZero) {
  for (int n = 3; n <= 5; ++n) {
    const auto rr = riccati_ratios(n, 0.0);
    EXPECT_EQ(rr.lambda_a, 1.0);
    EXPECT_EQ(rr.lambda_b, 0.0);
  }
}

TEST(Kernel, ZeroProfiles) {
  const auto g = RadialGrid::uniform(128, 10.0);
  const std::vector<double> zero(g.size(), 0.0);
  for (const KernelSpec spec : {KernelSpec{0, 1, 3}, KernelSpec{1, 2, 3}}) {
    for (double v : invert_operator(spec, g, zero)) EXPECT_EQ(v, 0.0);
    for (double v : apply_operator(spec, g, zero)) EXPECT_EQ(v, 0.0);
  }
}

TEST(Kernel, ApplyOperatorSymbolic) {
  const auto g = RadialGrid::uniform(801, 8.0);
  std::vector<double> u(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) u[i] = g[i] * std::exp(-g[i] * g[i]);
  const auto w = apply_operator({1, 1, 1}, g, u);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const double r = g[i];
    EXPECT_NEAR(w[i], std::exp(-r * r) * (7 * r - 4 * r * r * r), 2e-7) << r;
  }
  // u = r is annihilated by the vector Laplacian
  std::vector<double> lin(g.nodes().begin(), g.nodes().end());
  for (int n = 1; n <= 4; ++n) {
    const auto wl = apply_operator({1, 1, n}, g, lin);
    for (std::size_t i = 1; i < g.size(); ++i) EXPECT_NEAR(wl[i], g[i], 1e-9 * g.r_max());
  }
}

TEST(Kernel, OneDimensionalAntiderivative) {
  const auto g = RadialGrid::uniform(2001, 10.0);
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = -bump(g[i], 1.0, 3.0);
  const auto u = invert_operator({0, 1, 1}, g, w);
  const auto tail = quad::tail_integrals(g, w);
  const auto h = g.h();
  for (std::size_t i = 2; i + 2 < g.size(); i += 37) {
    const double du = (u[i - 2] - 8 * u[i - 1] + 8 * u[i + 1] - u[i + 2]) / (12 * h);
    EXPECT_NEAR(du, tail[i], 2e-6) << g[i];
  }
}

TEST(Kernel, RoundtripCoarse) {
  const auto g = RadialGrid::uniform(1024, 20.0);
  std::vector<long double> w(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) w[i] = -std::exp(-0.5 * std::pow((g[i] - 3.0) / 0.4, 2));
  for (const KernelSpec spec : {KernelSpec{0, 1, 3}, KernelSpec{0, 2, 3}, KernelSpec{1, 1, 3}, KernelSpec{1, 2, 3}}) {
    const auto u = invert_operator<long double>(spec, g, w);
    const auto back = apply_operator<long double>(spec, g, u);
    double err = 0.0;
    for (std::size_t i = 0; i + 2 * spec.k < g.size(); ++i) err = std::max(err, double(std::abs(back[i] - w[i])));
    EXPECT_LE(err, 1e-4) << spec.label();
  }
}
