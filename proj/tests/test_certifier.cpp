#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "epdiff/certifier.hpp"
#include "epdiff/hunter_saxton.hpp"

using namespace epdiff;

namespace {

double bump(double r, double lo, double hi) {
  const double x = (2.0 * r - lo - hi) / (hi - lo);
  return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
}

std::vector<double> neg_bump(const RadialGrid& g) {
  std::vector<double> w(g.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = -bump(g[i], 1.0, 3.0);
  return w;
}

}  // namespace

TEST(Certifier, HomogeneousH1) {
  const auto g = RadialGrid::uniform(512, 10.0);
  const auto c = certify({0, 1, 3}, g, neg_bump(g));
  EXPECT_TRUE(c.pass);
  EXPECT_TRUE(c.applicable);
  EXPECT_NEAR(c.C, 3.0, 1e-6);
  for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(c.Q[i], 3.0 * g[i] * g[i], 1e-12 * (1.0 + c.Q[i]));
}

TEST(Certifier, HomogeneousH2) {
  // q~ = (1 - (t/30) int_r |z0|)^2; M is a cumulative trapezoid, spectrally
  // accurate over the whole support and second order inside it.
  auto worst = [](std::size_t nodes) {
    const auto g = RadialGrid::uniform(nodes, 10.0);
    const auto w = neg_bump(g);
    const auto c = certify({0, 2, 3}, g, w);
    EXPECT_TRUE(c.pass);
    EXPECT_NEAR(c.C, 0.4, 1e-6);
    for (double q : c.Q) EXPECT_DOUBLE_EQ(q, 6.0);
    std::vector<double> z(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) z[i] = g[i] * g[i] * std::abs(w[i]);
    const auto tail = quad::tail_integrals(g, z);
    EXPECT_NEAR(c.M[0], tail[0] / 6.0, 1e-12);
    const double t = 0.6 * c.T_bound;
    const auto qt = majorant(c, t);
    double e = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) e = std::max(e, std::abs(qt[i] - std::pow(1.0 - t / 30.0 * tail[i], 2)));
    return e;
  };
  const double e1 = worst(512), e2 = worst(1023);
  EXPECT_LE(e1, 2e-4);
  EXPECT_GE(e1 / e2, 3.5);
}

TEST(Certifier, FullH2RecordsMinimizer) {
  const auto g = RadialGrid::uniform(512, 10.0);
  const auto c = certify({1, 2, 3}, g, neg_bump(g));
  EXPECT_TRUE(c.pass);
  EXPECT_GT(c.C, 0.0);
  EXPECT_LE(c.C, 0.4);
  EXPECT_NEAR(c.C, s_criterion({1, 2, 3}, c.s_min_r) - 1e-9, 1e-15);
  EXPECT_TRUE(std::isfinite(c.T_bound));
}

TEST(Certifier, AllInScopeKernelsPass) {
  std::vector<KernelSpec> specs;
  for (int n = 1; n <= 5; ++n) specs.push_back({0, 1, n});
  for (int n = 3; n <= 5; ++n) specs.push_back({0, 2, n});
  for (int n = 1; n <= 5; ++n) specs.push_back({1, 1, n});
  for (int n = 3; n <= 5; ++n) specs.push_back({1, 2, n});
  for (const auto& spec : specs) {
    const auto c = certify_kernel(spec, 10.0);
    EXPECT_TRUE(c.positivity.pass) << spec.label();
    EXPECT_TRUE(c.supermodularity.pass) << spec.label();
    EXPECT_TRUE(c.s_bound.pass) << spec.label();
    const double n = spec.n;
    if (spec.sigma == 0) EXPECT_NEAR(c.C, spec.k == 1 ? n : 2.0 * (n - 2.0) / (n + 2.0), 1e-6) << spec.label();
  }
  EXPECT_GE(certify_kernel({1, 1, 1}, 10.0).C, 1.0 - 1e-6);
}

TEST(Certifier, MajorantEdges) {
  const auto g = RadialGrid::uniform(256, 10.0);
  const auto zero = certify({0, 1, 3}, g, std::vector<double>(g.size(), 0.0));
  EXPECT_FALSE(zero.applicable);
  EXPECT_TRUE(std::isinf(zero.T_bound));
  for (double v : majorant(zero, 5.0)) EXPECT_EQ(v, 1.0);

  const auto c = certify({1, 1, 2}, g, neg_bump(g));
  const auto q = majorant(c, c.T_bound);
  EXPECT_NEAR(q[0], 0.0, 1e-24);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_LE(c.M[i], c.M[i - 1]);
}

TEST(Certifier, MixedSignNotApplicable) {
  const auto g = RadialGrid::uniform(256, 10.0);
  auto w = neg_bump(g);
  w[g.size() / 20] = 0.5;
  const auto c = certify({0, 2, 3}, g, w);
  EXPECT_FALSE(c.applicable);
  EXPECT_TRUE(c.pass);  // the kernel conditions still hold
  EXPECT_TRUE(std::isinf(c.T_bound));
  EXPECT_NE(c.to_text().find("certificate.applicable: false"), std::string::npos);
}

TEST(Certifier, MonitoredQuantity) {
  const auto g = RadialGrid::uniform(512, 10.0);
  const auto w = neg_bump(g);
  {
    const auto c = certify({1, 2, 4}, g, w);
    for (double v : monitored_quantity(c, FlowState::identity(g))) EXPECT_NEAR(v, 1.0, 1e-14);
    EXPECT_EQ(dominance_margin(c, FlowState::identity(g)), 0.0);
  }
  {
    // CH: q = e^{gamma - r} rho
    const auto c = certify({1, 1, 1}, g, w);
    FlowState s = FlowState::identity(g);
    for (std::size_t i = 0; i < g.size(); ++i) {
      s.gamma[i] = 1.2 * g[i] + 0.01 * g[i] * g[i];
      s.log_rho[i] = std::log(1.2 + 0.02 * g[i]);
    }
    const auto q = monitored_quantity(c, s);
    for (std::size_t i = 0; i < g.size(); ++i) {
      EXPECT_NEAR(q[i], std::exp(s.gamma[i] - g[i]) * std::exp(s.log_rho[i]), 1e-12 * q[i]);
    }
  }
  {
    // HS: q equals hs_q along the exact flow
    const int n = 3;
    const auto c = certify({0, 1, n}, g, w);
    const HSExactSolution hs(g, n, w);
    const double t = 0.7 * hs.breakdown_time();
    const auto f = hs.flow(t);
    FlowState s;
    s.t = t;
    s.gamma = f.gamma;
    for (double r : f.rho) s.log_rho.push_back(std::log(r));
    const auto q = monitored_quantity(c, s);
    const auto qe = hs.q(t);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(q[i], qe[i], 1e-10);
  }
}

TEST(Certifier, RiccatiBounds) {
  std::vector<double> rs;
  for (int i = 1; i <= 500; ++i) rs.push_back(std::exp(std::log(1e-4) + (std::log(40.0) - std::log(1e-4)) * i / 500.0));
  for (int n : {3, 4, 5}) EXPECT_EQ(riccati_violations(n, rs), 0u) << n;
}

TEST(Certifier, DominanceReport) {
  TrajectoryRecord rec;
  rec.push({0.0, 1.0, 0.0, 1.0, 0.0});
  rec.push({0.1, 0.9, 0.0, 1.0, 2e-3});
  rec.push({0.2, 0.8, 0.0, 1.0, -5e-5});
  auto rep = check_dominance(rec);
  EXPECT_TRUE(rep.pass);
  EXPECT_DOUBLE_EQ(rep.worst_margin, -5e-5);
  EXPECT_DOUBLE_EQ(rep.worst_t, 0.2);
  rec.push({0.3, 0.7, 0.0, 1.0, -2e-4});
  EXPECT_FALSE(check_dominance(rec).pass);
}
