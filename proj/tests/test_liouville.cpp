#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "epdiff/liouville.hpp"

using namespace epdiff;

namespace {

double bump(double r, double lo, double hi) {
  const double x = (2.0 * r - lo - hi) / (hi - lo);
  return std::abs(x) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - x * x)) : 0.0;
}

// z0 <= 0 scaled so that min Theta0 = -0.5, hence T = 4.
std::vector<double> scaled_profile(const RadialGrid& g) {
  std::vector<double> z(g.size());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = -g[i] * g[i] * bump(g[i], 1.0, 3.0);
  const auto th = tail_integral(g, z);
  const double s = 0.5 / -*std::min_element(th.begin(), th.end());
  for (double& v : z) v *= s;
  return z;
}

}  // namespace

TEST(Liouville, ZeroProfile) {
  const auto g = RadialGrid::uniform(256, 10.0);
  const std::vector<double> z(g.size(), 0.0);
  const auto th = tail_integral(g, z);
  const auto b = liouville_blowup_time(th);
  EXPECT_EQ(b.K, 0.0);
  EXPECT_TRUE(std::isinf(b.T));
  for (double v : liouville_exact(th, 7.0)) EXPECT_EQ(v, 1.0);
  const auto p = liouville_picard_oracle(g, z, 3.0);
  for (double v : p.q_final) EXPECT_EQ(v, 1.0);
}

TEST(Liouville, BlowupTime) {
  const auto g = RadialGrid::uniform(1024, 10.0);
  const auto z = scaled_profile(g);
  const auto b = liouville_blowup_time(tail_integral(g, z));
  EXPECT_NEAR(b.K, 0.5, 1e-14);
  EXPECT_NEAR(b.T, 4.0, 1e-13);
  EXPECT_LE(g[b.argmin], 1.1);  // Theta0 is flat to rounding on [0, ~1.04]
}

TEST(Liouville, ExactMatchesPicard) {
  const auto g = RadialGrid::uniform(1024, 10.0);
  const auto z = scaled_profile(g);
  const auto th = tail_integral(g, z);
  const auto p = liouville_picard_oracle(g, z, 2.0, 4.0 / 4096);
  const auto q = liouville_exact(th, 2.0);
  double err = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) err = std::max(err, std::abs(q[i] - p.q_final[i]));
  EXPECT_LE(err, 1e-6);
  EXPECT_FALSE(p.aborted);
}

TEST(Liouville, MonotoneAndPinned) {
  const auto g = RadialGrid::uniform(512, 10.0);
  const auto z = scaled_profile(g);
  const auto p = liouville_picard_oracle(g, z, 3.0, 0.0, 50);
  for (std::size_t k = 1; k < p.min_q.size(); ++k) EXPECT_LE(p.min_q[k], p.min_q[k - 1]);
  for (const auto& snap : p.snapshots) EXPECT_DOUBLE_EQ(snap.back(), 1.0);
}

TEST(Liouville, WeightProfileRejectsNegative) {
  const auto g = RadialGrid::uniform(64, 5.0);
  std::vector<double> w(g.size(), 1.0);
  const auto p = MomentumWeightProfile::from_samples(g, w);
  EXPECT_NEAR(p.tail[0], 5.0, 1e-13);
  w[3] = -1e-3;
  EXPECT_THROW(MomentumWeightProfile::from_samples(g, w), std::invalid_argument);
}
