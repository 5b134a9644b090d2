#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "epdiff/grid.hpp"

using epdiff::RadialGrid;
namespace quad = epdiff::quad;

namespace {

std::vector<double> sample(const RadialGrid& g, double (*f)(double)) {
  std::vector<double> out(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) out[i] = f(g[i]);
  return out;
}

}  // namespace

TEST(Grid, NodesAndInvariants) {
  const auto g = RadialGrid::graded(101, 5.0, 1.5);
  EXPECT_EQ(g[0], 0.0);
  EXPECT_EQ(g.r_max(), 5.0);
  for (std::size_t i = 1; i < g.size(); ++i) EXPECT_GT(g[i], g[i - 1]);
  EXPECT_THROW(RadialGrid::graded(100, 5.0, 2.5), std::invalid_argument);
  EXPECT_THROW(RadialGrid::uniform(4, 5.0), std::invalid_argument);
}

TEST(Grid, QuadratureIsFourthOrder) {
  auto f = [](double r) { return std::exp(-r) * std::cos(r); };
  // int_0^4 e^{-r} cos r dr
  const double exact = 0.5 * (1.0 + std::exp(-4.0) * (std::sin(4.0) - std::cos(4.0)));
  double prev = 0.0;
  for (std::size_t n : {41, 81, 161}) {
    const auto g = RadialGrid::uniform(n, 4.0);
    const double err = std::abs(quad::integrate(g, sample(g, f)) - exact);
    if (prev > 0.0) EXPECT_GT(prev / err, 12.0);
    prev = err;
  }
  EXPECT_LT(prev, 5e-8);
}

TEST(Grid, HeadAndTailSplitAtEveryNode) {
  const auto g = RadialGrid::graded(64, 3.0, 1.3);
  auto f = [](double r) { return r * r * std::exp(-r); };
  const auto v = sample(g, f);
  const auto head = quad::head_integrals(g, v);
  const auto tail = quad::tail_integrals(g, v);
  auto antideriv = [](double r) { return -std::exp(-r) * (r * r + 2 * r + 2); };
  for (std::size_t i = 0; i < g.size(); ++i) {
    EXPECT_NEAR(head[i], antideriv(g[i]) - antideriv(0.0), 2e-6);
    EXPECT_NEAR(tail[i], antideriv(3.0) - antideriv(g[i]), 2e-6);
  }
  EXPECT_EQ(head[0], 0.0);
  EXPECT_EQ(tail.back(), 0.0);
}

TEST(Grid, ScaledSumsMatchDirect) {
  const auto g = RadialGrid::uniform(40, 8.0);
  std::vector<double> gv(g.size()), ex(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    gv[i] = std::sin(g[i]) * g.jacobian()[i];
    ex[i] = 0.9 * g[i];
  }
  const auto head = quad::head_scaled(gv, ex, g.hx());
  const auto tail = quad::tail_scaled(gv, ex, g.hx());
  for (std::size_t i = 0; i < g.size(); ++i) {
    double h = 0.0, t = 0.0;
    for (std::size_t m = 0; m <= i; ++m) h += quad::segment_weight(i, m) * gv[m] * std::exp(ex[m] - ex[i]);
    for (std::size_t m = i; m < g.size(); ++m)
      t += quad::segment_weight(g.size() - 1 - i, m - i) * gv[m] * std::exp(ex[i] - ex[m]);
    EXPECT_NEAR(head[i], h * g.hx(), 1e-12);
    EXPECT_NEAR(tail[i], t * g.hx(), 1e-12);
  }
}
