#include <gtest/gtest.h>

#include <cmath>

#include "calderon/jet.hpp"

using namespace calderon;

TEST(Jet, ProductRuleMatchesClosedForm) {
  const auto& sp = JetSpace::get(2, 4);
  const Point x0{0.7, -0.3};
  const Jet x = Jet::variable(sp, 0, x0[0]);
  const Jet y = Jet::variable(sp, 1, x0[1]);
  const Jet f = x * x * x * y * y;  // x³y²
  EXPECT_NEAR(f.derivative({0, 0}), std::pow(0.7, 3) * 0.09, 1e-15);
  EXPECT_NEAR(f.derivative({2, 1}), 6 * 0.7 * 2 * -0.3, 1e-14);
  EXPECT_NEAR(f.derivative({3, 1}), 6 * 2 * -0.3, 1e-14);
  EXPECT_NEAR(f.derivative({0, 2}), 2 * std::pow(0.7, 3), 1e-14);
}

TEST(Jet, LogOfSquaredNorm) {
  // ∂₁² ln|x| = (x₂² - x₁²)/|x|⁴
  const auto& sp = JetSpace::get(2, 3);
  const Point x0{1.3, 0.4};
  const Jet h = 0.5 * jet_log(squared_norm(sp, x0));
  const double r2 = 1.3 * 1.3 + 0.4 * 0.4;
  EXPECT_NEAR(h.derivative({2, 0}), (0.16 - 1.69) / (r2 * r2), 1e-14);
  EXPECT_NEAR(h.derivative({1, 1}), -2 * 1.3 * 0.4 / (r2 * r2), 1e-14);
}

TEST(Jet, GaussianDerivativesAreHermite) {
  const auto& sp = JetSpace::get(1, 4);
  const double x = 0.8;
  const Jet v = Jet::variable(sp, 0, x);
  const Jet g = jet_exp(-1.0 * (v * v));
  const double e = std::exp(-x * x);
  EXPECT_NEAR(g.derivative({1, 0}), -2 * x * e, 1e-14);
  EXPECT_NEAR(g.derivative({2, 0}), (4 * x * x - 2) * e, 1e-14);
  EXPECT_NEAR(g.derivative({4, 0}), (16 * std::pow(x, 4) - 48 * x * x + 12) * e, 1e-13);
}

TEST(Jet, PowerSeries) {
  const auto& sp = JetSpace::get(1, 3);
  const Jet v = Jet::variable(sp, 0, 2.0);
  const Jet f = jet_pow(v, 1.5);
  EXPECT_NEAR(f.derivative({1, 0}), 1.5 * std::sqrt(2.0), 1e-14);
  EXPECT_NEAR(f.derivative({3, 0}), 1.5 * 0.5 * -0.5 * std::pow(2.0, -1.5), 1e-14);
}
