#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "calderon/exponents.hpp"
#include "calderon/rng.hpp"

using namespace calderon;

namespace {

// p = 2 on [0, 1/2) and 3 on (1/2, 1]; 2 elsewhere.
ExponentFunction two_three() {
  return ExponentFunction::radial_bump(2.0, 3.0, {0.75, 0.0}, 0.25, 0.0);
}

// Newton on a scalar function with numerical derivative; test-only oracle.
template <class Fn>
double newton_root(Fn f, double x) {
  for (int i = 0; i < 100; ++i) {
    const double d = (f(x + 1e-7) - f(x - 1e-7)) / 2e-7;
    const double step = f(x) / d;
    x -= step;
    if (std::abs(step) < 1e-15) break;
  }
  return x;
}

GridFunction random_function(const DomainBox& box, Rng& rng) {
  const double a = rng.uniform(0.2, 3.0), b = rng.uniform(-1.0, 1.0), c = rng.uniform(0.5, 4.0);
  const double s = rng.uniform(0.1, 5.0);
  return sample(box, [&](const Point& x) { return s * std::sin(c * x[0] + b) * std::exp(-a * x[0] * x[0]); });
}

}  // namespace

TEST(Exponent, EvaluatesForms) {
  EXPECT_EQ(ExponentFunction::constant(2.0)({0.7, 0.0}), 2.0);
  EXPECT_DOUBLE_EQ(ExponentFunction::asymptotic(2.0, 1.0)({0.0, 0.0}), 3.0);
  const auto bump = ExponentFunction::radial_bump(2.0, 1.5, {0.0, 0.0}, 1.0, 0.5);
  EXPECT_EQ(bump({5.0, 0.0}), 2.0);
  EXPECT_EQ(bump({0.2, 0.0}), 1.5);
}

TEST(Exponent, DerivedConstants) {
  const auto a = ExponentFunction::asymptotic(2.0, 1.0);
  EXPECT_EQ(a.p_minus(), 2.0);
  EXPECT_EQ(a.p_plus(), 3.0);
  EXPECT_EQ(a.p_underline(), 1.0);
  const auto b = ExponentFunction::radial_bump(0.6, 1.4, {0.0, 0.0}, 1.0, 0.5);
  EXPECT_EQ(b.p_underline(), 0.6);
  EXPECT_EQ(ExponentFunction::constant(3.0).p_underline(), 1.0);
}

TEST(Exponent, SamplesStayWithinBounds) {
  const auto p = ExponentFunction::radial_bump(2.0, 1.2, {0.3, -0.2}, 0.8, 0.7);
  const auto q = ExponentFunction::asymptotic(1.5, -0.4);
  Rng rng(3);
  for (int i = 0; i < 2000; ++i) {
    const Point x{rng.uniform(-5, 5), rng.uniform(-5, 5)};
    for (const auto* e : {&p, &q}) {
      EXPECT_GE((*e)(x), e->p_minus() - 1e-15);
      EXPECT_LE((*e)(x), e->p_plus() + 1e-15);
    }
    EXPECT_LE(std::abs(q(x) - q.p_inf()), q.C_inf() / std::log(std::numbers::e + std::hypot(x[0], x[1])) + 1e-15);
  }
}

TEST(LogHolder, ConstantHasZeroObservedConstant) {
  std::vector<Point> s;
  for (int i = 0; i < 50; ++i) s.push_back({i * 0.07, 0.0});
  const auto r = check_log_holder(ExponentFunction::constant(2.0), s, 1);
  EXPECT_EQ(r.C0_observed, 0.0);
  EXPECT_TRUE(r.pass);
}

TEST(LogHolder, AsymptoticPassesOnWideSamples) {
  std::vector<Point> s;
  for (int i = 0; i <= 60; ++i) s.push_back({std::pow(10.0, -2.0 + 8.0 * i / 60.0), 0.0});
  for (int i = 0; i < 40; ++i) s.push_back({0.01 * i, 0.0});
  const auto r = check_log_holder(ExponentFunction::asymptotic(2.0, 1.0), s, 1);
  EXPECT_LE(r.Cinf_observed, 1.0 + 1e-12);
  EXPECT_GT(r.local_pairs, 0u);
  EXPECT_GT(r.skipped_pairs, 0u);
  EXPECT_TRUE(r.pass);
}

TEST(LogHolder, UnderDeclaredBumpFails) {
  auto p = ExponentFunction::radial_bump(2.0, 1.5, {0.0, 0.0}, 1.0, 0.5);
  std::vector<Point> s;
  for (int i = 0; i < 200; ++i) s.push_back({-1.5 + 3.0 * i / 199.0, 0.0});
  EXPECT_TRUE(check_log_holder(p, s, 1).pass);
  p.declare_constants(0.0, std::nullopt);
  const auto r = check_log_holder(p, s, 1);
  EXPECT_GT(r.C0_observed, 0.0);
  EXPECT_FALSE(r.pass);
}

TEST(Modular, Examples) {
  const DomainBox box(1, 2.0, 64);
  const Cube unit({0.5, 0.0}, 1.0);
  const auto chi = indicator(box, unit);
  EXPECT_NEAR(modular(chi, ExponentFunction::constant(2.0)).value, 1.0, 1e-12);
  EXPECT_EQ(modular(GridFunction(box), ExponentFunction::constant(2.0)).value, 0.0);
  // ½·2² + ½·2³ by direct evaluation of the piecewise integral
  EXPECT_NEAR(modular(2.0 * chi, two_three()).value, 0.5 * 4.0 + 0.5 * 8.0, 1e-12);
  EXPECT_EQ(modular(chi, ExponentFunction::constant(2.0)).grid_spacing, box.spacing());
}

TEST(Luxemburg, Examples) {
  const DomainBox box(1, 2.0, 64);
  const auto chi = indicator(box, Cube({0.5, 0.0}, 1.0));
  EXPECT_NEAR(luxemburg_norm(chi, ExponentFunction::constant(2.0)), 1.0, 1e-8);
  EXPECT_EQ(luxemburg_norm(GridFunction(box), ExponentFunction::constant(2.0)), 0.0);
  // root of ½λ⁻² + ½λ⁻³ = 1 via an independent scalar solver
  const double expected = newton_root([](double l) { return 0.5 / (l * l) + 0.5 / (l * l * l) - 1.0; }, 0.5);
  EXPECT_NEAR(expected, 1.0, 1e-12);
  EXPECT_NEAR(luxemburg_norm(chi, two_three()), expected, 1e-8);
  const double expected2 = newton_root([](double l) { return 2.0 / (l * l) + 4.0 / (l * l * l) - 1.0; }, 1.5);
  EXPECT_NEAR(luxemburg_norm(2.0 * chi, two_three()), expected2, 1e-8);
}

TEST(Luxemburg, ModularIdentityAtTheNorm) {
  const DomainBox box(1, 3.0, 256);
  const auto p = ExponentFunction::radial_bump(0.7, 2.5, {0.4, 0.0}, 1.2, 0.6);
  Rng rng(11);
  for (int i = 0; i < 50; ++i) {
    const auto f = random_function(box, rng);
    const double lam = luxemburg_norm(f, p);
    EXPECT_LE(std::abs(modular((1.0 / lam) * f, p).value - 1.0), 1e-8);
  }
}

TEST(Luxemburg, PUnderlineTriangleInequality) {
  const DomainBox box(1, 3.0, 128);
  const auto p = ExponentFunction::radial_bump(0.6, 1.8, {-0.5, 0.0}, 1.5, 0.5);
  const double pu = p.p_underline();
  Rng rng(12);
  for (int i = 0; i < 1000; ++i) {
    const auto f = random_function(box, rng);
    const auto g = random_function(box, rng);
    const double lhs = std::pow(luxemburg_norm(f + g, p), pu);
    const double rhs = std::pow(luxemburg_norm(f, p), pu) + std::pow(luxemburg_norm(g, p), pu);
    ASSERT_LE(lhs, rhs + 10 * kDefaultNormTol) << "pair " << i;
  }
}

TEST(Luxemburg, ConstantExponentMatchesClassicalNorm) {
  const DomainBox box(1, 4.0, 1024);
  const double h = box.spacing();
  for (double c : {0.5, 1.0, 1.5, 2.0, 3.0}) {
    const auto f = sample(box, [](const Point& x) { return std::exp(-x[0] * x[0]) * (1.0 + x[0]); });
    double s = 0.0;
    for (double v : f.samples) s += std::pow(std::abs(v), c) * h;
    const double classical = std::pow(s, 1.0 / c);
    EXPECT_NEAR(luxemburg_norm(f, ExponentFunction::constant(c)) / classical, 1.0, 1e-6) << c;
  }
}

TEST(Luxemburg, ModularNormLinks) {
  const DomainBox box(1, 3.0, 128);
  const auto p = ExponentFunction::asymptotic(1.2, 0.9);
  Rng rng(13);
  for (int i = 0; i < 20; ++i) {
    const auto f = random_function(box, rng);
    const double rho = modular(f, p).value;
    for (double lam : {1.5, 3.0, 10.0})
      EXPECT_LE(rho, std::pow(lam, p.p_plus()) * modular((1.0 / lam) * f, p).value * (1 + 1e-12));
  }
  // ‖f_j‖ <= ρ(f_j)^{1/p₊} along a sequence with ρ(f_j) -> 0
  auto f = random_function(box, rng);
  double prev = std::numeric_limits<double>::infinity();
  for (int j = 0; j < 12; ++j) {
    const auto fj = std::pow(0.5, j) * f;
    const double rho = modular(fj, p).value;
    EXPECT_LT(rho, prev);
    prev = rho;
    if (rho <= 1.0) EXPECT_LE(luxemburg_norm(fj, p), std::pow(rho, 1.0 / p.p_plus()) * (1 + 1e-8));
  }
}

TEST(Luxemburg, Homogeneity) {
  const DomainBox box(1, 2.0, 128);
  const auto p = ExponentFunction::asymptotic(0.8, 0.5);
  const auto f = sample(box, [](const Point& x) { return std::cos(3 * x[0]); });
  EXPECT_NEAR(luxemburg_norm(-3.0 * f, p), 3.0 * luxemburg_norm(f, p), 1e-7);
}

TEST(MinMomentDegree, Examples) {
  EXPECT_EQ(min_moment_degree(1.0, 1), 0);
  EXPECT_EQ(min_moment_degree(0.5, 2), 2);
  EXPECT_EQ(min_moment_degree(2.0, 2), 0);
  EXPECT_EQ(min_moment_degree(0.4, 1), 1);
}
