#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "calderon/maximal.hpp"

using namespace calderon;

namespace {

const double kEta2 = 1.0 / std::sqrt(80.0);

FunctionClass class_of(const GridFunction& f, int k) { return {f, k}; }

// golden-section minimum of a unimodal function on [a, b]
template <class Fn>
double golden_min(Fn&& fn, double a, double b) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  for (int i = 0; i < 200; ++i) {
    if (fn(c) < fn(d)) b = d;
    else a = c;
    c = b - g * (b - a);
    d = a + g * (b - a);
  }
  return fn(0.5 * (a + b));
}

}  // namespace

TEST(Seminorm, Examples) {
  const DomainBox box(1, 2.0, 256);
  const auto one = sample(box, [](const Point&) { return -3.0; });
  EXPECT_NEAR(seminorm_q_Q(one, 2.5, Cube({0.3, 0.0}, 0.5)), 3.0, 1e-12);
  const auto chi = indicator(box, Cube({0.5, 0.0}, 1.0));
  EXPECT_NEAR(seminorm_q_Q(chi, 2.0, Cube({0.0, 0.0}, 2.0)), std::sqrt(0.5), 1e-12);
  EXPECT_EQ(seminorm_q_Q(GridFunction(box), 2.0, Cube({0.0, 0.0}, 1.0)), 0.0);
}

TEST(Eta, QuadraticAttainedAtEveryScale) {
  const DomainBox box(1, 1.0, 4096);
  const Point x{box.coordinate(2600), 0.0};
  const auto f = sample(box, [&](const Point& z) { return (z[0] - x[0]) * (z[0] - x[0]); });
  const auto prm = MaximalParams::geometric(2.0, 2.0, 64 * box.spacing(), 0.5);
  const auto r = eta_maximal(f, prm, x);
  EXPECT_NEAR(r.value, kEta2, 1e-3);
  for (double s : prm.scales)
    EXPECT_NEAR(std::pow(s, -2.0) * seminorm_q_Q(f, 2.0, Cube(x, s)), kEta2, 1e-3);
}

TEST(Eta, ConstantEqualsSmallestScaleTerm) {
  const DomainBox box(1, 1.0, 1024);
  const auto f = sample(box, [](const Point&) { return 1.0; });
  const auto prm = MaximalParams::geometric(2.0, 2.0, 0.01, 0.5);
  const auto r = eta_maximal(f, prm, {0.0, 0.0});
  EXPECT_NEAR(r.value, std::pow(0.01, -2.0), 1e-8);
  EXPECT_DOUBLE_EQ(r.argmax_scale, 0.01);
  EXPECT_EQ(eta_maximal(GridFunction(box), prm, {0.0, 0.0}).value, 0.0);
}

TEST(Params, KAndT) {
  EXPECT_EQ(MaximalParams(2.0, 2.0, {1.0}).k(), 1);
  EXPECT_DOUBLE_EQ(MaximalParams(2.0, 2.0, {1.0}).t(), 1.0);
  EXPECT_EQ(MaximalParams(2.0, 2.5, {1.0}).k(), 2);
  EXPECT_EQ(MaximalParams(2.0, 0.3, {1.0}).k(), 0);
  EXPECT_THROW(MaximalParams::geometric(2.0, 1.0, 0.1, 1.0, 3.0), std::invalid_argument);
}

TEST(ClassSeminorm, QuadraticModuloAffine) {
  const DomainBox box(1, 1.0, 4096);
  const auto f = sample(box, [](const Point& z) { return z[0] * z[0]; });
  EXPECT_NEAR(class_seminorm(class_of(f, 1), 2.0, Cube({0.0, 0.0}, 1.0)), std::sqrt(1.0 / 180.0), 1e-5);
  // polynomials of degree <= k vanish
  EXPECT_NEAR(class_seminorm(class_of(f, 2), 2.0, Cube({0.1, 0.0}, 0.5)), 0.0, 1e-10);
  EXPECT_EQ(class_seminorm(class_of(GridFunction(box), 1), 2.0, Cube({0.0, 0.0}, 1.0)), 0.0);
}

TEST(ClassSeminorm, NonQuadraticExponentMatchesScalarSearch) {
  // by symmetry the best affine fit of x² on Q(0,1) is a constant
  const DomainBox box(1, 1.0, 2048);
  const auto f = sample(box, [](const Point& z) { return z[0] * z[0]; });
  const Cube Q({0.0, 0.0}, 1.0);
  const double q = 4.0;
  const double oracle = golden_min(
      [&](double a) {
        const auto g = sample(box, [&](const Point& z) { return z[0] * z[0] - a; });
        return seminorm_q_Q(g, q, Q);
      },
      -0.5, 0.5);
  EXPECT_NEAR(class_seminorm(class_of(f, 1), q, Q), oracle, 1e-6 * oracle + 1e-12);
}

TEST(ClassSeminorm, IllConditionedBasisIsReported) {
  const DomainBox box(1, 1.0, 256);
  const auto f = sample(box, [](const Point& z) { return std::sin(5 * z[0]); });
  EXPECT_THROW(class_seminorm(class_of(f, 4), 2.0, Cube({0.0, 0.0}, 2.0 * box.spacing())), IllConditionedError);
}

TEST(SameClass, DetectsPolynomialDifference) {
  const DomainBox box(2, 1.0, 32);
  const auto f = sample(box, [](const Point& z) { return std::exp(z[0]) * z[1]; });
  const auto g = sample(box, [](const Point& z) { return std::exp(z[0]) * z[1] + 3.0 - z[0] + 2.0 * z[1]; });
  EXPECT_TRUE(same_class(class_of(f, 1), class_of(g, 1)));
  const auto h = sample(box, [](const Point& z) { return std::exp(z[0]) * z[1] + z[0] * z[1]; });
  EXPECT_FALSE(same_class(class_of(f, 1), class_of(h, 1)));
  EXPECT_TRUE(same_class(class_of(f, 2), class_of(h, 2)));
}

TEST(NMaximal, TrivialClasses) {
  const DomainBox box(1, 1.0, 1024);
  const auto prm1 = MaximalParams::geometric(2.0, 1.0, 0.01, 0.5);
  const auto one = sample(box, [](const Point&) { return 1.0; });
  const auto r = N_maximal(class_of(one, 0), prm1, {0.1, 0.0});
  EXPECT_NEAR(r.value, 0.0, 1e-10);
  EXPECT_NEAR(r.minimizer.coeff({0, 0}), 1.0, 1e-10);
  const auto z = N_maximal(class_of(GridFunction(box), 0), prm1, {0.1, 0.0});
  EXPECT_EQ(z.value, 0.0);
  EXPECT_THROW(N_maximal(class_of(one, 1), prm1, {0.1, 0.0}), std::invalid_argument);
}

TEST(NMaximal, QuadraticClassRecoversTaylorPolynomial) {
  const DomainBox box(1, 1.0, 4096);
  const double x0 = box.coordinate(2600);
  const auto f = sample(box, [](const Point& z) { return z[0] * z[0]; });
  const auto prm = MaximalParams::geometric(2.0, 2.0, 64 * box.spacing(), 0.5);
  MinimaxOptions opt;
  opt.restarts = 10;
  opt.seed = 11;
  const auto r = N_maximal(class_of(f, 1), prm, {x0, 0.0}, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.value, kEta2, 1e-3);
  ASSERT_EQ(r.restart_minimizers.size(), 10u);
  for (const auto& P : r.restart_minimizers) {
    EXPECT_NEAR(P.coeff({0, 0}), x0 * x0, 1e-3);
    EXPECT_NEAR(P.coeff({1, 0}), 2.0 * x0, 1e-3);
  }
}

TEST(NMaximal, BoundedByEtaAndTranslationInvariant) {
  const DomainBox box(1, 1.0, 2048);
  const auto f = sample(box, [](const Point& z) { return std::abs(z[0]) * z[0] * z[0] + std::sin(3 * z[0]); });
  const auto g = sample(box, [](const Point& z) {
    return std::abs(z[0]) * z[0] * z[0] + std::sin(3 * z[0]) + 4.0 - 7.0 * z[0];
  });
  const auto prm = MaximalParams::geometric(2.0, 2.0, 16 * box.spacing(), 0.5);
  for (double x : {-0.2, 0.0, 0.3}) {
    const auto nf = N_maximal(class_of(f, 1), prm, {x, 0.0});
    const auto ng = N_maximal(class_of(g, 1), prm, {x, 0.0});
    EXPECT_LE(nf.value, eta_maximal(f, prm, {x, 0.0}).value * (1 + 1e-12));
    EXPECT_LE(nf.value, eta_maximal(g, prm, {x, 0.0}).value * (1 + 1e-12));
    EXPECT_NEAR(nf.value, ng.value, 2e-4 * nf.value);
  }
}

TEST(NMaximal, ObjectiveIsMidpointConvex) {
  const DomainBox box(2, 1.0, 64);
  const auto f = sample(box, [](const Point& z) { return std::cos(2 * z[0]) * z[1] * z[1]; });
  const auto prm = MaximalParams::geometric(2.0, 2.0, 4 * box.spacing(), 0.8);
  const auto obj = n_objective(class_of(f, 1), prm, {0.1, -0.05});
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    Eigen::VectorXd a(obj.problem.dim()), b(obj.problem.dim());
    for (int i = 0; i < a.size(); ++i) {
      a[i] = rng.normal();
      b[i] = rng.normal();
    }
    const double mid = obj.problem.value(0.5 * (a + b));
    EXPECT_LE(mid, 0.5 * (obj.problem.value(a) + obj.problem.value(b)) + 1e-10);
  }
}

TEST(NMaximal, ControlsClassSeminormUniformly) {
  // ‖F‖_{q,Q} <= C · N(F; x0) with C stable over x0
  const DomainBox box(1, 1.0, 2048);
  const auto f = sample(box, [](const Point& z) { return std::exp(z[0]) + z[0] * z[0] * z[0]; });
  const auto prm = MaximalParams::geometric(2.0, 2.0, 16 * box.spacing(), 0.5);
  const Cube Q({0.0, 0.0}, 0.2);
  double lo = 1e300, hi = 0.0;
  for (double x0 : {-0.3, -0.1, 0.0, 0.1, 0.3}) {
    const double N = N_maximal(class_of(f, 1), prm, {x0, 0.0}).value;
    const double ratio = class_seminorm(class_of(f, 1), 2.0, Q) / N;
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  EXPECT_LT(hi, 10.0 * lo);
}

TEST(HLMaximal, Examples) {
  const DomainBox box(1, 4.0, 4096);
  const auto chi = indicator(box, Cube({0.5, 0.0}, 1.0));
  const auto scales = geometric_grid(0.01, 8.0, std::pow(2.0, 1.0 / 64.0));
  // brute force: (overlap of [2 - r/2, 2 + r/2] with [0, 1]) / r
  double oracle = 0.0;
  for (double r = 0.001; r < 8.0; r += 0.001)
    oracle = std::max(oracle, std::clamp(1.0 - (2.0 - r / 2.0), 0.0, 1.0) / r);
  const auto r = hl_maximal(chi, {2.0, 0.0}, scales);
  EXPECT_NEAR(r.value, 0.25, 1e-3);
  EXPECT_NEAR(r.value, oracle, 1e-3);
  EXPECT_NEAR(r.argmax_scale, 4.0, 0.05);
  const auto one = sample(box, [](const Point&) { return 1.0; });
  EXPECT_NEAR(hl_maximal(one, {0.0, 0.0}, geometric_grid(0.01, 1.0, 2.0)).value, 1.0, 1e-12);
  EXPECT_EQ(hl_maximal(GridFunction(box), {0.0, 0.0}, scales).value, 0.0);
}

TEST(HLMaximal, FieldMatchesPointwise) {
  for (int n : {1, 2}) {
    const DomainBox box(n, 1.0, n == 1 ? 256 : 32);
    const auto f = sample(box, [](const Point& z) { return std::sin(4 * z[0]) + z[1]; });
    const auto scales = geometric_grid(2.5 * box.spacing(), 1.5, kScaleRatio);
    const auto field = hl_maximal_field(f, scales);
    for (std::size_t c = 0; c < box.size(); c += 7)
      EXPECT_NEAR(field[c], hl_maximal(f, box.center(c), scales).value, 1e-12);
  }
}

TEST(Schwartz, GaussianSeminorms) {
  const auto g = TestFunction::gaussian(1);
  EXPECT_NEAR(schwartz_seminorm(g, 0), 1.0, 1e-12);
  EXPECT_NEAR(schwartz_seminorm(g.scaled(-2.5), 2), 2.5 * schwartz_seminorm(g, 2), 1e-10);
  // independent scalar maximisations of the two terms
  auto neg_f0 = [](double x) { return -(1 + x) * std::exp(-x * x); };
  auto neg_f1 = [](double x) { return -(1 + x) * 2 * x * std::exp(-x * x); };
  const double s0 = -golden_min(neg_f0, 0.0, 3.0);
  const double s1 = -golden_min(neg_f1, 0.0, 3.0);
  EXPECT_NEAR(schwartz_seminorm(g, 1), s0 + s1, 1e-6);
}

TEST(Schwartz, BumpInTwoDimensions) {
  const auto b = TestFunction::unit_bump(2);
  EXPECT_NEAR(b.mass(), 1.0, 1e-12);
  const double p0 = schwartz_seminorm(b, 0);
  EXPECT_NEAR(p0, b({0.0, 0.0}), 1e-12);
  EXPECT_GT(schwartz_seminorm(b, 2), p0);
}

TEST(PhiMaximal, Examples) {
  const DomainBox box(1, 4.0, 4096);
  const auto phi = TestFunction::unit_gaussian(1);
  const auto t_grid = geometric_grid(4 * box.spacing(), 0.5, kScaleRatio);
  const auto one = sample(box, [](const Point&) { return 1.0; });
  EXPECT_NEAR(phi_maximal(one, phi, {0.0, 0.0}, t_grid).value, 1.0, 1e-10);
  EXPECT_EQ(phi_maximal(GridFunction(box), phi, {0.0, 0.0}, t_grid).value, 0.0);
  const auto chi = indicator(box, Cube({0.5, 0.0}, 1.0));
  for (double t : {0.1, 0.3, 0.5}) {
    const double v = phi_maximal(chi, phi, {0.5, 0.0}, {t}).value;
    EXPECT_NEAR(v, std::erf(0.5 / t), 1e-4);
  }
  EXPECT_NEAR(phi_maximal(chi, phi, {0.5, 0.0}, t_grid).value, 1.0, 1e-6);
}

TEST(PhiMaximal, DominatedByHardyLittlewood) {
  const DomainBox box(1, 2.0, 1024);
  const auto f = sample(box, [](const Point& z) { return std::abs(std::sin(7 * z[0])) * (z[0] > -0.3); });
  const auto phi = TestFunction::unit_gaussian(1);
  const auto grid = geometric_grid(4 * box.spacing(), 1.0, kScaleRatio);
  for (double x : {-1.0, -0.2, 0.0, 0.7, 1.5}) {
    const double mphi = phi_maximal(f, phi, {x, 0.0}, grid).value;
    const double m = hl_maximal(f, {x, 0.0}, geometric_grid(4 * box.spacing(), 4.0, kScaleRatio)).value;
    EXPECT_LE(mphi, 3.0 * m);
  }
}

TEST(HardyNorm, ExamplesAndHomogeneity) {
  const DomainBox box(1, 4.0, 1024);
  const auto phi = TestFunction::unit_gaussian(1);
  const auto grid = geometric_grid(4 * box.spacing(), 2.0, kScaleRatio);
  const auto p = ExponentFunction::constant(2.0);
  const auto chi = indicator(box, Cube({0.5, 0.0}, 1.0));
  const double hn = hardy_norm(chi, p, phi, grid);
  EXPECT_TRUE(std::isfinite(hn));
  EXPECT_GE(hn, 1.0 * (1 - 1e-3));  // ‖χ_[0,1]‖₂ = 1
  EXPECT_NEAR(hardy_norm((-3.0) * chi, p, phi, grid), 3.0 * hn, 1e-7 * hn);
  EXPECT_EQ(hardy_norm(GridFunction(box), p, phi, grid), 0.0);
}

TEST(TruncatedSingularIntegral, VanishingKernelInOneDimension) {
  const DomainBox box(1, 1.0, 512);
  const auto a = sample(box, [](const Point& z) { return std::exp(z[0]); });
  const auto eps = geometric_grid(2 * box.spacing(), 1.0, kScaleRatio);
  EXPECT_EQ(truncated_singular_integral(a, KernelSpec::calibrated(1, 1), {2, 0}, eps, {0.1, 0.0}).value, 0.0);
}

TEST(TruncatedSingularIntegral, RadialBumpCancels) {
  const DomainBox box(2, 1.0, 128);
  const auto a = sample(box, [](const Point& z) {
    const double s = z[0] * z[0] + z[1] * z[1];
    return s < 0.25 ? std::exp(-1.0 / (1.0 - 4 * s)) : 0.0;
  });
  const auto eps = geometric_grid(2 * box.spacing(), 1.0, kScaleRatio);
  const auto K = KernelSpec::calibrated(1, 2);
  // symmetric grid about 0: the x1 ↔ x2 swap cancels (x2² − x1²)/|x|⁴ exactly
  EXPECT_NEAR(truncated_singular_integral(a, K, {2, 0}, eps, {0.0, 0.0}).value, 0.0, 1e-12);
  EXPECT_EQ(truncated_singular_integral(GridFunction(box), K, {2, 0}, eps, {0.0, 0.0}).value, 0.0);
  // off-centre the operator is nonzero
  EXPECT_GT(truncated_singular_integral(a, K, {2, 0}, eps, {0.3, 0.0}).value, 1e-3);
}
