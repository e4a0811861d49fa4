#include <gtest/gtest.h>

#include "calderon/optimize.hpp"

using namespace calderon;

namespace {

// max_j |a_j - c| with unit weights: minimizer is the midrange
MinimaxLq midrange_problem(const std::vector<double>& a) {
  std::vector<LqBlock> blocks;
  for (double v : a) {
    LqBlock b;
    b.scale = 1.0;
    b.weights = Eigen::VectorXd::Ones(1);
    b.values = Eigen::VectorXd::Constant(1, v);
    b.basis = Eigen::MatrixXd::Ones(1, 1);
    blocks.push_back(b);
  }
  return MinimaxLq(blocks, 2.0);
}

}  // namespace

TEST(Optimize, OneDimensionalMidrange) {
  const auto F = midrange_problem({-1.0, 0.5, 3.0});
  MinimaxOptions opt;
  opt.rel_tol = 1e-10;
  const auto r = minimize_minimax(F, Eigen::VectorXd::Zero(1), Eigen::MatrixXd::Identity(1, 1), 10.0, opt);
  EXPECT_TRUE(r.converged);
  EXPECT_NEAR(r.minimizer[0], 1.0, 1e-8);
  EXPECT_NEAR(r.value, 2.0, 1e-8);
  EXPECT_LE(r.lower_bound, r.value);
}

TEST(Optimize, LeastSquaresAgreesWithNormalEquations) {
  // single block, q = 2: weighted least squares
  Rng rng(3);
  LqBlock b;
  b.scale = 1.0;
  b.weights = Eigen::VectorXd::Ones(40);
  b.values.resize(40);
  b.basis.resize(40, 3);
  for (int i = 0; i < 40; ++i) {
    const double t = -1.0 + 2.0 * i / 39.0;
    b.basis.row(i) << 1.0, t, t * t;
    b.values[i] = std::sin(2.0 * t) + 0.1 * rng.normal();
  }
  const Eigen::VectorXd exact = (b.basis.transpose() * b.basis).ldlt().solve(b.basis.transpose() * b.values);
  MinimaxLq F({b}, 2.0);
  MinimaxOptions opt;
  opt.rel_tol = 1e-12;
  opt.restarts = 3;
  const Eigen::MatrixXd H = b.basis.transpose() * b.basis / 40.0;
  const auto r = minimize_minimax(F, Eigen::VectorXd::Zero(3), H, 10.0, opt);
  EXPECT_NEAR(r.value, F.value(exact), 1e-10);
  EXPECT_LT((r.minimizer - exact).norm(), 1e-4);
}

TEST(Optimize, ZeroObjectiveReturnsStart) {
  const auto F = midrange_problem({2.0});
  const auto r = minimize_minimax(F, Eigen::VectorXd::Constant(1, 2.0), Eigen::MatrixXd::Identity(1, 1), 1.0, {});
  EXPECT_EQ(r.value, 0.0);
  EXPECT_TRUE(r.converged);
}

TEST(Optimize, SubgradientMatchesFiniteDifference) {
  LqBlock b;
  b.scale = 0.7;
  b.weights = Eigen::VectorXd::Constant(5, 0.2);
  b.values = (Eigen::VectorXd(5) << 1.0, -2.0, 0.5, 3.0, -1.0).finished();
  b.basis = Eigen::MatrixXd::Random(5, 2);
  MinimaxLq F({b}, 3.0);
  const Eigen::VectorXd c = (Eigen::VectorXd(2) << 0.3, -0.4).finished();
  Eigen::VectorXd g;
  F.value_and_subgradient(c, g);
  for (int i = 0; i < 2; ++i) {
    Eigen::VectorXd e = Eigen::VectorXd::Zero(2);
    e[i] = 1e-6;
    EXPECT_NEAR(g[i], (F.value(c + e) - F.value(c - e)) / 2e-6, 1e-6);
  }
}
