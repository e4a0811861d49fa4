#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Dense>

#include "calderon/core.hpp"
#include "calderon/rng.hpp"

namespace calderon {

/// One term s · (Σ_i w_i |f_i − (B c)_i|^q)^{1/q} of a max-of-seminorms objective.
struct LqBlock {
  double scale = 1.0;
  Eigen::VectorXd weights;
  Eigen::VectorXd values;
  Eigen::MatrixXd basis;  // rows: cells, columns: coefficients
};

/// F(c) = max_j block_j(c), convex in c.
class MinimaxLq {
 public:
  MinimaxLq(std::vector<LqBlock> blocks, double q) : blocks_(std::move(blocks)), q_(q) {
    require(!blocks_.empty(), "MinimaxLq: no blocks");
    require(q >= 1.0, "MinimaxLq: q must be >= 1");
    dim_ = static_cast<int>(blocks_.front().basis.cols());
  }

  int dim() const { return dim_; }
  double q() const { return q_; }
  const std::vector<LqBlock>& blocks() const { return blocks_; }

  double block_value(std::size_t j, const Eigen::VectorXd& c) const {
    const auto& b = blocks_[j];
    const Eigen::VectorXd r = b.values - b.basis * c;
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) s += b.weights[i] * abs_pow(r[i], q_);
    return b.scale * std::pow(s, 1.0 / q_);
  }

  double value(const Eigen::VectorXd& c) const {
    double v = 0.0;
    for (std::size_t j = 0; j < blocks_.size(); ++j) v = std::max(v, block_value(j, c));
    return v;
  }

  /// Value and a subgradient (gradient of the active block).
  double value_and_subgradient(const Eigen::VectorXd& c, Eigen::VectorXd& g) const {
    std::size_t best = 0;
    double v = -1.0;
    for (std::size_t j = 0; j < blocks_.size(); ++j) {
      const double bv = block_value(j, c);
      if (bv > v) {
        v = bv;
        best = j;
      }
    }
    g = Eigen::VectorXd::Zero(dim_);
    if (v <= 0.0) return 0.0;
    const auto& b = blocks_[best];
    const Eigen::VectorXd r = b.values - b.basis * c;
    Eigen::VectorXd u(r.size());
    double s = 0.0;
    for (Eigen::Index i = 0; i < r.size(); ++i) {
      const double a = std::abs(r[i]);
      const double aq1 = q_ == 2.0 ? a : std::pow(a, q_ - 1.0);
      s += b.weights[i] * aq1 * a;
      u[i] = b.weights[i] * aq1 * (r[i] >= 0 ? 1.0 : -1.0);
    }
    // d/dc (S^{1/q}) = S^{1/q - 1} · (−Bᵀ u)
    g = -b.scale * std::pow(s, 1.0 / q_ - 1.0) * (b.basis.transpose() * u);
    return v;
  }

 private:
  std::vector<LqBlock> blocks_;
  double q_;
  int dim_;
};

struct MinimaxOptions {
  double rel_tol = 1e-4;
  int max_iterations = 20000;
  int restarts = 10;
  std::uint64_t seed = 1;
};

struct MinimaxResult {
  Eigen::VectorXd minimizer;
  double value = 0.0;
  double lower_bound = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<Eigen::VectorXd> restart_minimizers;
};

namespace detail {

struct EllipsoidRun {
  Eigen::VectorXd best;
  double best_value;
  double lower_bound;
  int iterations;
  bool converged;
};

/// Central-cut ellipsoid method on {c : (c−c0)ᵀ P⁻¹ (c−c0) <= 1}. The
/// certificate F(c_k) − sqrt(gᵀ P g) bounds the optimum from below while
/// the minimizer stays inside the ellipsoid.
inline EllipsoidRun ellipsoid(const MinimaxLq& F, Eigen::VectorXd c, Eigen::MatrixXd P, double rel_tol,
                              int max_iter) {
  const int d = F.dim();
  EllipsoidRun run{c, F.value(c), 0.0, 0, false};
  Eigen::VectorXd g;
  for (int it = 0; it < max_iter; ++it) {
    run.iterations = it + 1;
    const double v = F.value_and_subgradient(c, g);
    if (v < run.best_value) {
      run.best_value = v;
      run.best = c;
    }
    const double gPg = g.dot(P * g);
    if (!(gPg > 0.0)) {  // zero subgradient: c is optimal
      run.lower_bound = v;
      run.best_value = std::min(run.best_value, v);
      run.converged = true;
      return run;
    }
    const double root = std::sqrt(gPg);
    run.lower_bound = std::max(run.lower_bound, v - root);
    if (run.best_value - run.lower_bound <= rel_tol * run.best_value) {
      run.converged = true;
      return run;
    }
    const Eigen::VectorXd pg = P * g / root;
    if (d == 1) {
      // the interval halves
      c -= 0.5 * pg;
      P *= 0.25;
      continue;
    }
    const double dd = d;
    c -= pg / (dd + 1.0);
    P = (dd * dd / (dd * dd - 1.0)) * (P - (2.0 / (dd + 1.0)) * pg * pg.transpose());
    P = 0.5 * (P + P.transpose());
  }
  return run;
}

}  // namespace detail

/// Minimizes F from c0 given a bounding ellipsoid ‖c − c0‖_H <= R containing
/// a minimizer. Restarts begin at random points of that ellipsoid.
inline MinimaxResult minimize_minimax(const MinimaxLq& F, const Eigen::VectorXd& c0, const Eigen::MatrixXd& H,
                                      double R, const MinimaxOptions& opt) {
  MinimaxResult res;
  res.minimizer = c0;
  res.value = F.value(c0);
  if (res.value == 0.0 || R == 0.0) {
    res.converged = true;
    res.lower_bound = res.value;
    res.restart_minimizers.assign(std::max(1, opt.restarts), c0);
    return res;
  }
  const int d = F.dim();
  const Eigen::MatrixXd Hinv = H.inverse();
  Eigen::LLT<Eigen::MatrixXd> chol(Hinv);
  const Eigen::MatrixXd Lh = chol.matrixL();
  auto first = detail::ellipsoid(F, c0, R * R * Hinv, opt.rel_tol, opt.max_iterations);
  res.minimizer = first.best;
  res.value = first.best_value;
  res.lower_bound = first.lower_bound;
  res.iterations = first.iterations;
  res.converged = first.converged;
  res.restart_minimizers.push_back(first.best);
  Rng rng(opt.seed);
  for (int k = 1; k < opt.restarts; ++k) {
    Eigen::VectorXd u(d);
    for (int i = 0; i < d; ++i) u[i] = rng.normal();
    const double radius = std::pow(rng.uniform(), 1.0 / d);
    u *= radius / u.norm();
    const Eigen::VectorXd start = c0 + R * (Lh * u);
    auto run = detail::ellipsoid(F, start, 4.0 * R * R * Hinv, opt.rel_tol, opt.max_iterations);
    res.iterations += run.iterations;
    res.restart_minimizers.push_back(run.best);
    res.lower_bound = std::max(res.lower_bound, run.lower_bound);
    if (run.best_value < res.value) {
      res.value = run.best_value;
      res.minimizer = run.best;
    }
    res.converged = res.converged || run.converged;
  }
  res.converged = res.converged && res.value - res.lower_bound <= opt.rel_tol * res.value * 1.0000001;
  return res;
}

}  // namespace calderon
