#pragma once

#include <algorithm>
#include <cmath>
#include <concepts>
#include <limits>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "calderon/core.hpp"
#include "calderon/grid.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

/// Anything that can be evaluated pointwise and knows its extreme values.
template <class E>
concept ExponentField = requires(const E& e, const Point& x) {
  { e(x) } -> std::convertible_to<double>;
  { e.p_minus() } -> std::convertible_to<double>;
  { e.p_plus() } -> std::convertible_to<double>;
};

enum class ExponentForm { constant, asymptotic, radial_bump };

/// A variable exponent from one of three analytic families whose
/// log-Hölder constants are known in closed form:
///   constant     p(x) = c
///   asymptotic   p(x) = p∞ + c∞ / log(e + |x|)
///   radial_bump  p_out outside the ball B(center, radius), p_in on the ball
///                shrunk by the relative transition width `smoothness`, and a
///                C∞ monotone blend in between (smoothness = 0 gives a jump).
class ExponentFunction {
 public:
  struct Params {
    double c = 2.0;
    double p_inf = 2.0;
    double c_inf = 0.0;
    double p_out = 2.0;
    double p_in = 2.0;
    Point center{0.0, 0.0};
    double radius = 1.0;
    double smoothness = 0.5;
  };

  static ExponentFunction constant(double c) {
    require(c > 0.0, "constant exponent must be positive");
    ExponentFunction e(ExponentForm::constant);
    e.prm_.c = c;
    e.finish();
    return e;
  }

  static ExponentFunction asymptotic(double p_inf, double c_inf) {
    require(p_inf > 0.0 && p_inf + c_inf > 0.0, "asymptotic exponent must stay positive");
    ExponentFunction e(ExponentForm::asymptotic);
    e.prm_.p_inf = p_inf;
    e.prm_.c_inf = c_inf;
    e.finish();
    return e;
  }

  static ExponentFunction radial_bump(double p_out, double p_in, Point center, double radius,
                                      double smoothness) {
    require(p_out > 0.0 && p_in > 0.0, "radial bump exponent values must be positive");
    require(radius > 0.0, "radial bump radius must be positive");
    require(smoothness >= 0.0 && smoothness <= 1.0, "radial bump smoothness must lie in [0,1]");
    ExponentFunction e(ExponentForm::radial_bump);
    e.prm_.p_out = p_out;
    e.prm_.p_in = p_in;
    e.prm_.center = center;
    e.prm_.radius = radius;
    e.prm_.smoothness = smoothness;
    e.finish();
    return e;
  }

  double operator()(const Point& x) const {
    switch (form_) {
      case ExponentForm::constant:
        return prm_.c;
      case ExponentForm::asymptotic:
        return prm_.p_inf + prm_.c_inf / std::log(std::numbers::e + std::hypot(x[0], x[1]));
      case ExponentForm::radial_bump: {
        const double t = std::hypot(x[0] - prm_.center[0], x[1] - prm_.center[1]) / prm_.radius;
        return prm_.p_out + (prm_.p_in - prm_.p_out) * blend(t, prm_.smoothness);
      }
    }
    return prm_.c;
  }

  ExponentForm form() const { return form_; }
  const Params& params() const { return prm_; }
  double p_minus() const { return p_minus_; }
  double p_plus() const { return p_plus_; }
  double p_underline() const { return std::min(p_minus_, 1.0); }
  double p_inf() const { return p_inf_; }
  double C0() const { return C0_; }
  double C_inf() const { return C_inf_; }

  /// Replaces the closed-form constants with user-declared ones.
  void declare_constants(std::optional<double> C0, std::optional<double> C_inf) {
    if (C0) C0_ = *C0;
    if (C_inf) C_inf_ = *C_inf;
    if (C0) declared_C0_ = C0;
    if (C_inf) declared_C_inf_ = C_inf;
  }
  std::optional<double> declared_C0() const { return declared_C0_; }
  std::optional<double> declared_C_inf() const { return declared_C_inf_; }

  /// Smooth step: 1 for t <= 1-w, 0 for t >= 1.
  static double blend(double t, double w) {
    if (t >= 1.0) return 0.0;
    if (w <= 0.0 || t <= 1.0 - w) return 1.0;
    return smooth_unit_step((1.0 - t) / w);
  }

  /// C∞ step on [0,1] with value 0 at 0 and 1 at 1.
  static double smooth_unit_step(double u) {
    if (u <= 0.0) return 0.0;
    if (u >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / u);
    const double b = std::exp(-1.0 / (1.0 - u));
    return a / (a + b);
  }

  static double smooth_unit_step_derivative(double u) {
    if (u <= 0.0 || u >= 1.0) return 0.0;
    const double g = smooth_unit_step(u);
    return g * (1.0 - g) * (1.0 / (u * u) + 1.0 / ((1.0 - u) * (1.0 - u)));
  }

 private:
  explicit ExponentFunction(ExponentForm f) : form_(f) {}

  void finish() {
    switch (form_) {
      case ExponentForm::constant:
        p_minus_ = p_plus_ = p_inf_ = prm_.c;
        C0_ = C_inf_ = 0.0;
        break;
      case ExponentForm::asymptotic:
        p_minus_ = std::min(prm_.p_inf, prm_.p_inf + prm_.c_inf);
        p_plus_ = std::max(prm_.p_inf, prm_.p_inf + prm_.c_inf);
        p_inf_ = prm_.p_inf;
        C_inf_ = std::abs(prm_.c_inf);
        // 1/log(e+t) is Lipschitz with constant 1/e and d·(-log d) <= 1/e.
        C0_ = std::abs(prm_.c_inf) / (std::numbers::e * std::numbers::e);
        break;
      case ExponentForm::radial_bump: {
        const double jump = std::abs(prm_.p_in - prm_.p_out);
        p_minus_ = std::min(prm_.p_in, prm_.p_out);
        p_plus_ = std::max(prm_.p_in, prm_.p_out);
        p_inf_ = prm_.p_out;
        C_inf_ = jump * std::log(std::numbers::e + std::hypot(prm_.center[0], prm_.center[1]) +
                                 prm_.radius);
        if (jump == 0.0) {
          C0_ = 0.0;
        } else if (prm_.smoothness == 0.0) {
          C0_ = std::numeric_limits<double>::infinity();
        } else {
          double slope = 0.0;
          for (int i = 1; i < 4000; ++i) slope = std::max(slope, smooth_unit_step_derivative(i / 4000.0));
          const double lipschitz = 1.001 * jump * slope / (prm_.smoothness * prm_.radius);
          C0_ = lipschitz / std::numbers::e;
        }
        break;
      }
    }
  }

  ExponentForm form_;
  Params prm_;
  double p_minus_ = 1.0, p_plus_ = 1.0, p_inf_ = 1.0, C0_ = 0.0, C_inf_ = 0.0;
  std::optional<double> declared_C0_, declared_C_inf_;
};

inline double evaluate_exponent(const ExponentFunction& p, const Point& x) { return p(x); }

struct LogHolderReport {
  double C0_observed = 0.0;
  double Cinf_observed = 0.0;
  std::size_t local_pairs = 0;
  std::size_t skipped_pairs = 0;
  bool pass = false;
};

/// Evaluates the defining suprema of LH₀ (over sample pairs closer than 1/2)
/// and LH∞ (against p∞) and compares them with the declared constants,
/// allowing 1% slack.
inline LogHolderReport check_log_holder(const ExponentFunction& p, std::span<const Point> samples,
                                        int n) {
  LogHolderReport rep;
  std::vector<double> values(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) values[i] = p(samples[i]);
  for (std::size_t i = 0; i < samples.size(); ++i) {
    rep.Cinf_observed = std::max(
        rep.Cinf_observed,
        std::abs(values[i] - p.p_inf()) * std::log(std::numbers::e + norm(samples[i], n)));
    for (std::size_t j = i + 1; j < samples.size(); ++j) {
      const double d = distance(samples[i], samples[j], n);
      if (d <= 0.0) continue;
      if (d >= 0.5) {
        ++rep.skipped_pairs;
        continue;
      }
      ++rep.local_pairs;
      rep.C0_observed = std::max(rep.C0_observed, std::abs(values[i] - values[j]) * -std::log(d));
    }
  }
  rep.pass = rep.C0_observed <= 1.01 * p.C0() + 1e-12 &&
             rep.Cinf_observed <= 1.01 * p.C_inf() + 1e-12;
  return rep;
}

/// d_{p(·)} = min{ l >= 0 : p₋ (n + l + 1) > n }.
inline int min_moment_degree(double p_minus, int n) {
  require(p_minus > 0.0, "min_moment_degree: p_minus must be positive");
  int l = 0;
  while (!(p_minus * (n + l + 1) > n)) ++l;
  return l;
}

inline int min_moment_degree(const ExponentFunction& p, int n) {
  return min_moment_degree(p.p_minus(), n);
}

struct ModularValue {
  double value = 0.0;  // may be +inf
  double grid_spacing = 0.0;
};

/// A discretised modular Σ w_i |v_i|^{p_i}. Zero magnitudes contribute 0.
class ModularIntegrand {
 public:
  ModularIntegrand() = default;

  void add(double magnitude, double exponent, double weight) {
    const double a = std::abs(magnitude);
    if (a == 0.0 || weight == 0.0) return;
    log_mag_.push_back(std::log(a));
    exponent_.push_back(exponent);
    weight_.push_back(weight);
  }

  bool empty() const { return log_mag_.empty(); }

  /// ρ(f/λ).
  double at_scale(double lambda) const {
    const double ll = std::log(lambda);
    std::vector<double> terms(log_mag_.size());
    for (std::size_t i = 0; i < terms.size(); ++i)
      terms[i] = weight_[i] * std::exp(exponent_[i] * (log_mag_[i] - ll));
    return pairwise_sum(terms);
  }

  double p_min() const {
    return exponent_.empty() ? 1.0 : *std::min_element(exponent_.begin(), exponent_.end());
  }
  double p_max() const {
    return exponent_.empty() ? 1.0 : *std::max_element(exponent_.begin(), exponent_.end());
  }

 private:
  std::vector<double> log_mag_, exponent_, weight_;
};

template <ExponentField E>
ModularIntegrand modular_integrand(const GridFunction& f, const E& p) {
  ModularIntegrand m;
  const double w = f.domain.cell_volume();
  for (std::size_t i = 0; i < f.size(); ++i)
    if (f[i] != 0.0) m.add(f[i], p(f.domain.center(i)), w);
  return m;
}

template <ExponentField E>
ModularValue modular(const GridFunction& f, const E& p) {
  return {modular_integrand(f, p).at_scale(1.0), f.domain.spacing()};
}

inline constexpr double kDefaultNormTol = 1e-8;

/// Luxemburg norm inf{λ > 0 : ρ(f/λ) <= 1} by bisection in log λ.
inline double luxemburg_norm(const ModularIntegrand& m, double tol = kDefaultNormTol) {
  require(tol > 0.0, "luxemburg_norm: tol must be positive");
  if (m.empty()) return 0.0;
  const double pm = m.p_min(), pp = m.p_max();
  const double rho = m.at_scale(1.0);
  double lo = 1.0, hi = 1.0;
  if (std::isfinite(rho) && rho > 0.0) {
    const double a = std::pow(rho, 1.0 / pp), b = std::pow(rho, 1.0 / pm);
    lo = std::min(a, b);
    hi = std::max(a, b);
  }
  int doublings = 0;
  while (!(m.at_scale(hi) <= 1.0)) {
    hi *= 2.0;
    if (++doublings > 200) throw ConvergenceError("luxemburg_norm: bracket expansion exceeded 200 doublings");
  }
  while (!(m.at_scale(lo) >= 1.0)) {
    lo *= 0.5;
    if (++doublings > 200) throw ConvergenceError("luxemburg_norm: bracket expansion exceeded 200 doublings");
  }
  double best = hi, best_res = std::abs(m.at_scale(hi) - 1.0);
  for (int it = 0; it < 400 && best_res > tol; ++it) {
    const double mid = std::sqrt(lo * hi);
    const double val = m.at_scale(mid);
    const double res = std::abs(val - 1.0);
    if (res < best_res) {
      best = mid;
      best_res = res;
    }
    if (val > 1.0) lo = mid; else hi = mid;
    if (hi / lo - 1.0 < 1e-15) break;
  }
  return best;
}

template <ExponentField E>
double luxemburg_norm(const GridFunction& f, const E& p, double tol = kDefaultNormTol) {
  return luxemburg_norm(modular_integrand(f, p), tol);
}

/// ‖χ_Q‖_{p(·)} for the cell-centre indicator of Q on the box.
template <ExponentField E>
double indicator_norm(const DomainBox& box, const Cube& Q, const E& p) {
  return luxemburg_norm(indicator(box, Q), p);
}

}  // namespace calderon
