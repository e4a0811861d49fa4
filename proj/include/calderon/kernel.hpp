#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "calderon/core.hpp"
#include "calderon/jet.hpp"
#include "calderon/quadrature.hpp"

namespace calderon {

/// Polyharmonic kernel h for Δ^m in R^n:
///   c · |x|^{2m-n} ln|x|   if n is even and 2m - n >= 0,
///   c · |x|^{2m-n}         otherwise.
struct KernelSpec {
  int m = 1;
  int n = 1;
  double normalization = 1.0;

  KernelSpec() = default;
  KernelSpec(int m_, int n_, double c) : m(m_), n(n_), normalization(c) {
    require(m_ == 1 || m_ == 2, "KernelSpec: m must be 1 or 2");
    require(n_ == 1 || n_ == 2, "KernelSpec: n must be 1 or 2");
  }

  /// Kernel scaled so that Δ^m (h * a) = a. The values were obtained by the
  /// least-squares calibration in potential.hpp (calibrate_normalization) and
  /// agree with 1/2, 1/12, 1/(2π), 1/(8π).
  static KernelSpec calibrated(int m, int n) { return KernelSpec(m, n, frozen_normalization(m, n)); }

  static double frozen_normalization(int m, int n) {
    if (n == 1) return m == 1 ? 0.5 : 1.0 / 12.0;
    return m == 1 ? 1.0 / (2.0 * std::numbers::pi) : 1.0 / (8.0 * std::numbers::pi);
  }

  bool has_log() const { return n % 2 == 0 && 2 * m - n >= 0; }
  int exponent() const { return 2 * m - n; }
};

/// Radial profile g with h(x) = g(|x|).
inline double kernel_profile(const KernelSpec& k, double rho) {
  const double p = ipow(rho, k.exponent() >= 0 ? k.exponent() : 0) /
                   (k.exponent() < 0 ? ipow(rho, -k.exponent()) : 1.0);
  return k.normalization * (k.has_log() ? p * std::log(rho) : p);
}

inline double kernel_h(const KernelSpec& k, const Point& x) {
  const double r = norm(x, k.n);
  if (r == 0.0) throw std::domain_error("kernel_h: evaluation at the origin");
  return kernel_profile(k, r);
}

/// Taylor jet of h at x ≠ 0 to the given order; ∂^α h(x) = jet.derivative(α).
inline Jet kernel_jet(const KernelSpec& k, const Point& x, int order) {
  if (norm(x, k.n) == 0.0) throw std::domain_error("kernel derivative at the origin");
  const auto& sp = JetSpace::get(k.n, order);
  if (k.n == 1) {
    // |t|^{2m-1} = sgn(t) t^{2m-1}: derivatives beyond 2m-1 vanish exactly
    const Jet t = Jet::variable(sp, 0, x[0]);
    Jet p(sp, 1.0);
    for (int i = 0; i < 2 * k.m - 1; ++i) p = p * t;
    return (x[0] > 0.0 ? k.normalization : -k.normalization) * p;
  }
  const Jet s = squared_norm(sp, x);
  const Jet half_log = 0.5 * jet_log(s);
  if (k.m == 1) return k.normalization * half_log;
  return k.normalization * (s * half_log);
}

inline double kernel_derivative(const KernelSpec& k, const MultiIndex& alpha, const Point& x) {
  if (order(alpha) > 2 * k.m + 1) throw std::invalid_argument("kernel_derivative: |alpha| > 2m+1 unsupported");
  return kernel_jet(k, x, order(alpha)).derivative(alpha);
}

/// ∫ over the unit sphere of ∂^α h: the two-point sum for n = 1, a
/// 4096-node trapezoid rule on the circle for n = 2.
inline double sphere_mean(const KernelSpec& k, const MultiIndex& alpha) {
  if (k.n == 1) return kernel_derivative(k, alpha, {1.0, 0.0}) + kernel_derivative(k, alpha, {-1.0, 0.0});
  constexpr int nodes = 4096;
  double s = 0.0;
  for (int i = 0; i < nodes; ++i) {
    const double th = 2.0 * std::numbers::pi * i / nodes;
    s += kernel_derivative(k, alpha, {std::cos(th), std::sin(th)});
  }
  return s * 2.0 * std::numbers::pi / nodes;
}

/// Average of h over the cell of side `h` centred at `offset`. The cell
/// containing the origin uses the closed-form radial integral; other cells
/// use a tensor Gauss rule.
inline double kernel_cell_average(const KernelSpec& k, const Point& offset, double h) {
  if (k.n == 1) {
    const int p = 2 * k.m - 1;  // odd
    auto F = [&](double t) { return (t >= 0 ? 1.0 : -1.0) * ipow(std::abs(t), p + 1) / (p + 1); };
    return k.normalization * (F(offset[0] + 0.5 * h) - F(offset[0] - 0.5 * h)) / h;
  }
  static const GaussRule rule = gauss_legendre(24);
  if (offset[0] == 0.0 && offset[1] == 0.0) {
    // eight congruent triangles 0 <= θ <= π/4, 0 <= ρ <= (h/2) sec θ
    auto G = [&](double R) {
      const double lr = std::log(R);
      return k.m == 1 ? R * R * (lr / 2.0 - 0.25) : ipow(R, 4) * (lr / 4.0 - 1.0 / 16.0);
    };
    const double tri = gauss_integrate([&](double th) { return G(0.5 * h / std::cos(th)); }, 0.0,
                                       std::numbers::pi / 4.0, rule);
    return k.normalization * 8.0 * tri / (h * h);
  }
  double s = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    for (std::size_t j = 0; j < rule.nodes.size(); ++j) {
      const Point y{offset[0] + 0.5 * h * rule.nodes[i], offset[1] + 0.5 * h * rule.nodes[j]};
      s += rule.weights[i] * rule.weights[j] * kernel_profile(k, norm(y, 2));
    }
  return s / 4.0;
}

}  // namespace calderon
