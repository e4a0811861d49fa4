#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "calderon/core.hpp"
#include "calderon/jet.hpp"
#include "calderon/quadrature.hpp"

namespace calderon {

/// Smooth test functions φ for the smooth maximal function M_φ.
///   gaussian:  A · exp(-|x|²)
///   bump:      A · exp(-1 / (1 - |x|²)) on |x| < 1, zero elsewhere
struct TestFunction {
  enum class Kind { gaussian, bump };

  Kind kind = Kind::gaussian;
  int n = 1;
  double amplitude = 1.0;

  static TestFunction gaussian(int n, double amplitude = 1.0) { return {Kind::gaussian, n, amplitude}; }

  /// Gaussian with unit integral.
  static TestFunction unit_gaussian(int n) {
    return gaussian(n, std::pow(std::numbers::pi, -0.5 * n));
  }

  /// Compact bump with unit integral.
  static TestFunction unit_bump(int n) {
    TestFunction f{Kind::bump, n, 1.0};
    f.amplitude = 1.0 / f.mass();
    return f;
  }

  static TestFunction from_name(const std::string& name, int n) {
    if (name == "gaussian") return unit_gaussian(n);
    if (name == "bump") return unit_bump(n);
    throw std::invalid_argument("unknown test function '" + name + "' (expected gaussian or bump)");
  }

  std::string name() const { return kind == Kind::gaussian ? "gaussian" : "bump"; }

  TestFunction scaled(double c) const { return {kind, n, amplitude * c}; }

  /// Radius outside which |φ| is below 1e-15 · amplitude (exactly 0 for the bump).
  double support_radius() const { return kind == Kind::gaussian ? 6.0 : 1.0; }

  double operator()(const Point& x) const {
    const double s = n == 1 ? x[0] * x[0] : x[0] * x[0] + x[1] * x[1];
    if (kind == Kind::gaussian) return amplitude * std::exp(-s);
    return s < 1.0 ? amplitude * std::exp(-1.0 / (1.0 - s)) : 0.0;
  }

  /// All derivatives up to `order` at x.
  Jet jet(const Point& x, int order) const {
    const auto& sp = JetSpace::get(n, order);
    const Jet s = squared_norm(sp, x);
    if (kind == Kind::gaussian) return amplitude * jet_exp(-1.0 * s);
    if (s.value() >= 1.0) return Jet(sp, 0.0);
    const Jet inv = jet_pow(Jet(sp, 1.0) - s, -1.0);
    return amplitude * jet_exp(-1.0 * inv);
  }

  double mass() const {
    const auto rule = gauss_legendre(64);
    if (kind == Kind::gaussian) return amplitude * std::pow(std::numbers::pi, 0.5 * n);
    auto prof = [](double r) { return r < 1.0 ? std::exp(-1.0 / (1.0 - r * r)) : 0.0; };
    double m = 0.0;
    for (int k = 0; k < 16; ++k) {
      const double a = k / 16.0, b = (k + 1) / 16.0;
      m += n == 1 ? 2.0 * gauss_integrate(prof, a, b, rule)
                  : 2.0 * std::numbers::pi * gauss_integrate([&](double r) { return r * prof(r); }, a, b, rule);
    }
    return amplitude * m;
  }
};

/// p_N(φ) = Σ_{|β|<=N} sup_x (1+|x|)^N |∂^β φ(x)|. Each supremum is taken
/// over a dense grid and then refined locally around the best node.
inline double schwartz_seminorm(const TestFunction& phi, int N) {
  const auto betas = multi_indices_up_to(phi.n, N);
  const double R = phi.kind == TestFunction::Kind::gaussian ? 8.0 : 1.0;
  std::vector<double> best(betas.size(), 0.0);
  std::vector<Point> arg(betas.size(), Point{0.0, 0.0});
  auto visit = [&](const Point& x) {
    const Jet j = phi.jet(x, N);
    const double w = std::pow(1.0 + norm(x, phi.n), N);
    for (std::size_t b = 0; b < betas.size(); ++b) {
      const double v = w * std::abs(j.derivative(betas[b]));
      if (v > best[b]) {
        best[b] = v;
        arg[b] = x;
      }
    }
  };
  const int coarse = phi.n == 1 ? 4000 : 240;
  double step = 2.0 * R / coarse;
  if (phi.n == 1) {
    for (int i = 0; i <= coarse; ++i) visit({-R + i * step, 0.0});
  } else {
    for (int j = 0; j <= coarse; ++j)
      for (int i = 0; i <= coarse; ++i) visit({-R + i * step, -R + j * step});
  }
  // local refinement around each supremiser
  for (int round = 0; round < 4; ++round) {
    const auto centres = arg;
    const double fine = step / 10.0;
    for (const Point& c : centres) {
      if (phi.n == 1) {
        for (int i = -10; i <= 10; ++i) visit({c[0] + i * fine, 0.0});
      } else {
        for (int j = -10; j <= 10; ++j)
          for (int i = -10; i <= 10; ++i) visit({c[0] + i * fine, c[1] + j * fine});
      }
    }
    step = fine;
  }
  double total = 0.0;
  for (double v : best) total += v;
  return total;
}

}  // namespace calderon
