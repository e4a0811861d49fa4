#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "calderon/core.hpp"

namespace calderon {

using MultiIndex = std::array<int, 2>;

inline int order(const MultiIndex& a) { return a[0] + a[1]; }

inline double factorial(int k) {
  double r = 1.0;
  for (int i = 2; i <= k; ++i) r *= i;
  return r;
}

inline double factorial(const MultiIndex& a) { return factorial(a[0]) * factorial(a[1]); }

/// All multi-indices with |α| <= k, graded (by total order, then by α₁ descending).
inline std::vector<MultiIndex> multi_indices_up_to(int n, int k) {
  std::vector<MultiIndex> out;
  for (int total = 0; total <= k; ++total) {
    if (n == 1) {
      out.push_back({total, 0});
    } else {
      for (int a = total; a >= 0; --a) out.push_back({a, total - a});
    }
  }
  return out;
}

/// Multi-indices with |α| == k exactly.
inline std::vector<MultiIndex> multi_indices_of_order(int n, int k) {
  std::vector<MultiIndex> out;
  for (const auto& a : multi_indices_up_to(n, k))
    if (order(a) == k) out.push_back(a);
  return out;
}

inline double monomial(const MultiIndex& a, const Point& x) {
  return ipow(x[0], a[0]) * ipow(x[1], a[1]);
}

/// Σ c_α (x - center)^α over |α| <= degree.
struct Polynomial {
  int n = 1;
  int degree = 0;
  Point center{0.0, 0.0};
  std::vector<MultiIndex> terms;
  std::vector<double> coeffs;

  Polynomial() = default;
  Polynomial(int dim, int k, Point c = {0.0, 0.0})
      : n(dim), degree(k), center(c), terms(multi_indices_up_to(dim, k)), coeffs(terms.size(), 0.0) {}

  static Polynomial zero(int dim, int k) { return Polynomial(dim, k); }

  /// Coefficient slot for α; α must satisfy |α| <= degree.
  double& coeff(const MultiIndex& a) {
    for (std::size_t i = 0; i < terms.size(); ++i)
      if (terms[i] == a) return coeffs[i];
    throw std::invalid_argument("Polynomial: multi-index exceeds degree bound");
  }
  double coeff(const MultiIndex& a) const { return const_cast<Polynomial*>(this)->coeff(a); }

  double operator()(const Point& x) const {
    const Point z{x[0] - center[0], x[1] - center[1]};
    double s = 0.0;
    for (std::size_t i = 0; i < terms.size(); ++i) s += coeffs[i] * monomial(terms[i], z);
    return s;
  }
};

inline double eval_polynomial(const Polynomial& p, const Point& x) { return p(x); }

}  // namespace calderon
