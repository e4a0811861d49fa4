#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <vector>

#include "calderon/polynomial.hpp"

namespace calderon {

/// Index tables for truncated Taylor polynomials in n variables of total
/// order <= order. Shared and immutable once built.
class JetSpace {
 public:
  struct Triple {
    std::uint16_t a, b, c;
  };

  static const JetSpace& get(int n, int order) {
    static std::mutex mutex;
    static std::map<std::pair<int, int>, std::unique_ptr<JetSpace>> cache;
    std::lock_guard lock(mutex);
    auto& slot = cache[{n, order}];
    if (!slot) slot.reset(new JetSpace(n, order));
    return *slot;
  }

  int n() const { return n_; }
  int order() const { return order_; }
  std::size_t size() const { return indices_.size(); }
  const std::vector<MultiIndex>& indices() const { return indices_; }
  const std::vector<Triple>& products() const { return products_; }

  std::size_t index_of(const MultiIndex& a) const {
    for (std::size_t i = 0; i < indices_.size(); ++i)
      if (indices_[i] == a) return i;
    throw std::invalid_argument("JetSpace: multi-index exceeds jet order");
  }

 private:
  JetSpace(int n, int order) : n_(n), order_(order), indices_(multi_indices_up_to(n, order)) {
    for (std::size_t i = 0; i < indices_.size(); ++i)
      for (std::size_t j = 0; j < indices_.size(); ++j) {
        const MultiIndex s{indices_[i][0] + indices_[j][0], indices_[i][1] + indices_[j][1]};
        if (calderon::order(s) > order_) continue;
        products_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                             static_cast<std::uint16_t>(index_of(s))});
      }
  }

  int n_;
  int order_;
  std::vector<MultiIndex> indices_;
  std::vector<Triple> products_;
};

/// Truncated Taylor expansion f(x0 + u) = Σ c_α u^α. Derivatives are
/// recovered as ∂^α f(x0) = α! c_α.
class Jet {
 public:
  explicit Jet(const JetSpace& space, double value = 0.0)
      : space_(&space), c_(space.size(), 0.0) {
    c_[0] = value;
  }

  /// The coordinate function x_d expanded about x0.
  static Jet variable(const JetSpace& space, int d, double x0) {
    Jet j(space, x0);
    if (space.order() >= 1) j.c_[space.index_of(d == 0 ? MultiIndex{1, 0} : MultiIndex{0, 1})] = 1.0;
    return j;
  }

  double value() const { return c_[0]; }
  double coeff(const MultiIndex& a) const { return c_[space_->index_of(a)]; }
  double derivative(const MultiIndex& a) const { return factorial(a) * coeff(a); }
  std::span<const double> coeffs() const { return c_; }
  const JetSpace& space() const { return *space_; }

  Jet& operator+=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] += o.c_[i];
    return *this;
  }
  Jet& operator-=(const Jet& o) {
    for (std::size_t i = 0; i < c_.size(); ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Jet& operator*=(double s) {
    for (double& v : c_) v *= s;
    return *this;
  }
  friend Jet operator+(Jet a, const Jet& b) { return a += b; }
  friend Jet operator-(Jet a, const Jet& b) { return a -= b; }
  friend Jet operator*(double s, Jet a) { return a *= s; }
  friend Jet operator*(const Jet& a, const Jet& b) {
    Jet r(*a.space_);
    r.c_[0] = 0.0;
    for (const auto& t : a.space_->products()) r.c_[t.c] += a.c_[t.a] * b.c_[t.b];
    return r;
  }

  /// g(this) given g^{(k)}(value()) / k! for k = 0..order.
  Jet compose(std::span<const double> taylor) const {
    Jet u = *this;
    u.c_[0] = 0.0;
    Jet result(*space_, taylor[0]);
    Jet power(*space_, 1.0);
    for (int k = 1; k <= space_->order(); ++k) {
      power = power * u;
      for (std::size_t i = 0; i < c_.size(); ++i) result.c_[i] += taylor[k] * power.c_[i];
    }
    return result;
  }

 private:
  const JetSpace* space_;
  std::vector<double> c_;
};

/// Taylor coefficients of s ↦ s^a at s0 > 0.
inline std::vector<double> power_taylor(double a, double s0, int order) {
  std::vector<double> t(order + 1);
  double coef = 1.0;
  for (int k = 0; k <= order; ++k) {
    t[k] = coef * std::pow(s0, a - k);
    coef *= (a - k) / (k + 1);
  }
  return t;
}

/// Taylor coefficients of ln at s0 > 0.
inline std::vector<double> log_taylor(double s0, int order) {
  std::vector<double> t(order + 1);
  t[0] = std::log(s0);
  double p = 1.0;
  for (int k = 1; k <= order; ++k) {
    p /= s0;
    t[k] = ((k % 2 == 1) ? 1.0 : -1.0) * p / k;
  }
  return t;
}

inline std::vector<double> exp_taylor(double s0, int order) {
  std::vector<double> t(order + 1);
  const double e = std::exp(s0);
  for (int k = 0; k <= order; ++k) t[k] = e / factorial(k);
  return t;
}

inline Jet jet_pow(const Jet& x, double a) { return x.compose(power_taylor(a, x.value(), x.space().order())); }
inline Jet jet_log(const Jet& x) { return x.compose(log_taylor(x.value(), x.space().order())); }
inline Jet jet_exp(const Jet& x) { return x.compose(exp_taylor(x.value(), x.space().order())); }

/// |x|^2 expanded about x0.
inline Jet squared_norm(const JetSpace& space, const Point& x0) {
  Jet s(space);
  for (int d = 0; d < space.n(); ++d) {
    const Jet v = Jet::variable(space, d, x0[d]);
    s += v * v;
  }
  return s;
}

}  // namespace calderon
