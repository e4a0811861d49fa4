#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>

namespace calderon {

/// Points live in R^1 or R^2; unused trailing coordinates stay zero.
using Point = std::array<double, 2>;

inline constexpr int kMaxDim = 2;

class LabError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Cube smaller than two grid cells.
class SubResolutionError : public LabError {
 public:
  using LabError::LabError;
};

class ConvergenceError : public LabError {
 public:
  using LabError::LabError;
};

class IllConditionedError : public LabError {
 public:
  using LabError::LabError;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw std::invalid_argument(what);
}

inline double norm(const Point& x, int n) {
  return n == 1 ? std::abs(x[0]) : std::hypot(x[0], x[1]);
}

inline double distance(const Point& x, const Point& y, int n) {
  return norm(Point{x[0] - y[0], x[1] - y[1]}, n);
}

inline Point scaled(const Point& x, double s) { return {x[0] * s, x[1] * s}; }

/// Integer power for small non-negative exponents.
inline double ipow(double x, int k) {
  double r = 1.0;
  for (int i = 0; i < k; ++i) r *= x;
  return r;
}

/// |x|^q with fast paths for the integer exponents the experiments use.
inline double abs_pow(double x, double q) {
  const double a = std::abs(x);
  if (q == 1.0) return a;
  if (q == 2.0) return a * a;
  if (q == 4.0) { const double s = a * a; return s * s; }
  if (q == 8.0) { const double s = a * a; const double t = s * s; return t * t; }
  if (a == 0.0) return 0.0;
  return std::pow(a, q);
}

}  // namespace calderon
