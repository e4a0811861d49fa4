#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "calderon/core.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

/// The box [-L, L]^n sampled at cell centres.
struct DomainBox {
  int n = 1;
  double half_width = 1.0;
  int points_per_axis = 64;

  DomainBox() = default;
  DomainBox(int dim, double L, int points) : n(dim), half_width(L), points_per_axis(points) {
    require(dim == 1 || dim == 2, "DomainBox: dimension must be 1 or 2");
    require(L > 0.0, "DomainBox: half width must be positive");
    require(points >= 16 && (points & (points - 1)) == 0,
            "DomainBox: points_per_axis must be a power of two >= 16");
  }

  double spacing() const { return 2.0 * half_width / points_per_axis; }
  double cell_volume() const { return n == 1 ? spacing() : spacing() * spacing(); }
  std::size_t size() const {
    const auto p = static_cast<std::size_t>(points_per_axis);
    return n == 1 ? p : p * p;
  }
  double coordinate(int i) const { return -half_width + (i + 0.5) * spacing(); }

  /// Flat index is i0 + N * i1 (first axis fastest).
  Point center(std::size_t flat) const {
    const auto p = static_cast<std::size_t>(points_per_axis);
    if (n == 1) return {coordinate(static_cast<int>(flat)), 0.0};
    return {coordinate(static_cast<int>(flat % p)), coordinate(static_cast<int>(flat / p))};
  }

  std::size_t flat(int i0, int i1 = 0) const {
    return static_cast<std::size_t>(i0) +
           static_cast<std::size_t>(points_per_axis) * static_cast<std::size_t>(i1);
  }

  bool contains(const Point& x) const {
    for (int d = 0; d < n; ++d)
      if (std::abs(x[d]) > half_width) return false;
    return true;
  }

  /// Cell index along one axis containing coordinate t (clamped).
  int cell_of(double t) const {
    const int i = static_cast<int>(std::floor((t + half_width) / spacing()));
    return std::clamp(i, 0, points_per_axis - 1);
  }

  bool operator==(const DomainBox&) const = default;
};

struct GridFunction {
  DomainBox domain;
  std::vector<double> samples;

  GridFunction() = default;
  explicit GridFunction(const DomainBox& box) : domain(box), samples(box.size(), 0.0) {}
  GridFunction(const DomainBox& box, std::vector<double> values)
      : domain(box), samples(std::move(values)) {
    require(samples.size() == domain.size(), "GridFunction: sample count mismatch");
  }

  double& operator[](std::size_t i) { return samples[i]; }
  double operator[](std::size_t i) const { return samples[i]; }
  std::size_t size() const { return samples.size(); }

  GridFunction& operator+=(const GridFunction& o) {
    require(domain == o.domain, "GridFunction: domain mismatch");
    for (std::size_t i = 0; i < samples.size(); ++i) samples[i] += o.samples[i];
    return *this;
  }
  GridFunction& operator*=(double c) {
    for (double& v : samples) v *= c;
    return *this;
  }
  friend GridFunction operator+(GridFunction a, const GridFunction& b) { return a += b; }
  friend GridFunction operator*(double c, GridFunction a) { return a *= c; }
};

/// Samples fn at every cell centre.
template <class Fn>
GridFunction sample(const DomainBox& box, Fn&& fn) {
  GridFunction f(box);
  for (std::size_t i = 0; i < box.size(); ++i) f[i] = fn(box.center(i));
  return f;
}

/// Q(x0, r): the cube centred at x0 with side r.
struct Cube {
  Point center{0.0, 0.0};
  double side = 1.0;

  Cube() = default;
  Cube(Point c, double r) : center(c), side(r) { require(r > 0.0, "Cube: side must be positive"); }

  Cube dilate(double delta) const { return Cube(center, delta * side); }
  double volume(int n) const { return n == 1 ? side : side * side; }
  double lo(int d) const { return center[d] - 0.5 * side; }
  double hi(int d) const { return center[d] + 0.5 * side; }

  bool contains(const Point& x, int n) const {
    for (int d = 0; d < n; ++d)
      if (x[d] < lo(d) || x[d] >= hi(d)) return false;
    return true;
  }
  bool inside(const DomainBox& box) const {
    for (int d = 0; d < box.n; ++d)
      if (lo(d) < -box.half_width - 1e-12 || hi(d) > box.half_width + 1e-12) return false;
    return true;
  }
};

/// Cells meeting a cube, weighted by overlap volume. Integrals against it
/// are exact for the piecewise-constant extension of the samples.
struct CubeStencil {
  std::vector<std::size_t> cells;
  std::vector<double> weights;
  double cube_volume = 0.0;
};

namespace detail {

struct AxisOverlap {
  int first = 0;
  std::vector<double> fraction;
};

inline AxisOverlap axis_overlap(const DomainBox& box, double a, double b) {
  AxisOverlap out;
  const double h = box.spacing();
  const double L = box.half_width;
  a = std::max(a, -L);
  b = std::min(b, L);
  if (b <= a) return out;
  const int i0 = box.cell_of(a);
  const int i1 = box.cell_of(std::nextafter(b, a));
  out.first = i0;
  for (int i = i0; i <= i1; ++i) {
    const double cl = -L + i * h;
    const double w = std::min(b, cl + h) - std::max(a, cl);
    out.fraction.push_back(std::max(0.0, w));
  }
  return out;
}

}  // namespace detail

inline void check_resolvable(const DomainBox& box, const Cube& Q) {
  if (Q.side < 2.0 * box.spacing() * (1.0 - 1e-12))
    throw SubResolutionError("cube side " + std::to_string(Q.side) +
                             " is below two grid cells (" + std::to_string(2.0 * box.spacing()) +
                             ")");
}

inline CubeStencil cube_stencil(const DomainBox& box, const Cube& Q) {
  check_resolvable(box, Q);
  CubeStencil st;
  st.cube_volume = Q.volume(box.n);
  const auto ax = detail::axis_overlap(box, Q.lo(0), Q.hi(0));
  if (box.n == 1) {
    for (std::size_t i = 0; i < ax.fraction.size(); ++i) {
      if (ax.fraction[i] <= 0.0) continue;
      st.cells.push_back(box.flat(ax.first + static_cast<int>(i)));
      st.weights.push_back(ax.fraction[i]);
    }
    return st;
  }
  const auto ay = detail::axis_overlap(box, Q.lo(1), Q.hi(1));
  for (std::size_t j = 0; j < ay.fraction.size(); ++j)
    for (std::size_t i = 0; i < ax.fraction.size(); ++i) {
      const double w = ax.fraction[i] * ay.fraction[j];
      if (w <= 0.0) continue;
      st.cells.push_back(box.flat(ax.first + static_cast<int>(i), ay.first + static_cast<int>(j)));
      st.weights.push_back(w);
    }
  return st;
}

/// Midpoint integral of transform(f) over Q ∩ box; f is zero outside the box.
template <class Transform>
double integrate(const GridFunction& f, const Cube& Q, Transform&& transform) {
  const auto st = cube_stencil(f.domain, Q);
  double s = 0.0;
  for (std::size_t k = 0; k < st.cells.size(); ++k) s += st.weights[k] * transform(f[st.cells[k]]);
  return s;
}

inline double integrate(const GridFunction& f, const Cube& Q) {
  return integrate(f, Q, [](double v) { return v; });
}

/// Midpoint integral over the whole box.
inline double integrate(const GridFunction& f) {
  return pairwise_sum(f.samples) * f.domain.cell_volume();
}

/// χ_Q sampled by cell centre (half-open cube).
inline GridFunction indicator(const DomainBox& box, const Cube& Q) {
  return sample(box, [&](const Point& x) { return Q.contains(x, box.n) ? 1.0 : 0.0; });
}

/// Standard (2n+1)-point Laplacian applied m times. Cells within m of the
/// boundary receive copies of their inward neighbour and are not reliable;
/// see interior_mask.
inline GridFunction discrete_laplacian_power(const GridFunction& f, int m) {
  require(m >= 1, "discrete_laplacian_power: m must be >= 1");
  const DomainBox& box = f.domain;
  const int N = box.points_per_axis;
  const double inv_h2 = 1.0 / (box.spacing() * box.spacing());
  GridFunction cur = f;
  GridFunction next(box);
  for (int step = 0; step < m; ++step) {
    if (box.n == 1) {
      for (int i = 1; i < N - 1; ++i)
        next[i] = (cur[i - 1] - 2.0 * cur[i] + cur[i + 1]) * inv_h2;
      next[0] = next[1];
      next[N - 1] = next[N - 2];
    } else {
      for (int j = 1; j < N - 1; ++j)
        for (int i = 1; i < N - 1; ++i) {
          const std::size_t c = box.flat(i, j);
          next[c] = (cur[c - 1] + cur[c + 1] + cur[c - N] + cur[c + N] - 4.0 * cur[c]) * inv_h2;
        }
      for (int i = 0; i < N; ++i) {
        next[box.flat(i, 0)] = next[box.flat(std::clamp(i, 1, N - 2), 1)];
        next[box.flat(i, N - 1)] = next[box.flat(std::clamp(i, 1, N - 2), N - 2)];
      }
      for (int j = 0; j < N; ++j) {
        next[box.flat(0, j)] = next[box.flat(1, std::clamp(j, 1, N - 2))];
        next[box.flat(N - 1, j)] = next[box.flat(N - 2, std::clamp(j, 1, N - 2))];
      }
    }
    std::swap(cur, next);
  }
  return cur;
}

/// True for cells at distance >= width from every face.
inline std::vector<bool> interior_mask(const DomainBox& box, int width) {
  const int N = box.points_per_axis;
  std::vector<bool> mask(box.size(), false);
  auto ok = [&](int i) { return i >= width && i < N - width; };
  for (std::size_t k = 0; k < box.size(); ++k) {
    const int i0 = static_cast<int>(k % N);
    const int i1 = static_cast<int>(k / N);
    mask[k] = box.n == 1 ? ok(i0) : (ok(i0) && ok(i1));
  }
  return mask;
}

/// Geometric sequence lo, lo*ratio, ... up to hi (inclusive within roundoff).
inline std::vector<double> geometric_grid(double lo, double hi, double ratio) {
  require(lo > 0.0 && hi >= lo, "geometric_grid: need 0 < lo <= hi");
  require(ratio > 1.0, "geometric_grid: ratio must exceed 1");
  std::vector<double> out;
  for (int k = 0;; ++k) {
    const double v = lo * std::pow(ratio, k);
    if (v > hi * (1.0 + 1e-12)) break;
    out.push_back(v);
  }
  return out;
}

}  // namespace calderon
