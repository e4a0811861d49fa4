#pragma once

#include <cmath>
#include <span>
#include <vector>

#include "calderon/atoms.hpp"
#include "calderon/grid.hpp"
#include "calderon/kernel.hpp"
#include "calderon/maximal.hpp"
#include "calderon/parallel.hpp"

namespace calderon {

struct PotentialResult {
  GridFunction b;
  Atom source;
  FunctionClass class_B;  // degree bound 2m − 1
};

/// Kernel values on lattice offsets k·h, |k_i| < N. Offsets closer than two
/// cells use the cell average of h.
class KernelTable {
 public:
  KernelTable(const KernelSpec& k, const DomainBox& box) : n_(box.n), N_(box.points_per_axis) {
    const double h = box.spacing();
    const int W = 2 * N_ - 1;
    values_.resize(n_ == 1 ? W : static_cast<std::size_t>(W) * W);
    const int j_lo = n_ == 1 ? 0 : -(N_ - 1), j_hi = n_ == 1 ? 0 : N_ - 1;
    for (int j = j_lo; j <= j_hi; ++j)
      for (int i = -(N_ - 1); i <= N_ - 1; ++i) {
        const Point off{i * h, j * h};
        double v;
        if (i * i + j * j < 4) v = kernel_cell_average(k, off, h);
        else v = kernel_profile(k, norm(off, n_));
        at(i, j) = v;
      }
  }

  double operator()(int i, int j) const {
    return values_[static_cast<std::size_t>(i + N_ - 1) +
                   static_cast<std::size_t>(n_ == 1 ? 0 : j + N_ - 1) * (2 * N_ - 1)];
  }

 private:
  double& at(int i, int j) {
    return values_[static_cast<std::size_t>(i + N_ - 1) +
                   static_cast<std::size_t>(n_ == 1 ? 0 : j + N_ - 1) * (2 * N_ - 1)];
  }
  int n_, N_;
  std::vector<double> values_;
};

/// b = h ∗ f on every cell of the grid by direct quadrature.
inline GridFunction convolve_kernel(const GridFunction& f, const KernelSpec& k) {
  const DomainBox& box = f.domain;
  const KernelTable T(k, box);
  const int N = box.points_per_axis;
  struct Src {
    int i, j;
    double w;
  };
  std::vector<Src> src;
  const double vol = box.cell_volume();
  for (std::size_t c = 0; c < box.size(); ++c)
    if (f[c] != 0.0) src.push_back({static_cast<int>(c % N), static_cast<int>(c / N), f[c] * vol});
  GridFunction b(box);
  if (src.empty()) return b;
  parallel_for(box.size(), [&](std::size_t c) {
    const int i = static_cast<int>(c % N), j = static_cast<int>(c / N);
    long double s = 0.0L;
    for (const Src& y : src) s += static_cast<long double>(T(i - y.i, j - y.j)) * y.w;
    b[c] = static_cast<double>(s);
  });
  return b;
}

inline void check_margin(const DomainBox& box, const Cube& Q) {
  for (int d = 0; d < box.n; ++d) {
    const double gap = std::min(Q.lo(d) + box.half_width, box.half_width - Q.hi(d));
    if (gap < 8.0 * Q.side * (1.0 - 1e-12))
      throw std::invalid_argument("potential: grid margin around the atom is below 8 l(Q)");
  }
}

/// b(x) = ∫ h(x − y) a(y) dy on the atom's grid.
inline PotentialResult potential(const Atom& a, const KernelSpec& k) {
  require(a.data.domain.n == k.n, "potential: kernel dimension differs from the grid");
  check_margin(a.data.domain, a.Q);
  PotentialResult r{convolve_kernel(a.data, k), a, {}};
  r.class_B = {r.b, 2 * k.m - 1};
  return r;
}

/// ∂^α b at the given points by direct quadrature with the exact kernel
/// derivative. Points must satisfy |x − x0| >= √n l(Q).
inline std::vector<double> potential_derivative_field(const Atom& a, const KernelSpec& k, const MultiIndex& alpha,
                                                      std::span<const Point> points) {
  const DomainBox& box = a.data.domain;
  require(order(alpha) <= 2 * k.m + 1, "potential_derivative_field: |alpha| > 2m+1 unsupported");
  const double min_dist = std::sqrt(static_cast<double>(box.n)) * a.Q.side;
  for (const Point& x : points)
    if (distance(x, a.Q.center, box.n) < min_dist * (1.0 - 1e-12))
      throw std::invalid_argument("potential_derivative_field: sample point closer than sqrt(n) l(Q) to the cube");
  std::vector<std::size_t> cells;
  for (std::size_t c = 0; c < box.size(); ++c)
    if (a.data[c] != 0.0) cells.push_back(c);
  const double vol = box.cell_volume();
  std::vector<double> out(points.size(), 0.0);
  parallel_for(points.size(), [&](std::size_t p) {
    double s = 0.0;
    for (std::size_t c : cells) {
      const Point y = box.center(c);
      s += kernel_derivative(k, alpha, {points[p][0] - y[0], points[p][1] - y[1]}) * a.data[c];
    }
    out[p] = s * vol;
  });
  return out;
}


/// Relative L² error of Δ^m_discrete b − a over cells at least m + 1 from the faces.
inline double laplacian_residual(const PotentialResult& r, int m) {
  const auto lap = discrete_laplacian_power(r.b, m);
  const auto mask = interior_mask(r.b.domain, m + 1);
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < lap.size(); ++c) {
    if (!mask[c]) continue;
    const double e = lap[c] - r.source.data[c];
    num += e * e;
    den += r.source.data[c] * r.source.data[c];
  }
  return std::sqrt(num / den);
}

/// The atom used to calibrate c_{m,n}: side l = 0.1 centred at the origin of
/// [-1, 1]^n with d = 2m − 1.
inline Atom reference_atom(int m, int n, int points, std::uint64_t seed = 20240601) {
  const DomainBox box(n, 1.0, points);
  return make_atom(box, ExponentFunction::constant(2.0), Cube({0.0, 0.0}, 0.1), kInfinity, 2 * m - 1, seed,
                   AtomProfile::separable);
}

/// Least-squares c minimising ‖c Δ^m_discrete(h₁ ∗ a) − a‖ over the interior,
/// where h₁ is the kernel with unit normalization.
inline double calibrate_normalization(int m, int n, int points) {
  const Atom a = reference_atom(m, n, points);
  const auto r = potential(a, KernelSpec(m, n, 1.0));
  const auto lap = discrete_laplacian_power(r.b, m);
  const auto mask = interior_mask(a.data.domain, m + 1);
  double num = 0.0, den = 0.0;
  for (std::size_t c = 0; c < lap.size(); ++c) {
    if (!mask[c]) continue;
    num += lap[c] * a.data[c];
    den += lap[c] * lap[c];
  }
  return num / den;
}

}  // namespace calderon
