#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "calderon/exponents.hpp"
#include "calderon/grid.hpp"
#include "calderon/kernel.hpp"
#include "calderon/optimize.hpp"
#include "calderon/parallel.hpp"
#include "calderon/phi.hpp"
#include "calderon/polynomial.hpp"

namespace calderon {

inline constexpr double kScaleRatio = 1.189207115002721;  // 2^{1/4}

struct MaximalParams {
  double q = 2.0;
  double gamma = 2.0;
  std::vector<double> scales;

  MaximalParams() = default;
  MaximalParams(double q_, double gamma_, std::vector<double> scale_grid)
      : q(q_), gamma(gamma_), scales(std::move(scale_grid)) {
    require(q_ >= 1.0, "MaximalParams: q must be >= 1");
    require(gamma_ > 0.0, "MaximalParams: gamma must be positive");
    require(!scales.empty(), "MaximalParams: empty scale grid");
  }
  static MaximalParams geometric(double q, double gamma, double r_min, double r_max, double ratio = kScaleRatio) {
    require(ratio > 1.0 && ratio <= 2.0, "MaximalParams: ratio must lie in (1, 2]");
    return MaximalParams(q, gamma, geometric_grid(r_min, r_max, ratio));
  }

  /// γ = k + t with 0 < t <= 1.
  int k() const { return static_cast<int>(std::ceil(gamma - 1e-12)) - 1; }
  double t() const { return gamma - k(); }
};

/// Element of E^q_k: a representative modulo polynomials of degree <= k.
struct FunctionClass {
  GridFunction representative;
  int degree_bound = 0;
};

namespace detail {

/// Columns ((z − x)/s)^α for the stencil cells.
inline Eigen::MatrixXd monomial_basis(const DomainBox& box, const std::vector<std::size_t>& cells,
                                      const std::vector<MultiIndex>& terms, const Point& x, double s) {
  Eigen::MatrixXd B(cells.size(), terms.size());
  for (std::size_t i = 0; i < cells.size(); ++i) {
    const Point z = box.center(cells[i]);
    const Point u{(z[0] - x[0]) / s, (z[1] - x[1]) / s};
    for (std::size_t a = 0; a < terms.size(); ++a) B(i, a) = monomial(terms[a], u);
  }
  return B;
}

inline LqBlock make_block(const GridFunction& f, const Cube& Q, const std::vector<MultiIndex>& terms,
                          const Point& x, double s, double scale) {
  const auto st = cube_stencil(f.domain, Q);
  LqBlock b;
  b.scale = scale;
  b.weights = Eigen::Map<const Eigen::VectorXd>(st.weights.data(), st.weights.size());
  b.values.resize(st.cells.size());
  for (std::size_t i = 0; i < st.cells.size(); ++i) b.values[i] = f[st.cells[i]];
  b.basis = monomial_basis(f.domain, st.cells, terms, x, s);
  return b;
}

inline Eigen::MatrixXd normalized_gram(const LqBlock& b) {
  return b.basis.transpose() * b.weights.asDiagonal() * b.basis / b.weights.sum();
}

inline double condition_number(const Eigen::MatrixXd& G) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues().minCoeff(), hi = es.eigenvalues().maxCoeff();
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

inline Eigen::VectorXd weighted_least_squares(const LqBlock& b) {
  const Eigen::MatrixXd G = b.basis.transpose() * b.weights.asDiagonal() * b.basis;
  const Eigen::VectorXd rhs = b.basis.transpose() * b.weights.asDiagonal() * b.values;
  return G.ldlt().solve(rhs);
}

}  // namespace detail

/// |f|_{q,Q} = (|Q|⁻¹ ∫_Q |f|^q)^{1/q}.
inline double seminorm_q_Q(const GridFunction& f, double q, const Cube& Q) {
  require(q >= 1.0, "seminorm_q_Q: q must be >= 1");
  const double I = integrate(f, Q, [q](double v) { return abs_pow(v, q); });
  return std::pow(I / Q.volume(f.domain.n), 1.0 / q);
}

struct ScaleMax {
  double value = 0.0;
  double argmax_scale = 0.0;
};

/// η_{q,γ}(f; x) over the scale grid.
inline ScaleMax eta_maximal(const GridFunction& f, const MaximalParams& prm, const Point& x) {
  ScaleMax out{0.0, prm.scales.front()};
  for (double r : prm.scales) {
    const double v = std::pow(r, -prm.gamma) * seminorm_q_Q(f, prm.q, Cube(x, r));
    if (v > out.value) out = {v, r};
  }
  return out;
}

/// ‖F‖_{q,Q}: distance from the representative to P_k in |·|_{q,Q}.
inline double class_seminorm(const FunctionClass& F, double q, const Cube& Q, double rel_tol = 1e-6) {
  const GridFunction& f = F.representative;
  const int n = f.domain.n;
  const auto terms = multi_indices_up_to(n, F.degree_bound);
  const double s = 0.5 * Q.side;
  const double scale = std::pow(Q.volume(n), -1.0 / q);
  LqBlock b = detail::make_block(f, Q, terms, Q.center, s, scale);
  const Eigen::MatrixXd H = detail::normalized_gram(b);
  const double cond = detail::condition_number(H);
  if (cond > 1e12)
    throw IllConditionedError("class_seminorm: Gram condition estimate " + std::to_string(cond) +
                              " exceeds 1e12; recentre the monomials at the cube centre");
  const Eigen::VectorXd c0 = detail::weighted_least_squares(b);
  const double W = b.weights.sum();
  MinimaxLq prob({b}, q);
  if (q == 2.0) return prob.value(c0);
  const double F0 = prob.value(c0);
  const double R = 2.0 * F0 / (scale * std::pow(W, 1.0 / q)) * (q >= 2.0 ? 1.01 : 4.0);
  MinimaxOptions opt;
  opt.rel_tol = rel_tol;
  opt.restarts = 1;
  return minimize_minimax(prob, c0, H, R, opt).value;
}

/// True when the representatives differ by a polynomial of degree <= k,
/// judged by the relative least-squares residual over the whole box.
inline bool same_class(const FunctionClass& F, const FunctionClass& G, double tol = 1e-8) {
  if (F.degree_bound != G.degree_bound || !(F.representative.domain == G.representative.domain)) return false;
  const DomainBox& box = F.representative.domain;
  GridFunction diff = F.representative + (-1.0) * G.representative;
  const Cube whole(Point{0.0, 0.0}, 2.0 * box.half_width);
  const auto terms = multi_indices_up_to(box.n, F.degree_bound);
  LqBlock b = detail::make_block(diff, whole, terms, whole.center, box.half_width, 1.0);
  const Eigen::VectorXd c = detail::weighted_least_squares(b);
  const double res = (b.values - b.basis * c).norm();
  auto l2 = [](const GridFunction& g) { return Eigen::Map<const Eigen::VectorXd>(g.samples.data(), g.size()).norm(); };
  const double ref = std::max({l2(F.representative), l2(G.representative), 1e-300});
  return res <= tol * ref;
}

/// The convex program behind N_{q,γ}(F; x): coefficients are taken in the
/// basis ((z − x)/s)^α with s half the largest admissible scale.
struct NObjective {
  MinimaxLq problem;
  std::vector<MultiIndex> terms;
  Point x;
  double basis_scale;
  std::vector<double> scales;
  int n;

  Polynomial to_polynomial(const Eigen::VectorXd& c) const {
    Polynomial P(n, terms.empty() ? 0 : order(terms.back()), x);
    for (std::size_t a = 0; a < terms.size(); ++a) P.coeffs[a] = c[a] / ipow(basis_scale, order(terms[a]));
    return P;
  }
  Eigen::VectorXd from_polynomial(const Polynomial& P) const {
    Eigen::VectorXd c(terms.size());
    for (std::size_t a = 0; a < terms.size(); ++a) c[a] = P.coeffs[a] * ipow(basis_scale, order(terms[a]));
    return c;
  }
};

/// Scales r whose cubes Q(x, r) fit in the box and are resolvable.
inline std::vector<double> admissible_scales(const DomainBox& box, const std::vector<double>& scales,
                                             const Point& x) {
  std::vector<double> out;
  for (double r : scales)
    if (r >= 2.0 * box.spacing() * (1.0 - 1e-12) && Cube(x, r).inside(box)) out.push_back(r);
  return out;
}

inline NObjective n_objective(const FunctionClass& F, const MaximalParams& prm, const Point& x) {
  require(F.degree_bound == prm.k(), "N_maximal: class degree bound must equal k of the parameters");
  const GridFunction& f = F.representative;
  const DomainBox& box = f.domain;
  const auto scales = admissible_scales(box, prm.scales, x);
  if (scales.empty()) throw std::invalid_argument("N_maximal: no admissible scale at this point");
  const auto terms = multi_indices_up_to(box.n, F.degree_bound);
  const double s = 0.5 * scales.back();
  std::vector<LqBlock> blocks;
  blocks.reserve(scales.size());
  for (double r : scales) {
    const Cube Q(x, r);
    const double scale = std::pow(r, -prm.gamma) * std::pow(Q.volume(box.n), -1.0 / prm.q);
    blocks.push_back(detail::make_block(f, Q, terms, x, s, scale));
  }
  return NObjective{MinimaxLq(std::move(blocks), prm.q), terms, x, s, scales, box.n};
}

struct NResult {
  double value = 0.0;
  Polynomial minimizer;
  double lower_bound = 0.0;
  bool converged = true;
  int iterations = 0;
  std::vector<Polynomial> restart_minimizers;
};

/// N_{q,γ}(F; x) = inf over representatives of η_{q,γ}. Solved with the
/// ellipsoid method; `converged` is false if the budget ran out before the
/// certified gap reached the tolerance (the best value is still returned).
inline NResult N_maximal(const FunctionClass& F, const MaximalParams& prm, const Point& x,
                         const MinimaxOptions& opt = {}) {
  const NObjective obj = n_objective(F, prm, x);
  const auto& blocks = obj.problem.blocks();
  const int d = obj.problem.dim();
  const double s = obj.basis_scale;

  // start: least squares at the smallest well-conditioned scale
  Eigen::VectorXd c0 = Eigen::VectorXd::Zero(d);
  for (std::size_t j = 0; j < blocks.size(); ++j) {
    LqBlock local = blocks[j];
    const double rs = 0.5 * obj.scales[j] / s;
    for (std::size_t a = 0; a < obj.terms.size(); ++a) local.basis.col(a) /= ipow(rs, order(obj.terms[a]));
    if (detail::condition_number(detail::normalized_gram(local)) > 1e8) continue;
    c0 = detail::weighted_least_squares(local);
    for (std::size_t a = 0; a < obj.terms.size(); ++a) c0[a] /= ipow(rs, order(obj.terms[a]));
    break;
  }
  const double F0 = obj.problem.value(c0);
  const LqBlock& big = blocks.back();
  const Eigen::MatrixXd H = detail::normalized_gram(big);
  const double R = 2.0 * F0 * std::pow(obj.scales.back(), prm.gamma) * (prm.q >= 2.0 ? 1.01 : 4.0);
  const auto res = minimize_minimax(obj.problem, c0, H, R, opt);

  NResult out;
  out.value = res.value;
  out.lower_bound = res.lower_bound;
  out.converged = res.converged;
  out.iterations = res.iterations;
  out.minimizer = obj.to_polynomial(res.minimizer);
  for (const auto& c : res.restart_minimizers) out.restart_minimizers.push_back(obj.to_polynomial(c));
  return out;
}

/// Exact integrals of the piecewise-constant extension over axis-aligned
/// boxes via summed-area tables.
class BoxIntegrator {
 public:
  template <class Transform>
  BoxIntegrator(const GridFunction& f, Transform&& transform) : box_(f.domain) {
    const int N = box_.points_per_axis;
    const double vol = box_.cell_volume();
    if (box_.n == 1) {
      table_.assign(N + 1, 0.0L);
      cell_.resize(N);
      for (int i = 0; i < N; ++i) {
        cell_[i] = transform(f[i]) * vol;
        table_[i + 1] = table_[i] + cell_[i];
      }
    } else {
      table_.assign(static_cast<std::size_t>(N + 1) * (N + 1), 0.0L);
      cell_.resize(box_.size());
      for (int j = 0; j < N; ++j)
        for (int i = 0; i < N; ++i) {
          const std::size_t c = box_.flat(i, j);
          cell_[c] = transform(f[c]) * vol;
          at(i + 1, j + 1) = at(i, j + 1) + at(i + 1, j) - at(i, j) + cell_[c];
        }
    }
  }
  explicit BoxIntegrator(const GridFunction& f) : BoxIntegrator(f, [](double v) { return v; }) {}

  /// ∫_{Q ∩ box}.
  double integral(const Cube& Q) const {
    if (box_.n == 1) return static_cast<double>(F1(Q.hi(0)) - F1(Q.lo(0)));
    return static_cast<double>(F2(Q.hi(0), Q.hi(1)) - F2(Q.lo(0), Q.hi(1)) - F2(Q.hi(0), Q.lo(1)) +
                               F2(Q.lo(0), Q.lo(1)));
  }
  double average(const Cube& Q) const { return integral(Q) / Q.volume(box_.n); }

 private:
  long double& at(int i, int j) { return table_[static_cast<std::size_t>(j) * (box_.points_per_axis + 1) + i]; }
  long double at(int i, int j) const {
    return table_[static_cast<std::size_t>(j) * (box_.points_per_axis + 1) + i];
  }

  // cell index and fraction of coordinate t (clamped to the box)
  std::pair<int, double> locate(double t) const {
    const double L = box_.half_width, h = box_.spacing();
    t = std::clamp(t, -L, L);
    double u = (t + L) / h;
    int i = static_cast<int>(std::floor(u));
    if (i >= box_.points_per_axis) i = box_.points_per_axis - 1;
    return {i, u - i};
  }
  long double F1(double t) const {
    const auto [i, a] = locate(t);
    return table_[i] + a * cell_[i];
  }
  long double F2(double s, double t) const {
    const auto [i, a] = locate(s);
    const auto [j, b] = locate(t);
    const long double s00 = at(i, j), s10 = at(i + 1, j), s01 = at(i, j + 1);
    return s00 + a * (s10 - s00) + b * (s01 - s00) + a * b * cell_[box_.flat(i, j)];
  }

  DomainBox box_;
  std::vector<long double> table_;
  std::vector<double> cell_;
};

/// Hardy–Littlewood maximal function M f(x) over the scale grid.
inline ScaleMax hl_maximal(const GridFunction& f, const Point& x, const std::vector<double>& scales) {
  ScaleMax out{0.0, scales.empty() ? 0.0 : scales.front()};
  for (double r : scales) {
    const Cube Q(x, r);
    const double v = integrate(f, Q, [](double a) { return std::abs(a); }) / Q.volume(f.domain.n);
    if (v > out.value) out = {v, r};
  }
  return out;
}

/// M f at every cell centre using prefix sums; `power` applies M to |f|^power
/// and returns (M |f|^power)^{1/power}.
inline GridFunction hl_maximal_field(const GridFunction& f, const std::vector<double>& scales, double power = 1.0) {
  const BoxIntegrator I(f, [power](double v) { return abs_pow(v, power); });
  GridFunction out(f.domain);
  parallel_for(f.size(), [&](std::size_t c) {
    const Point x = f.domain.center(c);
    double best = 0.0;
    for (double r : scales) best = std::max(best, I.average(Cube(x, r)));
    out[c] = power == 1.0 ? best : std::pow(best, 1.0 / power);
  });
  return out;
}

/// M_φ f(x) = max over t of |(t^{-n} φ(·/t) ∗ f)(x)|.
inline ScaleMax phi_maximal(const GridFunction& f, const TestFunction& phi, const Point& x,
                            const std::vector<double>& t_grid) {
  const DomainBox& box = f.domain;
  const double vol = box.cell_volume();
  ScaleMax out{0.0, t_grid.empty() ? 0.0 : t_grid.front()};
  for (double t : t_grid) {
    const double reach = phi.support_radius() * t;
    const auto ax = detail::axis_overlap(box, x[0] - reach, x[0] + reach);
    const int i0 = ax.first, i1 = ax.first + static_cast<int>(ax.fraction.size());
    int j0 = 0, j1 = 1;
    if (box.n == 2) {
      const auto ay = detail::axis_overlap(box, x[1] - reach, x[1] + reach);
      j0 = ay.first;
      j1 = ay.first + static_cast<int>(ay.fraction.size());
    }
    const double inv_t = 1.0 / t;
    double s = 0.0;
    for (int j = j0; j < j1; ++j)
      for (int i = i0; i < i1; ++i) {
        const std::size_t c = box.flat(i, j);
        if (f[c] == 0.0) continue;
        const Point y = box.center(c);
        s += phi({(x[0] - y[0]) * inv_t, (x[1] - y[1]) * inv_t}) * f[c];
      }
    const double v = std::abs(s * vol * std::pow(inv_t, box.n));
    if (v > out.value) out = {v, t};
  }
  return out;
}

/// M_φ f sampled on every `stride`-th cell along each axis.
struct SampledField {
  std::vector<Point> points;
  std::vector<double> values;
  double weight = 0.0;  // measure represented by each sample
};

inline SampledField phi_maximal_field(const GridFunction& f, const TestFunction& phi,
                                      const std::vector<double>& t_grid, int stride = 1) {
  const DomainBox& box = f.domain;
  require(stride >= 1, "phi_maximal_field: stride must be >= 1");
  SampledField out;
  const int N = box.points_per_axis;
  for (int j = 0; j < (box.n == 2 ? N : 1); j += stride)
    for (int i = 0; i < N; i += stride) out.points.push_back(box.center(box.flat(i, j)));
  out.values.resize(out.points.size());
  out.weight = box.cell_volume() * ipow(static_cast<double>(stride), box.n);
  parallel_for(out.points.size(),
               [&](std::size_t k) { out.values[k] = phi_maximal(f, phi, out.points[k], t_grid).value; });
  return out;
}

inline double luxemburg_norm(const SampledField& field, const ExponentFunction& p, double tol = kDefaultNormTol) {
  ModularIntegrand m;
  for (std::size_t k = 0; k < field.points.size(); ++k) m.add(field.values[k], p(field.points[k]), field.weight);
  return luxemburg_norm(m, tol);
}

/// ‖M_φ f‖_{p(·)}, the single-φ surrogate for the Hardy norm.
inline double hardy_norm(const GridFunction& f, const ExponentFunction& p, const TestFunction& phi,
                         const std::vector<double>& t_grid, int stride = 1) {
  return luxemburg_norm(phi_maximal_field(f, phi, t_grid, stride), p);
}

/// T*_α a(x) = max over ε of |∫_{|y|>ε} ∂^α h(y) a(x − y) dy| by cell quadrature.
inline ScaleMax truncated_singular_integral(const GridFunction& a, const KernelSpec& kernel, const MultiIndex& alpha,
                                            const std::vector<double>& eps_grid, const Point& x) {
  const DomainBox& box = a.domain;
  struct Term {
    double dist, value;
  };
  std::vector<Term> terms;
  const double vol = box.cell_volume();
  for (std::size_t c = 0; c < box.size(); ++c) {
    if (a[c] == 0.0) continue;
    const Point y = box.center(c);
    const Point d{x[0] - y[0], x[1] - y[1]};
    const double r = norm(d, box.n);
    if (r == 0.0) continue;
    terms.push_back({r, kernel_derivative(kernel, alpha, d) * a[c] * vol});
  }
  std::sort(terms.begin(), terms.end(), [](const Term& u, const Term& v) { return u.dist > v.dist; });
  std::vector<double> eps = eps_grid;
  std::sort(eps.begin(), eps.end(), std::greater<>());
  ScaleMax out{0.0, eps.empty() ? 0.0 : eps.back()};
  std::size_t k = 0;
  double s = 0.0;
  for (double e : eps) {
    while (k < terms.size() && terms[k].dist > e) s += terms[k++].value;
    if (std::abs(s) > out.value) out = {std::abs(s), e};
  }
  return out;
}

}  // namespace calderon
