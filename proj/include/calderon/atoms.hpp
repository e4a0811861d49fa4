#pragma once

#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "calderon/exponents.hpp"
#include "calderon/grid.hpp"
#include "calderon/polynomial.hpp"
#include "calderon/rng.hpp"

namespace calderon {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// ‖f‖_{p0} over the box; p0 = ∞ gives the max norm.
inline double lp_norm(const GridFunction& f, double p0) {
  if (std::isinf(p0)) {
    double m = 0.0;
    for (double v : f.samples) m = std::max(m, std::abs(v));
    return m;
  }
  std::vector<double> t(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) t[i] = abs_pow(f[i], p0);
  return std::pow(pairwise_sum(t) * f.domain.cell_volume(), 1.0 / p0);
}

/// A (p(·), p0, d)-atom sampled on a grid.
struct Atom {
  Cube Q;
  GridFunction data;
  double p0 = kInfinity;
  int d = 0;
};

/// |Q|^{1/p0} / ‖χ_Q‖_{p(·)}.
inline double atom_size_bound(const DomainBox& box, const ExponentFunction& p, const Cube& Q, double p0) {
  const double qv = std::isinf(p0) ? 1.0 : std::pow(Q.volume(box.n), 1.0 / p0);
  return qv / indicator_norm(box, Q, p);
}

/// Moments ∫ f(x) ((x − c)/ρ)^α dx for |α| <= d, with c and ρ the centre and half side of Q.
inline std::vector<double> centred_moments(const GridFunction& f, const Cube& Q, int d) {
  const auto terms = multi_indices_up_to(f.domain.n, d);
  std::vector<double> out(terms.size(), 0.0);
  const double rho = 0.5 * Q.side;
  const double vol = f.domain.cell_volume();
  for (std::size_t c = 0; c < f.size(); ++c) {
    if (f[c] == 0.0) continue;
    const Point z = f.domain.center(c);
    const Point u{(z[0] - Q.center[0]) / rho, (z[1] - Q.center[1]) / rho};
    for (std::size_t a = 0; a < terms.size(); ++a) out[a] += f[c] * monomial(terms[a], u) * vol;
  }
  return out;
}

enum class AtomProfile {
  full,       // localiser × random polynomial, projected against all of P_d
  separable,  // product of one-dimensional profiles (n = 2); smoother at equal d
};

namespace detail {

inline double bump1(double u) { return std::abs(u) < 1.0 ? std::exp(-1.0 / (1.0 - u * u)) : 0.0; }

/// w·(P − Π P) where Π is the w-weighted projection onto span(V); returns
/// false for a degenerate draw.
inline bool project_out(const Eigen::MatrixXd& V, const Eigen::VectorXd& w, const Eigen::VectorXd& P,
                        Eigen::VectorXd& out) {
  const auto solver = (V.transpose() * w.asDiagonal() * V).eval().ldlt();
  const Eigen::VectorXd b = solver.solve(V.transpose() * w.asDiagonal() * P);
  out = w.cwiseProduct(P - V * b);
  // one refinement step against roundoff
  out -= w.cwiseProduct(V * solver.solve(V.transpose() * out));
  return out.cwiseAbs().sum() >= 1e-8 * w.cwiseProduct(P).cwiseAbs().sum();
}

/// Random 1-D profile on nodes u with vanishing moments through order k.
inline bool profile_1d(const std::vector<double>& u, int k, Rng& rng, Eigen::VectorXd& out) {
  const auto m = static_cast<Eigen::Index>(u.size());
  Eigen::MatrixXd V(m, k + 1);
  Eigen::VectorXd w(m), P = Eigen::VectorXd::Zero(m);
  std::vector<double> coef(k + 2);
  for (double& c : coef) c = rng.normal();
  for (Eigen::Index i = 0; i < m; ++i) {
    w[i] = bump1(u[i]);
    for (int a = 0; a <= k; ++a) V(i, a) = ipow(u[i], a);
    for (int a = 0; a <= k + 1; ++a) P[i] += coef[a] * ipow(u[i], a);
  }
  return project_out(V, w, P, out);
}

}  // namespace detail

/// Smooth random profile in Q with vanishing moments through order d, scaled
/// so that ‖a‖_{p0} is 90% of its admissible bound. The separable profile
/// g₁(x₁)g₂(x₂) has each factor orthogonal to P_k with 2k >= d − 1.
inline Atom make_atom(const DomainBox& box, const ExponentFunction& p, const Cube& Q, double p0, int d,
                      std::uint64_t seed, AtomProfile profile = AtomProfile::full) {
  require(p0 > 1.0 && p0 > p.p_plus(), "make_atom: need p0 > max(1, p_plus)");
  require(d >= min_moment_degree(p, box.n), "make_atom: d is below d_{p(.)}");
  require(Q.inside(box), "make_atom: cube must lie inside the box");
  check_resolvable(box, Q);
  const int n = box.n;
  const double rho = 0.5 * Q.side;
  auto finish = [&](Atom a) {
    a.data *= 0.9 * atom_size_bound(box, p, Q, p0) / lp_norm(a.data, p0);
    return a;
  };
  Rng rng(seed);

  if (n == 2 && profile == AtomProfile::separable) {
    const int kk = d / 2;  // smallest k with 2k >= d - 1
    std::array<std::vector<int>, 2> idx;
    std::array<std::vector<double>, 2> u;
    for (int ax = 0; ax < 2; ++ax)
      for (int i = 0; i < box.points_per_axis; ++i) {
        const double z = box.coordinate(i);
        if (z < Q.lo(ax) || z >= Q.hi(ax)) continue;
        const double t = (z - Q.center[ax]) / rho;
        if (detail::bump1(t) == 0.0) continue;
        idx[ax].push_back(i);
        u[ax].push_back(t);
      }
    require(static_cast<int>(u[0].size()) > kk + 1 && static_cast<int>(u[1].size()) > kk + 1,
            "make_atom: cube too small for the requested moment order");
    for (int attempt = 0; attempt < 20; ++attempt) {
      Eigen::VectorXd g0, g1;
      if (!detail::profile_1d(u[0], kk, rng, g0) || !detail::profile_1d(u[1], kk, rng, g1)) continue;
      Atom a{Q, GridFunction(box), p0, d};
      for (std::size_t j = 0; j < idx[1].size(); ++j)
        for (std::size_t i = 0; i < idx[0].size(); ++i) a.data[box.flat(idx[0][i], idx[1][j])] = g0[i] * g1[j];
      return finish(std::move(a));
    }
    throw ConvergenceError("make_atom: 20 degenerate draws");
  }

  std::vector<std::size_t> cells;
  std::vector<Point> us;
  std::vector<double> loc;
  for (std::size_t c = 0; c < box.size(); ++c) {
    const Point z = box.center(c);
    if (!Q.contains(z, n)) continue;
    const Point u{(z[0] - Q.center[0]) / rho, (z[1] - Q.center[1]) / rho};
    double w = 1.0;
    for (int k = 0; k < n; ++k) w *= detail::bump1(u[k]);
    if (w == 0.0) continue;
    cells.push_back(c);
    us.push_back(u);
    loc.push_back(w);
  }
  const auto proj = multi_indices_up_to(n, d);
  const auto draw = multi_indices_up_to(n, d + 1);
  require(cells.size() > proj.size(), "make_atom: cube too small for the requested moment order");

  Eigen::MatrixXd V(cells.size(), proj.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    for (std::size_t a = 0; a < proj.size(); ++a) V(i, a) = monomial(proj[a], us[i]);
  const Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(loc.data(), loc.size());

  for (int attempt = 0; attempt < 20; ++attempt) {
    Eigen::VectorXd P(cells.size());
    std::vector<double> coef(draw.size());
    for (double& c : coef) c = rng.normal();
    for (std::size_t i = 0; i < cells.size(); ++i) {
      double s = 0.0;
      for (std::size_t a = 0; a < draw.size(); ++a) s += coef[a] * monomial(draw[a], us[i]);
      P[i] = s;
    }
    Eigen::VectorXd prof;
    if (!detail::project_out(V, w, P, prof)) continue;
    Atom a{Q, GridFunction(box), p0, d};
    for (std::size_t i = 0; i < cells.size(); ++i) a.data[cells[i]] = prof[i];
    return finish(std::move(a));
  }
  throw ConvergenceError("make_atom: 20 degenerate draws");
}

struct ClauseReport {
  std::string name;
  bool pass = true;
  double measured = 0.0;
  double bound = 0.0;
  double ratio = 0.0;  // measured / bound
};

struct AtomReport {
  std::vector<ClauseReport> clauses;
  bool pass() const {
    for (const auto& c : clauses)
      if (!c.pass) return false;
    return true;
  }
  const ClauseReport& clause(const std::string& name) const {
    for (const auto& c : clauses)
      if (c.name == name) return c;
    throw std::out_of_range("no clause " + name);
  }
};

/// Checks a1 (support), a2 (size), a3 (moments) and, when s is given, the
/// Hölder consequence ‖a‖_s <= |Q|^{1/s}/‖χ_Q‖_{p(·)} for 1 < s < p0.
inline AtomReport validate_atom(const Atom& a, const ExponentFunction& p, std::optional<double> s = std::nullopt,
                                double moment_tol = 1e-10) {
  const DomainBox& box = a.data.domain;
  AtomReport rep;

  ClauseReport a1{"a1"};
  for (std::size_t c = 0; c < box.size(); ++c)
    if (!a.Q.contains(box.center(c), box.n)) a1.measured = std::max(a1.measured, std::abs(a.data[c]));
  a1.pass = a1.measured == 0.0;
  rep.clauses.push_back(a1);

  ClauseReport a2{"a2"};
  a2.measured = lp_norm(a.data, a.p0);
  a2.bound = atom_size_bound(box, p, a.Q, a.p0);
  a2.ratio = a2.measured / a2.bound;
  a2.pass = a2.measured <= a2.bound * (1.0 + 1e-9);
  rep.clauses.push_back(a2);

  ClauseReport a3{"a3"};
  const auto mom = centred_moments(a.data, a.Q, a.d);
  for (double m : mom) a3.measured = std::max(a3.measured, std::abs(m));
  a3.bound = moment_tol * lp_norm(a.data, 1.0);
  a3.ratio = a3.bound > 0.0 ? a3.measured / a3.bound : 0.0;
  a3.pass = a3.measured <= a3.bound;
  rep.clauses.push_back(a3);

  if (s) {
    require(*s > 1.0 && *s < a.p0, "validate_atom: need 1 < s < p0");
    ClauseReport r11{"remark11"};
    r11.measured = lp_norm(a.data, *s);
    r11.bound = atom_size_bound(box, p, a.Q, *s);
    r11.ratio = r11.measured / r11.bound;
    r11.pass = r11.measured <= r11.bound * (1.0 + 1e-9);
    rep.clauses.push_back(r11);
  }
  return rep;
}

/// f = Σ k_j a_j.
struct AtomicDecomposition {
  std::vector<double> k;
  std::vector<Atom> atoms;

  void add(double kj, Atom a) {
    require(kj >= 0.0, "AtomicDecomposition: coefficients must be nonnegative");
    k.push_back(kj);
    atoms.push_back(std::move(a));
  }
  std::size_t size() const { return atoms.size(); }
};

inline GridFunction synthesize(const AtomicDecomposition& dec, const DomainBox& box) {
  GridFunction f(box);
  for (std::size_t j = 0; j < dec.size(); ++j) {
    require(dec.atoms[j].data.domain == box, "synthesize: atom on a different grid");
    for (std::size_t c = 0; c < box.size(); ++c) f[c] += dec.k[j] * dec.atoms[j].data[c];
  }
  return f;
}

/// The pointwise ℓ^{p̲} aggregate (Σ_j (k_j χ_{Q_j}/‖χ_{Q_j}‖_{p(·)})^{p̲})^{1/p̲}.
inline GridFunction a_aggregate(const AtomicDecomposition& dec, const ExponentFunction& p, const DomainBox& box) {
  const double pu = p.p_underline();
  GridFunction acc(box);
  for (std::size_t j = 0; j < dec.size(); ++j) {
    if (dec.k[j] == 0.0) continue;
    const Cube& Q = dec.atoms[j].Q;
    const double v = std::pow(dec.k[j] / indicator_norm(box, Q, p), pu);
    for (std::size_t c = 0; c < box.size(); ++c)
      if (Q.contains(box.center(c), box.n)) acc[c] += v;
  }
  for (double& v : acc.samples) v = std::pow(v, 1.0 / pu);
  return acc;
}

/// A({k_j}, {Q_j}, p(·)).
inline double a_quantity(const AtomicDecomposition& dec, const ExponentFunction& p, const DomainBox& box) {
  return luxemburg_norm(a_aggregate(dec, p, box), p);
}

struct DecompositionSpec {
  int count = 8;
  int min_level = 2;   // side = 2L · 2^{-level}
  int max_level = 4;
  double p0 = kInfinity;
  int d = 1;
  double margin = 0.0;  // keep cubes this far from the box faces
};

/// Random decomposition: dyadic sides, uniform centres, k_j uniform in (0, 1].
inline AtomicDecomposition random_decomposition(const DomainBox& box, const ExponentFunction& p,
                                                const DecompositionSpec& spec, std::uint64_t seed) {
  require(spec.count >= 0 && spec.min_level <= spec.max_level, "random_decomposition: bad spec");
  Rng rng(seed);
  AtomicDecomposition dec;
  for (int j = 0; j < spec.count; ++j) {
    const int level = static_cast<int>(rng.integer(spec.min_level, spec.max_level));
    const double side = 2.0 * box.half_width * std::ldexp(1.0, -level);
    const double room = box.half_width - spec.margin - 0.5 * side;
    require(room >= 0.0, "random_decomposition: cubes do not fit");
    Point c{rng.uniform(-room, room), box.n == 2 ? rng.uniform(-room, room) : 0.0};
    const double kj = 1.0 - rng.uniform();
    dec.add(kj, make_atom(box, p, Cube(c, side), spec.p0, spec.d, derive_seed(seed, "atom", j)));
  }
  return dec;
}

}  // namespace calderon
