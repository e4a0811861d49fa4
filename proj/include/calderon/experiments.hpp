#pragma once

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "calderon/atoms.hpp"
#include "calderon/io.hpp"
#include "calderon/kernel.hpp"
#include "calderon/maximal.hpp"
#include "calderon/parallel.hpp"
#include "calderon/phi.hpp"
#include "calderon/potential.hpp"
#include "calderon/rng.hpp"

namespace calderon {

// configuration ---------------------------------------------------------

struct Lemma12Config {
  int n = 2;
  std::vector<int> ms{1, 2};
  double half_width = 1.0;
  int points = 128;
  double side = 0.15;
  int atoms = 20;
  int directions = 16;
  int radii = 8;               // r_k = 4√n l · 2^{k/2}
  double atom_scale = 1.0;     // 0 gives zero atoms
  Json exponent = exponent_to_json(ExponentFunction::radial_bump(1.2, 2.0, {0.3, 0.0}, 0.5, 0.5));
  double slope_tol = 0.15;
  double ratio_spread = 10.0;
};

struct Lemma14Config {
  double degree_tol = 1e-6;
  double sphere_tol = 1e-8;
};

struct Prop15Config {
  int n = 1;
  std::vector<int> ms{1, 2};
  double q = 2.0;
  double half_width = 1.0;
  int points = 1024;
  double side = 0.1;
  int atoms = 10;
  int samples_per_atom = 32;
  int reruns = 3;
  double atom_scale = 1.0;
  std::optional<double> mu;  // default: half the admissible range
  Json exponent = exponent_to_json(ExponentFunction::radial_bump(0.8, 1.5, {0.0, 0.0}, 0.5, 0.5));
  double spread = 10.0;
};

struct Theorem1Config {
  int n = 1;
  int m = 1;
  double q = 8.0;
  double half_width = 4.0;
  int points = 1024;
  int decompositions = 10;
  int min_atoms = 1;
  int max_atoms = 4;
  int stride = 8;
  std::string phi = "gaussian";
  Json exponent = exponent_to_json(ExponentFunction::constant(1.0));
  double spread = 10.0;
  std::vector<double> q_sweep{4.0, 16.0};  // reported only
};

struct Theorem2Config {
  int n = 1;
  int m = 1;
  double q = 4.0;
  double half_width = 160.0;
  int points = 8192;
  double side = 1.0;
  int doublings = 5;  // R = 2, 4, ..., 2^{doublings+1}
  int samples_per_doubling = 8;
  bool polynomial_source = false;
  double slope_tol = 0.15;
};

struct ExperimentConfig {
  std::uint64_t seed = 7;
  std::optional<int> resolution;  // overrides points_per_axis everywhere
  Lemma12Config lemma12;
  Lemma14Config lemma14;
  Prop15Config prop15;
  Theorem1Config thm1;
  Theorem2Config thm2;
};

namespace detail {

template <class T>
void read_field(const Json& j, const char* key, T& dst) {
  if (j.contains(key)) dst = j.at(key).get<T>();
}
inline void read_opt(const Json& j, const char* key, std::optional<double>& dst) {
  if (j.contains(key)) dst = j.at(key).is_null() ? std::nullopt : std::optional<double>(j.at(key).get<double>());
}

inline void check_keys(const Json& j, const std::string& where, std::initializer_list<const char*> keys) {
  if (!j.is_object()) throw FormatError(where + ": expected an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw FormatError(where + ": unknown key '" + it.key() + "'");
  }
}

}  // namespace detail

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["seed"] = c.seed;
  j["resolution"] = c.resolution ? Json(*c.resolution) : Json(nullptr);
  const auto& l = c.lemma12;
  j["lemma12"] = {{"n", l.n}, {"ms", l.ms}, {"half_width", l.half_width}, {"points", l.points},
                  {"side", l.side}, {"atoms", l.atoms}, {"directions", l.directions}, {"radii", l.radii},
                  {"atom_scale", l.atom_scale}, {"exponent", l.exponent}, {"slope_tol", l.slope_tol},
                  {"ratio_spread", l.ratio_spread}};
  j["lemma14"] = {{"degree_tol", c.lemma14.degree_tol}, {"sphere_tol", c.lemma14.sphere_tol}};
  const auto& p = c.prop15;
  j["prop15"] = {{"n", p.n}, {"ms", p.ms}, {"q", p.q}, {"half_width", p.half_width}, {"points", p.points},
                 {"side", p.side}, {"atoms", p.atoms}, {"samples_per_atom", p.samples_per_atom},
                 {"reruns", p.reruns}, {"atom_scale", p.atom_scale}, {"mu", p.mu ? Json(*p.mu) : Json(nullptr)},
                 {"exponent", p.exponent}, {"spread", p.spread}};
  const auto& t = c.thm1;
  j["thm1"] = {{"n", t.n}, {"m", t.m}, {"q", t.q}, {"half_width", t.half_width}, {"points", t.points},
               {"decompositions", t.decompositions}, {"min_atoms", t.min_atoms}, {"max_atoms", t.max_atoms},
               {"stride", t.stride}, {"phi", t.phi}, {"exponent", t.exponent}, {"spread", t.spread},
               {"q_sweep", t.q_sweep}};
  const auto& s = c.thm2;
  j["thm2"] = {{"n", s.n}, {"m", s.m}, {"q", s.q}, {"half_width", s.half_width}, {"points", s.points},
               {"side", s.side}, {"doublings", s.doublings}, {"samples_per_doubling", s.samples_per_doubling},
               {"polynomial_source", s.polynomial_source}, {"slope_tol", s.slope_tol}};
  return j;
}

/// Fields absent from the JSON keep their defaults; unknown keys are errors.
inline ExperimentConfig config_from_json(const Json& j) {
  using detail::read_field;
  ExperimentConfig c;
  try {
    detail::check_keys(j, "config", {"seed", "resolution", "lemma12", "lemma14", "prop15", "thm1", "thm2"});
    read_field(j, "seed", c.seed);
    if (j.contains("resolution") && !j.at("resolution").is_null()) c.resolution = j.at("resolution").get<int>();
    if (j.contains("lemma12")) {
      const Json& s = j.at("lemma12");
      detail::check_keys(s, "lemma12", {"n", "ms", "half_width", "points", "side", "atoms", "directions", "radii",
                                        "atom_scale", "exponent", "slope_tol", "ratio_spread"});
      auto& l = c.lemma12;
      read_field(s, "n", l.n);
      read_field(s, "ms", l.ms);
      read_field(s, "half_width", l.half_width);
      read_field(s, "points", l.points);
      read_field(s, "side", l.side);
      read_field(s, "atoms", l.atoms);
      read_field(s, "directions", l.directions);
      read_field(s, "radii", l.radii);
      read_field(s, "atom_scale", l.atom_scale);
      read_field(s, "exponent", l.exponent);
      read_field(s, "slope_tol", l.slope_tol);
      read_field(s, "ratio_spread", l.ratio_spread);
    }
    if (j.contains("lemma14")) {
      const Json& s = j.at("lemma14");
      detail::check_keys(s, "lemma14", {"degree_tol", "sphere_tol"});
      read_field(s, "degree_tol", c.lemma14.degree_tol);
      read_field(s, "sphere_tol", c.lemma14.sphere_tol);
    }
    if (j.contains("prop15")) {
      const Json& s = j.at("prop15");
      detail::check_keys(s, "prop15", {"n", "ms", "q", "half_width", "points", "side", "atoms", "samples_per_atom",
                                       "reruns", "atom_scale", "mu", "exponent", "spread"});
      auto& p = c.prop15;
      read_field(s, "n", p.n);
      read_field(s, "ms", p.ms);
      read_field(s, "q", p.q);
      read_field(s, "half_width", p.half_width);
      read_field(s, "points", p.points);
      read_field(s, "side", p.side);
      read_field(s, "atoms", p.atoms);
      read_field(s, "samples_per_atom", p.samples_per_atom);
      read_field(s, "reruns", p.reruns);
      read_field(s, "atom_scale", p.atom_scale);
      detail::read_opt(s, "mu", p.mu);
      read_field(s, "exponent", p.exponent);
      read_field(s, "spread", p.spread);
    }
    if (j.contains("thm1")) {
      const Json& s = j.at("thm1");
      detail::check_keys(s, "thm1", {"n", "m", "q", "half_width", "points", "decompositions", "min_atoms",
                                     "max_atoms", "stride", "phi", "exponent", "spread", "q_sweep"});
      auto& t = c.thm1;
      read_field(s, "n", t.n);
      read_field(s, "m", t.m);
      read_field(s, "q", t.q);
      read_field(s, "half_width", t.half_width);
      read_field(s, "points", t.points);
      read_field(s, "decompositions", t.decompositions);
      read_field(s, "min_atoms", t.min_atoms);
      read_field(s, "max_atoms", t.max_atoms);
      read_field(s, "stride", t.stride);
      read_field(s, "phi", t.phi);
      read_field(s, "exponent", t.exponent);
      read_field(s, "spread", t.spread);
      read_field(s, "q_sweep", t.q_sweep);
    }
    if (j.contains("thm2")) {
      const Json& s = j.at("thm2");
      detail::check_keys(s, "thm2", {"n", "m", "q", "half_width", "points", "side", "doublings",
                                     "samples_per_doubling", "polynomial_source", "slope_tol"});
      auto& t = c.thm2;
      read_field(s, "n", t.n);
      read_field(s, "m", t.m);
      read_field(s, "q", t.q);
      read_field(s, "half_width", t.half_width);
      read_field(s, "points", t.points);
      read_field(s, "side", t.side);
      read_field(s, "doublings", t.doublings);
      read_field(s, "samples_per_doubling", t.samples_per_doubling);
      read_field(s, "polynomial_source", t.polynomial_source);
      read_field(s, "slope_tol", t.slope_tol);
    }
  } catch (const Json::exception& e) {
    throw FormatError(std::string("config: ") + e.what());
  }
  // validate embedded exponents early
  exponent_from_json(c.lemma12.exponent);
  exponent_from_json(c.prop15.exponent);
  exponent_from_json(c.thm1.exponent);
  return c;
}

inline std::uint64_t config_hash(const ExperimentConfig& c) { return fnv1a(config_to_json(c).dump()); }

// reports ---------------------------------------------------------------

struct Report {
  std::string name;
  std::string statement;
  std::string status = "pass";  // pass | fail | skip
  std::string note;
  std::vector<std::pair<std::string, double>> measured;
  std::vector<std::pair<std::string, double>> tolerance;
  std::uint64_t config_hash = 0;
  std::uint64_t seed = 0;
  CsvTable table;

  bool ok() const { return status != "fail"; }
  void measure(const std::string& k, double v) { measured.emplace_back(k, v); }
  void tolerate(const std::string& k, double v) { tolerance.emplace_back(k, v); }
  void require_that(bool cond) {
    if (!cond && status == "pass") status = "fail";
  }
  void skip(const std::string& why) {
    status = "skip";
    note = why;
  }

  Json to_json() const {
    auto numbers = [](const std::vector<std::pair<std::string, double>>& kv) {
      Json j = Json::object();
      for (const auto& [k, v] : kv) j[k] = std::isfinite(v) ? Json(v) : Json(format_double(v));
      return j;
    };
    Json j;
    j["name"] = name;
    j["statement"] = statement;
    j["status"] = status;
    j["pass"] = status == "pass";
    j["measured"] = numbers(measured);
    j["tolerance"] = numbers(tolerance);
    j["config_hash"] = format_hash(config_hash);
    j["seed"] = seed;
    if (!note.empty()) j["note"] = note;
    return j;
  }

  static std::string format_hash(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
  }
};

inline std::string fmt(double v) { return format_double(v); }

/// Least-squares slope of log|y| against log x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double lx = std::log(x[i]), ly = std::log(std::abs(y[i]));
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
  }
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

/// Least-squares slope of y against log x.
inline double semilog_slope(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> ex(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) ex[i] = std::exp(y[i]);
  return loglog_slope(x, ex);
}

inline double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t k = v.size() / 2;
  return v.size() % 2 ? v[k] : 0.5 * (v[k - 1] + v[k]);
}

inline int resolved(const ExperimentConfig& cfg, int points) { return cfg.resolution ? *cfg.resolution : points; }

// Lemma 12 --------------------------------------------------------------

inline Report verify_lemma12(const ExperimentConfig& cfg) {
  const auto& c = cfg.lemma12;
  Report rep{"lemma12", "Lemma 12"};
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.table.columns = {"m", "atom", "alpha", "distance", "value", "fitted_slope", "expected_slope", "ratio"};
  rep.tolerate("slope_tol", c.slope_tol);
  rep.tolerate("ratio_spread", c.ratio_spread);
  if (c.n == 1) {
    rep.skip("in one dimension the potential of an atom with these moments vanishes outside the cube hull");
    return rep;
  }
  if (c.atom_scale == 0.0) {
    rep.skip("zero atom");
    return rep;
  }
  const DomainBox box(c.n, c.half_width, resolved(cfg, c.points));
  const auto p = exponent_from_json(c.exponent);
  double worst_slope_err = 0.0, worst_spread = 0.0;
  for (int m : c.ms) {
    const auto k = KernelSpec::calibrated(m, c.n);
    const int d = std::max(min_moment_degree(p, c.n), 2 * m - 1);
    const auto alphas = multi_indices_up_to(c.n, 2 * m - 1);
    std::vector<std::vector<double>> ratios(alphas.size());
    Rng rng(derive_seed(cfg.seed, "lemma12-centres", m));
    for (int j = 0; j < c.atoms; ++j) {
      const double room = 0.5 * c.side;
      const Point x0{rng.uniform(-room, room), rng.uniform(-room, room)};
      const Cube Q(x0, c.side);
      Atom a = make_atom(box, p, Q, kInfinity, d, derive_seed(cfg.seed, "lemma12-atom", 100 * m + j));
      a.data *= c.atom_scale;
      const double norm_chi = indicator_norm(box, Q, p);
      std::vector<double> radii;
      std::vector<Point> pts;
      const double r0 = 4.0 * std::sqrt(static_cast<double>(c.n)) * c.side;
      for (int i = 0; i < c.radii; ++i) {
        const double r = r0 * std::pow(2.0, 0.5 * i);
        radii.push_back(r);
        for (int dir = 0; dir < c.directions; ++dir) {
          const double th = 2.0 * std::numbers::pi * (dir + 0.5) / c.directions;
          pts.push_back({x0[0] + r * std::cos(th), x0[1] + r * std::sin(th)});
        }
      }
      for (std::size_t ai = 0; ai < alphas.size(); ++ai) {
        const auto& alpha = alphas[ai];
        const auto v = potential_derivative_field(a, k, alpha, pts);
        std::vector<double> peak(radii.size(), 0.0);
        double ratio = 0.0;
        const double expected = -(c.n + order(alpha));
        const double unit = std::pow(c.side, 2 * m + c.n) / norm_chi;
        for (std::size_t i = 0; i < radii.size(); ++i)
          for (int dir = 0; dir < c.directions; ++dir) {
            const double val = std::abs(v[i * c.directions + dir]);
            peak[i] = std::max(peak[i], val);
            ratio = std::max(ratio, val * std::pow(radii[i], -expected) / unit);
          }
        const double slope = loglog_slope(radii, peak);
        worst_slope_err = std::max(worst_slope_err, std::abs(slope - expected));
        ratios[ai].push_back(ratio);
        const std::string alpha_s = std::to_string(alpha[0]) + (c.n == 2 ? ":" + std::to_string(alpha[1]) : "");
        for (std::size_t i = 0; i < radii.size(); ++i)
          rep.table.add_row({std::to_string(m), std::to_string(j), alpha_s, fmt(radii[i]), fmt(peak[i]), fmt(slope),
                             fmt(expected), fmt(ratio)});
      }
    }
    for (const auto& r : ratios) {
      const double med = median(r);
      for (double v : r) worst_spread = std::max({worst_spread, v / med, med / v});
    }
  }
  rep.measure("max_slope_error", worst_slope_err);
  rep.measure("max_ratio_over_median", worst_spread);
  rep.require_that(worst_slope_err <= c.slope_tol);
  rep.require_that(worst_spread <= c.ratio_spread);
  return rep;
}

// Lemma 14 --------------------------------------------------------------

inline Report verify_lemma14(const ExperimentConfig& cfg) {
  const auto& c = cfg.lemma14;
  Report rep{"lemma14", "Lemma 14"};
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.table.columns = {"m", "n", "alpha", "degree_error", "homogeneity_residual", "sphere_mean"};
  rep.tolerate("degree_tol", c.degree_tol);
  rep.tolerate("sphere_tol", c.sphere_tol);
  double worst_deg = 0.0, worst_sphere = 0.0;
  const std::vector<Point> probes{{0.8, 0.0}, {-1.3, 0.4}, {0.45, -0.7}, {-0.2, -1.1}};
  for (int n : {1, 2})
    for (int m : {1, 2}) {
      const auto k = KernelSpec::calibrated(m, n);
      for (const auto& alpha : multi_indices_of_order(n, 2 * m)) {
        double deg_err = 0.0, resid = 0.0;
        for (Point x : probes) {
          if (n == 1) x[1] = 0.0;
          const double v = kernel_derivative(k, alpha, x);
          for (double lam : {2.0, 4.0}) {
            const double w = kernel_derivative(k, alpha, scaled(x, lam));
            // relative residual of K(λx) = λ^{-n} K(x); the degree fit needs K(x) ≠ 0
            resid = std::max(resid, std::abs(w - std::pow(lam, -n) * v) / std::max(std::abs(v), 1e-300));
            if (std::abs(v) > 1e-12) deg_err = std::max(deg_err, std::abs(std::log(w / v) / std::log(lam) + n));
          }
        }
        const double sm = std::abs(sphere_mean(k, alpha));
        worst_deg = std::max({worst_deg, deg_err, resid});
        worst_sphere = std::max(worst_sphere, sm);
        rep.table.add_row({std::to_string(m), std::to_string(n),
                           std::to_string(alpha[0]) + (n == 2 ? ":" + std::to_string(alpha[1]) : ""), fmt(deg_err),
                           fmt(resid), fmt(sm)});
      }
    }
  rep.measure("max_degree_error", worst_deg);
  rep.measure("max_abs_sphere_mean", worst_sphere);
  rep.require_that(worst_deg <= c.degree_tol);
  rep.require_that(worst_sphere <= c.sphere_tol);
  return rep;
}

// Proposition 15 --------------------------------------------------------

struct Prop15Terms {
  double lhs, t1, t2, t3, t4;
  double rhs() const { return t1 + t2 + t3 + t4; }
};

inline std::vector<double> maximal_scales(const DomainBox& box) {
  return geometric_grid(2.0 * box.spacing(), 4.0 * box.half_width, kScaleRatio);
}

inline MaximalParams n_params(const DomainBox& box, double q, double gamma) {
  return MaximalParams::geometric(q, gamma, 16.0 * box.spacing(), 2.0 * box.half_width);
}

/// Admissible μ: 0 < μ < 2m and (2m + n/q − μ) p̲ > n.
inline double default_mu(int m, int n, double q, double p_under) {
  const double hi = std::min(2.0 * m, 2.0 * m + n / q - n / p_under);
  require(hi > 0.0, "prop15: no admissible mu for these parameters");
  return 0.5 * hi;
}

inline Report verify_prop15(const ExperimentConfig& cfg) {
  const auto& c = cfg.prop15;
  Report rep{"prop15", "Proposition 15"};
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.table.columns = {"m", "rerun", "atom", "x", "zone", "lhs", "t1", "t2", "t3", "t4", "ratio"};
  rep.tolerate("spread", c.spread);
  const DomainBox box(c.n, c.half_width, resolved(cfg, c.points));
  const auto p = exponent_from_json(c.exponent);
  const auto mscales = maximal_scales(box);
  double worst_spread = 0.0;
  bool degenerate = c.atom_scale == 0.0;
  std::size_t total_points = 0;
  for (int m : c.ms) {
    const auto kern = KernelSpec::calibrated(m, c.n);
    const double mu = c.mu ? *c.mu : default_mu(m, c.n, c.q, p.p_underline());
    require(mu > 0.0 && mu < 2.0 * m && (2.0 * m + c.n / c.q - mu) * p.p_underline() > c.n,
            "prop15: mu violates 0 < mu < 2m and (2m + n/q - mu) p_ > n");
    const int d = std::max(min_moment_degree(p, c.n), 2 * m - 1);
    const auto prm = n_params(box, c.q, 2.0 * m);
    const double expo = (2.0 * m + c.n / c.q - mu) / c.n;
    MinimaxOptions opt;
    opt.restarts = 1;
    std::vector<double> C_runs;
    for (int run = 0; run < c.reruns; ++run) {
      const std::uint64_t run_seed = derive_seed(cfg.seed, "prop15-run", 10 * run + m);
      Rng rng(run_seed);
      double C = 0.0;
      for (int j = 0; j < c.atoms; ++j) {
        const double room = c.half_width - 8.5 * c.side;
        Point x0{rng.uniform(-room, room), c.n == 2 ? rng.uniform(-room, room) : 0.0};
        const Cube Q(x0, c.side);
        Atom a = make_atom(box, p, Q, kInfinity, d, derive_seed(run_seed, "atom", j));
        a.data *= c.atom_scale;
        const auto pot = potential(a, kern);
        const double inv_chi = 1.0 / indicator_norm(box, Q, p);
        const auto Ma = hl_maximal_field(a.data, mscales);
        const auto MMqa = hl_maximal_field(Ma, mscales, c.q);
        const BoxIntegrator chi_int(indicator(box, Q));
        const Cube near = Q.dilate(4.0 * std::sqrt(static_cast<double>(c.n)));
        // sample points: half inside 4√n Q, half outside, all on cell centres
        std::vector<Point> xs;
        const int half = c.samples_per_atom / 2;
        for (int s = 0; s < c.samples_per_atom; ++s) {
          Point x{0.0, 0.0};
          for (int tries = 0; tries < 1000; ++tries) {
            const double reach = s < half ? 0.5 * near.side : std::min(0.45 * box.half_width * 2.0, box.half_width);
            x = {x0[0] + rng.uniform(-reach, reach), c.n == 2 ? x0[1] + rng.uniform(-reach, reach) : 0.0};
            x = box.center(box.flat(box.cell_of(x[0]), c.n == 2 ? box.cell_of(x[1]) : 0));
            const bool inside = near.contains(x, c.n);
            if ((s < half) == inside && admissible_scales(box, prm.scales, x).size() >= 4) break;
          }
          xs.push_back(x);
        }
        std::vector<Prop15Terms> terms(xs.size());
        parallel_for(xs.size(), [&](std::size_t i) {
          const Point& x = xs[i];
          const std::size_t cell = box.flat(box.cell_of(x[0]), c.n == 2 ? box.cell_of(x[1]) : 0);
          Prop15Terms t{};
          t.lhs = N_maximal(pot.class_B, prm, x, opt).value;
          double mchi = 0.0;
          for (double r : mscales) mchi = std::max(mchi, chi_int.average(Cube(x, r)));
          t.t1 = inv_chi * std::pow(mchi, expo);
          if (near.contains(x, c.n)) {
            t.t2 = Ma[cell];
            t.t3 = MMqa[cell];
            const auto eps = geometric_grid(2.0 * box.spacing(), 2.0 * box.half_width, kScaleRatio);
            for (const auto& alpha : multi_indices_of_order(c.n, 2 * m))
              t.t4 += truncated_singular_integral(a.data, kern, alpha, eps, x).value;
          }
          terms[i] = t;
        });
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const auto& t = terms[i];
          const double rhs = t.rhs();
          if (t.lhs == 0.0 && rhs == 0.0) continue;
          const double ratio = rhs > 0.0 ? t.lhs / rhs : kInfinity;
          C = std::max(C, ratio);
          ++total_points;
          rep.table.add_row({std::to_string(m), std::to_string(run), std::to_string(j), fmt(xs[i][0]),
                             near.contains(xs[i], c.n) ? "near" : "far", fmt(t.lhs), fmt(t.t1), fmt(t.t2),
                             fmt(t.t3), fmt(t.t4), fmt(ratio)});
        }
      }
      C_runs.push_back(C);
      rep.measure("C_m" + std::to_string(m) + "_run" + std::to_string(run), C);
    }
    const double hi = *std::max_element(C_runs.begin(), C_runs.end());
    const double lo = *std::min_element(C_runs.begin(), C_runs.end());
    if (hi > 0.0) worst_spread = std::max(worst_spread, std::isfinite(hi) ? hi / lo : kInfinity);
    rep.measure("mu_m" + std::to_string(m), mu);
  }
  if (degenerate) {
    rep.skip("zero atom: both sides vanish");
    return rep;
  }
  rep.measure("sample_points", static_cast<double>(total_points));
  rep.measure("C_spread", worst_spread);
  rep.require_that(std::isfinite(worst_spread) && worst_spread <= c.spread);
  return rep;
}

// Theorem 1 -------------------------------------------------------------

struct Theorem1Sample {
  double hardy = 0.0;
  double n_norm = 0.0;
  double pointwise_C = 0.0;
  std::size_t atoms = 0;
};

/// One decomposition: Hardy norm of f, ‖N(F)‖_{p(·)} on the strided grid, and
/// the pointwise constant max M_φ f / (p_{2m+n}(φ) N(F)).
inline Theorem1Sample theorem1_sample(const Theorem1Config& c, const DomainBox& box, const ExponentFunction& p,
                                      const TestFunction& phi, double pN, std::uint64_t seed, double scale,
                                      bool pointwise, CsvTable* table, int index) {
  Rng rng(seed);
  const int count = static_cast<int>(rng.integer(c.min_atoms, c.max_atoms));
  AtomicDecomposition dec;
  DecompositionSpec spec;
  spec.d = std::max(min_moment_degree(p, c.n), 2 * c.m - 1);
  spec.p0 = std::max(2.0, 2.0 * p.p_plus());
  const double L = box.half_width;
  for (int j = 0; j < count; ++j) {
    const int level = static_cast<int>(rng.integer(6, 7));  // side 2L·2^{-level}
    const double side = 2.0 * L * std::ldexp(1.0, -level);
    const double room = L - 8.5 * side;
    const Point x0{rng.uniform(-room, room), c.n == 2 ? rng.uniform(-room, room) : 0.0};
    dec.add(1.0 - rng.uniform(),
            make_atom(box, p, Cube(x0, side), spec.p0, spec.d, derive_seed(seed, "atom", j)));
  }
  Theorem1Sample out;
  out.atoms = dec.size();
  if (dec.size() == 0) return out;
  const auto kern = KernelSpec::calibrated(c.m, c.n);
  GridFunction f(box), b(box);
  for (std::size_t j = 0; j < dec.size(); ++j) {
    f += (scale * dec.k[j]) * dec.atoms[j].data;
    b += (scale * dec.k[j]) * potential(dec.atoms[j], kern).b;
  }
  const auto tgrid = geometric_grid(2.0 * box.spacing(), L, kScaleRatio);
  const auto mphi = phi_maximal_field(f, phi, tgrid, 1);
  out.hardy = luxemburg_norm(mphi, p);

  const FunctionClass F{b, 2 * c.m - 1};
  const auto prm = n_params(box, c.q, 2.0 * c.m);
  MinimaxOptions opt;
  opt.restarts = 1;
  const int N = box.points_per_axis;
  std::vector<std::size_t> cells;
  for (int j = 0; j < (c.n == 2 ? N : 1); j += c.stride)
    for (int i = c.stride / 2; i < N; i += c.stride) {
      const std::size_t cell = box.flat(i, c.n == 2 ? j + c.stride / 2 : 0);
      if (admissible_scales(box, prm.scales, box.center(cell)).size() >= 2) cells.push_back(cell);
    }
  std::vector<double> nv(cells.size());
  parallel_for(cells.size(), [&](std::size_t i) { nv[i] = N_maximal(F, prm, box.center(cells[i]), opt).value; });
  ModularIntegrand mod;
  const double w = box.cell_volume() * ipow(static_cast<double>(c.stride), c.n);
  for (std::size_t i = 0; i < cells.size(); ++i) mod.add(nv[i], p(box.center(cells[i])), w);
  if (pointwise) {
    // every cell of the dilated atom cubes; far from the atoms the finite box
    // hides the sources from N and the comparison is not meaningful
    std::vector<std::size_t> near;
    for (std::size_t i = 0; i < box.size(); ++i)
      for (const auto& a : dec.atoms)
        if (a.Q.dilate(2.0).contains(box.center(i), c.n)) {
          near.push_back(i);
          break;
        }
    std::vector<double> nn(near.size());
    parallel_for(near.size(), [&](std::size_t i) { nn[i] = N_maximal(F, prm, box.center(near[i]), opt).value; });
    for (std::size_t i = 0; i < near.size(); ++i) {
      const double lhs = mphi.values[near[i]];
      const double ratio = nn[i] > 0.0 ? lhs / (pN * nn[i]) : (lhs > 0.0 ? kInfinity : 0.0);
      out.pointwise_C = std::max(out.pointwise_C, ratio);
      if (table)
        table->add_row({std::to_string(index), fmt(box.center(near[i])[0]), fmt(lhs), fmt(nn[i]), fmt(ratio)});
    }
  }
  out.n_norm = luxemburg_norm(mod);
  return out;
}

inline bool theorem1_hypothesis(int n, int m, double q, double p_under) { return n / (2.0 * m + n / q) < p_under; }

inline std::vector<Theorem1Sample> theorem1_batch(const ExperimentConfig& cfg, bool pointwise, CsvTable* table) {
  const auto& c = cfg.thm1;
  const DomainBox box(c.n, c.half_width, resolved(cfg, c.points));
  const auto p = exponent_from_json(c.exponent);
  const auto phi = TestFunction::from_name(c.phi, c.n);
  const double pN = schwartz_seminorm(phi, 2 * c.m + c.n);
  std::vector<Theorem1Sample> out;
  for (int k = 0; k < c.decompositions; ++k)
    out.push_back(theorem1_sample(c, box, p, phi, pN, derive_seed(cfg.seed, "thm1", k), 1.0, pointwise, table, k));
  return out;
}

inline Report verify_theorem1_pointwise(const ExperimentConfig& cfg) {
  const auto& c = cfg.thm1;
  Report rep{"thm1-pointwise", "Theorem 1 (pointwise bound)"};
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.table.columns = {"decomposition", "x", "m_phi_f", "N", "ratio"};
  rep.tolerate("spread", c.spread);
  const auto batch = theorem1_batch(cfg, true, &rep.table);
  std::vector<double> Cs;
  for (const auto& s : batch)
    if (s.atoms > 0) Cs.push_back(s.pointwise_C);
  if (Cs.empty()) {
    rep.skip("empty decompositions");
    return rep;
  }
  const double hi = *std::max_element(Cs.begin(), Cs.end()), lo = *std::min_element(Cs.begin(), Cs.end());
  const auto phi = TestFunction::from_name(c.phi, c.n);
  rep.measure("p_2m_plus_n_phi", schwartz_seminorm(phi, 2 * c.m + c.n));
  rep.measure("C_max", hi);
  rep.measure("C_min", lo);
  rep.measure("C_spread", hi / lo);
  rep.require_that(std::isfinite(hi) && lo > 0.0 && hi / lo <= c.spread);
  return rep;
}

inline Report verify_norm_equivalence(const ExperimentConfig& cfg) {
  const auto& c = cfg.thm1;
  Report rep{"thm1", "Theorem 1"};
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.table.columns = {"decomposition", "atoms", "hardy_norm", "N_norm", "rho"};
  rep.tolerate("spread", c.spread);
  const auto p = exponent_from_json(c.exponent);
  const bool hyp = theorem1_hypothesis(c.n, c.m, c.q, p.p_underline());
  rep.measure("hypothesis_holds", hyp ? 1.0 : 0.0);
  const auto batch = theorem1_batch(cfg, false, nullptr);
  std::vector<double> rho;
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& s = batch[k];
    if (s.atoms == 0) continue;
    const double r = s.hardy / s.n_norm;
    rho.push_back(r);
    rep.table.add_row({std::to_string(k), std::to_string(s.atoms), fmt(s.hardy), fmt(s.n_norm), fmt(r)});
  }
  if (rho.empty()) {
    rep.skip("empty decompositions");
    return rep;
  }
  const double hi = *std::max_element(rho.begin(), rho.end()), lo = *std::min_element(rho.begin(), rho.end());
  rep.measure("rho_max", hi);
  rep.measure("rho_min", lo);
  rep.measure("rho_spread", hi / lo);
  rep.require_that(hyp && std::isfinite(hi) && lo > 0.0 && hi / lo <= c.spread);
  for (double q : c.q_sweep) {
    ExperimentConfig alt = cfg;
    alt.thm1.q = q;
    std::vector<double> r;
    for (const auto& s : theorem1_batch(alt, false, nullptr))
      if (s.atoms > 0) r.push_back(s.hardy / s.n_norm);
    rep.measure("rho_spread_q" + fmt(q),
                *std::max_element(r.begin(), r.end()) / *std::min_element(r.begin(), r.end()));
  }
  if (!hyp) rep.note = "hypothesis n/(2m+n/q) < p_ fails for this configuration";
  return rep;
}

// Theorem 2 -------------------------------------------------------------

inline Report verify_theorem2(const ExperimentConfig& cfg) {
  const auto& c = cfg.thm2;
  Report rep{"thm2", "Theorem 2"};
  rep.config_hash = config_hash(cfg);
  rep.seed = cfg.seed;
  rep.table.columns = {"kind", "R_or_x", "value"};
  const double crit = c.n / (2.0 * c.m + c.n / c.q);
  const double decay = -(2.0 * c.m + c.n / c.q);
  rep.measure("critical_p", crit);
  rep.tolerate("slope_tol", c.slope_tol);
  const DomainBox box(c.n, c.half_width, resolved(cfg, c.points));
  const auto p = ExponentFunction::constant(crit);
  const auto prm = n_params(box, c.q, 2.0 * c.m);
  GridFunction g(box);
  if (c.polynomial_source) {
    g = sample(box, [](const Point& x) { return 1.0 + x[0] - 0.5 * x[1]; });
  } else {
    const Cube Q({0.0, 0.0}, c.side);
    const int d = std::max(min_moment_degree(p, c.n), 2 * c.m - 1);
    const auto a = make_atom(box, ExponentFunction::constant(std::max(1.0, crit)), Q, kInfinity, d,
                             derive_seed(cfg.seed, "thm2"));
    g = potential(a, KernelSpec::calibrated(c.m, c.n)).b;
  }
  const FunctionClass F{g, 2 * c.m - 1};
  MinimaxOptions opt;
  opt.restarts = 1;
  auto n_at = [&](const Point& x) { return N_maximal(F, prm, x, opt).value; };

  // annuli: |x| = R along the axis directions
  std::vector<double> Rs, Ns;
  std::vector<Point> dirs = c.n == 1 ? std::vector<Point>{{1, 0}, {-1, 0}}
                                     : std::vector<Point>{{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
  for (int k = 0; k <= c.doublings; ++k) {
    const double R = std::ldexp(2.0, k);
    std::vector<double> v(dirs.size());
    parallel_for(dirs.size(), [&](std::size_t i) { v[i] = n_at(scaled(dirs[i], R)); });
    double mean = 0.0;
    for (double x : v) mean += x / static_cast<double>(v.size());
    Rs.push_back(R);
    Ns.push_back(mean);
    rep.table.add_row({"annulus_mean_N", fmt(R), fmt(mean)});
  }
  double nmax = 0.0;
  for (double v : Ns) nmax = std::max(nmax, v);
  if (nmax <= 1e-12 * std::max(1.0, std::abs(g.samples[g.size() / 2]))) {
    rep.skip("N vanishes: the class is polynomial");
    return rep;
  }
  const double slope = loglog_slope(Rs, Ns);
  rep.measure("N_decay_slope", slope);
  rep.tolerate("slope_floor", decay - c.slope_tol);

  // partial modulars over √n l <= |x| <= R, trapezoid in |x| (n = 1) or in
  // the radius with the circle length (n = 2, axis samples)
  const double x_min = std::sqrt(static_cast<double>(c.n)) * c.side;
  std::vector<double> radii;
  const double R_max = Rs.back();
  for (double r = x_min; r <= R_max * (1 + 1e-12); r *= std::pow(2.0, 1.0 / c.samples_per_doubling))
    radii.push_back(r);
  for (double R : Rs)
    if (std::find(radii.begin(), radii.end(), R) == radii.end()) radii.push_back(R);
  std::sort(radii.begin(), radii.end());
  std::vector<double> integrand(radii.size());
  parallel_for(radii.size(), [&](std::size_t i) {
    double s = 0.0;
    for (const Point& u : dirs) s += std::pow(n_at(scaled(u, radii[i])), crit);
    const double shell = c.n == 1 ? 2.0 : 2.0 * std::numbers::pi * radii[i];
    integrand[i] = shell * s / static_cast<double>(dirs.size());
  });
  std::vector<double> partial;
  double acc = 0.0;
  std::size_t next = 0;
  for (std::size_t i = 0; i < radii.size(); ++i) {
    if (i > 0) acc += 0.5 * (integrand[i] + integrand[i - 1]) * (radii[i] - radii[i - 1]);
    rep.table.add_row({"integrand", fmt(radii[i]), fmt(integrand[i])});
    if (next < Rs.size() && std::abs(radii[i] - Rs[next]) <= 1e-12 * Rs[next]) {
      partial.push_back(acc);
      rep.table.add_row({"partial_modular", fmt(Rs[next]), fmt(acc)});
      ++next;
    }
  }
  const double growth = semilog_slope(Rs, partial);
  double min_inc = kInfinity, first_inc = 0.0, last_inc = 0.0;
  for (std::size_t k = 1; k < partial.size(); ++k) {
    const double inc = partial[k] - partial[k - 1];
    min_inc = std::min(min_inc, inc);
    if (k == 1) first_inc = inc;
    last_inc = inc;
  }
  rep.measure("modular_growth_per_log_R", growth);
  rep.measure("min_doubling_increment", min_inc);
  rep.measure("last_over_first_increment", last_inc / first_inc);
  rep.tolerate("last_over_first_increment_floor", 0.5);
  rep.require_that(slope >= decay - c.slope_tol);
  rep.require_that(growth > 0.0 && min_inc > 0.0 && last_inc / first_inc >= 0.5);
  return rep;
}

// suite -----------------------------------------------------------------

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> names{"lemma12", "lemma14", "prop15", "thm1-pointwise", "thm1", "thm2"};
  return names;
}

inline Report run_experiment(const std::string& name, const ExperimentConfig& cfg) {
  if (name == "lemma12") return verify_lemma12(cfg);
  if (name == "lemma14") return verify_lemma14(cfg);
  if (name == "prop15") return verify_prop15(cfg);
  if (name == "thm1-pointwise") return verify_theorem1_pointwise(cfg);
  if (name == "thm1") return verify_norm_equivalence(cfg);
  if (name == "thm2") return verify_theorem2(cfg);
  throw std::invalid_argument("unknown experiment '" + name + "'");
}

/// Writes <name>.csv per report and summary.json into dir.
inline void write_reports(const std::vector<Report>& reports, const std::filesystem::path& dir) {
  Json summary = Json::array();
  for (const auto& r : reports) {
    write_file_atomic(dir / (r.name + ".csv"), r.table.str());
    summary.push_back(r.to_json());
  }
  write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
}

inline std::vector<Report> run_suite(const ExperimentConfig& cfg) {
  std::vector<Report> out;
  for (const auto& name : experiment_names()) out.push_back(run_experiment(name, cfg));
  return out;
}

}  // namespace calderon
