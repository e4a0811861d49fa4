#include <CLI11.hpp>

#include <cstdio>
#include <iostream>

#include "calderon/experiments.hpp"

using namespace calderon;

namespace {

enum Exit { kOk = 0, kFailed = 1, kInput = 2, kNumerical = 3 };

struct Common {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<int> resolution;
};

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--seed", c.seed, "random seed");
  app->add_option("--out", c.out, "output directory");
  app->add_option("--resolution", c.resolution, "points per axis");
}

Json load_config(const Common& c) { return c.config.empty() ? Json::object() : parse_json_file(c.config); }

template <class T>
T get_or(const Json& j, const char* key, T fallback) {
  try {
    return j.contains(key) ? j.at(key).get<T>() : fallback;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("config key '") + key + "': " + e.what());
  }
}

void emit(const Json& result, const Common& c, const std::string& file) {
  std::cout << result.dump(2) << "\n";
  if (!c.out.empty()) write_file_atomic(std::filesystem::path(c.out) / file, result.dump(2) + "\n");
}

ExperimentConfig experiment_config(const Common& c) {
  ExperimentConfig cfg = config_from_json(load_config(c));
  if (c.seed) cfg.seed = *c.seed;
  if (c.resolution) cfg.resolution = *c.resolution;
  return cfg;
}

int run_reports(const std::vector<std::string>& names, const Common& c) {
  const ExperimentConfig cfg = experiment_config(c);
  std::vector<Report> reports;
  for (const auto& name : names) reports.push_back(run_experiment(name, cfg));
  write_reports(reports, c.out.empty() ? std::filesystem::path("reports") : std::filesystem::path(c.out));
  bool ok = true;
  for (const auto& r : reports) {
    std::printf("%-16s %s\n", r.name.c_str(), r.status.c_str());
    ok = ok && r.ok();
  }
  return ok ? kOk : kFailed;
}

// norm: {"grid": path, "exponent": {...}}
int cmd_norm(const Common& c, const std::string& grid_flag) {
  const Json j = load_config(c);
  const std::string grid = grid_flag.empty() ? get_or<std::string>(j, "grid", "") : grid_flag;
  if (grid.empty()) throw FormatError("norm: a grid file is required (--grid or config key 'grid')");
  const auto p = exponent_from_json(j.contains("exponent") ? j.at("exponent")
                                                           : exponent_to_json(ExponentFunction::constant(2.0)));
  const GridFunction f = load_grid(grid);
  const auto mod = modular_integrand(f, p);
  const double norm = luxemburg_norm(mod);
  emit({{"norm", norm}, {"modular", modular(f, p).value}, {"p_minus", p.p_minus()}, {"p_plus", p.p_plus()}}, c,
       "norm.json");
  return kOk;
}

// maximal: {"grid", "q", "gamma", "degree", "x", "r_min", "r_max"}
int cmd_maximal(const Common& c, const std::string& grid_flag) {
  const Json j = load_config(c);
  const std::string grid = grid_flag.empty() ? get_or<std::string>(j, "grid", "") : grid_flag;
  if (grid.empty()) throw FormatError("maximal: a grid file is required (--grid or config key 'grid')");
  const GridFunction f = load_grid(grid);
  const DomainBox& box = f.domain;
  const double q = get_or(j, "q", 2.0), gamma = get_or(j, "gamma", 2.0);
  const int degree = get_or(j, "degree", static_cast<int>(std::ceil(gamma)) - 1);
  const Point x = j.contains("x") ? point_from_json(j.at("x")) : Point{0.0, 0.0};
  const double rmin = get_or(j, "r_min", 8.0 * box.spacing());
  const double rmax = get_or(j, "r_max", 2.0 * box.half_width);
  const auto prm = MaximalParams::geometric(q, gamma, rmin, rmax);
  MinimaxOptions opt;
  if (c.seed) opt.seed = *c.seed;
  const auto eta = eta_maximal(f, prm, x);
  const auto res = N_maximal(FunctionClass{f, degree}, prm, x, opt);
  Json coeffs = Json::array();
  for (double v : res.minimizer.coeffs) coeffs.push_back(v);
  emit({{"x", point_to_json(x, box.n)},
        {"eta", eta.value},
        {"N", res.value},
        {"N_lower_bound", res.lower_bound},
        {"converged", res.converged},
        {"minimizer_center", point_to_json(res.minimizer.center, box.n)},
        {"minimizer_coefficients", coeffs}},
       c, "maximal.json");
  return kOk;
}

// atom: {"n", "half_width", "points", "cube": {"center", "side"}, "p0", "d", "exponent"}
int cmd_atom(const Common& c) {
  const Json j = load_config(c);
  const int n = get_or(j, "n", 1);
  const DomainBox box(n, get_or(j, "half_width", 1.0), c.resolution ? *c.resolution : get_or(j, "points", 1024));
  const auto p = exponent_from_json(j.contains("exponent") ? j.at("exponent")
                                                           : exponent_to_json(ExponentFunction::constant(1.0)));
  Cube Q({0.0, 0.0}, 0.25);
  if (j.contains("cube")) {
    try {
      Q = Cube(point_from_json(j.at("cube").at("center")), j.at("cube").at("side").get<double>());
    } catch (const Json::exception& e) {
      throw FormatError(std::string("config key 'cube': ") + e.what());
    }
  }
  const double p0 = j.contains("p0") ? p0_from_json(j.at("p0")) : kInfinity;
  const int d = get_or(j, "d", min_moment_degree(p, n));
  const Atom a = make_atom(box, p, Q, p0, d, c.seed.value_or(1));
  const auto report = validate_atom(a, p);
  Json clauses = Json::array();
  for (const auto& cl : report.clauses)
    clauses.push_back({{"name", cl.name}, {"pass", cl.pass}, {"measured", cl.measured}, {"bound", cl.bound}});
  const Json result{{"valid", report.pass()}, {"clauses", clauses}};
  if (!c.out.empty()) {
    AtomicDecomposition dec;
    dec.add(1.0, a);
    save_decomposition(dec, c.out);
  }
  emit(result, c, "atom_report.json");
  return report.pass() ? kOk : kFailed;
}

// solve: {"decomposition": path, "m": int}
int cmd_solve(const Common& c, const std::string& dec_flag) {
  const Json j = load_config(c);
  const std::string path = dec_flag.empty() ? get_or<std::string>(j, "decomposition", "") : dec_flag;
  if (path.empty()) throw FormatError("solve: a decomposition file is required");
  const AtomicDecomposition dec = load_decomposition(path);
  if (dec.size() == 0) throw FormatError("solve: empty decomposition");
  const int m = get_or(j, "m", 1);
  const DomainBox box = dec.atoms.front().data.domain;
  const auto k = KernelSpec::calibrated(m, box.n);
  GridFunction b(box);
  double worst = 0.0;
  for (std::size_t i = 0; i < dec.size(); ++i) {
    const auto r = potential(dec.atoms[i], k);
    worst = std::max(worst, laplacian_residual(r, m));
    b += dec.k[i] * r.b;
  }
  if (!c.out.empty()) save_grid(b, std::filesystem::path(c.out) / "potential.bin");
  emit({{"atoms", dec.size()}, {"m", m}, {"max_relative_laplacian_residual", worst}}, c, "solve.json");
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"calderon_lab: numerical laboratory for Calderon-Hardy spaces with variable exponents"};
  app.require_subcommand(1);
  Common common;
  std::string grid, decomposition, experiment;

  auto* norm = app.add_subcommand("norm", "Luxemburg norm of a grid function");
  add_common(norm, common);
  norm->add_option("--grid", grid, "grid file (.csv or .bin)");

  auto* maximal = app.add_subcommand("maximal", "eta and N maximal functions at a point");
  add_common(maximal, common);
  maximal->add_option("--grid", grid, "grid file (.csv or .bin)");

  auto* atom = app.add_subcommand("atom", "generate and validate an atom");
  add_common(atom, common);

  auto* solve = app.add_subcommand("solve", "polyharmonic potential of a decomposition");
  add_common(solve, common);
  solve->add_option("--decomposition", decomposition, "decomposition.json");

  auto* verify = app.add_subcommand("verify", "run one verification");
  add_common(verify, common);
  verify->add_option("experiment", experiment, "experiment name")
      ->required()
      ->check(CLI::IsMember(experiment_names()));

  auto* suite = app.add_subcommand("suite", "run every verification");
  add_common(suite, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kInput;
  }

  try {
    if (*norm) return cmd_norm(common, grid);
    if (*maximal) return cmd_maximal(common, grid);
    if (*atom) return cmd_atom(common);
    if (*solve) return cmd_solve(common, decomposition);
    if (*verify) return run_reports({experiment}, common);
    if (*suite) return run_reports(experiment_names(), common);
  } catch (const FormatError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInput;
  } catch (const LabError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kOk;
}
