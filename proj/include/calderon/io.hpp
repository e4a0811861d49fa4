#pragma once

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "calderon/atoms.hpp"
#include "calderon/exponents.hpp"
#include "calderon/grid.hpp"

namespace calderon {

using Json = nlohmann::ordered_json;

class FormatError : public LabError {
 public:
  using LabError::LabError;
};

/// Writes through a temporary file and renames it into place.
inline void write_file_atomic(const std::filesystem::path& path, const std::string& bytes) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw LabError("cannot open " + tmp + " for writing");
    os.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!os) throw LabError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw LabError("cannot open " + path.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

/// Shortest round-trip decimal form.
inline std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// grid functions --------------------------------------------------------

inline std::string grid_to_csv(const GridFunction& f) {
  std::string out = "# n=" + std::to_string(f.domain.n) + " L=" + format_double(f.domain.half_width) +
                    " points_per_axis=" + std::to_string(f.domain.points_per_axis) + "\n";
  for (double v : f.samples) out += format_double(v) + "\n";
  return out;
}

inline GridFunction grid_from_csv(const std::string& text) {
  std::istringstream is(text);
  std::string header;
  std::getline(is, header);
  int n = 0, N = 0;
  double L = 0.0;
  if (std::sscanf(header.c_str(), "# n=%d L=%lf points_per_axis=%d", &n, &L, &N) != 3)
    throw FormatError("grid csv: malformed header '" + header + "'");
  const DomainBox box(n, L, N);
  std::vector<double> v;
  v.reserve(box.size());
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    try {
      v.push_back(std::stod(line));
    } catch (const std::exception&) {
      throw FormatError("grid csv: bad value on line " + std::to_string(v.size() + 2));
    }
  }
  if (v.size() != box.size())
    throw FormatError("grid csv: expected " + std::to_string(box.size()) + " values, found " + std::to_string(v.size()));
  return GridFunction(box, std::move(v));
}

/// "CHGF", uint32 n, float64 L, uint32 points_per_axis, then float64 samples (little endian host order).
inline std::string grid_to_binary(const GridFunction& f) {
  std::string out = "CHGF";
  auto put = [&out](const auto& v) { out.append(reinterpret_cast<const char*>(&v), sizeof v); };
  put(static_cast<std::uint32_t>(f.domain.n));
  put(f.domain.half_width);
  put(static_cast<std::uint32_t>(f.domain.points_per_axis));
  out.append(reinterpret_cast<const char*>(f.samples.data()), f.samples.size() * sizeof(double));
  return out;
}

inline GridFunction grid_from_binary(const std::string& bytes) {
  const std::size_t head = 4 + 4 + 8 + 4;
  if (bytes.size() < head || bytes.compare(0, 4, "CHGF") != 0) throw FormatError("grid binary: bad magic");
  std::uint32_t n, N;
  double L;
  std::memcpy(&n, bytes.data() + 4, 4);
  std::memcpy(&L, bytes.data() + 8, 8);
  std::memcpy(&N, bytes.data() + 16, 4);
  const DomainBox box(static_cast<int>(n), L, static_cast<int>(N));
  if (bytes.size() != head + box.size() * sizeof(double)) throw FormatError("grid binary: size mismatch");
  std::vector<double> v(box.size());
  std::memcpy(v.data(), bytes.data() + head, v.size() * sizeof(double));
  return GridFunction(box, std::move(v));
}

inline void save_grid(const GridFunction& f, const std::filesystem::path& path) {
  write_file_atomic(path, path.extension() == ".csv" ? grid_to_csv(f) : grid_to_binary(f));
}

inline GridFunction load_grid(const std::filesystem::path& path) {
  const auto bytes = read_file(path);
  return path.extension() == ".csv" ? grid_from_csv(bytes) : grid_from_binary(bytes);
}

// JSON ------------------------------------------------------------------

/// Parses JSON, reporting failures with their line number.
inline Json parse_json(const std::string& text, const std::string& source = "<input>") {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    std::size_t line = 1;
    for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i)
      if (text[i] == '\n') ++line;
    // the error byte is one past the offending character
    if (e.byte > 0 && e.byte <= text.size() && text[e.byte - 1] == '\n') --line;
    throw FormatError(source + ":" + std::to_string(line) + ": " + e.what());
  }
}

inline Json parse_json_file(const std::filesystem::path& path) { return parse_json(read_file(path), path.string()); }

inline Json point_to_json(const Point& x, int n) {
  return n == 1 ? Json::array({x[0]}) : Json::array({x[0], x[1]});
}

inline Point point_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  Point x{0.0, 0.0};
  if (!j.is_array() || j.empty() || j.size() > 2) throw FormatError("point must be a number or an array of 1-2 numbers");
  for (std::size_t i = 0; i < j.size(); ++i) x[i] = j[i].get<double>();
  return x;
}

inline Json exponent_to_json(const ExponentFunction& p) {
  const auto& q = p.params();
  Json j;
  switch (p.form()) {
    case ExponentForm::constant:
      j["form"] = "constant";
      j["parameters"] = {{"c", q.c}};
      break;
    case ExponentForm::asymptotic:
      j["form"] = "asymptotic";
      j["parameters"] = {{"p_inf", q.p_inf}, {"c_inf", q.c_inf}};
      break;
    case ExponentForm::radial_bump:
      j["form"] = "radial_bump";
      j["parameters"] = {{"p_out", q.p_out},
                         {"p_in", q.p_in},
                         {"center", Json::array({q.center[0], q.center[1]})},
                         {"radius", q.radius},
                         {"smoothness", q.smoothness}};
      break;
  }
  Json dc = Json::object();
  dc["C0"] = p.declared_C0() ? Json(*p.declared_C0()) : Json(nullptr);
  dc["C_inf"] = p.declared_C_inf() ? Json(*p.declared_C_inf()) : Json(nullptr);
  j["declared_constants"] = dc;
  return j;
}

inline ExponentFunction exponent_from_json(const Json& j) {
  try {
    const std::string form = j.at("form").get<std::string>();
    const Json& q = j.contains("parameters") ? j.at("parameters") : Json::object();
    auto get = [&](const char* key, double dflt) { return q.contains(key) ? q.at(key).get<double>() : dflt; };
    ExponentFunction p = ExponentFunction::constant(1.0);
    if (form == "constant") {
      p = ExponentFunction::constant(q.at("c").get<double>());
    } else if (form == "asymptotic") {
      p = ExponentFunction::asymptotic(q.at("p_inf").get<double>(), get("c_inf", 0.0));
    } else if (form == "radial_bump") {
      const Point c = q.contains("center") ? point_from_json(q.at("center")) : Point{0.0, 0.0};
      p = ExponentFunction::radial_bump(q.at("p_out").get<double>(), q.at("p_in").get<double>(), c,
                                        get("radius", 1.0), get("smoothness", 0.5));
    } else {
      throw FormatError("unknown exponent form '" + form + "'");
    }
    if (j.contains("declared_constants")) {
      const Json& dc = j.at("declared_constants");
      auto opt = [&](const char* key) -> std::optional<double> {
        if (!dc.contains(key) || dc.at(key).is_null()) return std::nullopt;
        return dc.at(key).get<double>();
      };
      p.declare_constants(opt("C0"), opt("C_inf"));
    }
    return p;
  } catch (const Json::exception& e) {
    throw FormatError(std::string("exponent: ") + e.what());
  }
}

inline Json p0_to_json(double p0) { return std::isinf(p0) ? Json("inf") : Json(p0); }
inline double p0_from_json(const Json& j) {
  if (j.is_string()) {
    if (j.get<std::string>() == "inf") return kInfinity;
    throw FormatError("p0 must be a number or \"inf\"");
  }
  return j.get<double>();
}

/// Writes the decomposition as decomposition.json plus one binary grid per atom.
inline void save_decomposition(const AtomicDecomposition& dec, const std::filesystem::path& dir) {
  Json arr = Json::array();
  for (std::size_t j = 0; j < dec.size(); ++j) {
    const Atom& a = dec.atoms[j];
    const std::string ref = "atom_" + std::to_string(j) + ".bin";
    save_grid(a.data, dir / ref);
    arr.push_back({{"k", dec.k[j]},
                   {"cube", {{"center", point_to_json(a.Q.center, a.data.domain.n)}, {"side", a.Q.side}}},
                   {"p0", p0_to_json(a.p0)},
                   {"d", a.d},
                   {"data_ref", ref}});
  }
  write_file_atomic(dir / "decomposition.json", arr.dump(2) + "\n");
}

inline AtomicDecomposition load_decomposition(const std::filesystem::path& file) {
  const Json arr = parse_json_file(file);
  if (!arr.is_array()) throw FormatError(file.string() + ": decomposition must be a JSON array");
  AtomicDecomposition dec;
  try {
    for (const Json& e : arr) {
      Atom a;
      a.Q = Cube(point_from_json(e.at("cube").at("center")), e.at("cube").at("side").get<double>());
      a.p0 = p0_from_json(e.at("p0"));
      a.d = e.at("d").get<int>();
      a.data = load_grid(file.parent_path() / e.at("data_ref").get<std::string>());
      dec.add(e.at("k").get<double>(), std::move(a));
    }
  } catch (const Json::exception& e) {
    throw FormatError(file.string() + ": " + e.what());
  }
  return dec;
}

// tables ----------------------------------------------------------------

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_row(std::vector<std::string> r) { rows.push_back(std::move(r)); }
  std::string str() const {
    std::string out;
    for (std::size_t i = 0; i < columns.size(); ++i) out += (i ? "," : "") + columns[i];
    out += "\n";
    for (const auto& r : rows) {
      for (std::size_t i = 0; i < r.size(); ++i) out += (i ? "," : "") + r[i];
      out += "\n";
    }
    return out;
  }
};

}  // namespace calderon
