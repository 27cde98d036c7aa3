#pragma once

#include "willmore_lab/errors.hpp"
#include "willmore_lab/geodesics.hpp"
#include "willmore_lab/metric.hpp"
#include "willmore_lab/reduction.hpp"
#include "willmore_lab/sphere_spectral.hpp"
#include "willmore_lab/willmore.hpp"

#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace willmore_lab {

using json = nlohmann::json;

inline constexpr int kSchemaVersion = 1;

struct MetricConfig {
  Catalog catalog = Catalog::gaussian_bump;
  Vec3 center = Vec3::Zero();
  double sigma = 1.0;
  Mat3 amplitude = Vec3(1.0, 0.0, 0.0).asDiagonal();
  double alpha = 1.0;  ///< conformal_bump only
  Vec3 stretch = Vec3::Ones();  ///< anisotropic_bump only
  double epsilon = 5e-3;
  std::vector<double> epsilon_list{1e-2, 5e-3, 2.5e-3, 1.25e-3};
};

struct GridConfig {
  int n_theta = 32;
  int L = 24;
};

struct RunConfig {
  int schema_version = kSchemaVersion;
  MetricConfig metric;
  GridConfig grid;
  AuxiliaryOptions solver;
  ScanSpec scan;
  GridConfig scan_grid{24, 16};  ///< coarser grid for the (p, ρ) scan
  std::string output_dir = "out";
  std::uint64_t seed = 1;

  RunConfig() {
    scan.box_lo = Vec3::Constant(-3.0);
    scan.box_hi = Vec3::Constant(3.0);
    scan.n_p = {7, 7, 7};
    scan.rho_min = 0.3;
    scan.rho_max = 4.2;
    scan.n_rho = 7;
  }

  MetricPerturbation perturbation() const {
    switch (metric.catalog) {
      case Catalog::gaussian_bump: return MetricPerturbation::gaussian_bump(metric.center, metric.sigma, metric.amplitude);
      case Catalog::conformal_bump: return MetricPerturbation::conformal_bump(metric.center, metric.sigma, metric.alpha);
      case Catalog::anisotropic_bump:
        return MetricPerturbation::anisotropic_bump(metric.center, metric.sigma, metric.amplitude, metric.stretch);
      case Catalog::custom: break;
    }
    throw Error(ErrorCode::config, "custom perturbations cannot be built from a config file");
  }
  AmbientMetric ambient() const { return ambient(metric.epsilon); }
  AmbientMetric ambient(double eps) const { return AmbientMetric(perturbation(), eps); }
  GridPtr sphere_grid() const { return make_grid(grid.n_theta, grid.L); }
  GridPtr scan_sphere_grid() const { return make_grid(scan_grid.n_theta, scan_grid.L); }
};

namespace detail {

inline void config_fail(const std::string& path, const std::string& msg) {
  throw Error(ErrorCode::config, path + ": " + msg);
}

inline void check_keys(const json& j, const std::string& path, const std::set<std::string>& allowed) {
  if (!j.is_object()) config_fail(path, "expected an object");
  for (auto it = j.begin(); it != j.end(); ++it)
    if (!allowed.count(it.key())) config_fail(path + "." + it.key(), "unknown key");
}

inline double get_number(const json& j, const std::string& path) {
  if (!j.is_number()) config_fail(path, "expected a number");
  return j.get<double>();
}

inline double get_positive(const json& j, const std::string& path) {
  const double v = get_number(j, path);
  if (!(v > 0.0)) config_fail(path, "must be > 0");
  return v;
}

inline int get_int(const json& j, const std::string& path, int lo) {
  if (!j.is_number_integer()) config_fail(path, "expected an integer");
  const auto v = j.get<long long>();
  if (v < lo) config_fail(path, "must be >= " + std::to_string(lo));
  return static_cast<int>(v);
}

inline Vec3 get_vec3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) config_fail(path, "expected 3 numbers");
  return Vec3(get_number(j[0], path + "[0]"), get_number(j[1], path + "[1]"), get_number(j[2], path + "[2]"));
}

inline Mat3 get_mat3(const json& j, const std::string& path) {
  if (!j.is_array() || j.size() != 3) config_fail(path, "expected a 3x3 array");
  Mat3 m;
  for (int r = 0; r < 3; ++r) m.row(r) = get_vec3(j[r], path + "[" + std::to_string(r) + "]").transpose();
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 0.0) config_fail(path, "amplitude must be symmetric");
  return m;
}

inline Catalog catalog_from(const std::string& s, const std::string& path) {
  if (s == "gaussian_bump") return Catalog::gaussian_bump;
  if (s == "conformal_bump") return Catalog::conformal_bump;
  if (s == "anisotropic_bump") return Catalog::anisotropic_bump;
  config_fail(path, "unknown catalog id '" + s + "'");
  return Catalog::custom;
}

inline json to_json(const Vec3& v) { return json::array({v[0], v[1], v[2]}); }

inline json to_json(const Mat3& m) {
  json a = json::array();
  for (int r = 0; r < 3; ++r) a.push_back(to_json(Vec3(m.row(r).transpose())));
  return a;
}

}  // namespace detail

/// Validates a config tree. Missing keys keep their defaults; unknown keys are errors.
inline RunConfig parse_config(const json& j) {
  using namespace detail;
  RunConfig c;
  check_keys(j, "config", {"schema_version", "metric", "grid", "cutoff", "solver", "scan", "output_dir", "seed"});
  if (!j.contains("schema_version")) config_fail("config.schema_version", "missing");
  c.schema_version = get_int(j["schema_version"], "config.schema_version", 1);
  if (c.schema_version != kSchemaVersion)
    config_fail("config.schema_version", "unsupported version " + std::to_string(c.schema_version));

  if (j.contains("metric")) {
    const json& m = j["metric"];
    check_keys(m, "metric", {"catalog", "center", "sigma", "amplitude", "alpha", "stretch", "epsilon", "epsilon_list"});
    if (m.contains("catalog")) {
      if (!m["catalog"].is_string()) config_fail("metric.catalog", "expected a string");
      c.metric.catalog = catalog_from(m["catalog"].get<std::string>(), "metric.catalog");
    }
    if (m.contains("center")) c.metric.center = get_vec3(m["center"], "metric.center");
    if (m.contains("sigma")) c.metric.sigma = get_positive(m["sigma"], "metric.sigma");
    if (m.contains("amplitude")) c.metric.amplitude = get_mat3(m["amplitude"], "metric.amplitude");
    if (m.contains("alpha")) c.metric.alpha = get_number(m["alpha"], "metric.alpha");
    if (m.contains("stretch")) {
      c.metric.stretch = get_vec3(m["stretch"], "metric.stretch");
      if (!(c.metric.stretch.minCoeff() > 0.0)) config_fail("metric.stretch", "entries must be > 0");
    }
    if (m.contains("epsilon")) c.metric.epsilon = get_number(m["epsilon"], "metric.epsilon");
    if (m.contains("epsilon_list")) {
      if (!m["epsilon_list"].is_array()) config_fail("metric.epsilon_list", "expected an array");
      c.metric.epsilon_list.clear();
      for (size_t k = 0; k < m["epsilon_list"].size(); ++k)
        c.metric.epsilon_list.push_back(
            get_positive(m["epsilon_list"][k], "metric.epsilon_list[" + std::to_string(k) + "]"));
    }
  }
  if (j.contains("grid")) {
    const json& g = j["grid"];
    check_keys(g, "grid", {"n_theta", "L"});
    if (g.contains("n_theta")) c.grid.n_theta = get_int(g["n_theta"], "grid.n_theta", 4);
    if (g.contains("L")) c.grid.L = get_int(g["L"], "grid.L", 2);
  }
  if (c.grid.n_theta <= c.grid.L) config_fail("grid", "n_theta must exceed L for exact quadrature");
  if (j.contains("cutoff")) {
    const json& g = j["cutoff"];
    check_keys(g, "cutoff", {"R1", "R2"});
    if (g.contains("R1")) c.solver.cut.R1 = get_positive(g["R1"], "cutoff.R1");
    if (g.contains("R2")) c.solver.cut.R2 = get_positive(g["R2"], "cutoff.R2");
  }
  if (!(c.solver.cut.R2 > c.solver.cut.R1)) config_fail("cutoff", "R2 must exceed R1");
  if (j.contains("solver")) {
    const json& s = j["solver"];
    check_keys(s, "solver", {"tol", "max_iter", "stall_ratio", "stall_steps", "field", "direction_norm", "geodesic_tol"});
    if (s.contains("tol")) c.solver.tol = get_positive(s["tol"], "solver.tol");
    if (s.contains("max_iter")) c.solver.max_iter = get_int(s["max_iter"], "solver.max_iter", 1);
    if (s.contains("stall_ratio")) c.solver.stall_ratio = get_positive(s["stall_ratio"], "solver.stall_ratio");
    if (s.contains("stall_steps")) c.solver.stall_steps = get_int(s["stall_steps"], "solver.stall_steps", 1);
    if (s.contains("geodesic_tol")) c.solver.geodesic.tol = get_positive(s["geodesic_tol"], "solver.geodesic_tol");
    if (s.contains("field")) {
      const std::string f = s["field"].is_string() ? s["field"].get<std::string>() : "";
      if (f == "closed_form")
        c.solver.form = FieldForm::closed_form;
      else if (f == "exact")
        c.solver.form = FieldForm::exact;
      else
        config_fail("solver.field", "expected \"closed_form\" or \"exact\"");
    }
    if (s.contains("direction_norm")) {
      const std::string f = s["direction_norm"].is_string() ? s["direction_norm"].get<std::string>() : "";
      if (f == "metric")
        c.solver.norm = DirectionNorm::metric;
      else if (f == "euclidean")
        c.solver.norm = DirectionNorm::euclidean;
      else
        config_fail("solver.direction_norm", "expected \"metric\" or \"euclidean\"");
    }
  }
  if (j.contains("scan")) {
    const json& s = j["scan"];
    check_keys(s, "scan", {"box_lo", "box_hi", "n_p", "rho_min", "rho_max", "n_rho", "refine_tol", "max_sweeps", "n_theta", "L"});
    if (s.contains("box_lo")) c.scan.box_lo = get_vec3(s["box_lo"], "scan.box_lo");
    if (s.contains("box_hi")) c.scan.box_hi = get_vec3(s["box_hi"], "scan.box_hi");
    if (s.contains("n_p")) {
      if (!s["n_p"].is_array() || s["n_p"].size() != 3) config_fail("scan.n_p", "expected 3 integers");
      for (int k = 0; k < 3; ++k) c.scan.n_p[k] = get_int(s["n_p"][k], "scan.n_p", 3);
    }
    if (s.contains("rho_min")) c.scan.rho_min = get_positive(s["rho_min"], "scan.rho_min");
    if (s.contains("rho_max")) c.scan.rho_max = get_positive(s["rho_max"], "scan.rho_max");
    if (s.contains("n_rho")) c.scan.n_rho = get_int(s["n_rho"], "scan.n_rho", 3);
    if (s.contains("refine_tol")) c.scan.refine_tol = get_positive(s["refine_tol"], "scan.refine_tol");
    if (s.contains("max_sweeps")) c.scan.max_sweeps = get_int(s["max_sweeps"], "scan.max_sweeps", 1);
    if (s.contains("n_theta")) c.scan_grid.n_theta = get_int(s["n_theta"], "scan.n_theta", 4);
    if (s.contains("L")) c.scan_grid.L = get_int(s["L"], "scan.L", 2);
  }
  if (c.scan_grid.n_theta <= c.scan_grid.L) config_fail("scan", "n_theta must exceed L for exact quadrature");
  if (!((c.scan.box_hi - c.scan.box_lo).minCoeff() > 0.0)) config_fail("scan", "box_hi must exceed box_lo");
  if (!(c.scan.rho_max > c.scan.rho_min)) config_fail("scan", "rho_max must exceed rho_min");
  if (j.contains("output_dir")) {
    if (!j["output_dir"].is_string()) config_fail("config.output_dir", "expected a string");
    c.output_dir = j["output_dir"].get<std::string>();
  }
  if (j.contains("seed")) {
    if (!j["seed"].is_number_unsigned()) config_fail("config.seed", "expected a non-negative integer");
    c.seed = j["seed"].get<std::uint64_t>();
  }
  // the metric must be constructible and positive definite at every ε in use
  try {
    const auto h = c.perturbation();
    AmbientMetric check(h, c.metric.epsilon);
    for (double e : c.metric.epsilon_list) AmbientMetric(h, e);
  } catch (const Error& e) {
    config_fail("metric", e.what());
  }
  return c;
}

inline RunConfig parse_config_text(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorCode::config, std::string("parse error: ") + e.what());
  }
  return parse_config(j);
}

inline RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::config, "cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

inline json to_json(const RunConfig& c) {
  using detail::to_json;
  json m = {{"catalog", willmore_lab::to_string(c.metric.catalog)},
            {"center", to_json(c.metric.center)},
            {"sigma", c.metric.sigma},
            {"amplitude", to_json(c.metric.amplitude)},
            {"alpha", c.metric.alpha},
            {"stretch", to_json(c.metric.stretch)},
            {"epsilon", c.metric.epsilon},
            {"epsilon_list", c.metric.epsilon_list}};
  json s = {{"tol", c.solver.tol},
            {"max_iter", c.solver.max_iter},
            {"stall_ratio", c.solver.stall_ratio},
            {"stall_steps", c.solver.stall_steps},
            {"field", willmore_lab::to_string(c.solver.form)},
            {"direction_norm", willmore_lab::to_string(c.solver.norm)},
            {"geodesic_tol", c.solver.geodesic.tol}};
  json sc = {{"box_lo", to_json(c.scan.box_lo)},
             {"box_hi", to_json(c.scan.box_hi)},
             {"n_p", c.scan.n_p},
             {"rho_min", c.scan.rho_min},
             {"rho_max", c.scan.rho_max},
             {"n_rho", c.scan.n_rho},
             {"refine_tol", c.scan.refine_tol},
             {"max_sweeps", c.scan.max_sweeps},
             {"n_theta", c.scan_grid.n_theta},
             {"L", c.scan_grid.L}};
  return {{"schema_version", c.schema_version},
          {"metric", m},
          {"grid", {{"n_theta", c.grid.n_theta}, {"L", c.grid.L}}},
          {"cutoff", {{"R1", c.solver.cut.R1}, {"R2", c.solver.cut.R2}}},
          {"solver", s},
          {"scan", sc},
          {"output_dir", c.output_dir},
          {"seed", c.seed}};
}

}  // namespace willmore_lab
