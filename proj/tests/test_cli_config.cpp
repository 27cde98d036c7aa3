#include "willmore_lab/acceptance.hpp"

#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>

using namespace willmore_lab;
namespace fs = std::filesystem;

namespace {

ErrorCode config_code(const std::string& text) {
  try {
    parse_config_text(text);
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::invalid_argument;
}

fs::path scratch(const std::string& name) {
  const fs::path d = fs::temp_directory_path() / "willmore_lab_cli_tests";
  fs::create_directories(d);
  return d / name;
}

int run_cli(const std::string& args) {
  const std::string cmd = std::string(WILLMORE_LAB_CLI) + " " + args + " > " + scratch("stdout.txt").string() + " 2>&1";
  const int st = std::system(cmd.c_str());
  return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

std::string write_config(const std::string& name, const std::string& text) {
  const auto p = scratch(name);
  std::ofstream(p) << text;
  return p.string();
}

const char* kSmallScan = R"({"schema_version": 1,
  "scan": {"box_lo": [-1, -1, -1], "box_hi": [1, 1, 1], "n_p": [3, 3, 3],
           "rho_min": 0.3, "rho_max": 0.9, "n_rho": 3, "n_theta": 12, "L": 8}})";

}  // namespace

TEST_CASE("config: defaults round-trip through JSON") {
  const RunConfig a;
  const RunConfig b = parse_config(to_json(a));
  CHECK(to_json(b) == to_json(a));
  CHECK(b.grid.L == 24);
  CHECK(b.scan_grid.L == 16);
  CHECK(b.metric.amplitude(0, 0) == 1.0);
}

TEST_CASE("config: schema validation") {
  CHECK(config_code(R"({"schema_version": 1, "colour": 3})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 1, "metric": {"sigma": 1, "sigmaa": 2}})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 1, "metric": {"sigma": -1}})") == ErrorCode::config);
  CHECK(config_code(R"({"metric": {"sigma": 1}})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 2})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 1, "solver": {"tol": 0}})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 1, "grid": {"n_theta": 8, "L": 8}})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 1, "cutoff": {"R1": 1.0, "R2": 0.5}})") == ErrorCode::config);
  CHECK(config_code(R"({"schema_version": 1, "metric": {"epsilon": 0.9}})") == ErrorCode::config);
  CHECK(config_code("{not json") == ErrorCode::config);
  const auto c = parse_config_text(R"({"schema_version": 1, "solver": {"field": "exact"}, "seed": 7})");
  CHECK(c.solver.form == FieldForm::exact);
  CHECK(c.seed == 7);
}

TEST_CASE("scan CSV has one row per cell and the fixed header") {
  const auto cfg = parse_config_text(kSmallScan);
  const auto r = scan_and_locate(cfg.ambient(), cfg.scan, cfg.scan_sphere_grid(), cfg.solver);
  std::ostringstream os;
  write_scan_csv(os, r);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  CHECK(line == "px,py,pz,rho,phi,converged,residual");
  int rows = 0;
  while (std::getline(is, line)) ++rows;
  CHECK(rows == 3 * 3 * 3 * 3);
  CHECK(rows == static_cast<int>(r.cells.size()));
  const auto s = scan_summary_json(r);
  CHECK(s["cells"] == 81);
  CHECK(s["parameters"]["n_rho"] == 3);
}

TEST_CASE("scan values do not depend on the worker count") {
  const auto cfg = parse_config_text(kSmallScan);
  set_default_threads(1);
  const auto a = scan_and_locate(cfg.ambient(), cfg.scan, cfg.scan_sphere_grid(), cfg.solver);
  set_default_threads(3);
  const auto b = scan_and_locate(cfg.ambient(), cfg.scan, cfg.scan_sphere_grid(), cfg.solver);
  set_default_threads(1);
  double worst = 0.0;
  for (size_t i = 0; i < a.cells.size(); ++i) worst = std::max(worst, std::abs(a.cells[i].phi - b.cells[i].phi));
  CHECK(worst < 1e-12);
}

TEST_CASE("curvature identity residuals vanish") {
  const RunConfig cfg;
  for (const Vec3& p : {Vec3(0, 0, 0), Vec3(0.4, -0.3, 0.7)}) {
    const auto r = curvature_identity_residuals(curvature_pack(cfg.ambient(1e-2), p, true));
    CHECK(r.ok);
    CHECK(r.scale > 0.0);
  }
  const auto flat = curvature_identity_residuals(curvature_pack(cfg.ambient(0.0), Vec3::Zero(), true));
  CHECK(flat.ok);
  CHECK(flat.scale == 0.0);
}

TEST_CASE("acceptance: Moebius check degrades at L = 8") {
  AcceptanceContext fine;
  const auto r24 = detail::check_moebius(fine);
  CHECK(r24.status == CheckStatus::pass);
  AcceptanceContext coarse;
  coarse.config.grid = {12, 8};
  const auto r8 = detail::check_moebius(coarse);
  CHECK(r8.status == CheckStatus::fail);
  CHECK(r8.details["max_abs_dI"].get<double>() > 1e-6);
  CHECK(r8.details["max_abs_dI"].get<double>() > 100.0 * r24.details["max_abs_dI"].get<double>());
}

TEST_CASE("acceptance: epsilon-scaling checks skip at epsilon 0") {
  AcceptanceContext ctx;
  ctx.config = parse_config_text(R"({"schema_version": 1, "metric": {"epsilon": 0}})");
  const auto rs = run_acceptance(ctx, {1, 5, 6, 7, 8, 9, 10});
  REQUIRE(rs.size() == 7);
  CHECK(rs[0].status == CheckStatus::pass);
  for (size_t k = 1; k < rs.size(); ++k) CHECK(rs[k].status == CheckStatus::skipped);
  CHECK(to_json(rs)["all_passed"] == true);
}

TEST_CASE("cli exit codes") {
  const auto flat = write_config("flat.json", R"({"schema_version": 1, "metric": {"epsilon": 0},
    "scan": {"n_p": [3, 3, 3], "n_rho": 3, "n_theta": 12, "L": 8}})");
  const auto bad = write_config("bad.json", R"({"schema_version": 1, "metric": {"sigma": -1}})");
  const auto unknown = write_config("unknown.json", R"({"schema_version": 1, "extra": true})");
  const std::string out = "--out " + scratch("out").string();

  CHECK(run_cli("--config " + flat + " curvature --point 0.1,0,0") == 0);
  CHECK(run_cli("--config " + bad + " curvature") == 2);
  CHECK(run_cli("--config " + unknown + " curvature") == 2);
  CHECK(run_cli("frobnicate") == 2);
  CHECK(run_cli("--config " + flat + " " + out + " scan --expect-max") == 3);
  CHECK(run_cli("--config " + flat + " " + out + " scan") == 0);
  std::ifstream csv(scratch("out") / "scan.csv");
  int lines = 0;
  for (std::string l; std::getline(csv, l);) ++lines;
  CHECK(lines == 1 + 3 * 3 * 3 * 3);
  const auto summary = json::parse(std::ifstream(scratch("out") / "scan.json"));
  CHECK(summary["maxima"].empty());

  CHECK(run_cli("--config " + flat + " " + out + " verify --only 1,2,3,5") == 0);
  const auto v = json::parse(std::ifstream(scratch("out") / "verify.json"));
  CHECK(v["all_passed"] == true);
  CHECK(v["checks"][3]["status"] == "skipped");
}
