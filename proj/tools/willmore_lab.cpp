// willmore_lab: batch front-end over the header library.
//
// Exit codes: 0 success, 1 failed check or numerical error, 2 config or usage error,
// 3 scan --expect-max found no interior maximum.
#include "willmore_lab/acceptance.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

using namespace willmore_lab;
namespace fs = std::filesystem;

namespace {

struct Common {
  std::string config_path;
  std::string out_dir;
  int threads = 0;
  std::optional<std::uint64_t> seed;
};

RunConfig load(const Common& c) {
  RunConfig cfg = c.config_path.empty() ? RunConfig{} : load_config(c.config_path);
  if (!c.out_dir.empty()) cfg.output_dir = c.out_dir;
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

fs::path out_path(const RunConfig& cfg, const std::string& name) {
  fs::create_directories(cfg.output_dir);
  return fs::path(cfg.output_dir) / name;
}

void write_json(const fs::path& p, const json& j) {
  std::ofstream f(p);
  if (!f) throw Error(ErrorCode::config, "cannot write " + p.string());
  f << j.dump(2) << '\n';
}

json energy_json(const EnergyReport& e) {
  return {{"I", e.I}, {"W", e.W}, {"area", e.area}, {"quad_error", detail::num_json(e.quad_error)},
          {"n_theta", e.n_theta}, {"L", e.L}};
}

int cmd_curvature(const RunConfig& cfg, const Vec3& p) {
  const AmbientMetric m = cfg.ambient();
  const auto P = curvature_pack(m, p, true);
  const auto res = curvature_identity_residuals(P);
  json j = to_json(P);
  j["epsilon"] = m.epsilon();
  j["s_tilde"] = s_tilde(cfg.perturbation(), p);
  j["identity_residuals"] = res.values;
  j["identities_ok"] = res.ok;
  std::cout << j.dump(2) << '\n';
  return res.ok ? 0 : 1;
}

int cmd_surface(const RunConfig& cfg, const Vec3& p, double rho) {
  const AmbientMetric m = cfg.ambient();
  const auto grid = cfg.sphere_grid();
  const SigmaFamily fam(m, p, rho, grid, cfg.solver.cut, cfg.solver.norm, cfg.solver.geodesic);
  const auto s = fam.surface(SphericalFunction::zeros(grid));
  const auto& gg = fam.geodesic_graph();
  json j = {{"p", detail::to_json(p)},
            {"rho", rho},
            {"epsilon", m.epsilon()},
            {"kind", to_string(s.kind)},
            {"chi", fam.chi()},
            {"direction_norm", to_string(cfg.solver.norm)},
            {"sup_v", gg.v.empty() ? 0.0 : gg.v.sup()},
            {"geodesic_residual", gg.max_residual},
            {"energy", energy_json(energy(m, s))}};
  std::ofstream csv(out_path(cfg, "surface.csv"));
  csv << "theta,phi,x,y,z\n";
  for (int i = 0; i < grid->size(); ++i) {
    const int a = i / grid->n_phi(), b = i % grid->n_phi();
    csv << detail::num(grid->theta(a)) << ',' << detail::num(grid->phi(b)) << ',' << detail::num(s.X[i][0]) << ','
        << detail::num(s.X[i][1]) << ',' << detail::num(s.X[i][2]) << '\n';
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_willmore(const RunConfig& cfg, const Vec3& p, double rho) {
  const auto grid = cfg.sphere_grid();
  const auto h = cfg.perturbation();
  const AmbientMetric m = cfg.ambient();
  const auto sphere = [&](const GridPtr& g) { return standard_graph(p, rho, SphericalFunction::zeros(g)); };
  json j = {{"p", detail::to_json(p)}, {"rho", rho}, {"epsilon", m.epsilon()},
            {"standard_sphere", energy_json(energy(m, SurfaceBuilder(sphere), grid))}};
  const SigmaFamily fam(m, p, rho, grid, cfg.solver.cut, cfg.solver.norm, cfg.solver.geodesic);
  j["sigma_w0"] = energy_json(energy(m, fam.surface(SphericalFunction::zeros(grid))));
  const auto f = epsilon_fit(h, [&](const AmbientMetric&) { return sphere(grid); }, cfg.metric.epsilon_list);
  j["epsilon_fit"] = {{"I0", f.I0}, {"G1", f.G1}, {"G2", f.G2}, {"residual", f.residual}, {"eps", f.eps},
                      {"values", f.values}};
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_solve_w(const RunConfig& cfg, const Vec3& p, double rho) {
  const AmbientMetric m = cfg.ambient();
  const auto grid = cfg.sphere_grid();
  const auto r = reduced_point(m, p, rho, grid, cfg.solver, true);
  json coeffs = json::array();
  for (int l = 0; l <= std::min(4, grid->L()); ++l)
    for (int k = -l; k <= l; ++k) coeffs.push_back({{"l", l}, {"m", k}, {"value", r.aux.w.coeff(l, k)}});
  json j = {{"p", detail::to_json(p)},
            {"rho", rho},
            {"epsilon", m.epsilon()},
            {"field", to_string(cfg.solver.form)},
            {"iterations", r.aux.iterations},
            {"residual", r.aux.residual},
            {"projected_field_norm", r.aux.field_norm},
            {"contraction", r.aux.contraction},
            {"sup_w", r.aux.w.sup()},
            {"phi", r.phi},
            {"full_field_norm", r.field_norm},
            {"w_coefficients_l_le_4", coeffs}};
  if (rho <= cfg.solver.cut.R1 && !m.is_flat()) {
    const SigmaFamily fam(m, p, rho, grid, cfg.solver.cut, cfg.solver.norm, cfg.solver.geodesic);
    const auto lead = leading_order_w(curvature_pack(m, p, false), rho, fam.geodesic_graph().shoot);
    j["sup_diff_leading_order"] = (r.aux.w.values() - lead).cwiseAbs().maxCoeff();
  }
  std::cout << j.dump(2) << '\n';
  return 0;
}

int cmd_scan(const RunConfig& cfg, bool expect_max) {
  const auto r = scan_and_locate(cfg.ambient(), cfg.scan, cfg.scan_sphere_grid(), cfg.solver);
  {
    std::ofstream csv(out_path(cfg, "scan.csv"));
    write_scan_csv(csv, r);
  }
  const json summary = scan_summary_json(r);
  write_json(out_path(cfg, "scan.json"), summary);
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "cells " << r.cells.size() << ", failed " << r.failed << ", boundary sup "
            << detail::num(r.boundary_sup) << ", interior maxima " << r.maxima.size() << '\n';
  for (const auto& mx : r.maxima)
    std::cout << "  p (" << detail::num(mx.p[0]) << ", " << detail::num(mx.p[1]) << ", " << detail::num(mx.p[2])
              << ") rho " << detail::num(mx.rho) << " phi " << detail::num(mx.phi) << (mx.best ? " best" : "") << '\n';
  return expect_max && r.maxima.empty() ? 3 : 0;
}

int cmd_invariance(const RunConfig& cfg) {
  AcceptanceContext ctx{cfg, std::nullopt};
  const auto rs = run_acceptance(ctx, {4});
  std::cout << format_line(rs.front()) << '\n' << rs.front().details.dump(2) << '\n';
  return rs.front().status == CheckStatus::pass ? 0 : 1;
}

int cmd_verify(const RunConfig& cfg, const std::vector<int>& only) {
  AcceptanceContext ctx{cfg, std::nullopt};
  const auto rs = run_acceptance(ctx, {only.begin(), only.end()},
                                 [](const CheckResult& r) { std::cout << format_line(r) << std::endl; });
  json j = to_json(rs);
  j["config"] = to_json(cfg);
  write_json(out_path(cfg, "verify.json"), j);
  if (ctx.scan) {
    std::ofstream csv(out_path(cfg, "scan.csv"));
    write_scan_csv(csv, *ctx.scan);
    write_json(out_path(cfg, "scan.json"), scan_summary_json(*ctx.scan));
  }
  const bool ok = j["all_passed"].get<bool>();
  std::cout << (ok ? "all checks passed" : "some checks failed") << "; results in "
            << out_path(cfg, "verify.json").string() << '\n';
  return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Willmore-type surfaces in perturbed euclidean metrics"};
  app.require_subcommand(1);
  Common c;
  std::uint64_t seed = 0;
  app.add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", c.out_dir, "output directory (overrides the config)");
  app.add_option("--threads", c.threads, "worker threads (default: WILLMORE_LAB_THREADS, else 1)")
      ->check(CLI::PositiveNumber);
  auto* seed_opt = app.add_option("--seed", seed, "seed for the randomized checks (overrides the config)");
  app.fallthrough();

  std::vector<double> point{0.0, 0.0, 0.0};
  double rho = 0.2;
  bool expect_max = false;
  std::vector<int> only;
  auto point_opts = [&](CLI::App* s, bool with_rho) {
    s->add_option("--point", point, "x,y,z")->delimiter(',')->expected(3);
    if (with_rho) s->add_option("--rho", rho, "sphere radius")->check(CLI::PositiveNumber);
  };
  auto* curvature = app.add_subcommand("curvature", "curvature pack, s-tilde and identity residuals at a point");
  point_opts(curvature, false);
  auto* surface = app.add_subcommand("surface", "approximate solution Sigma(p, rho, w = 0); nodes to surface.csv");
  point_opts(surface, true);
  auto* willmore = app.add_subcommand("willmore", "I and W of the standard and approximate spheres, epsilon fit");
  point_opts(willmore, true);
  auto* solve_w = app.add_subcommand("solve-w", "solve the auxiliary equation and evaluate the reduced functional");
  point_opts(solve_w, true);
  auto* scan = app.add_subcommand("scan", "reduced functional over the (p, rho) box; scan.csv and scan.json");
  scan->add_flag("--expect-max", expect_max, "exit 3 when no interior maximum is found");
  auto* invariance = app.add_subcommand("invariance", "Moebius invariance check in the flat metric");
  auto* verify = app.add_subcommand("verify", "run the acceptance checks; verify.json");
  verify->add_option("--only", only, "criterion ids")->delimiter(',');

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }
  if (c.threads > 0) set_default_threads(c.threads);
  if (*seed_opt) c.seed = seed;

  RunConfig cfg;
  try {
    cfg = load(c);
  } catch (const Error& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  const Vec3 p(point[0], point[1], point[2]);
  try {
    if (*curvature) return cmd_curvature(cfg, p);
    if (*surface) return cmd_surface(cfg, p, rho);
    if (*willmore) return cmd_willmore(cfg, p, rho);
    if (*solve_w) return cmd_solve_w(cfg, p, rho);
    if (*scan) return cmd_scan(cfg, expect_max);
    if (*invariance) return cmd_invariance(cfg);
    if (*verify) return cmd_verify(cfg, only);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return e.code() == ErrorCode::config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}
