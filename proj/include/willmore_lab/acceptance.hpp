#pragma once

#include "willmore_lab/config.hpp"
#include "willmore_lab/curvature.hpp"
#include "willmore_lab/fit.hpp"
#include "willmore_lab/geodesics.hpp"
#include "willmore_lab/reduction.hpp"
#include "willmore_lab/report.hpp"
#include "willmore_lab/sphere_spectral.hpp"
#include "willmore_lab/surface.hpp"
#include "willmore_lab/willmore.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_roots.h>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace willmore_lab {

enum class CheckStatus { pass, fail, skipped };

inline const char* to_string(CheckStatus s) {
  switch (s) {
    case CheckStatus::pass: return "pass";
    case CheckStatus::fail: return "fail";
    case CheckStatus::skipped: return "skipped";
  }
  return "unknown";
}

struct CheckResult {
  int id = 0;
  std::string name;
  CheckStatus status = CheckStatus::fail;
  std::string summary;  ///< measured values against their thresholds
  json details = json::object();
  double seconds = 0.0;
  double budget_seconds = 0.0;
};

/// Shared state across checks of one run: criterion 9 leaves its scan here for the report writers.
struct AcceptanceContext {
  RunConfig config;
  std::optional<ScanResult> scan;
};

struct AcceptanceCheck {
  int id;
  std::string name;
  double budget_seconds;
  bool needs_curvature;  ///< skipped when the config's ε is 0
  std::function<CheckResult(AcceptanceContext&)> run;
};

namespace detail {

inline std::string fmt(double x) {
  std::ostringstream os;
  os.precision(3);
  os << std::scientific << x;
  return os.str();
}

inline CheckResult verdict(bool ok, std::string summary, json details = json::object()) {
  CheckResult r;
  r.status = ok ? CheckStatus::pass : CheckStatus::fail;
  r.summary = std::move(summary);
  r.details = std::move(details);
  return r;
}

inline SphericalFunction random_band_limited(const GridPtr& g, std::mt19937_64& rng, int lmax, double sup) {
  std::normal_distribution<double> nd(0.0, 1.0);
  VectorXd a = VectorXd::Zero(g->n_coeffs());
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) a[sh_index(l, m)] = nd(rng) / (1.0 + l * l);
  auto f = SphericalFunction::from_coeffs(g, a);
  return f * (sup / f.sup());
}

inline Vec3 bump_center(const RunConfig& c) { return c.metric.center; }

inline double bump_scale(const RunConfig& c) { return c.metric.sigma; }

// Off-center probe point used by the expansion checks.
inline Vec3 probe_point(const RunConfig& c) { return c.metric.center + c.metric.sigma * Vec3(0.3, 0.2, -0.1); }

// 1. round sphere in flat space
inline CheckResult check_round_sphere(AcceptanceContext& ctx) {
  const auto grid = ctx.config.sphere_grid();
  const AmbientMetric flat = ctx.config.ambient(0.0);
  const double rho = 1.7;
  const auto s = standard_graph(Vec3(0.2, -0.1, 0.3), rho, SphericalFunction::zeros(grid));
  const auto G = surface_geometry(flat, s);
  const auto E = energy(G, s);
  const double eH = (G.H.array() - 2.0 / rho).abs().maxCoeff();
  const double eD = (G.D.array() - 1.0 / (rho * rho)).abs().maxCoeff();
  const double eI = std::abs(E.I), eW = std::abs(E.W - 4.0 * std::numbers::pi);
  const double worst = std::max({eH, eD, eI, eW});
  constexpr double tol = 1e-9;
  return verdict(worst < tol,
                 "max|H-2/rho| " + fmt(eH) + ", max|D-1/rho^2| " + fmt(eD) + ", |I| " + fmt(eI) + ", |W-4pi| " +
                     fmt(eW) + " (tol " + fmt(tol) + ", L=" + std::to_string(grid->L()) + ")",
                 {{"H", eH}, {"D", eD}, {"I", eI}, {"W", eW}, {"L", grid->L()}, {"tol", tol}});
}

// 2. the four Ricci integral identities
inline CheckResult check_integral_identities(AcceptanceContext& ctx) {
  const auto grid = ctx.config.sphere_grid();
  std::mt19937_64 rng(ctx.config.seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  double worst = 0.0;
  for (int t = 0; t < 50; ++t) {
    Mat3 a;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) a(i, j) = nd(rng);
    a = 0.5 * (a + a.transpose());
    for (const auto& r : ricci_integral_identities(a, *grid)) worst = std::max(worst, r.abs_err);
  }
  constexpr double tol = 1e-9;
  return verdict(worst < tol, "max |err| " + fmt(worst) + " over 50 matrices (tol " + fmt(tol) + ")",
                 {{"max_abs_err", worst}, {"tol", tol}});
}

// 3. spectrum of Δ(Δ+2) and its inverse on l ≥ 2
inline CheckResult check_operator_spectrum(AcceptanceContext& ctx) {
  const auto grid = ctx.config.sphere_grid();
  const int lmax = std::min(10, grid->L());
  double eig_err = 0.0;
  for (int l = 0; l <= lmax; ++l)
    for (int m = -l; m <= l; ++m) {
      VectorXd a = VectorXd::Zero(grid->n_coeffs());
      a[sh_index(l, m)] = 1.0;
      const auto f = SphericalFunction::from_coeffs(grid, a);
      const auto lap = laplace_beltrami(f);
      const auto composed = laplace_beltrami(lap) + lap * 2.0;
      const long long ll = static_cast<long long>(l) * (l + 1);
      const double want = l <= 1 ? 0.0 : static_cast<double>(ll * (ll - 2));
      eig_err = std::max(eig_err, std::abs(willmore_operator(f).coeffs()[sh_index(l, m)] - want));
      eig_err = std::max(eig_err, std::abs(composed.coeffs()[sh_index(l, m)] - want));
    }
  std::mt19937_64 rng(ctx.config.seed + 3);
  double inv_err = 0.0;
  for (int t = 0; t < 10; ++t) {
    const auto f = random_band_limited(grid, rng, grid->L(), 1.0);
    inv_err = std::max(inv_err, (invert_on_perp(willmore_operator(f)) - project_perp(f)).coeffs().cwiseAbs().maxCoeff());
  }
  constexpr double tol = 1e-10;
  return verdict(eig_err == 0.0 && inv_err < tol,
                 "eigenvalue mismatch " + fmt(eig_err) + " (exact required, l<=" + std::to_string(lmax) +
                     "), |K op - P| " + fmt(inv_err) + " (tol " + fmt(tol) + ")",
                 {{"eigen_err", eig_err}, {"inverse_err", inv_err}, {"tol", tol}});
}

/// Image of the graph p + ρ(1 − u)Θ under an inversion, rewritten as a radial graph
/// about the image's node centroid on the same grid. Each ray is pulled back through
/// the inversion and intersected with the original graph by Brent's method.
inline ImmersedSphere inverted_graph_resampled(const Vec3& p, double rho, const SphericalFunction& u,
                                               const MoebiusMap& f) {
  const GridPtr& g = u.grid();
  const auto img = moebius_transform(standard_graph(p, rho, u), f);
  const int n = g->size();
  Vec3 c = Vec3::Zero();
  double reach = 0.0;
  for (const auto& x : img.X) c += x;
  c /= n;
  for (const auto& x : img.X) reach = std::max(reach, (x - c).norm());
  struct Ray {
    const SphereGrid* g;
    const VectorXd* a;
    const MoebiusMap* f;
    Vec3 p, c, T;
    double rho;
  };
  auto level = [](double t, void* vp) {
    const auto& R = *static_cast<const Ray*>(vp);
    const Vec3 y = (*R.f)(R.c + t * R.T) - R.p;
    const double r = y.norm();
    double uv, ut, up;
    R.g->evaluate(*R.a, std::acos(std::clamp(y[2] / r, -1.0, 1.0)), std::atan2(y[1], y[0]), uv, ut, up);
    return r - R.rho * (1.0 - uv);
  };
  VectorXd r(n);
  std::vector<char> bad(n, 0);
  parallel_for(n, [&](int i) {
    Ray R{g.get(), &u.coeffs(), &f, p, c, g->direction(i / g->n_phi(), i % g->n_phi()), rho};
    gsl_function F{level, &R};
    double lo = 0.0, hi = 2.0 * reach;
    if (!(level(lo, &R) < 0.0 && level(hi, &R) > 0.0)) {
      bad[i] = 1;
      return;
    }
    gsl_root_fsolver* solver = gsl_root_fsolver_alloc(gsl_root_fsolver_brent);
    gsl_root_fsolver_set(solver, &F, lo, hi);
    for (int it = 0; it < 200; ++it) {
      gsl_root_fsolver_iterate(solver);
      lo = gsl_root_fsolver_x_lower(solver);
      hi = gsl_root_fsolver_x_upper(solver);
      if (gsl_root_test_interval(lo, hi, 1e-15, 1e-15) == GSL_SUCCESS) break;
    }
    r[i] = gsl_root_fsolver_root(solver);
    gsl_root_fsolver_free(solver);
  });
  for (int i = 0; i < n; ++i)
    if (bad[i]) throw Error(ErrorCode::not_star_shaped, "image is not a radial graph at node " + std::to_string(i));
  const double rr = r.mean();
  return standard_graph(c, rr, SphericalFunction::from_values(g, VectorXd::Ones(n) - r / rr));
}

// 4. Möbius invariance of I in flat space
inline CheckResult check_moebius(AcceptanceContext& ctx) {
  const auto grid = ctx.config.sphere_grid();
  const AmbientMetric flat = ctx.config.ambient(0.0);
  std::mt19937_64 rng(ctx.config.seed + 4);
  std::uniform_real_distribution<double> ud(-1.0, 1.0);
  const auto ell = SphericalFunction::sample(grid, [](const Vec3& t) {
    return 1.0 - 1.0 / std::sqrt(t[0] * t[0] + t[1] * t[1] + 0.64 * t[2] * t[2]);
  });
  std::vector<double> diffs(20), pushed(20), before(20);
  for (int t = 0; t < 20; ++t) {
    const auto u = t % 2 ? ell : random_band_limited(grid, rng, 4, 0.1);
    const auto s = standard_graph(Vec3::Zero(), 1.0, u);
    Vec3 c(ud(rng), ud(rng), ud(rng));
    c = c.normalized() * (2.5 + 1.5 * std::abs(ud(rng)));
    const double r = 1.0 + std::abs(ud(rng));
    const auto inv = MoebiusMap::inversion(c, r);
    before[t] = energy(flat, s).I;
    diffs[t] = std::abs(before[t] - energy(flat, inverted_graph_resampled(Vec3::Zero(), 1.0, u, inv)).I);
    pushed[t] = std::abs(before[t] - energy(flat, moebius_transform(s, inv)).I);
  }
  const double worst = *std::max_element(diffs.begin(), diffs.end());
  const double worst_pushed = *std::max_element(pushed.begin(), pushed.end());
  constexpr double tol = 1e-6;
  return verdict(worst < tol,
                 "max |dI| " + fmt(worst) + " over 20 pairs, image regraphed (tol " + fmt(tol) + ", L=" +
                     std::to_string(grid->L()) + "); chain-rule image " + fmt(worst_pushed),
                 {{"max_abs_dI", worst}, {"dI", diffs}, {"I", before}, {"dI_chain_rule", pushed}, {"L", grid->L()},
                  {"tol", tol}});
}

// 5. I₀ = G₁ = 0 on standard spheres through the bump
inline CheckResult check_g1_vanishing(AcceptanceContext& ctx) {
  const auto& cfg = ctx.config;
  const auto grid = cfg.sphere_grid();
  const auto h = cfg.perturbation();
  const auto& eps = cfg.metric.epsilon_list;
  const double emax = *std::max_element(eps.begin(), eps.end());
  const double s = bump_scale(cfg);
  const std::array<std::pair<Vec3, double>, 5> spheres{{{Vec3(0.3, 0.1, 0.0), 0.6},
                                                        {Vec3(-0.2, 0.4, 0.1), 0.9},
                                                        {Vec3(0.0, 0.0, 0.5), 0.4},
                                                        {Vec3(0.5, -0.3, -0.2), 1.2},
                                                        {Vec3(0.1, 0.2, -0.4), 0.3}}};
  bool ok = true;
  double worst_ratio = 0.0, worst_slope = 0.0;
  json rows = json::array();
  for (const auto& [off, r] : spheres) {
    const Vec3 p = bump_center(cfg) + s * off;
    MetricSurfaceBuilder build = [&](const AmbientMetric&) {
      return standard_graph(p, r * s, SphericalFunction::zeros(grid));
    };
    const auto f = epsilon_fit(h, build, eps);
    const double tol = 1e-8 * std::max(1.0, std::abs(f.G2) * emax * emax);
    std::vector<double> I;
    for (double e : eps) I.push_back(energy(AmbientMetric(h, e), build(AmbientMetric(h, e))).I);
    const double sl = loglog_fit(eps, I).slope;
    const bool row_ok = std::abs(f.I0) < tol && std::abs(f.G1) < tol && std::abs(sl - 2.0) < 0.05;
    ok = ok && row_ok;
    worst_ratio = std::max({worst_ratio, std::abs(f.I0) / tol, std::abs(f.G1) / tol});
    worst_slope = std::max(worst_slope, std::abs(sl - 2.0));
    rows.push_back({{"p", detail::to_json(p)}, {"rho", r * s}, {"I0", f.I0}, {"G1", f.G1}, {"G2", f.G2},
                    {"tol", tol}, {"slope", sl}});
  }
  return verdict(ok,
                 "max |I0|,|G1| / tol " + fmt(worst_ratio) + " (must be < 1), max |slope-2| " + fmt(worst_slope) +
                     " (tol 5.0e-02)",
                 {{"spheres", rows}, {"epsilon", eps}});
}

// 6. explicit small-ρ expansion of w
inline CheckResult check_w_expansion(AcceptanceContext& ctx) {
  const auto& cfg = ctx.config;
  const auto grid = cfg.sphere_grid();
  constexpr double eps = 1e-2;
  const AmbientMetric m = cfg.ambient(eps);
  const Vec3 p = probe_point(cfg);
  const auto P = curvature_pack(m, p, false);
  std::vector<double> rhos{0.2, 0.1, 0.05}, diff;
  for (double rho : rhos) {
    const SigmaFamily fam(m, p, rho, grid, cfg.solver.cut, cfg.solver.norm, cfg.solver.geodesic);
    const auto sol = solve_auxiliary(m, fam, cfg.solver);
    diff.push_back((sol.w.values() - leading_order_w(P, rho, fam.geodesic_graph().shoot)).cwiseAbs().maxCoeff());
  }
  const double sl = loglog_fit(rhos, diff).slope;
  constexpr double min_slope = 2.7;
  return verdict(sl >= min_slope,
                 "slope " + fmt(sl) + " (>= 2.7), sup diffs " + fmt(diff[0]) + " " + fmt(diff[1]) + " " + fmt(diff[2]),
                 {{"rho", rhos}, {"sup_diff", diff}, {"slope", sl}, {"epsilon", eps}, {"p", detail::to_json(p)}});
}

// 7. Φ ≈ (π/5)‖S_p‖²ρ⁴ at the bump center
inline CheckResult check_rho4_coefficient(AcceptanceContext& ctx) {
  const auto& cfg = ctx.config;
  const auto grid = cfg.sphere_grid();
  constexpr double eps = 1e-2;
  const AmbientMetric m = cfg.ambient(eps);
  const Vec3 p = bump_center(cfg);
  const auto window = default_small_rho_window();
  const auto f = small_rho_fit(m, p, window, grid, cfg.solver);
  // diagnostic only: the two-term even model
  Eigen::MatrixXd A(window.size(), 2);
  VectorXd b(window.size());
  for (size_t k = 0; k < window.size(); ++k) {
    A(k, 0) = std::pow(window[k], 4);
    A(k, 1) = std::pow(window[k], 6);
    b[k] = f.phi[k];
  }
  const auto even = least_squares(A, b);
  const double s_norm = std::sqrt(f.s_norm2);
  const double r0 = window.front();
  json d = {{"p", detail::to_json(p)},
            {"epsilon", eps},
            {"rho", f.rho},
            {"phi", f.phi},
            {"c4", f.c4},
            {"c5", f.c5},
            {"s_norm2", f.s_norm2},
            {"predicted", f.predicted},
            {"rel_err", f.rel_err},
            {"residual_slope", detail::num_json(f.residual_slope)},
            {"even_fit", {{"c4", even.coef[0]}, {"c6", even.coef[1]}, {"rel_err", std::abs(even.coef[0] - f.predicted) / f.predicted}}},
            {"dphi_drho_at_rho_min",
             {{"rho", r0},
              {"fitted", 4.0 * f.c4 * std::pow(r0, 3) + 5.0 * f.c5 * std::pow(r0, 4)},
              {"squared_norm_form", 4.0 * std::numbers::pi / 5.0 * f.s_norm2 * std::pow(r0, 3)},
              {"unsquared_norm_form", 4.0 * std::numbers::pi / 5.0 * s_norm * std::pow(r0, 3)}}}};
  if (f.s_null) return verdict(false, "S_p vanishes at the bump center", d);
  const bool ok = f.rel_err < 5e-2 && f.residual_slope >= 5.0;
  return verdict(ok,
                 "c4 " + fmt(f.c4) + " vs (pi/5)|S|^2 " + fmt(f.predicted) + ", rel err " + fmt(f.rel_err) +
                     " (tol 5.0e-02); residual slope " + fmt(f.residual_slope) + " (>= 5); even-model c4 rel err " +
                     fmt(std::abs(even.coef[0] - f.predicted) / f.predicted),
                 d);
}

// 8. Φ(p,·) increasing on the small-ρ window
inline CheckResult check_monotone(AcceptanceContext& ctx) {
  const auto& cfg = ctx.config;
  const auto grid = cfg.sphere_grid();
  constexpr double eps = 1e-2;
  const AmbientMetric m = cfg.ambient(eps);
  const double s = bump_scale(cfg);
  const double scale = s_tilde(cfg.perturbation(), bump_center(cfg));
  const double floor = 1e-6 * eps * eps * scale;
  const std::array<Vec3, 5> offs{Vec3(0, 0, 0), Vec3(0.3, 0.0, 0.0), Vec3(0.0, 0.4, 0.0), Vec3(0.2, 0.2, 0.2),
                                 Vec3(-0.5, 0.1, 0.3)};
  const auto window = default_small_rho_window();
  bool ok = true;
  int increasing = 0;
  json rows = json::array();
  for (const auto& o : offs) {
    const Vec3 p = bump_center(cfg) + s * o;
    const double s2 = curvature_pack(m, p, false).norm2_traceless();
    if (!(s2 > floor)) throw Error(ErrorCode::s_null, "|S_p|^2 below the floor at a probe point");
    std::vector<double> phi(window.size());
    parallel_for(static_cast<int>(window.size()),
                 [&](int k) { phi[k] = reduced_functional(m, p, window[k], grid, cfg.solver); });
    bool inc = true;
    for (size_t k = 1; k < phi.size(); ++k) inc = inc && phi[k] > phi[k - 1];
    increasing += inc;
    ok = ok && inc;
    rows.push_back({{"p", detail::to_json(p)}, {"s_norm2", s2}, {"phi", phi}, {"increasing", inc}});
  }
  return verdict(ok,
                 std::to_string(increasing) + "/5 points strictly increasing on rho in [0.05, 0.25]; |S_p|^2 floor " +
                     fmt(floor),
                 {{"points", rows}, {"rho", window}, {"epsilon", eps}, {"s_tilde_scale", scale}});
}

// 9. interior maximum of Φ above the boundary sup, natural constraint at the maximum
inline CheckResult check_existence(AcceptanceContext& ctx) {
  const auto& cfg = ctx.config;
  constexpr double eps = 5e-3;
  const AmbientMetric m = cfg.ambient(eps);
  const auto grid = cfg.scan_sphere_grid();
  ctx.scan = scan_and_locate(m, cfg.scan, grid, cfg.solver);
  const auto& r = *ctx.scan;
  json d = scan_summary_json(r);
  if (r.maxima.empty()) return verdict(false, "no interior maximum above the boundary sup " + fmt(r.boundary_sup), d);
  const ScanMaximum* best = &r.maxima.front();
  for (const auto& mx : r.maxima)
    if (mx.phi > best->phi) best = &mx;
  const auto at = reduced_point(m, best->p, best->rho, grid, cfg.solver, true);
  AuxiliaryOptions ex = cfg.solver;
  ex.form = FieldForm::exact;
  const auto at_exact = reduced_point(m, best->p, best->rho, grid, ex, true);
  // Φ = ε²·scale, so the bound 10⁻²·ε²·scale/ρ is 10⁻²·Φ/ρ
  const double bound = 1e-2 * at.phi / best->rho;
  const bool ok = best->phi > r.boundary_sup && at.field_norm < bound;
  d["check"] = {{"p", detail::to_json(best->p)},
                {"rho", best->rho},
                {"phi", at.phi},
                {"phi_over_eps2", at.phi / (eps * eps)},
                {"euler_lagrange_norm", at.field_norm},
                {"bound", bound},
                {"invariant_bound_10_refine_tol_eps2", 10.0 * cfg.scan.refine_tol * eps * eps},
                {"kernel_part_norm", (at.field - project_perp(at.field)).l2_norm()},
                {"exact_gradient_norm_at_exact_solution", at_exact.field_norm}};
  return verdict(ok,
                 std::to_string(r.maxima.size()) + " interior maxima, best phi " + fmt(best->phi) + " > boundary sup " +
                     fmt(r.boundary_sup) + "; |I'| " + fmt(at.field_norm) + " vs bound " + fmt(bound),
                 d);
}

// 10. ρv_ε = O(ε) and v_ε = O(ρ), euclidean shooting directions
inline CheckResult check_v_scalings(AcceptanceContext& ctx) {
  const auto& cfg = ctx.config;
  const auto grid = cfg.sphere_grid();
  const auto h = cfg.perturbation();
  const double s = bump_scale(cfg);
  const std::array<Vec3, 2> ps{probe_point(cfg), bump_center(cfg) + s * Vec3(-0.4, 0.1, 0.2)};
  const std::vector<double> eps{1e-2, 5e-3, 2.5e-3};
  std::vector<double> sup_eps;
  for (double e : eps) {
    const AmbientMetric m(h, e);
    double worst = 0.0;
    for (const auto& p : ps)
      for (double rho : {0.2 * s, 0.4 * s}) worst = std::max(worst, rho * geodesic_sphere_graph(m, p, rho, grid, DirectionNorm::euclidean).v.sup());
    sup_eps.push_back(worst);
  }
  const auto fe = loglog_fit(eps, sup_eps);
  const std::vector<double> rhos{0.4 * s, 0.2 * s, 0.1 * s};
  std::vector<double> sup_rho;
  const AmbientMetric m(h, 1e-2);
  for (double rho : rhos) sup_rho.push_back(geodesic_sphere_graph(m, ps[0], rho, grid, DirectionNorm::euclidean).v.sup());
  const auto fr = loglog_fit(rhos, sup_rho);
  const bool ok = std::abs(fe.slope - 1.0) < 0.05 && fe.r2 > 0.999 && fr.slope >= 1.0 && fr.r2 > 0.999;
  return verdict(ok,
                 "eps slope " + fmt(fe.slope) + " (R2 " + fmt(fe.r2) + "), rho slope " + fmt(fr.slope) + " (R2 " +
                     fmt(fr.r2) + "); eps slope 1 +- 0.05, rho slope >= 1, R2 > 0.999",
                 {{"epsilon", eps}, {"sup_rho_v", sup_eps}, {"eps_slope", fe.slope}, {"eps_r2", fe.r2}, {"rho", rhos},
                  {"sup_v", sup_rho}, {"rho_slope", fr.slope}, {"rho_r2", fr.r2}});
}

}  // namespace detail

inline const std::vector<AcceptanceCheck>& acceptance_registry() {
  static const std::vector<AcceptanceCheck> reg{
      {1, "round-sphere exactness", 1.0, false, detail::check_round_sphere},
      {2, "Ricci integral identities", 5.0, false, detail::check_integral_identities},
      {3, "operator spectrum", 1.0, false, detail::check_operator_spectrum},
      {4, "Moebius invariance", 30.0, false, detail::check_moebius},
      {5, "G1 vanishing", 120.0, true, detail::check_g1_vanishing},
      {6, "auxiliary-solution expansion", 120.0, true, detail::check_w_expansion},
      {7, "reduced-functional rho^4 coefficient", 300.0, true, detail::check_rho4_coefficient},
      {8, "small-rho monotonicity", 120.0, true, detail::check_monotone},
      {9, "interior maximum of the reduced functional", 1200.0, true, detail::check_existence},
      {10, "v_eps scalings", 120.0, true, detail::check_v_scalings},
  };
  return reg;
}

/// Runs the registered checks (all when `only` is empty). Errors inside a check fail that check.
inline std::vector<CheckResult> run_acceptance(AcceptanceContext& ctx, const std::set<int>& only = {},
                                               const std::function<void(const CheckResult&)>& on_result = {}) {
  std::vector<CheckResult> out;
  for (const auto& c : acceptance_registry()) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult r;
    if (c.needs_curvature && (ctx.config.metric.epsilon == 0.0 || ctx.config.perturbation().sup_norm() == 0.0)) {
      r.status = CheckStatus::skipped;
      r.summary = "config epsilon is 0";
    } else {
      try {
        r = c.run(ctx);
      } catch (const std::exception& e) {
        r.status = CheckStatus::fail;
        r.summary = std::string("error: ") + e.what();
      }
    }
    r.id = c.id;
    r.name = c.name;
    r.budget_seconds = c.budget_seconds;
    r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (on_result) on_result(r);
    out.push_back(std::move(r));
  }
  return out;
}

inline std::string format_line(const CheckResult& r) {
  std::ostringstream os;
  os << "[" << (r.status == CheckStatus::pass ? "PASS" : r.status == CheckStatus::fail ? "FAIL" : "SKIP") << "] "
     << r.id << ". " << r.name << ": " << r.summary;
  os.precision(1);
  os << std::fixed << " [" << r.seconds << " s, budget " << r.budget_seconds << " s]";
  return os.str();
}

inline json to_json(const std::vector<CheckResult>& rs) {
  json a = json::array();
  bool all = true;
  for (const auto& r : rs) {
    all = all && r.status != CheckStatus::fail;
    a.push_back({{"id", r.id},
                 {"name", r.name},
                 {"status", to_string(r.status)},
                 {"summary", r.summary},
                 {"seconds", r.seconds},
                 {"budget_seconds", r.budget_seconds},
                 {"details", r.details}});
  }
  return {{"all_passed", all}, {"checks", a}};
}

}  // namespace willmore_lab
