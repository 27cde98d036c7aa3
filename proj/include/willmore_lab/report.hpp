#pragma once

#include "willmore_lab/config.hpp"
#include "willmore_lab/curvature.hpp"
#include "willmore_lab/reduction.hpp"

#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

namespace willmore_lab {

namespace detail {

/// Shortest text that round-trips the double; NaN and inf as JSON-safe strings.
inline std::string num(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline json num_json(double x) { return std::isfinite(x) ? json(x) : json(num(x)); }

}  // namespace detail

inline constexpr const char* kScanCsvHeader = "px,py,pz,rho,phi,converged,residual";

/// One row per cell in index order.
inline void write_scan_csv(std::ostream& os, const ScanResult& r) {
  using detail::num;
  os << kScanCsvHeader << '\n';
  for (const auto& c : r.cells)
    os << num(c.p[0]) << ',' << num(c.p[1]) << ',' << num(c.p[2]) << ',' << num(c.rho) << ',' << num(c.phi) << ','
       << (c.converged ? 1 : 0) << ',' << num(c.residual) << '\n';
}

inline json scan_summary_json(const ScanResult& r) {
  using detail::num_json;
  json maxima = json::array();
  for (const auto& m : r.maxima)
    maxima.push_back({{"p", detail::to_json(m.p)},
                      {"rho", m.rho},
                      {"phi", m.phi},
                      {"seed_cell", m.cell},
                      {"second_differences", {m.curvature[0], m.curvature[1], m.curvature[2], m.curvature[3]}},
                      {"hessian_negative", m.hessian_negative},
                      {"best", m.best},
                      {"evaluations", m.evaluations}});
  const auto& s = r.spec;
  return {{"epsilon", r.epsilon},
          {"boundary_sup", num_json(r.boundary_sup)},
          {"maxima", maxima},
          {"cells", r.cells.size()},
          {"failed_cells", r.failed},
          {"warnings", r.warnings},
          {"parameters",
           {{"box_lo", detail::to_json(s.box_lo)},
            {"box_hi", detail::to_json(s.box_hi)},
            {"n_p", s.n_p},
            {"rho_min", s.rho_min},
            {"rho_max", s.rho_max},
            {"n_rho", s.n_rho},
            {"refine_tol", s.refine_tol},
            {"max_sweeps", s.max_sweeps}}}};
}

inline json to_json(const CurvaturePack& P) {
  auto mat = [](const Mat3& m) { return detail::to_json(m); };
  json riem = json::array();
  for (int a = 0; a < 3; ++a) {
    json ja = json::array();
    for (int b = 0; b < 3; ++b) {
      json jb = json::array();
      for (int c = 0; c < 3; ++c) {
        json jc = json::array();
        for (int d = 0; d < 3; ++d) jc.push_back(P.riemann[a][b][c][d]);
        jb.push_back(jc);
      }
      ja.push_back(jb);
    }
    riem.push_back(ja);
  }
  return {{"point", detail::to_json(P.point)},
          {"metric", mat(P.metric)},
          {"riemann", riem},
          {"ricci", mat(P.ricci)},
          {"scalar", P.scalar},
          {"traceless_ricci", mat(P.traceless)},
          {"norm2_traceless", P.norm2_traceless()}};
}

struct IdentityResiduals {
  json values = json::object();
  double scale = 0.0;  ///< max |R_abcd|, the reference for the relative tolerance
  bool ok = true;
};

/// Algebraic Riemann symmetries, first and second Bianchi, the Ricci contraction and tr S = 0,
/// each as a max abs residual checked against 1e-10·(1 + scale).
inline IdentityResiduals curvature_identity_residuals(const CurvaturePack& P) {
  const auto& R = P.riemann;
  double anti_ab = 0, anti_cd = 0, pair = 0, bianchi1 = 0, bianchi2 = 0, ricci = 0;
  IdentityResiduals out;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          out.scale = std::max(out.scale, std::abs(R[a][b][c][d]));
          anti_ab = std::max(anti_ab, std::abs(R[a][b][c][d] + R[b][a][c][d]));
          anti_cd = std::max(anti_cd, std::abs(R[a][b][c][d] + R[a][b][d][c]));
          pair = std::max(pair, std::abs(R[a][b][c][d] - R[c][d][a][b]));
          bianchi1 = std::max(bianchi1, std::abs(R[a][b][c][d] + R[a][c][d][b] + R[a][d][b][c]));
          if (P.has_nabla)
            for (int e = 0; e < 3; ++e)
              bianchi2 = std::max(bianchi2, std::abs(P.nabla_riemann[e][a][b][c][d] + P.nabla_riemann[c][a][b][d][e] +
                                                     P.nabla_riemann[d][a][b][e][c]));
        }
  for (int b = 0; b < 3; ++b)
    for (int d = 0; d < 3; ++d) {
      double acc = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) acc += P.metric_inv(a, c) * R[a][b][c][d];
      ricci = std::max(ricci, std::abs(acc - P.ricci(b, d)));
    }
  const double trace = std::abs((P.metric_inv * P.traceless).trace());
  out.values = {{"antisymmetry_ab", anti_ab}, {"antisymmetry_cd", anti_cd}, {"pair_symmetry", pair},
                {"first_bianchi", bianchi1},  {"ricci_contraction", ricci},  {"traceless_trace", trace}};
  if (P.has_nabla) out.values["second_bianchi"] = bianchi2;
  const double tol = 1e-10 * (1.0 + out.scale);
  for (const auto& [k, v] : out.values.items()) out.ok = out.ok && v.get<double>() < tol;
  out.values["tolerance"] = tol;
  return out;
}

}  // namespace willmore_lab
