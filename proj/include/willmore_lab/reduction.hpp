#pragma once

#include "willmore_lab/curvature.hpp"
#include "willmore_lab/errors.hpp"
#include "willmore_lab/fit.hpp"
#include "willmore_lab/geodesics.hpp"
#include "willmore_lab/parallel.hpp"
#include "willmore_lab/sphere_spectral.hpp"
#include "willmore_lab/surface.hpp"
#include "willmore_lab/willmore.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

namespace willmore_lab {

struct AuxiliaryOptions {
  Cutoff cut{};
  DirectionNorm norm = DirectionNorm::metric;
  FieldForm form = FieldForm::closed_form;
  double tol = 1e-10;  ///< on the sup of the coefficient change
  int max_iter = 50;
  double stall_ratio = 0.9;
  int stall_steps = 5;
  GeodesicOptions geodesic{};
};

struct AuxiliarySolution {
  Vec3 p = Vec3::Zero();
  double rho = 0.0;
  double epsilon = 0.0;
  SphericalFunction w;
  /// Sup of the coefficients of 2ρ³K[P I′] at the last evaluated iterate; this is
  /// the step the solver would take next, in the units of w.
  double residual = 0.0;
  double field_norm = 0.0;  ///< ‖P I′‖ in L²(S²) at the last evaluated iterate
  int iterations = 0;
  double contraction = 0.0;  ///< last ratio of successive changes
};

namespace detail {

inline double coeff_sup(const SphericalFunction& f) { return f.coeffs().cwiseAbs().maxCoeff(); }

}  // namespace detail

/// Quasi-Newton iteration w ← w − 2ρ³ K[P I′(Σ(w))], with K the inverse of Δ(Δ+2) on l ≥ 2.
inline AuxiliarySolution solve_auxiliary(const AmbientMetric& m, const SigmaFamily& fam, const AuxiliaryOptions& o = {},
                                         const std::optional<SphericalFunction>& w0 = std::nullopt) {
  if (!(o.tol > 0.0) || o.max_iter < 1) throw Error(ErrorCode::invalid_argument, "solver tolerance must be > 0");
  const double rho = fam.rho();
  AuxiliarySolution out;
  out.p = fam.center();
  out.rho = rho;
  out.epsilon = m.epsilon();
  SphericalFunction w = w0 ? project_perp(*w0) : SphericalFunction::zeros(fam.grid());
  double prev = std::numeric_limits<double>::quiet_NaN();
  int stalled = 0;
  for (int it = 1; it <= o.max_iter; ++it) {
    const ImmersedSphere s = fam.surface(w);
    const SurfaceGeometry G = surface_geometry(m, s);
    const SphericalFunction Pf = project_perp(normal_field(m, s, G, o.form));
    const SphericalFunction step = invert_on_perp(Pf) * (2.0 * rho * rho * rho);
    const double change = detail::coeff_sup(step);
    out.residual = change;
    out.field_norm = Pf.l2_norm();
    out.iterations = it;
    w = w - step;
    if (w.sup() >= 0.3)
      throw Error(ErrorCode::no_contraction, "iterate left the ball sup|w| < 0.3 at step " + std::to_string(it));
    if (it > 1) {
      out.contraction = change / prev;
      stalled = out.contraction > o.stall_ratio ? stalled + 1 : 0;
      if (stalled >= o.stall_steps)
        throw Error(ErrorCode::no_contraction, "change ratio above " + std::to_string(o.stall_ratio) + " for " +
                                                   std::to_string(o.stall_steps) + " steps");
    }
    prev = change;
    if (change < o.tol) {
      out.w = w;
      return out;
    }
  }
  throw Error(ErrorCode::step_limit, "auxiliary solver did not converge in " + std::to_string(o.max_iter) +
                                         " steps (last change " + std::to_string(out.residual) + ")");
}

inline AuxiliarySolution solve_auxiliary(const AmbientMetric& m, const Vec3& p, double rho, const GridPtr& grid,
                                         const AuxiliaryOptions& o = {},
                                         const std::optional<SphericalFunction>& w0 = std::nullopt) {
  return solve_auxiliary(m, SigmaFamily(m, p, rho, grid, o.cut, o.norm, o.geodesic), o, w0);
}

struct ReducedPoint {
  double phi = 0.0;
  AuxiliarySolution aux;
  EnergyReport energy;
  /// Full field I′ on Σ(w), l ≤ 1 part included. Filled only on request.
  SphericalFunction field;
  double field_norm = 0.0;  ///< ‖I′‖ in L²(dΣ)
};

/// Φ_ε(p,ρ) = I_ε(Σ(w_ε(p,ρ))).
inline ReducedPoint reduced_point(const AmbientMetric& m, const Vec3& p, double rho, const GridPtr& grid,
                                  const AuxiliaryOptions& o = {}, bool with_field = false) {
  const SigmaFamily fam(m, p, rho, grid, o.cut, o.norm, o.geodesic);
  ReducedPoint r;
  r.aux = solve_auxiliary(m, fam, o);
  const ImmersedSphere s = fam.surface(r.aux.w);
  const SurfaceGeometry G = surface_geometry(m, s);
  r.energy = energy(G, s);
  r.phi = r.energy.I;
  if (with_field) {
    r.field = normal_field(m, s, G, o.form);
    double acc = 0.0;
    for (int i = 0; i < G.n; ++i) acc += r.field.values()[i] * r.field.values()[i] * G.dA[i];
    r.field_norm = std::sqrt(acc);
  }
  return r;
}

inline double reduced_functional(const AmbientMetric& m, const Vec3& p, double rho, const GridPtr& grid,
                                 const AuxiliaryOptions& o = {}) {
  return reduced_point(m, p, rho, grid, o).phi;
}

/// Leading-order auxiliary solution ρ²[−Ric_p(Θ,Θ)/12 + R(p)/36] at the shooting directions Θ.
inline VectorXd leading_order_w(const CurvaturePack& P, double rho, const std::vector<Vec3>& theta) {
  VectorXd w(theta.size());
  for (size_t i = 0; i < theta.size(); ++i)
    w[i] = rho * rho * (-theta[i].dot(P.ricci * theta[i]) / 12.0 + P.scalar / 36.0);
  return w;
}

struct SmallRhoFit {
  double c4 = 0.0;
  double c5 = 0.0;
  double s_norm2 = 0.0;  ///< ‖S_p‖² at ε
  double predicted = 0.0;  ///< (π/5)‖S_p‖²
  /// |c₄ − predicted|/predicted, or the absolute error when s_null is set.
  double rel_err = 0.0;
  bool s_null = false;
  /// log-log slope of |Φ − c₄ρ⁴| against ρ
  double residual_slope = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> rho, phi;
};

/// ρ_small default and the 9 log-spaced fit radii on [0.05, 0.25].
inline std::vector<double> default_small_rho_window(double lo = 0.05, double hi = 0.25, int n = 9) {
  std::vector<double> r(n);
  for (int k = 0; k < n; ++k) r[k] = lo * std::pow(hi / lo, static_cast<double>(k) / (n - 1));
  return r;
}

/// Least-squares fit Φ_ε(p,ρ) ≈ c₄ρ⁴ + c₅ρ⁵ over the given radii.
inline SmallRhoFit small_rho_fit(const AmbientMetric& m, const Vec3& p, const std::vector<double>& rhos,
                                 const GridPtr& grid, const AuxiliaryOptions& o = {}) {
  if (rhos.size() < 3) throw Error(ErrorCode::fit_ill_conditioned, "small-rho fit needs >= 3 radii");
  for (double r : rhos)
    if (!(r > 0.0) || r > o.cut.R1) throw Error(ErrorCode::invalid_argument, "fit radii must lie in (0, R1]");
  SmallRhoFit f;
  f.rho = rhos;
  if (!m.is_flat()) {
    const auto P = curvature_pack(m, p, false);
    f.s_norm2 = P.norm2_traceless();
    double riem2 = 0.0;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) riem2 += P.riemann[a][b][c][d] * P.riemann[a][b][c][d];
    const double limit = 0.3 / std::sqrt(std::sqrt(riem2));
    for (double r : rhos)
      if (r > limit) throw Error(ErrorCode::invalid_argument, "fit radii must stay below 0.3/sqrt(|Riem|)");
  }
  f.phi.assign(rhos.size(), 0.0);
  parallel_for(static_cast<int>(rhos.size()), [&](int k) { f.phi[k] = reduced_functional(m, p, rhos[k], grid, o); });
  Eigen::MatrixXd A(rhos.size(), 2);
  VectorXd b(rhos.size());
  for (size_t k = 0; k < rhos.size(); ++k) {
    A(k, 0) = std::pow(rhos[k], 4);
    A(k, 1) = std::pow(rhos[k], 5);
    b[k] = f.phi[k];
  }
  if (b.cwiseAbs().maxCoeff() > 0.0) {
    const auto ls = least_squares(A, b);
    f.c4 = ls.coef[0];
    f.c5 = ls.coef[1];
  }
  f.predicted = std::numbers::pi / 5.0 * f.s_norm2;
  f.s_null = f.s_norm2 < 1e-14;
  f.rel_err = f.s_null ? std::abs(f.c4 - f.predicted) : std::abs(f.c4 - f.predicted) / f.predicted;
  std::vector<double> rr, res;
  for (size_t k = 0; k < rhos.size(); ++k) {
    const double d = f.phi[k] - f.c4 * std::pow(rhos[k], 4);
    if (d != 0.0) {
      rr.push_back(rhos[k]);
      res.push_back(d);
    }
  }
  if (rr.size() >= 2) f.residual_slope = loglog_fit(rr, res).slope;
  return f;
}

struct ScanSpec {
  Vec3 box_lo = Vec3::Constant(-1.0);
  Vec3 box_hi = Vec3::Constant(1.0);
  std::array<int, 3> n_p{5, 5, 5};
  double rho_min = 0.1;
  double rho_max = 1.5;
  int n_rho = 8;
  double refine_tol = 1e-3;  ///< golden-section stopping width in every coordinate
  int max_sweeps = 8;
};

struct ScanCell {
  Vec3 p = Vec3::Zero();
  double rho = 0.0;
  double phi = std::numeric_limits<double>::quiet_NaN();
  bool converged = false;
  double residual = std::numeric_limits<double>::quiet_NaN();
  std::string error;
};

struct ScanMaximum {
  Vec3 p = Vec3::Zero();
  double rho = 0.0;
  double phi = 0.0;
  std::array<int, 4> cell{};  ///< grid index of the seed cell
  /// finite-difference ∂²Φ along p_x, p_y, p_z, ρ at the refined point
  std::array<double, 4> curvature{};
  bool hessian_negative = false;  ///< all four diagonal second differences < 0
  int evaluations = 0;
  bool best = false;  ///< within 1e-9 of the largest reported value
};

struct ScanResult {
  ScanSpec spec;
  double epsilon = 0.0;
  std::vector<ScanCell> cells;  ///< index ((ix·ny + iy)·nz + iz)·n_rho + ir
  double boundary_sup = -std::numeric_limits<double>::infinity();
  std::vector<ScanMaximum> maxima;
  int failed = 0;
  std::vector<std::string> warnings;

  int index(int ix, int iy, int iz, int ir) const {
    return ((ix * spec.n_p[1] + iy) * spec.n_p[2] + iz) * spec.n_rho + ir;
  }
};

namespace detail {

inline double axis_value(double lo, double hi, int n, int k) { return n == 1 ? 0.5 * (lo + hi) : lo + (hi - lo) * k / (n - 1); }

/// Golden-section maximization of f on [a, b] down to width tol.
template <class Fn>
double golden_max(Fn&& f, double a, double b, double tol, double& fbest, int& evals) {
  const double r = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - r * (b - a), x2 = a + r * (b - a);
  double f1 = f(x1), f2 = f(x2);
  evals += 2;
  while (b - a > tol) {
    if (f1 >= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - r * (b - a);
      f1 = f(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + r * (b - a);
      f2 = f(x2);
    }
    ++evals;
  }
  if (f1 >= f2) {
    fbest = f1;
    return x1;
  }
  fbest = f2;
  return x2;
}

}  // namespace detail

/// Φ_ε over a (p, ρ) grid; grid-local maxima off the boundary are refined by
/// coordinate-wise golden section and kept when they exceed the boundary sup.
inline ScanResult scan_and_locate(const AmbientMetric& m, const ScanSpec& spec, const GridPtr& grid,
                                  const AuxiliaryOptions& o = {}) {
  for (int k = 0; k < 3; ++k)
    if (spec.n_p[k] < 3 || !(spec.box_hi[k] > spec.box_lo[k]))
      throw Error(ErrorCode::invalid_argument, "scan box needs >= 3 points and positive extent per axis");
  if (spec.n_rho < 3 || !(spec.rho_min > 0.0) || !(spec.rho_max > spec.rho_min))
    throw Error(ErrorCode::invalid_argument, "scan needs >= 3 radii in a positive range");
  if (!(spec.refine_tol > 0.0)) throw Error(ErrorCode::invalid_argument, "refinement tolerance must be > 0");
  if (!m.is_flat()) {
    const Vec3 c = m.perturbation().center();
    if ((c - spec.box_lo).minCoeff() < 0.0 || (spec.box_hi - c).minCoeff() < 0.0)
      throw Error(ErrorCode::invalid_argument, "scan box must contain the perturbation center");
  }

  ScanResult out;
  out.spec = spec;
  out.epsilon = m.epsilon();
  const int nx = spec.n_p[0], ny = spec.n_p[1], nz = spec.n_p[2], nr = spec.n_rho;
  out.cells.resize(static_cast<size_t>(nx) * ny * nz * nr);
  auto coord = [&](int k, int i) { return detail::axis_value(spec.box_lo[k], spec.box_hi[k], spec.n_p[k], i); };
  auto radius = [&](int i) { return detail::axis_value(spec.rho_min, spec.rho_max, nr, i); };
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz)
        for (int ir = 0; ir < nr; ++ir) {
          auto& c = out.cells[out.index(ix, iy, iz, ir)];
          c.p = Vec3(coord(0, ix), coord(1, iy), coord(2, iz));
          c.rho = radius(ir);
        }

  // each cell runs its own single-threaded solver
  parallel_for(static_cast<int>(out.cells.size()), [&](int i) {
        auto& c = out.cells[i];
        try {
          const auto r = reduced_point(m, c.p, c.rho, grid, o);
          c.phi = r.phi;
          c.residual = r.aux.residual;
          c.converged = true;
        } catch (const Error& e) {
          c.error = e.what();
        }
      });

  auto is_boundary = [&](int ix, int iy, int iz, int ir) {
    return ix == 0 || iy == 0 || iz == 0 || ir == 0 || ix == nx - 1 || iy == ny - 1 || iz == nz - 1 || ir == nr - 1;
  };
  for (int ix = 0; ix < nx; ++ix)
    for (int iy = 0; iy < ny; ++iy)
      for (int iz = 0; iz < nz; ++iz)
        for (int ir = 0; ir < nr; ++ir) {
          const auto& c = out.cells[out.index(ix, iy, iz, ir)];
          if (!c.converged) {
            ++out.failed;
            out.warnings.push_back("cell (" + std::to_string(ix) + "," + std::to_string(iy) + "," +
                                   std::to_string(iz) + "," + std::to_string(ir) + ") excluded: " + c.error);
            continue;
          }
          if (is_boundary(ix, iy, iz, ir)) out.boundary_sup = std::max(out.boundary_sup, c.phi);
        }

  // interior cells at least as large as all converged neighbours in the 3⁴ − 1 stencil
  std::vector<std::array<int, 4>> seeds;
  for (int ix = 1; ix < nx - 1; ++ix)
    for (int iy = 1; iy < ny - 1; ++iy)
      for (int iz = 1; iz < nz - 1; ++iz)
        for (int ir = 1; ir < nr - 1; ++ir) {
          const auto& c = out.cells[out.index(ix, iy, iz, ir)];
          if (!c.converged || !(c.phi > out.boundary_sup)) continue;
          bool local = true;
          for (int d = 0; d < 81 && local; ++d) {
            const int dx = d % 3 - 1, dy = d / 3 % 3 - 1, dz = d / 9 % 3 - 1, dr = d / 27 - 1;
            const auto& q = out.cells[out.index(ix + dx, iy + dy, iz + dz, ir + dr)];
            if (q.converged && q.phi > c.phi) local = false;
          }
          if (local) seeds.push_back({ix, iy, iz, ir});
        }

  const Vec3 step((spec.box_hi - spec.box_lo).cwiseQuotient(Vec3(nx - 1, ny - 1, nz - 1)));
  const double rstep = (spec.rho_max - spec.rho_min) / (nr - 1);
  std::vector<ScanMaximum> found(seeds.size());
  parallel_for(
      static_cast<int>(seeds.size()),
      [&](int k) {
        const auto& sd = seeds[k];
        const auto& c0 = out.cells[out.index(sd[0], sd[1], sd[2], sd[3])];
        std::array<double, 4> x{c0.p[0], c0.p[1], c0.p[2], c0.rho};
        const std::array<double, 4> h{step[0], step[1], step[2], rstep};
        ScanMaximum mx;
        mx.cell = sd;
        auto phi_at = [&](const std::array<double, 4>& y) {
          try {
            return reduced_functional(m, Vec3(y[0], y[1], y[2]), y[3], grid, o);
          } catch (const Error&) {
            return -std::numeric_limits<double>::infinity();
          }
        };
        double best = c0.phi;
        for (int sweep = 0; sweep < spec.max_sweeps; ++sweep) {
          double moved = 0.0;
          for (int a = 0; a < 4; ++a) {
            const double lo = std::max(x[a] - h[a], a < 3 ? spec.box_lo[a] : spec.rho_min);
            const double hi = std::min(x[a] + h[a], a < 3 ? spec.box_hi[a] : spec.rho_max);
            double fb = 0.0;
            auto line = [&](double t) {
              auto y = x;
              y[a] = t;
              return phi_at(y);
            };
            const double t = detail::golden_max(line, lo, hi, spec.refine_tol, fb, mx.evaluations);
            if (fb > best) {
              moved = std::max(moved, std::abs(t - x[a]));
              x[a] = t;
              best = fb;
            }
          }
          if (moved < spec.refine_tol) break;
        }
        mx.p = Vec3(x[0], x[1], x[2]);
        mx.rho = x[3];
        mx.phi = best;
        bool neg = true;
        for (int a = 0; a < 4; ++a) {
          const double d = 4.0 * spec.refine_tol;
          auto yp = x, ym = x;
          yp[a] += d;
          ym[a] -= d;
          mx.curvature[a] = (phi_at(yp) - 2.0 * best + phi_at(ym)) / (d * d);
          mx.evaluations += 2;
          neg = neg && mx.curvature[a] < 0.0;
        }
        mx.hessian_negative = neg;
        found[k] = mx;
      });

  // seeds can converge to the same point; keep one per refinement-tolerance ball
  double top = -std::numeric_limits<double>::infinity();
  for (const auto& f : found) {
    if (!(f.phi > out.boundary_sup)) continue;
    bool dup = false;
    for (const auto& g : out.maxima)
      if ((g.p - f.p).cwiseAbs().maxCoeff() < 2.0 * spec.refine_tol && std::abs(g.rho - f.rho) < 2.0 * spec.refine_tol)
        dup = true;
    if (!dup) {
      out.maxima.push_back(f);
      top = std::max(top, f.phi);
    }
  }
  for (auto& f : out.maxima) f.best = f.phi >= top - 1e-9;
  return out;
}

}  // namespace willmore_lab
