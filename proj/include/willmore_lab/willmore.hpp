#pragma once

#include "willmore_lab/curvature.hpp"
#include "willmore_lab/errors.hpp"
#include "willmore_lab/fit.hpp"
#include "willmore_lab/metric.hpp"
#include "willmore_lab/parallel.hpp"
#include "willmore_lab/sphere_spectral.hpp"
#include "willmore_lab/surface.hpp"

#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <vector>

namespace willmore_lab {

struct EnergyReport {
  double I = 0.0;  ///< ∫(H²/4 − D)dΣ
  double W = 0.0;  ///< ∫H²/4 dΣ
  double area = 0.0;
  int n_theta = 0;
  int L = 0;
  /// |I(N_θ) − I(N_θ + 8)| when the surface could be rebuilt on a finer grid, else NaN.
  double quad_error = std::numeric_limits<double>::quiet_NaN();
};

inline EnergyReport energy(const SurfaceGeometry& G, const ImmersedSphere& s) {
  EnergyReport r;
  for (int i = 0; i < G.n; ++i) {
    r.I += G.integrand[i] * G.dA[i];
    r.W += 0.25 * G.H[i] * G.H[i] * G.dA[i];
  }
  r.area = G.area();
  if (s.grid) {
    r.n_theta = s.grid->n_theta();
    r.L = s.grid->L();
  }
  return r;
}

inline EnergyReport energy(const AmbientMetric& m, const ImmersedSphere& s) {
  return energy(surface_geometry(m, s), s);
}

using SurfaceBuilder = std::function<ImmersedSphere(const GridPtr&)>;

/// Energy on `grid`, with the quadrature error estimated by rebuilding at N_θ + 8.
inline EnergyReport energy(const AmbientMetric& m, const SurfaceBuilder& build, const GridPtr& grid) {
  EnergyReport r = energy(m, build(grid));
  const int nt = grid->n_theta() + 8;
  const int np = grid->n_phi() * nt / grid->n_theta();
  const auto fine = make_grid(nt, grid->L(), std::max(np, 2 * grid->L() + 1));
  r.quad_error = std::abs(energy(m, build(fine)).I - r.I);
  return r;
}

/// Which normal-variation field to evaluate.
enum class FieldForm {
  /// ½Δ_M H + H(H²/4 − D) + Σ R(N,e_i,N,e_j)h_ij − ½H Σ R(N,e_i,N,e_i) + Σ (∇_{e_i}R)(N,e_j,e_j,e_i)
  closed_form,
  /// exact L² gradient of I: ½Δ_M H + H(H²/4 − D) + ½H Ric(N,N) − H Sec(TM) + ½∇_N R − (∇_N Ric)(N,N)
  /// − 2 div_M(Ric(N,·)ᵀ), with Sec(TM) = R/2 − Ric(N,N)
  exact,
};

inline const char* to_string(FieldForm f) { return f == FieldForm::closed_form ? "closed_form" : "exact"; }

/// Normal-variation field of I at every node, for displacements along the inward normal.
/// The curvature terms are contracted in the coordinate frame, so no principal frame is needed.
inline SphericalFunction normal_field(const AmbientMetric& m, const ImmersedSphere& s, const SurfaceGeometry& G,
                                      FieldForm form) {
  if (!s.grid) throw Error(ErrorCode::invalid_argument, "the Euler-Lagrange field needs a sphere-grid surface");
  const bool curved = !m.is_flat();
  if (curved && m.perturbation().max_order() < 3)
    throw Error(ErrorCode::curvature_order_missing, "the Euler-Lagrange field needs third derivatives of h");
  const SphereGrid& grid = *s.grid;
  const auto DH = grid.synthesize_all(grid.analyze(G.H));
  VectorXd out(G.n);
  parallel_for(G.n, [&](int i) {
    const Mat3& ga = G.g_amb[i];
    const Mat2 gi = G.g[i].inverse();
    const std::array<Vec3, 2> Z{s.X1[i], s.X2[i]};
    const std::array<std::array<Vec3, 2>, 2> Xij{{{s.X11[i], s.X12[i]}, {s.X12[i], s.X22[i]}}};
    const double dH[2] = {DH.ft[i], DH.fp[i]};
    const double ddH[2][2] = {{DH.ftt[i], DH.ftp[i]}, {DH.ftp[i], DH.fpp[i]}};
    double lap = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) {
        const Vec3 cov = Xij[a][b] + detail::gamma_apply(G.gamma[i], Z[a], Z[b]);
        const Eigen::Vector2d low(detail::gdot(ga, cov, Z[0]), detail::gdot(ga, cov, Z[1]));
        const Eigen::Vector2d up = gi * low;
        lap += gi(a, b) * (ddH[a][b] - up[0] * dH[0] - up[1] * dH[1]);
      }
    double val = 0.5 * lap + G.H[i] * G.integrand[i];
    if (curved) {
      const CurvaturePack P = curvature_pack(m, s.X[i], true);
      const Vec3& N = G.N[i];
      const double H = G.H[i];
      const Mat2 hup = gi * G.h[i] * gi;
      // tangential projector P^{μν} = g̊^{ij} Z_i^μ Z_j^ν
      Mat3 Pt = Mat3::Zero();
      for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) Pt += gi(a, b) * Z[a] * Z[b].transpose();
      if (form == FieldForm::closed_form) {
        Mat2 T;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) {
            double t = 0.0;
            for (int q = 0; q < 3; ++q)
              for (int r = 0; r < 3; ++r)
                for (int u = 0; u < 3; ++u)
                  for (int v = 0; v < 3; ++v) t += P.riemann[q][r][u][v] * N[q] * Z[a][r] * N[u] * Z[b][v];
            T(a, b) = t;
          }
        val += T.cwiseProduct(hup).sum() - 0.5 * H * T.cwiseProduct(gi).sum();
        double nab = 0.0;
        for (int k = 0; k < 3; ++k)
          for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b)
              for (int c = 0; c < 3; ++c)
                for (int d = 0; d < 3; ++d) nab += P.nabla_riemann[k][a][b][c][d] * N[a] * Pt(b, c) * Pt(k, d);
        val += nab;
      } else {
        // (∇_e Ric)_bd = g^{ac} (∇_e R)_abcd
        T333<double> dRic{};
        for (int e = 0; e < 3; ++e)
          for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d) {
              double t = 0.0;
              for (int a = 0; a < 3; ++a)
                for (int c = 0; c < 3; ++c) t += P.metric_inv(a, c) * P.nabla_riemann[e][a][b][c][d];
              dRic[e][b][d] = t;
            }
        const double ric_nn = N.dot(P.ricci * N);
        double dR_n = 0.0, dric_nnn = 0.0, div = 0.0;
        for (int e = 0; e < 3; ++e)
          for (int b = 0; b < 3; ++b)
            for (int d = 0; d < 3; ++d) {
              dR_n += N[e] * P.metric_inv(b, d) * dRic[e][b][d];
              dric_nnn += N[e] * N[b] * N[d] * dRic[e][b][d];
              div += Pt(e, d) * N[b] * dRic[e][b][d];
            }
        double h_ric = 0.0;
        for (int a = 0; a < 2; ++a)
          for (int b = 0; b < 2; ++b) h_ric += hup(a, b) * Z[a].dot(P.ricci * Z[b]);
        const double sec = 0.5 * P.scalar - ric_nn;
        // div_M(Ric(N,·)ᵀ) = Σ(∇_{e_i}Ric)(N,e_i) − Σ h_ij Ric_ij + H Ric(N,N)
        val += 0.5 * H * ric_nn - H * sec + 0.5 * dR_n - dric_nnn - 2.0 * (div - h_ric + H * ric_nn);
      }
    }
    out[i] = val;
  });
  return SphericalFunction::from_values(s.grid, std::move(out));
}

/// Closed-form Euler-Lagrange field I′.
inline SphericalFunction euler_lagrange(const AmbientMetric& m, const ImmersedSphere& s, const SurfaceGeometry& G) {
  return normal_field(m, s, G, FieldForm::closed_form);
}

inline SphericalFunction euler_lagrange(const AmbientMetric& m, const ImmersedSphere& s) {
  return euler_lagrange(m, s, surface_geometry(m, s));
}

/// dI/dt = ∫ first_variation · g(∂_t X, N) dΣ.
inline SphericalFunction first_variation(const AmbientMetric& m, const ImmersedSphere& s, const SurfaceGeometry& G) {
  return normal_field(m, s, G, FieldForm::exact);
}

inline SphericalFunction first_variation(const AmbientMetric& m, const ImmersedSphere& s) {
  return first_variation(m, s, surface_geometry(m, s));
}

/// Inversion x ↦ c + r²(x − c)/|x − c|² or similarity x ↦ s·Qx + b.
struct MoebiusMap {
  enum class Kind { inversion, similarity };
  Kind kind = Kind::similarity;
  Vec3 center = Vec3::Zero();
  double radius = 1.0;
  double scale = 1.0;
  Mat3 rotation = Mat3::Identity();
  Vec3 shift = Vec3::Zero();

  static MoebiusMap inversion(const Vec3& c, double r) {
    MoebiusMap f;
    f.kind = Kind::inversion;
    f.center = c;
    f.radius = r;
    return f;
  }
  static MoebiusMap similarity(double s, const Mat3& Q, const Vec3& b) {
    MoebiusMap f;
    f.scale = s;
    f.rotation = Q;
    f.shift = b;
    return f;
  }

  Vec3 operator()(const Vec3& x) const {
    if (kind == Kind::similarity) return scale * (rotation * x) + shift;
    const Vec3 y = x - center;
    return center + radius * radius * y / y.squaredNorm();
  }

  /// Pushes a 2-jet (x, x_i, x_ij) through the map.
  void push(const Vec3& x, const Vec3& u, const Vec3& v, const Vec3& uu, const Vec3& uv, const Vec3& vv, Vec3& U,
            Vec3& V, Vec3& UU, Vec3& UV, Vec3& VV) const {
    if (kind == Kind::similarity) {
      const Mat3 A = scale * rotation;
      U = A * u, V = A * v, UU = A * uu, UV = A * uv, VV = A * vv;
      return;
    }
    const Vec3 y = x - center;
    const double s = y.squaredNorm(), r2 = radius * radius;
    auto D = [&](const Vec3& a) -> Vec3 { return r2 * (a / s - 2.0 * y * y.dot(a) / (s * s)); };
    auto D2 = [&](const Vec3& a, const Vec3& b) -> Vec3 {
      return r2 * (-2.0 * (a * y.dot(b) + b * y.dot(a) + y * a.dot(b)) / (s * s) +
                   8.0 * y * y.dot(a) * y.dot(b) / (s * s * s));
    };
    U = D(u), V = D(v);
    UU = D(uu) + D2(u, u);
    UV = D(uv) + D2(u, v);
    VV = D(vv) + D2(v, v);
  }
};

inline ImmersedSphere moebius_transform(const ImmersedSphere& s, const MoebiusMap& f) {
  if (f.kind == MoebiusMap::Kind::inversion) {
    double dmin = std::numeric_limits<double>::infinity();
    for (const auto& x : s.X) dmin = std::min(dmin, (x - f.center).norm());
    if (!(dmin > 1e-3))
      throw Error(ErrorCode::center_too_close, "inversion center within 1e-3 of the surface");
  }
  ImmersedSphere t = s;
  t.kind = SurfaceKind::moebius_image;
  t.has_center = false;
  t.w = SphericalFunction();
  for (int i = 0; i < s.size(); ++i) {
    t.X[i] = f(s.X[i]);
    f.push(s.X[i], s.X1[i], s.X2[i], s.X11[i], s.X12[i], s.X22[i], t.X1[i], t.X2[i], t.X11[i], t.X12[i], t.X22[i]);
  }
  return t;
}

/// Torus of revolution ((R + r cos v)cos u, (R + r cos v)sin u, r sin v) on an
/// n_u × n_v periodic grid. Normal orientation points into the tube.
inline ImmersedSphere torus_surface(double R, double r, int n_u, int n_v) {
  if (!(R > r && r > 0.0)) throw Error(ErrorCode::invalid_argument, "torus needs R > r > 0");
  ImmersedSphere s;
  s.kind = SurfaceKind::torus_chart;
  s.resize(n_u * n_v);
  const double du = 2.0 * std::numbers::pi / n_u, dv = 2.0 * std::numbers::pi / n_v;
  for (int a = 0; a < n_u; ++a)
    for (int b = 0; b < n_v; ++b) {
      const int i = a * n_v + b;
      const double u = a * du, v = b * dv;
      const double cu = std::cos(u), su = std::sin(u), cv = std::cos(v), sv = std::sin(v);
      const double q = R + r * cv;
      s.X[i] = Vec3(q * cu, q * su, r * sv);
      s.X1[i] = Vec3(-q * su, q * cu, 0.0);
      s.X2[i] = Vec3(-r * sv * cu, -r * sv * su, r * cv);
      s.X11[i] = Vec3(-q * cu, -q * su, 0.0);
      s.X12[i] = Vec3(r * sv * su, -r * sv * cu, 0.0);
      s.X22[i] = Vec3(-r * cv * cu, -r * cv * su, -r * sv);
      s.param_weight[i] = du * dv;
    }
  return s;
}

struct EpsilonFitOptions {
  bool mirror = true;  ///< also sample −ε
  int degree = 5;      ///< polynomial degree in ε; terms above 2 are nuisance terms
};

/// I_ε ≈ I0 + G1 ε + G2 ε² (+ higher nuisance terms).
struct EpsilonFit {
  double I0 = 0.0, G1 = 0.0, G2 = 0.0;
  std::vector<double> higher;  ///< coefficients of ε³, ε⁴, …
  double residual = 0.0;       ///< rms fit residual
  std::vector<double> eps, values;
};

using MetricSurfaceBuilder = std::function<ImmersedSphere(const AmbientMetric&)>;

inline EpsilonFit epsilon_fit(const MetricPerturbation& h, const MetricSurfaceBuilder& build,
                              const std::vector<double>& eps, const EpsilonFitOptions& o = {}) {
  if (eps.size() < 4) throw Error(ErrorCode::fit_ill_conditioned, "need at least 4 epsilon samples");
  EpsilonFit f;
  for (double e : eps) {
    if (!(e > 0.0)) throw Error(ErrorCode::fit_ill_conditioned, "epsilon samples must be > 0");
    f.eps.push_back(e);
    if (o.mirror) f.eps.push_back(-e);
  }
  const int deg = std::max(2, o.degree);
  if (static_cast<int>(f.eps.size()) < deg + 2)
    throw Error(ErrorCode::fit_ill_conditioned, "too few samples for the fit degree");
  for (double e : f.eps) {
    AmbientMetric m(h, e);
    f.values.push_back(energy(m, build(m)).I);
  }
  const int n = static_cast<int>(f.eps.size());
  Eigen::MatrixXd A(n, deg + 1);
  Eigen::VectorXd b(n);
  for (int i = 0; i < n; ++i) {
    double p = 1.0;
    for (int k = 0; k <= deg; ++k, p *= f.eps[i]) A(i, k) = p;
    b[i] = f.values[i];
  }
  const auto ls = least_squares(A, b);
  f.I0 = ls.coef[0];
  f.G1 = ls.coef[1];
  f.G2 = ls.coef[2];
  for (int k = 3; k <= deg; ++k) f.higher.push_back(ls.coef[k]);
  f.residual = ls.rms_residual;
  return f;
}

/// The same surface written as p̃ + ρ̃(1 − w̃(Θ))Θ with w̃ free of degrees l ≤ 1.
struct Regraph {
  Vec3 p = Vec3::Zero();
  double rho = 0.0;
  SphericalFunction w;
  double residual = 0.0;  ///< max |l ≤ 1 coefficient| before projection
  int iterations = 0;
};

inline Regraph regraph_orthogonal(const ImmersedSphere& s) {
  if (!s.grid || !s.has_center) throw Error(ErrorCode::invalid_argument, "regraph needs a graph over a sphere");
  if (!s.w.empty() && s.w.sup() >= 0.2) throw Error(ErrorCode::invalid_argument, "sup|u| must be < 0.2");
  const GridPtr& grid = s.grid;
  const int n = grid->size();
  std::array<VectorXd, 3> coef;
  for (int c = 0; c < 3; ++c) {
    VectorXd comp(n);
    for (int i = 0; i < n; ++i) comp[i] = s.X[i][c];
    coef[c] = grid->analyze(comp);
  }
  VectorXd r;
  std::vector<Eigen::Vector2d> found;
  auto graph = [&](const Eigen::Vector4d& x, VectorXd& w) -> Eigen::Vector4d {
    if (int bad = detail::invert_rays(*grid, coef, x.head<3>(), r, found); bad >= 0)
      throw Error(ErrorCode::newton_diverged, "re-graphing ray inversion failed at node " + std::to_string(bad));
    w = VectorXd::Ones(n) - r / x[3];
    const VectorXd a = grid->analyze(w);
    return a.head<4>();
  };
  Eigen::Vector4d x;
  x << s.center, s.rho;
  VectorXd w;
  Regraph out;
  Eigen::Vector4d F = graph(x, w);
  for (int it = 0; it < 30; ++it) {
    if (F.cwiseAbs().maxCoeff() < 1e-10) {
      out.iterations = it;
      out.p = x.head<3>();
      out.rho = x[3];
      out.residual = F.cwiseAbs().maxCoeff();
      out.w = project_perp(SphericalFunction::from_values(grid, w));
      return out;
    }
    Eigen::Matrix4d J;
    VectorXd tmp;
    for (int k = 0; k < 4; ++k) {
      const double hk = 1e-6 * s.rho;
      Eigen::Vector4d xp = x, xm = x;
      xp[k] += hk;
      xm[k] -= hk;
      J.col(k) = (graph(xp, tmp) - graph(xm, tmp)) / (2.0 * hk);
    }
    x -= J.fullPivLu().solve(F);
    F = graph(x, w);
  }
  throw Error(ErrorCode::newton_diverged, "re-graphing Newton did not converge in 30 iterations");
}

}  // namespace willmore_lab
