#pragma once

#include "willmore_lab/curvature.hpp"
#include "willmore_lab/errors.hpp"
#include "willmore_lab/metric.hpp"
#include "willmore_lab/parallel.hpp"
#include "willmore_lab/sphere_spectral.hpp"

#include <cmath>
#include <vector>

namespace willmore_lab {

enum class SurfaceKind { standard_graph, geodesic_graph, blended, moebius_image, torus_chart };

inline const char* to_string(SurfaceKind k) {
  switch (k) {
    case SurfaceKind::standard_graph: return "standard_graph";
    case SurfaceKind::geodesic_graph: return "geodesic_graph";
    case SurfaceKind::blended: return "blended";
    case SurfaceKind::moebius_image: return "moebius_image";
    case SurfaceKind::torus_chart: return "torus_chart";
  }
  return "unknown";
}

/// Parametrized closed surface sampled at quadrature nodes, with first and second
/// coordinate derivatives. For sphere kinds the coordinates are (θ, φ) of `grid`.
struct ImmersedSphere {
  SurfaceKind kind = SurfaceKind::standard_graph;
  GridPtr grid;  ///< null for the torus chart
  std::vector<Vec3> X, X1, X2, X11, X12, X22;
  /// ∫F dΣ = Σ_i param_weight[i]·sqrt(det g̊_i)·F_i
  std::vector<double> param_weight;
  bool has_center = false;
  Vec3 center = Vec3::Zero();
  double rho = 0.0;
  SphericalFunction w;  ///< graph function when graph-typed

  int size() const { return static_cast<int>(X.size()); }

  void resize(int n) {
    for (auto* v : {&X, &X1, &X2, &X11, &X12, &X22}) v->assign(n, Vec3::Zero());
    param_weight.assign(n, 0.0);
  }
};

namespace detail {

inline void sphere_weights(const SphereGrid& g, std::vector<double>& out) {
  out.resize(g.size());
  for (int j = 0; j < g.n_theta(); ++j) {
    const double w = g.weight(j) / std::sin(g.theta(j));
    for (int k = 0; k < g.n_phi(); ++k) out[g.node(j, k)] = w;
  }
}

/// Θ and its coordinate derivatives at node (j, k).
struct ThetaJet {
  Vec3 T, Tt, Tp, Ttt, Ttp, Tpp;
};

inline ThetaJet theta_jet(double t, double p) {
  ThetaJet J;
  const double st = std::sin(t), ct = std::cos(t);
  J.T = SphereGrid::unit(t, p);
  J.Tt = frame_theta1(t, p);
  J.Tp = st * frame_theta2(t, p);
  J.Ttt = -J.T;
  J.Ttp = ct * frame_theta2(t, p);
  J.Tpp = Vec3(-st * std::cos(p), -st * std::sin(p), 0.0);
  return J;
}

}  // namespace detail

/// X = p + ρ(1 − u(Θ))Θ with analytic derivatives of Θ and spectral derivatives of u.
inline ImmersedSphere standard_graph(const Vec3& p, double rho, const SphericalFunction& u) {
  const GridPtr& g = u.grid();
  ImmersedSphere s;
  s.kind = SurfaceKind::standard_graph;
  s.grid = g;
  s.resize(g->size());
  detail::sphere_weights(*g, s.param_weight);
  s.has_center = true;
  s.center = p;
  s.rho = rho;
  s.w = u;
  const auto D = g->synthesize_all(u.coeffs());
  for (int j = 0; j < g->n_theta(); ++j)
    for (int k = 0; k < g->n_phi(); ++k) {
      const int i = g->node(j, k);
      const auto J = detail::theta_jet(g->theta(j), g->phi(k));
      const double r = 1.0 - u.values()[i];
      const double rt = -D.ft[i], rp = -D.fp[i];
      const double rtt = -D.ftt[i], rtp = -D.ftp[i], rpp = -D.fpp[i];
      s.X[i] = p + rho * r * J.T;
      s.X1[i] = rho * (rt * J.T + r * J.Tt);
      s.X2[i] = rho * (rp * J.T + r * J.Tp);
      s.X11[i] = rho * (rtt * J.T + 2.0 * rt * J.Tt + r * J.Ttt);
      s.X12[i] = rho * (rtp * J.T + rt * J.Tp + rp * J.Tt + r * J.Ttp);
      s.X22[i] = rho * (rpp * J.T + 2.0 * rp * J.Tp + r * J.Tpp);
    }
  return s;
}

/// Spectral first and second derivatives of a vector field sampled on the grid.
struct VectorFieldJet {
  std::vector<Vec3> f, ft, fp, ftt, ftp, fpp;
};

inline VectorFieldJet differentiate(const SphereGrid& g, const std::vector<Vec3>& v) {
  VectorFieldJet J;
  const int n = g.size();
  for (auto* a : {&J.f, &J.ft, &J.fp, &J.ftt, &J.ftp, &J.fpp}) a->assign(n, Vec3::Zero());
  for (int c = 0; c < 3; ++c) {
    VectorXd comp(n);
    for (int i = 0; i < n; ++i) comp[i] = v[i][c];
    const auto D = g.synthesize_all(g.analyze(comp));
    for (int i = 0; i < n; ++i) {
      J.f[i][c] = v[i][c];
      J.ft[i][c] = D.ft[i];
      J.fp[i][c] = D.fp[i];
      J.ftt[i][c] = D.ftt[i];
      J.ftp[i][c] = D.ftp[i];
      J.fpp[i][c] = D.fpp[i];
    }
  }
  return J;
}

namespace detail {

/// Y(θ, φ) = Σ coef − shift is a closed surface around the origin. For every grid
/// direction T, finds the parameter where Y is parallel to T by Newton iteration
/// on (Y·Θ₁, Y·Θ̄₂), and returns r = Y·T there. Returns the first failing node or −1.
inline int invert_rays(const SphereGrid& g, const std::array<VectorXd, 3>& coef, const Vec3& shift, VectorXd& r,
                       std::vector<Eigen::Vector2d>& found) {
  const int n = g.size();
  r.resize(n);
  found.assign(n, Eigen::Vector2d::Zero());
  auto eval = [&](double t, double ph, Vec3& y, Vec3& yt, Vec3& yp) {
    for (int c = 0; c < 3; ++c) g.evaluate(coef[c], t, ph, y[c], yt[c], yp[c]);
    y -= shift;
  };
  std::vector<char> bad(n, 0);
  parallel_for(n, [&](int i) {
    const int j = i / g.n_phi(), k = i % g.n_phi();
    const double t0 = g.theta(j), p0 = g.phi(k);
    const Vec3 T = g.direction(j, k), e1 = frame_theta1(t0, p0), e2 = frame_theta2(t0, p0);
    Eigen::Vector2d x(t0, p0);
    Vec3 y, yt, yp;
    bool ok = false;
    for (int it = 0; it < 30; ++it) {
      eval(x[0], x[1], y, yt, yp);
      const Eigen::Vector2d F(y.dot(e1), y.dot(e2));
      Eigen::Matrix2d J;
      J << yt.dot(e1), yp.dot(e1), yt.dot(e2), yp.dot(e2);
      if (!(J.determinant() > 0.0)) break;
      const Eigen::Vector2d dx = J.inverse() * F;
      x -= dx;
      if (dx.norm() < 1e-12) {
        eval(x[0], x[1], y, yt, yp);
        J << yt.dot(e1), yp.dot(e1), yt.dot(e2), yp.dot(e2);
        ok = J.determinant() > 0.0 && y.dot(T) > 0.0;
        break;
      }
    }
    if (!ok) {
      bad[i] = 1;
      return;
    }
    found[i] = x;
    r[i] = y.dot(T);
  });
  for (int i = 0; i < n; ++i)
    if (bad[i]) return i;
  return -1;
}

}  // namespace detail

/// Per-node intrinsic and extrinsic data of a surface in (R³, g_ε).
struct SurfaceGeometry {
  int n = 0;
  std::vector<Mat2> g, h;          ///< first and second fundamental forms in coordinates
  std::vector<Vec3> N, e1, e2;     ///< inward unit normal, principal directions
  std::vector<Mat3> g_amb;         ///< g_ε at the node
  std::vector<T333<double>> gamma; ///< ambient Γ at the node
  VectorXd H, D, lambda1, lambda2, integrand, sqrt_det, dA;
  std::vector<char> umbilic;

  double area() const { return dA.sum(); }
};

namespace detail {

inline double gdot(const Mat3& g, const Vec3& a, const Vec3& b) { return a.dot(g * b); }

inline Vec3 gamma_apply(const T333<double>& G, const Vec3& a, const Vec3& b) {
  Vec3 r;
  for (int k = 0; k < 3; ++k) {
    double s = 0.0;
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) s += G[k][i][j] * a[i] * b[j];
    r[k] = s;
  }
  return r;
}

}  // namespace detail

/// Fundamental forms, curvatures and area element at every node. The second
/// fundamental form uses h̊_ij = g(N̊, ∇_{Z_i}Z_j), equivalent to the Weingarten form.
inline SurfaceGeometry surface_geometry(const AmbientMetric& metric, const ImmersedSphere& s) {
  SurfaceGeometry G;
  const int n = s.size();
  G.n = n;
  G.g.resize(n);
  G.h.resize(n);
  G.N.resize(n);
  G.e1.resize(n);
  G.e2.resize(n);
  G.g_amb.resize(n);
  G.gamma.resize(n);
  G.umbilic.assign(n, 0);
  for (auto* v : {&G.H, &G.D, &G.lambda1, &G.lambda2, &G.integrand, &G.sqrt_det, &G.dA}) v->resize(n);
  std::vector<int> bad(n, 0);
  parallel_for(n, [&](int i) {
    Mat3 ga;
    T333<double> Gam;
    christoffel_at(metric, s.X[i], Gam, ga);
    G.g_amb[i] = ga;
    G.gamma[i] = Gam;
    const Vec3 &Z1 = s.X1[i], &Z2 = s.X2[i];
    Mat2 gs;
    gs(0, 0) = detail::gdot(ga, Z1, Z1);
    gs(0, 1) = gs(1, 0) = detail::gdot(ga, Z1, Z2);
    gs(1, 1) = detail::gdot(ga, Z2, Z2);
    const double det = gs.determinant();
    if (!(det > 0.0)) {
      bad[i] = 1;
      return;
    }
    Vec3 nu = ga.ldlt().solve(Z1.cross(Z2));
    nu /= std::sqrt(detail::gdot(ga, nu, nu));
    if (s.has_center) {
      const Vec3 r = s.center - s.X[i];
      const double c = detail::gdot(ga, nu, r) / std::sqrt(detail::gdot(ga, r, r));
      if (std::abs(c) < 1e-3) {
        bad[i] = 2;
        return;
      }
      if (c < 0) nu = -nu;
    } else {
      nu = -nu;
    }
    G.N[i] = nu;
    Mat2 hs;
    hs(0, 0) = detail::gdot(ga, nu, s.X11[i] + detail::gamma_apply(Gam, Z1, Z1));
    hs(0, 1) = hs(1, 0) = detail::gdot(ga, nu, s.X12[i] + detail::gamma_apply(Gam, Z1, Z2));
    hs(1, 1) = detail::gdot(ga, nu, s.X22[i] + detail::gamma_apply(Gam, Z2, Z2));
    G.g[i] = gs;
    G.h[i] = hs;
    const Mat2 A = gs.inverse() * hs;
    const double H = A.trace();
    const double q = 0.25 * (A(0, 0) - A(1, 1)) * (A(0, 0) - A(1, 1)) + A(0, 1) * A(1, 0);
    G.H[i] = H;
    G.D[i] = hs.determinant() / det;
    G.integrand[i] = q;
    const double sq = std::sqrt(std::max(q, 0.0));
    G.lambda1[i] = 0.5 * H + sq;
    G.lambda2[i] = 0.5 * H - sq;
    G.sqrt_det[i] = std::sqrt(det);
    G.dA[i] = s.param_weight[i] * G.sqrt_det[i];
    // principal directions, g̊-orthonormal
    Vec3 e1;
    if (2.0 * sq < 1e-8 * std::abs(H) || sq == 0.0) {
      G.umbilic[i] = 1;
      e1 = Z1;
    } else {
      const double l1 = G.lambda1[i];
      Eigen::Vector2d c1(A(0, 1), l1 - A(0, 0)), c2(l1 - A(1, 1), A(1, 0));
      const Eigen::Vector2d c = c1.norm() > c2.norm() ? c1 : c2;
      e1 = c[0] * Z1 + c[1] * Z2;
    }
    e1 /= std::sqrt(detail::gdot(ga, e1, e1));
    const Vec3 r1 = Z1 - detail::gdot(ga, Z1, e1) * e1;
    const Vec3 r2 = Z2 - detail::gdot(ga, Z2, e1) * e1;
    Vec3 e2 = r1.norm() > r2.norm() ? r1 : r2;
    e2 /= std::sqrt(detail::gdot(ga, e2, e2));
    G.e1[i] = e1;
    G.e2[i] = e2;
  });
  for (int i = 0; i < n; ++i) {
    if (bad[i] == 1) throw Error(ErrorCode::degenerate_immersion, "det g <= 0 at node " + std::to_string(i));
    if (bad[i] == 2)
      throw Error(ErrorCode::orientation_ambiguous, "inward test inconclusive at node " + std::to_string(i));
  }
  return G;
}

/// H²/4 − D at every node.
inline SphericalFunction willmore_integrand(const SurfaceGeometry& geom, const GridPtr& grid) {
  return SphericalFunction::from_values(grid, geom.integrand);
}

/// h̊_ij = −g(∇_{Z_i}N̊, Z_j) with ∂N̊ from spectral differentiation of its components.
inline std::vector<Mat2> weingarten_second_form(const ImmersedSphere& s, const SurfaceGeometry& geom) {
  const auto J = differentiate(*s.grid, geom.N);
  std::vector<Mat2> out(s.size());
  for (int i = 0; i < s.size(); ++i) {
    const Mat3& ga = geom.g_amb[i];
    const Vec3 DN1 = J.ft[i] + detail::gamma_apply(geom.gamma[i], s.X1[i], geom.N[i]);
    const Vec3 DN2 = J.fp[i] + detail::gamma_apply(geom.gamma[i], s.X2[i], geom.N[i]);
    Mat2 h;
    h(0, 0) = -detail::gdot(ga, DN1, s.X1[i]);
    h(0, 1) = -detail::gdot(ga, DN1, s.X2[i]);
    h(1, 0) = -detail::gdot(ga, DN2, s.X1[i]);
    h(1, 1) = -detail::gdot(ga, DN2, s.X2[i]);
    out[i] = h;
  }
  return out;
}

}  // namespace willmore_lab
