#pragma once

// Independent reference computations used only by tests.

#include "willmore_lab/metric.hpp"

#include <array>
#include <cmath>
#include <functional>

namespace oracle {

using willmore_lab::Mat3;
using willmore_lab::Vec3;

using MetricFn = std::function<Mat3(const Vec3&)>;
using Arr3 = std::array<std::array<std::array<double, 3>, 3>, 3>;
using Arr4 = std::array<Arr3, 3>;

// 7-point central first derivative.
template <class F>
auto d1(F&& f, const Vec3& x, int k, double h) {
  auto at = [&](double s) { return f(x + s * h * Vec3::Unit(k)); };
  return (-at(-3) + 9.0 * at(-2) - 45.0 * at(-1) + 45.0 * at(1) - 9.0 * at(2) + at(3)) * (1.0 / (60.0 * h));
}

// Γ^a_{bc} from finite differences of g.
inline Arr3 christoffel_fd(const MetricFn& g, const Vec3& x, double h) {
  std::array<Mat3, 3> dg;
  for (int k = 0; k < 3; ++k) dg[k] = d1(g, x, k, h);
  const Mat3 gi = g(x).inverse();
  Arr3 G{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        double s = 0.0;
        for (int e = 0; e < 3; ++e) s += 0.5 * gi(a, e) * (dg[b](c, e) + dg[c](b, e) - dg[e](b, c));
        G[a][b][c] = s;
      }
  return G;
}

// R^a_{bcd} = ∂_c Γ^a_{db} − ∂_d Γ^a_{cb} + Γ^a_{ce}Γ^e_{db} − Γ^a_{de}Γ^e_{cb}, by nested differences.
inline Arr4 riemann_up_fd(const MetricFn& g, const Vec3& x, double h) {
  std::array<Arr3, 3> dG;
  for (int k = 0; k < 3; ++k) {
    auto Gs = [&](double s) { return christoffel_fd(g, x + s * h * Vec3::Unit(k), h); };
    const double w[6] = {-1, 9, -45, 45, -9, 1};
    const double sh[6] = {-3, -2, -1, 1, 2, 3};
    Arr3 acc{};
    for (int i = 0; i < 6; ++i) {
      Arr3 Gi = Gs(sh[i]);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c) acc[a][b][c] += w[i] * Gi[a][b][c] / (60.0 * h);
    }
    dG[k] = acc;
  }
  const Arr3 G = christoffel_fd(g, x, h);
  Arr4 R{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          double s = dG[c][a][d][b] - dG[d][a][c][b];
          for (int e = 0; e < 3; ++e) s += G[a][c][e] * G[e][d][b] - G[a][d][e] * G[e][c][b];
          R[a][b][c][d] = s;
        }
  return R;
}

// Lower the first index: slot order R(a,b,c,d) = g(R(∂_c,∂_d)∂_b, ∂_a) = g_{ae}R^e_{bcd}.
inline Arr4 riemann_lowered_fd(const MetricFn& g, const Vec3& x, double h) {
  const Arr4 up = riemann_up_fd(g, x, h);
  const Mat3 gx = g(x);
  Arr4 R{};
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          double s = 0.0;
          for (int e = 0; e < 3; ++e) s += gx(a, e) * up[e][b][c][d];
          R[a][b][c][d] = s;
        }
  return R;
}

// Ric_{bd} = R^a_{bad}, built from the contracted up-index tensor.
inline Mat3 ricci_fd(const MetricFn& g, const Vec3& x, double h = 1e-3) {
  const Arr4 up = riemann_up_fd(g, x, h);
  Mat3 ric = Mat3::Zero();
  for (int b = 0; b < 3; ++b)
    for (int d = 0; d < 3; ++d)
      for (int a = 0; a < 3; ++a) ric(b, d) += up[a][b][a][d];
  return ric;
}

inline double traceless_norm2_fd(const MetricFn& g, const Vec3& x, double h = 1e-3) {
  const Mat3 ric = ricci_fd(g, x, h);
  const Mat3 gi = g(x).inverse();
  const double R = (gi * ric).trace();
  const Mat3 S = ric - (R / 3.0) * g(x);
  return (gi * S * gi * S.transpose()).trace();
}

// Ricci of e^{2f}δ in three dimensions: −(∇²f − df⊗df) − (Δf + |df|²)δ.
inline Mat3 conformal_ricci(const Vec3& df, const Mat3& hess_f) {
  return -(hess_f - df * df.transpose()) - (hess_f.trace() + df.squaredNorm()) * Mat3::Identity();
}

// Mean curvature (sum of principal curvatures, inward normal) of the ellipsoid
// x²/a² + y²/b² + z²/c² = 1 at a surface point.
inline double ellipsoid_mean_curvature(const Vec3& abc, const Vec3& x) {
  const Vec3 n(x[0] / (abc[0] * abc[0]), x[1] / (abc[1] * abc[1]), x[2] / (abc[2] * abc[2]));
  const double nn = n.norm();
  // H = div(∇F/|∇F|) for F = Σ x_i²/a_i²
  double tr = 0.0, quad = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double hi = 1.0 / (abc[i] * abc[i]);
    tr += hi;
    quad += n[i] * hi * n[i];
  }
  return (tr - quad / (nn * nn)) / nn;
}

// Fixed-step classical RK4 for ÿ = −Γ(y)(ẏ,ẏ) with an independent Γ.
inline Vec3 rk4_geodesic(const MetricFn& g, const Vec3& p, const Vec3& v0, double T, double h) {
  auto rhs = [&](const Vec3& y, const Vec3& v) {
    const Arr3 G = christoffel_fd(g, y, 1e-3);
    Vec3 a = Vec3::Zero();
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        for (int k = 0; k < 3; ++k) a[i] -= G[i][j][k] * v[j] * v[k];
    return a;
  };
  Vec3 y = p, v = v0;
  const int n = static_cast<int>(std::lround(T / h));
  const double dt = T / n;
  for (int s = 0; s < n; ++s) {
    const Vec3 k1y = v, k1v = rhs(y, v);
    const Vec3 k2y = v + 0.5 * dt * k1v, k2v = rhs(y + 0.5 * dt * k1y, v + 0.5 * dt * k1v);
    const Vec3 k3y = v + 0.5 * dt * k2v, k3v = rhs(y + 0.5 * dt * k2y, v + 0.5 * dt * k2v);
    const Vec3 k4y = v + dt * k3v, k4v = rhs(y + dt * k3y, v + dt * k3v);
    y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
    v += dt / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
  }
  return y;
}

// Torus of revolution with radii R > r: H = k1 + k2 toward the tube axis, and the
// closed form W = ∫H²/4 dA = π² c²/√(c² − 1) with c = R/r.
inline double torus_mean_curvature(double R, double r, double v) {
  return 1.0 / r + std::cos(v) / (R + r * std::cos(v));
}
inline double torus_willmore(double R, double r) {
  const double c = R / r;
  return M_PI * M_PI * c * c / std::sqrt(c * c - 1.0);
}

}  // namespace oracle
