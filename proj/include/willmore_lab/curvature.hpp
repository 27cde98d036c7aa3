#pragma once

#include "willmore_lab/errors.hpp"
#include "willmore_lab/metric.hpp"
#include "willmore_lab/tensor.hpp"

#include <array>
#include <cmath>

namespace willmore_lab {

namespace detail {

// low[s][b][c] = Γ_{s,bc}; G[a][b][c] = Γ^a_{bc}.
template <class T>
void christoffel(const T33<T>& gi, const T333<T>& dg, T333<T>& low, T333<T>& G) {
  for (int s = 0; s < 3; ++s)
    for (int b = 0; b < 3; ++b)
      for (int c = b; c < 3; ++c) {
        T v = dg[b][c][s] + dg[c][s][b] - dg[s][b][c];
        v *= 0.5;
        low[s][b][c] = v;
        low[s][c][b] = v;
      }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = b; c < 3; ++c) {
        T v = gi[a][0] * low[0][b][c] + gi[a][1] * low[1][b][c] + gi[a][2] * low[2][b][c];
        G[a][b][c] = v;
        G[a][c][b] = v;
      }
}

// R[a][b][c][d] = g(R(∂_c,∂_d)∂_b, ∂_a).
template <class T>
void riemann(const T33<T>& g, const T333<T>& dg, const T3333<T>& d2g, T333<T>& G,
             T3333<T>& R) {
  const T33<T> gi = invert3(g);
  T333<T> low;
  christoffel(gi, dg, low, G);
  T3333<T> dG;  // dG[d][a][b][c] = ∂_d Γ^a_{bc}
  for (int d = 0; d < 3; ++d) {
    T33<T> dgi;
    T33<T> tmp;
    for (int a = 0; a < 3; ++a)
      for (int bb = 0; bb < 3; ++bb)
        tmp[a][bb] = gi[a][0] * dg[d][0][bb] + gi[a][1] * dg[d][1][bb] + gi[a][2] * dg[d][2][bb];
    for (int a = 0; a < 3; ++a)
      for (int s = 0; s < 3; ++s)
        dgi[a][s] = -(tmp[a][0] * gi[0][s] + tmp[a][1] * gi[1][s] + tmp[a][2] * gi[2][s]);
    T333<T> dlow;
    for (int s = 0; s < 3; ++s)
      for (int b = 0; b < 3; ++b)
        for (int c = b; c < 3; ++c) {
          T v = d2g[d][b][c][s] + d2g[d][c][s][b] - d2g[d][s][b][c];
          v *= 0.5;
          dlow[s][b][c] = v;
          dlow[s][c][b] = v;
        }
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = b; c < 3; ++c) {
          T v = T(0.0);
          for (int s = 0; s < 3; ++s) v += dgi[a][s] * low[s][b][c] + gi[a][s] * dlow[s][b][c];
          dG[d][a][b][c] = v;
          dG[d][a][c][b] = v;
        }
  }
  T3333<T> up;  // up[r][b][c][d] = R^r_{bcd}
  for (int r = 0; r < 3; ++r)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          if (d < c) {
            up[r][b][c][d] = -up[r][b][d][c];
            continue;
          }
          if (d == c) {
            up[r][b][c][d] = T(0.0);
            continue;
          }
          T v = dG[c][r][d][b] - dG[d][r][c][b];
          for (int l = 0; l < 3; ++l) v += G[r][c][l] * G[l][d][b] - G[r][d][l] * G[l][c][b];
          up[r][b][c][d] = v;
        }
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d)
          R[a][b][c][d] = g[a][0] * up[0][b][c][d] + g[a][1] * up[1][b][c][d] + g[a][2] * up[2][b][c][d];
}

inline double contract2(const Mat3& a, const Mat3& b, const Mat3& gi) {
  return (gi * a * gi * b.transpose()).trace();
}

}  // namespace detail

/// Ambient curvature at a point, coordinate frame, R(X,Y,Z,W) = g(R(Z,W)Y,X).
struct CurvaturePack {
  Vec3 point = Vec3::Zero();
  Mat3 metric = Mat3::Identity();
  Mat3 metric_inv = Mat3::Identity();
  T333<double> gamma{};          ///< gamma[ν][μ][λ] = Γ^ν_{μλ}
  T3333<double> riemann{};       ///< riemann[a][b][c][d] = R(∂_a,∂_b,∂_c,∂_d)
  Mat3 ricci = Mat3::Zero();
  double scalar = 0.0;
  Mat3 traceless = Mat3::Zero();
  bool has_nabla = false;
  T33333<double> nabla_riemann{};  ///< [e][a][b][c][d] = (∇_{∂_e} R)(∂_a,∂_b,∂_c,∂_d)

  double norm2_ricci() const { return detail::contract2(ricci, ricci, metric_inv); }
  double norm2_traceless() const { return detail::contract2(traceless, traceless, metric_inv); }
};

/// Γ^a_{bc} of g_ε at x, plus g_ε(x). Cheap path used by integrators.
inline void christoffel_at(const AmbientMetric& m, const Vec3& x, T333<double>& G, Mat3& g) {
  const MetricJet j = m.jet(x, 1);
  if (j.zero) {
    G = T333<double>{};
    g = Mat3::Identity();
    return;
  }
  const double e = m.epsilon();
  T33<double> gg;
  T333<double> dg;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      gg[a][b] = (a == b ? 1.0 : 0.0) + e * j.h[a][b];
      for (int k = 0; k < 3; ++k) dg[k][a][b] = e * j.d1[k][a][b];
    }
  T333<double> low;
  detail::christoffel(invert3(gg), dg, low, G);
  g = to_mat(gg);
}

/// Γ and its spatial derivatives: dG[e][a][b][c] = ∂_e Γ^a_{bc}.
inline void christoffel_with_derivative(const AmbientMetric& m, const Vec3& x, T333<double>& G,
                                        T3333<double>& dG) {
  const MetricJet j = m.jet(x, 2);
  G = T333<double>{};
  dG = T3333<double>{};
  if (j.zero) return;
  using D3 = Dual<3>;
  const double e = m.epsilon();
  T33<D3> gg;
  T333<D3> dg;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      gg[a][b] = D3((a == b ? 1.0 : 0.0) + e * j.h[a][b]);
      for (int q = 0; q < 3; ++q) gg[a][b].d[q] = e * j.d1[q][a][b];
      for (int k = 0; k < 3; ++k) {
        dg[k][a][b] = D3(e * j.d1[k][a][b]);
        for (int q = 0; q < 3; ++q) dg[k][a][b].d[q] = e * j.d2[q][k][a][b];
      }
    }
  T333<D3> low, GD;
  detail::christoffel(invert3(gg), dg, low, GD);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c) {
        G[a][b][c] = GD[a][b][c].v;
        for (int q = 0; q < 3; ++q) dG[q][a][b][c] = GD[a][b][c].d[q];
      }
}

namespace detail {

inline void finish_pack(CurvaturePack& P) {
  const Mat3& gi = P.metric_inv;
  for (int b = 0; b < 3; ++b)
    for (int d = 0; d < 3; ++d) {
      double s = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) s += gi(a, c) * P.riemann[a][b][c][d];
      P.ricci(b, d) = s;
    }
  P.ricci = 0.5 * (P.ricci + P.ricci.transpose());
  P.scalar = (gi * P.ricci).trace();
  P.traceless = P.ricci - (P.scalar / 3.0) * P.metric;
}

}  // namespace detail

/// Curvature quantities of g_ε at p from exact derivatives of h.
inline CurvaturePack curvature_pack(const AmbientMetric& m, const Vec3& p, bool with_nabla = true) {
  CurvaturePack P;
  P.point = p;
  P.has_nabla = with_nabla;
  if (with_nabla && m.perturbation().max_order() < 3)
    throw Error(ErrorCode::catalog_derivative_missing, "nabla Riemann needs order-3 derivatives");
  const MetricJet j = m.jet(p, with_nabla ? 3 : 2);
  if (j.zero) return P;
  const double e = m.epsilon();
  Mat3 g = m.g(p);
  if (Eigen::LLT<Mat3>(g).info() != Eigen::Success)
    throw Error(ErrorCode::non_positive_definite, "g_eps fails Cholesky at the requested point");
  P.metric = g;
  P.metric_inv = g.inverse();
  if (!with_nabla) {
    T33<double> gg;
    T333<double> dg;
    T3333<double> d2g;
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b) {
        gg[a][b] = g(a, b);
        for (int k = 0; k < 3; ++k) {
          dg[k][a][b] = e * j.d1[k][a][b];
          for (int l = 0; l < 3; ++l) d2g[k][l][a][b] = e * j.d2[k][l][a][b];
        }
      }
    detail::riemann(gg, dg, d2g, P.gamma, P.riemann);
    detail::finish_pack(P);
    return P;
  }
  using D3 = Dual<3>;
  T33<D3> gg;
  T333<D3> dg;
  T3333<D3> d2g;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      gg[a][b] = D3(g(a, b));
      for (int q = 0; q < 3; ++q) gg[a][b].d[q] = e * j.d1[q][a][b];
      for (int k = 0; k < 3; ++k) {
        dg[k][a][b] = D3(e * j.d1[k][a][b]);
        for (int q = 0; q < 3; ++q) dg[k][a][b].d[q] = e * j.d2[q][k][a][b];
        for (int l = 0; l < 3; ++l) {
          d2g[k][l][a][b] = D3(e * j.d2[k][l][a][b]);
          for (int q = 0; q < 3; ++q) d2g[k][l][a][b].d[q] = e * j.d3[q][k][l][a][b];
        }
      }
    }
  T333<D3> GD;
  T3333<D3> RD;
  detail::riemann(gg, dg, d2g, GD, RD);
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b) {
      for (int c = 0; c < 3; ++c) {
        P.gamma[a][b][c] = GD[a][b][c].v;
        for (int d = 0; d < 3; ++d) P.riemann[a][b][c][d] = RD[a][b][c][d].v;
      }
    }
  const auto& G = P.gamma;
  const auto& R = P.riemann;
  for (int q = 0; q < 3; ++q)
    for (int a = 0; a < 3; ++a)
      for (int b = 0; b < 3; ++b)
        for (int c = 0; c < 3; ++c)
          for (int d = 0; d < 3; ++d) {
            double v = RD[a][b][c][d].d[q];
            for (int l = 0; l < 3; ++l)
              v -= G[l][q][a] * R[l][b][c][d] + G[l][q][b] * R[a][l][c][d] +
                   G[l][q][c] * R[a][b][l][d] + G[l][q][d] * R[a][b][c][l];
            P.nabla_riemann[q][a][b][c][d] = v;
          }
  detail::finish_pack(P);
  return P;
}

/// s̃_p = lim ‖S_p(ε)‖²/ε², Richardson-extrapolated over ε = 1e-2·2^{-k}, k = 0..3.
/// Each level averages ±ε, which removes the odd powers, so the table runs in ε².
inline double s_tilde(const MetricPerturbation& h, const Vec3& p) {
  if (h.max_order() < 2)
    throw Error(ErrorCode::catalog_derivative_missing, "s_tilde needs order-2 derivatives");
  constexpr int K = 4;
  double A[K][K] = {};
  for (int k = 0; k < K; ++k) {
    const double e = 1e-2 / std::pow(2.0, k);
    double s = 0.0;
    for (double sg : {1.0, -1.0}) {
      AmbientMetric m(h, sg * e);
      s += 0.5 * curvature_pack(m, p, false).norm2_traceless() / (e * e);
    }
    A[k][0] = s;
  }
  for (int j = 1; j < K; ++j)
    for (int k = j; k < K; ++k) {
      const double f = std::pow(4.0, j);
      A[k][j] = (f * A[k][j - 1] - A[k - 1][j - 1]) / (f - 1.0);
    }
  const double best = A[K - 1][K - 1];
  const double prev = A[K - 1][K - 2];
  const double scale = std::max(std::abs(best), std::abs(A[K - 1][0]));
  if (std::abs(best - prev) > 0.01 * std::abs(best) && std::abs(best - prev) > 1e-12 * (1.0 + scale))
    throw Error(ErrorCode::extrapolation_diverged, "finest Richardson estimates differ by > 1%");
  if (best < -1e-10)
    throw Error(ErrorCode::extrapolation_diverged, "extrapolated s_tilde is negative");
  return std::max(best, 0.0);
}

}  // namespace willmore_lab
