#pragma once

#include "willmore_lab/curvature.hpp"
#include "willmore_lab/errors.hpp"
#include "willmore_lab/metric.hpp"
#include "willmore_lab/parallel.hpp"
#include "willmore_lab/sphere_spectral.hpp"
#include "willmore_lab/surface.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

namespace willmore_lab {

struct GeodesicOptions {
  double tol = 1e-10;  ///< local error per unit length
  double h0 = 0.05;
  double h_min = 1e-8;
};

/// Trajectory of ÿ + Γ(ẏ,ẏ) = 0 from (p, Θ), with optional direction sensitivities.
struct GeodesicSolution {
  Vec3 p = Vec3::Zero();
  Vec3 theta = Vec3::Zero();
  std::vector<double> t;
  std::vector<Vec3> y, ydot;
  bool has_sensitivities = false;
  std::array<std::vector<Vec3>, 2> dy;  ///< ∂y/∂θ^i along the trajectory

  const Vec3& end() const { return y.back(); }
};

namespace detail {

template <int N>
using State = Eigen::Matrix<double, N, 1>;

inline State<6> geodesic_rhs(const AmbientMetric& m, const State<6>& s) {
  T333<double> G;
  Mat3 g;
  christoffel_at(m, s.head<3>(), G, g);
  State<6> r;
  r.head<3>() = s.tail<3>();
  const Vec3 v = s.tail<3>();
  r.tail<3>() = -detail::gamma_apply(G, v, v);
  return r;
}

// y, v, then (J_i, K_i) for two initial-direction variations.
inline State<18> geodesic_rhs(const AmbientMetric& m, const State<18>& s) {
  T333<double> G;
  T3333<double> dG;
  christoffel_with_derivative(m, s.head<3>(), G, dG);
  State<18> r;
  const Vec3 v = s.segment<3>(3);
  r.head<3>() = v;
  r.segment<3>(3) = -detail::gamma_apply(G, v, v);
  for (int q = 0; q < 2; ++q) {
    const Vec3 J = s.segment<3>(6 + 6 * q), K = s.segment<3>(9 + 6 * q);
    Vec3 a = -2.0 * detail::gamma_apply(G, v, K);
    for (int e = 0; e < 3; ++e) a -= J[e] * detail::gamma_apply(dG[e], v, v);
    r.segment<3>(6 + 6 * q) = K;
    r.segment<3>(9 + 6 * q) = a;
  }
  return r;
}

template <int N>
State<N> rk4_step(const AmbientMetric& m, const State<N>& s, double h) {
  const State<N> k1 = geodesic_rhs(m, s);
  const State<N> k2 = geodesic_rhs(m, State<N>(s + 0.5 * h * k1));
  const State<N> k3 = geodesic_rhs(m, State<N>(s + 0.5 * h * k2));
  const State<N> k4 = geodesic_rhs(m, State<N>(s + h * k3));
  return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// Adaptive RK4 by step doubling with local extrapolation.
template <int N, class Record>
State<N> integrate(const AmbientMetric& m, State<N> s, double T, const GeodesicOptions& o, Record&& rec) {
  double t = 0.0, h = std::min(o.h0, T);
  rec(t, s);
  if (m.is_flat()) {
    s.template head<3>() += T * s.template segment<3>(3);
    if constexpr (N == 18)
      for (int q = 0; q < 2; ++q) s.template segment<3>(6 + 6 * q) += T * s.template segment<3>(9 + 6 * q);
    rec(T, s);
    return s;
  }
  while (t < T) {
    const bool last = t + h >= T;
    const double step = last ? T - t : h;
    const State<N> full = rk4_step<N>(m, s, step);
    const State<N> half = rk4_step<N>(m, s, 0.5 * step);
    const State<N> two = rk4_step<N>(m, half, 0.5 * step);
    const double err = (two - full).cwiseAbs().maxCoeff() / 15.0;
    if (err <= o.tol * step) {
      s = two + (two - full) / 15.0;
      t = last ? T : t + step;
      rec(t, s);
    }
    const double fac = err == 0.0 ? 4.0 : std::clamp(0.9 * std::pow(o.tol * step / err, 0.25), 0.2, 4.0);
    h = step * fac;
    if (h < o.h_min && t < T)
      throw Error(ErrorCode::step_floor, "adaptive geodesic step fell below " + std::to_string(o.h_min));
  }
  return s;
}

}  // namespace detail

/// Integrate the geodesic from p with initial velocity theta up to parameter T.
/// With dtheta, also integrates ∂y/∂θ^i for the initial-velocity variations dtheta[i].
inline GeodesicSolution integrate_geodesic(const AmbientMetric& m, const Vec3& p, const Vec3& theta, double T,
                                           const GeodesicOptions& o = {},
                                           std::optional<std::array<Vec3, 2>> dtheta = std::nullopt) {
  if (!(T > 0.0)) throw Error(ErrorCode::invalid_argument, "geodesic length must be > 0");
  GeodesicSolution sol;
  sol.p = p;
  sol.theta = theta;
  if (!dtheta) {
    detail::State<6> s;
    s << p, theta;
    detail::integrate<6>(m, s, T, o, [&](double t, const detail::State<6>& x) {
      sol.t.push_back(t);
      sol.y.push_back(x.head<3>());
      sol.ydot.push_back(x.tail<3>());
    });
    return sol;
  }
  sol.has_sensitivities = true;
  detail::State<18> s = detail::State<18>::Zero();
  s.head<3>() = p;
  s.segment<3>(3) = theta;
  s.segment<3>(9) = (*dtheta)[0];
  s.segment<3>(15) = (*dtheta)[1];
  detail::integrate<18>(m, s, T, o, [&](double t, const detail::State<18>& x) {
    sol.t.push_back(t);
    sol.y.push_back(x.head<3>());
    sol.ydot.push_back(x.segment<3>(3));
    sol.dy[0].push_back(x.segment<3>(6));
    sol.dy[1].push_back(x.segment<3>(12));
  });
  return sol;
}

/// y(ρ) for the geodesic with y(0) = p, ẏ(0) = Θ.
inline Vec3 exp_map(const AmbientMetric& m, const Vec3& p, const Vec3& theta, double rho,
                    const GeodesicOptions& o = {}) {
  if (!(rho > 0.0)) throw Error(ErrorCode::invalid_argument, "rho must be > 0");
  detail::State<6> s;
  s << p, theta;
  return detail::integrate<6>(m, s, rho, o, [](double, const detail::State<6>&) {}).head<3>();
}

/// How shooting directions are normalized: euclidean-unit Θ, or Θ/|Θ|_{g_ε(p)}.
enum class DirectionNorm { euclidean, metric };

inline const char* to_string(DirectionNorm d) { return d == DirectionNorm::euclidean ? "euclidean" : "metric"; }

/// Surface Θ ↦ p + ρ(1 − v(Θ))Θ.
struct GraphOverSphere {
  Vec3 p = Vec3::Zero();
  double rho = 0.0;
  SphericalFunction v;
  DirectionNorm norm = DirectionNorm::euclidean;
  double max_residual = 0.0;  ///< re-shot endpoint mismatch on a node subset, absolute
  std::vector<Vec3> shoot;    ///< initial velocity whose geodesic ends on each node's ray
};

/// True when no geodesic of length ρ from p can reach where h is non-negligible.
inline bool outside_support(const AmbientMetric& m, const Vec3& p, double rho) {
  if (m.is_flat()) return true;
  const auto& h = m.perturbation();
  // geodesics of g_ε stay within a factor 2 of euclidean length since |εh| < 1/2
  return (p - h.center()).norm() > 2.0 * rho + h.support_radius();
}

/// Geodesic sphere of radius ρ about p as a radial graph over the euclidean sphere.
/// One geodesic per grid direction; the endpoint map is interpolated spectrally and
/// inverted per target ray by Newton iteration in the shooting angles.
inline GraphOverSphere geodesic_sphere_graph(const AmbientMetric& m, const Vec3& p, double rho, const GridPtr& grid,
                                             DirectionNorm norm = DirectionNorm::euclidean,
                                             const GeodesicOptions& o = {}) {
  if (!(rho > 0.0)) throw Error(ErrorCode::invalid_argument, "rho must be > 0");
  GraphOverSphere out;
  out.p = p;
  out.rho = rho;
  out.norm = norm;
  const int n = grid->size();
  const Mat3 gp = m.g(p);
  auto shoot_dir = [&](const Vec3& T) -> Vec3 {
    return norm == DirectionNorm::euclidean ? T : Vec3(T / std::sqrt(T.dot(gp * T)));
  };
  if (outside_support(m, p, rho)) {
    out.v = SphericalFunction::zeros(grid);
    out.shoot.resize(n);
    for (int i = 0; i < n; ++i) out.shoot[i] = shoot_dir(grid->direction(i / grid->n_phi(), i % grid->n_phi()));
    return out;
  }
  std::vector<Vec3> Y(n);
  parallel_for(n, [&](int i) {
    const int j = i / grid->n_phi(), k = i % grid->n_phi();
    Y[i] = exp_map(m, p, shoot_dir(grid->direction(j, k)), rho, o) - p;
  });
  std::array<VectorXd, 3> coef;
  for (int c = 0; c < 3; ++c) {
    VectorXd comp(n);
    for (int i = 0; i < n; ++i) comp[i] = Y[i][c];
    coef[c] = grid->analyze(comp);
  }
  VectorXd radial;
  std::vector<Eigen::Vector2d> found;
  if (int bad = detail::invert_rays(*grid, coef, Vec3::Zero(), radial, found); bad >= 0)
    throw Error(ErrorCode::not_star_shaped, "ray inversion failed at node " + std::to_string(bad));
  VectorXd v = VectorXd::Ones(n) - radial / rho;
  // Re-shoot a node subset at the recovered directions.
  const int stride = std::max(1, n / 24);
  std::vector<double> res((n + stride - 1) / stride, 0.0);
  parallel_for(static_cast<int>(res.size()), [&](int r) {
    const int i = r * stride;
    const int j = i / grid->n_phi(), k = i % grid->n_phi();
    const Vec3 T = SphereGrid::unit(found[i][0], found[i][1]);
    const Vec3 end = exp_map(m, p, shoot_dir(T), rho, o);
    res[r] = (end - (p + rho * (1.0 - v[i]) * grid->direction(j, k))).norm();
  });
  out.max_residual = *std::max_element(res.begin(), res.end());
  out.shoot.resize(n);
  for (int i = 0; i < n; ++i) out.shoot[i] = shoot_dir(SphereGrid::unit(found[i][0], found[i][1]));
  out.v = SphericalFunction::from_values(grid, std::move(v));
  return out;
}

/// C² quintic smoothstep cut-off: 1 on [0, R1], 0 on [R2, ∞).
struct Cutoff {
  double R1 = 0.5;
  double R2 = 1.0;

  double operator()(double rho) const {
    if (rho <= R1) return 1.0;
    if (rho >= R2) return 0.0;
    const double t = (rho - R1) / (R2 - R1);
    return 1.0 - t * t * t * (10.0 + t * (-15.0 + 6.0 * t));
  }
};

/// Base surface Σ^ε_{p,ρ} = S_p^ρ(χ(ρ)v_ε) and its normal offsets Σ^ε_{p,ρ}(w).
class SigmaFamily {
 public:
  SigmaFamily(const AmbientMetric& m, const Vec3& p, double rho, const GridPtr& grid, Cutoff cut = {},
              DirectionNorm norm = DirectionNorm::euclidean, const GeodesicOptions& o = {})
      : p_(p), rho_(rho), grid_(grid), chi_(cut(rho)) {
    if (!(cut.R1 > 0.0 && cut.R2 > cut.R1))
      throw Error(ErrorCode::invalid_argument, "cut-off needs 0 < R1 < R2");
    if (chi_ > 0.0) {
      graph_ = geodesic_sphere_graph(m, p, rho, grid, norm, o);
      base_ = graph_.v * chi_;
    } else {
      base_ = SphericalFunction::zeros(grid);
    }
    flat_base_ = base_.values().cwiseAbs().maxCoeff() == 0.0 && base_.coeffs().cwiseAbs().maxCoeff() == 0.0;
    if (!flat_base_) {
      base_surf_ = standard_graph(p, rho, base_);
      std::vector<Vec3> Ne(grid->size());
      for (int i = 0; i < grid->size(); ++i) Ne[i] = -base_surf_.X1[i].cross(base_surf_.X2[i]).normalized();
      normal_ = differentiate(*grid, Ne);
    }
  }

  const Vec3& center() const { return p_; }
  double rho() const { return rho_; }
  double chi() const { return chi_; }
  const GridPtr& grid() const { return grid_; }
  const SphericalFunction& base() const { return base_; }
  const GraphOverSphere& geodesic_graph() const { return graph_; }

  /// Σ(w) = X_b + ρ w N_e, with N_e the euclidean inward unit normal of the base graph.
  ImmersedSphere surface(const SphericalFunction& w) const {
    if (flat_base_) return standard_graph(p_, rho_, w);
    ImmersedSphere s = base_surf_;
    s.kind = chi_ >= 1.0 ? SurfaceKind::geodesic_graph : SurfaceKind::blended;
    s.w = w;
    const auto D = grid_->synthesize_all(w.coeffs());
    const auto& N = normal_;
    for (int i = 0; i < s.size(); ++i) {
      const double f = rho_ * w.values()[i], ft = rho_ * D.ft[i], fp = rho_ * D.fp[i];
      const double ftt = rho_ * D.ftt[i], ftp = rho_ * D.ftp[i], fpp = rho_ * D.fpp[i];
      s.X[i] += f * N.f[i];
      s.X1[i] += ft * N.f[i] + f * N.ft[i];
      s.X2[i] += fp * N.f[i] + f * N.fp[i];
      s.X11[i] += ftt * N.f[i] + 2.0 * ft * N.ft[i] + f * N.ftt[i];
      s.X12[i] += ftp * N.f[i] + ft * N.fp[i] + fp * N.ft[i] + f * N.ftp[i];
      s.X22[i] += fpp * N.f[i] + 2.0 * fp * N.fp[i] + f * N.fpp[i];
    }
    return s;
  }

 private:
  Vec3 p_;
  double rho_;
  GridPtr grid_;
  double chi_;
  GraphOverSphere graph_;
  SphericalFunction base_;
  bool flat_base_ = true;
  ImmersedSphere base_surf_;
  VectorFieldJet normal_;
};

inline ImmersedSphere approximate_surface(const AmbientMetric& m, const Vec3& p, double rho, double R1, double R2,
                                          const SphericalFunction& w,
                                          DirectionNorm norm = DirectionNorm::euclidean) {
  if (w.sup() >= 0.3) throw Error(ErrorCode::invalid_argument, "sup|w| must be < 0.3");
  return SigmaFamily(m, p, rho, w.grid(), Cutoff{R1, R2}, norm).surface(w);
}

}  // namespace willmore_lab
