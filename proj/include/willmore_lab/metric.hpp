#pragma once

#include "willmore_lab/errors.hpp"
#include "willmore_lab/tensor.hpp"

#include <cmath>
#include <functional>
#include <random>
#include <string>

namespace willmore_lab {

/// h and its partial derivatives at a point; d1[k][m][n] = ∂_k h_mn, and so on.
struct MetricJet {
  int order = 0;
  bool zero = true;
  T33<double> h{};
  T333<double> d1{};
  T3333<double> d2{};
  T33333<double> d3{};
};

enum class Catalog { gaussian_bump, conformal_bump, anisotropic_bump, custom };

inline const char* to_string(Catalog c) {
  switch (c) {
    case Catalog::gaussian_bump: return "gaussian_bump";
    case Catalog::conformal_bump: return "conformal_bump";
    case Catalog::anisotropic_bump: return "anisotropic_bump";
    case Catalog::custom: return "custom";
  }
  return "unknown";
}

using CustomJetFn = std::function<void(const Vec3& x, int order, MetricJet& out)>;

/// Symmetric bilinear form h on R³ with closed-form derivatives up to order 3.
class MetricPerturbation {
 public:
  static MetricPerturbation gaussian_bump(const Vec3& x0, double sigma, const Mat3& a) {
    return MetricPerturbation(Catalog::gaussian_bump, x0, sigma, a, Vec3::Ones());
  }

  /// h = alpha·φ·δ, so g_ε = (1 + εαφ)δ is conformally flat.
  static MetricPerturbation conformal_bump(const Vec3& x0, double sigma, double alpha) {
    return MetricPerturbation(Catalog::conformal_bump, x0, sigma, alpha * Mat3::Identity(),
                              Vec3::Ones());
  }

  /// Gaussian with per-axis widths σ·stretch_k.
  static MetricPerturbation anisotropic_bump(const Vec3& x0, double sigma, const Mat3& a,
                                             const Vec3& stretch) {
    return MetricPerturbation(Catalog::anisotropic_bump, x0, sigma, a, stretch);
  }

  /// User-supplied jet. sup_norm bounds |h| in operator norm; support_radius
  /// bounds where h is non-negligible around x0.
  static MetricPerturbation custom(CustomJetFn fn, int max_order, double sup_norm,
                                   const Vec3& x0, double support_radius) {
    MetricPerturbation m(Catalog::custom, x0, support_radius / 8.0, Mat3::Zero(), Vec3::Ones());
    m.custom_ = std::move(fn);
    m.max_order_ = max_order;
    m.custom_sup_ = sup_norm;
    m.support_ = support_radius;
    return m;
  }

  static MetricPerturbation zero() { return gaussian_bump(Vec3::Zero(), 1.0, Mat3::Zero()); }

  Catalog catalog_id() const { return id_; }
  const Vec3& center() const { return x0_; }
  double sigma() const { return sigma_; }
  const Mat3& amplitude() const { return a_; }
  const Vec3& stretch() const { return stretch_; }
  int max_order() const { return max_order_; }

  bool is_zero() const { return id_ != Catalog::custom && a_.cwiseAbs().maxCoeff() == 0.0; }

  /// sup over x of the operator norm of h(x).
  double sup_norm() const {
    if (id_ == Catalog::custom) return custom_sup_;
    Eigen::SelfAdjointEigenSolver<Mat3> es(a_);
    return es.eigenvalues().cwiseAbs().maxCoeff();
  }

  /// Radius around the center outside which h and its derivatives are below ~1e-50.
  double support_radius() const {
    if (id_ == Catalog::custom) return support_;
    return sigma_ * stretch_.maxCoeff() * std::sqrt(kCutExponent);
  }

  /// Same perturbation multiplied by s.
  MetricPerturbation scaled(double s) const {
    MetricPerturbation m = *this;
    m.a_ *= s;
    if (id_ == Catalog::custom) {
      CustomJetFn inner = custom_;
      m.custom_ = [inner, s](const Vec3& x, int order, MetricJet& out) {
        inner(x, order, out);
        scale_jet(out, s);
      };
      m.custom_sup_ *= std::abs(s);
    }
    return m;
  }

  Mat3 eval(const Vec3& x) const { return to_mat(jet(x, 0).h); }

  MetricJet jet(const Vec3& x, int order) const {
    MetricJet j;
    j.order = order;
    if (order > max_order_)
      throw Error(ErrorCode::catalog_derivative_missing,
                  "perturbation supplies derivatives up to order " + std::to_string(max_order_));
    if (id_ == Catalog::custom) {
      j.zero = false;
      custom_(x, order, j);
      j.order = order;
      return j;
    }
    gaussian_jet(x, order, j);
    return j;
  }

 private:
  static constexpr double kCutExponent = 120.0;

  MetricPerturbation(Catalog id, const Vec3& x0, double sigma, const Mat3& a, const Vec3& stretch)
      : id_(id), x0_(x0), sigma_(sigma), a_(0.5 * (a + a.transpose())), stretch_(stretch) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::invalid_argument, "width sigma must be > 0");
    if (!(stretch.minCoeff() > 0.0))
      throw Error(ErrorCode::invalid_argument, "stretch factors must be > 0");
  }

  static void scale_jet(MetricJet& j, double s) {
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) {
        j.h[m][n] *= s;
        for (int k = 0; k < 3; ++k) {
          j.d1[k][m][n] *= s;
          for (int l = 0; l < 3; ++l) {
            j.d2[k][l][m][n] *= s;
            for (int q = 0; q < 3; ++q) j.d3[k][l][q][m][n] *= s;
          }
        }
      }
  }

  void gaussian_jet(const Vec3& x, int order, MetricJet& j) const {
    double q[3], r[3], u[3];
    double e = 0.0;
    for (int k = 0; k < 3; ++k) {
      double w = sigma_ * stretch_[k];
      q[k] = 1.0 / (w * w);
      r[k] = x[k] - x0_[k];
      e += q[k] * r[k] * r[k];
      u[k] = -2.0 * q[k] * r[k];
    }
    if (e > kCutExponent || is_zero()) {
      j.zero = true;
      return;
    }
    j.zero = false;
    const double phi = std::exp(-e);
    double f1[3], f2[3][3], f3[3][3][3];
    for (int a = 0; a < 3; ++a) {
      f1[a] = u[a] * phi;
      for (int b = 0; b < 3; ++b) {
        double cab = (a == b) ? -2.0 * q[a] : 0.0;
        f2[a][b] = (u[a] * u[b] + cab) * phi;
        for (int c = 0; c < 3; ++c) {
          double cac = (a == c) ? -2.0 * q[a] : 0.0;
          double cbc = (b == c) ? -2.0 * q[b] : 0.0;
          f3[a][b][c] = (u[a] * u[b] * u[c] + cab * u[c] + cac * u[b] + cbc * u[a]) * phi;
        }
      }
    }
    for (int m = 0; m < 3; ++m)
      for (int n = 0; n < 3; ++n) {
        const double amn = a_(m, n);
        j.h[m][n] = amn * phi;
        if (order < 1) continue;
        for (int a = 0; a < 3; ++a) {
          j.d1[a][m][n] = amn * f1[a];
          if (order < 2) continue;
          for (int b = 0; b < 3; ++b) {
            j.d2[a][b][m][n] = amn * f2[a][b];
            if (order < 3) continue;
            for (int c = 0; c < 3; ++c) j.d3[a][b][c][m][n] = amn * f3[a][b][c];
          }
        }
      }
  }

  Catalog id_;
  Vec3 x0_;
  double sigma_;
  Mat3 a_;
  Vec3 stretch_;
  int max_order_ = 3;
  CustomJetFn custom_;
  double custom_sup_ = 0.0;
  double support_ = 0.0;
};

/// g_ε = δ + εh.
class AmbientMetric {
 public:
  AmbientMetric(MetricPerturbation h, double epsilon) : h_(std::move(h)), eps_(epsilon) {
    if (!(std::abs(eps_) * h_.sup_norm() < 0.5))
      throw Error(ErrorCode::non_positive_definite,
                  "|eps|*sup|h| must be < 1/2 (got " + std::to_string(std::abs(eps_) * h_.sup_norm()) + ")");
    std::mt19937_64 rng(0x5eed);
    std::normal_distribution<double> nd(0.0, 1.0);
    const Vec3 c = h_.center();
    const double R = h_.support_radius();
    std::vector<Vec3> probes{c};
    for (int k = 0; k < 3; ++k) {
      probes.push_back(c + R * Vec3::Unit(k));
      probes.push_back(c - R * Vec3::Unit(k));
    }
    for (int i = 0; i < 8; ++i) {
      Vec3 d(nd(rng), nd(rng), nd(rng));
      probes.push_back(c + 0.5 * h_.sigma() * d);
    }
    for (const Vec3& x : probes) {
      Eigen::LLT<Mat3> llt(g(x));
      if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::non_positive_definite, "Cholesky failed at a construction probe");
    }
  }

  const MetricPerturbation& perturbation() const { return h_; }
  double epsilon() const { return eps_; }
  bool is_flat() const { return eps_ == 0.0 || h_.is_zero(); }

  Mat3 g(const Vec3& x) const {
    if (is_flat()) return Mat3::Identity();
    return Mat3::Identity() + eps_ * h_.eval(x);
  }

  MetricJet jet(const Vec3& x, int order) const {
    if (is_flat()) {
      MetricJet j;
      j.order = order;
      return j;
    }
    return h_.jet(x, order);
  }

 private:
  MetricPerturbation h_;
  double eps_;
};

}  // namespace willmore_lab
