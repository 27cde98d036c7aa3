#pragma once

#include "willmore_lab/errors.hpp"
#include "willmore_lab/tensor.hpp"

#include <gsl/gsl_errno.h>
#include <gsl/gsl_integration.h>
#include <gsl/gsl_sf_legendre.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <vector>

namespace willmore_lab {

using Eigen::VectorXd;

inline int sh_index(int l, int m) { return l * l + l + m; }
inline int sh_count(int L) { return (L + 1) * (L + 1); }

/// Gauss–Legendre in cos θ times uniform φ. Poles are never nodes.
class SphereGrid {
 public:
  SphereGrid(int n_theta, int L, int n_phi = 0)
      : nt_(n_theta), np_(n_phi > 0 ? n_phi : 2 * n_theta), L_(L) {
    if (nt_ < 2 || L_ < 0 || L_ > nt_ - 1)
      throw Error(ErrorCode::invalid_argument, "need N_theta >= 2 and 0 <= L <= N_theta - 1");
    if (np_ <= 2 * L_)
      throw Error(ErrorCode::invalid_argument, "N_phi must exceed 2L");
    gsl_integration_glfixed_table* tab = gsl_integration_glfixed_table_alloc(nt_);
    theta_.resize(nt_);
    wt_.resize(nt_);
    for (int j = 0; j < nt_; ++j) {
      double x = 0.0, w = 0.0;
      gsl_integration_glfixed_point(-1.0, 1.0, nt_ - 1 - j, &x, &w, tab);
      theta_[j] = std::acos(x);  // increasing θ
      wt_[j] = w * 2.0 * std::numbers::pi / np_;
    }
    gsl_integration_glfixed_table_free(tab);
    phi_.resize(np_);
    for (int k = 0; k < np_; ++k) phi_[k] = 2.0 * std::numbers::pi * k / np_;
    cos_.assign((L_ + 1) * np_, 0.0);
    sin_.assign((L_ + 1) * np_, 0.0);
    for (int m = 0; m <= L_; ++m)
      for (int k = 0; k < np_; ++k) {
        cos_[m * np_ + k] = std::cos(m * phi_[k]);
        sin_[m * np_ + k] = std::sin(m * phi_[k]);
      }
    const int nc = tri_count();
    P_.assign(nt_ * nc, 0.0);
    dP_.assign(nt_ * nc, 0.0);
    d2P_.assign(nt_ * nc, 0.0);
    for (int j = 0; j < nt_; ++j)
      legendre(L_, std::cos(theta_[j]), &P_[j * nc], &dP_[j * nc], &d2P_[j * nc]);
  }

  int n_theta() const { return nt_; }
  int n_phi() const { return np_; }
  int L() const { return L_; }
  int size() const { return nt_ * np_; }
  int n_coeffs() const { return sh_count(L_); }
  double theta(int j) const { return theta_[j]; }
  double phi(int k) const { return phi_[k]; }
  /// dΩ weight of node (j, k); independent of k.
  double weight(int j) const { return wt_[j]; }
  int node(int j, int k) const { return j * np_ + k; }

  Vec3 direction(int j, int k) const { return unit(theta_[j], phi_[k]); }

  static Vec3 unit(double t, double p) {
    return {std::sin(t) * std::cos(p), std::sin(t) * std::sin(p), std::cos(t)};
  }

  /// ∫ f dΩ by quadrature.
  double integrate(const VectorXd& f) const {
    double s = 0.0;
    for (int j = 0; j < nt_; ++j) {
      double r = 0.0;
      for (int k = 0; k < np_; ++k) r += f[j * np_ + k];
      s += wt_[j] * r;
    }
    return s;
  }

  VectorXd analyze(const VectorXd& f) const {
    VectorXd a = VectorXd::Zero(n_coeffs());
    const int nc = tri_count();
    std::vector<double> C(L_ + 1), S(L_ + 1);
    for (int j = 0; j < nt_; ++j) {
      const double* row = &f[j * np_];
      for (int m = 0; m <= L_; ++m) {
        double c = 0.0, s = 0.0;
        const double* cm = &cos_[m * np_];
        const double* sm = &sin_[m * np_];
        for (int k = 0; k < np_; ++k) {
          c += row[k] * cm[k];
          s += row[k] * sm[k];
        }
        C[m] = c * wt_[j];
        S[m] = s * wt_[j];
      }
      const double* P = &P_[j * nc];
      for (int l = 0; l <= L_; ++l) {
        a[sh_index(l, 0)] += P[tri(l, 0)] * C[0];
        for (int m = 1; m <= l; ++m) {
          const double pw = std::numbers::sqrt2 * P[tri(l, m)];
          a[sh_index(l, m)] += pw * C[m];
          a[sh_index(l, -m)] += pw * S[m];
        }
      }
    }
    return a;
  }

  /// Values and θ/φ partial derivatives up to order `order` (0, 1 or 2).
  struct Derivs {
    VectorXd f, ft, fp, ftt, ftp, fpp;
  };

  Derivs synthesize_all(const VectorXd& a, int order = 2) const {
    Derivs D;
    const int n = size();
    D.f = VectorXd::Zero(n);
    if (order >= 1) {
      D.ft = VectorXd::Zero(n);
      D.fp = VectorXd::Zero(n);
    }
    if (order >= 2) {
      D.ftt = VectorXd::Zero(n);
      D.ftp = VectorXd::Zero(n);
      D.fpp = VectorXd::Zero(n);
    }
    const int nc = tri_count();
    const int La = std::min(L_, coeff_degree(a));
    std::vector<double> A(La + 1), B(La + 1), At(La + 1), Bt(La + 1), Att(La + 1), Btt(La + 1);
    for (int j = 0; j < nt_; ++j) {
      const double* P = &P_[j * nc];
      const double* dP = &dP_[j * nc];
      const double* d2P = &d2P_[j * nc];
      for (int m = 0; m <= La; ++m) {
        double a0 = 0, b0 = 0, a1 = 0, b1 = 0, a2 = 0, b2 = 0;
        const double s = m == 0 ? 1.0 : std::numbers::sqrt2;
        for (int l = m; l <= La; ++l) {
          const int t = tri(l, m);
          const double ac = a[sh_index(l, m)];
          const double bc = m == 0 ? 0.0 : a[sh_index(l, -m)];
          a0 += ac * P[t];
          b0 += bc * P[t];
          if (order >= 1) {
            a1 += ac * dP[t];
            b1 += bc * dP[t];
          }
          if (order >= 2) {
            a2 += ac * d2P[t];
            b2 += bc * d2P[t];
          }
        }
        A[m] = s * a0;
        B[m] = s * b0;
        At[m] = s * a1;
        Bt[m] = s * b1;
        Att[m] = s * a2;
        Btt[m] = s * b2;
      }
      for (int k = 0; k < np_; ++k) {
        double f = 0, ft = 0, fp = 0, ftt = 0, ftp = 0, fpp = 0;
        for (int m = 0; m <= La; ++m) {
          const double c = cos_[m * np_ + k], s = sin_[m * np_ + k];
          f += A[m] * c + B[m] * s;
          if (order >= 1) {
            ft += At[m] * c + Bt[m] * s;
            fp += m * (B[m] * c - A[m] * s);
          }
          if (order >= 2) {
            ftt += Att[m] * c + Btt[m] * s;
            ftp += m * (Bt[m] * c - At[m] * s);
            fpp -= m * m * (A[m] * c + B[m] * s);
          }
        }
        const int i = j * np_ + k;
        D.f[i] = f;
        if (order >= 1) {
          D.ft[i] = ft;
          D.fp[i] = fp;
        }
        if (order >= 2) {
          D.ftt[i] = ftt;
          D.ftp[i] = ftp;
          D.fpp[i] = fpp;
        }
      }
    }
    return D;
  }

  VectorXd synthesize(const VectorXd& a) const { return synthesize_all(a, 0).f; }

  /// Value and first derivatives of Σ a_lm Y_lm at an arbitrary (θ, φ).
  void evaluate(const VectorXd& a, double t, double p, double& f, double& ft, double& fp) const {
    const int La = std::min(L_, coeff_degree(a));
    std::vector<double> P(tri_count()), dP(tri_count()), d2P(tri_count());
    legendre(La, std::cos(t), P.data(), dP.data(), d2P.data());
    f = ft = fp = 0.0;
    for (int m = 0; m <= La; ++m) {
      const double c = std::cos(m * p), s = std::sin(m * p);
      const double w = m == 0 ? 1.0 : std::numbers::sqrt2;
      for (int l = m; l <= La; ++l) {
        const int ti = tri_local(La, l, m);
        const double ac = a[sh_index(l, m)];
        const double bc = m == 0 ? 0.0 : a[sh_index(l, -m)];
        f += w * P[ti] * (ac * c + bc * s);
        ft += w * dP[ti] * (ac * c + bc * s);
        fp += w * P[ti] * m * (bc * c - ac * s);
      }
    }
  }

 private:
  int tri_count() const { return (L_ + 1) * (L_ + 2) / 2; }
  int tri(int l, int m) const { return static_cast<int>(gsl_sf_legendre_array_index(l, m)); }
  static int tri_local(int, int l, int m) {
    return static_cast<int>(gsl_sf_legendre_array_index(l, m));
  }
  static int coeff_degree(const VectorXd& a) {
    return static_cast<int>(std::lround(std::sqrt(static_cast<double>(a.size())))) - 1;
  }

  // Orthonormal P̄_l^m(cos θ) without the Condon–Shortley phase, with θ-derivatives.
  static void legendre(int L, double x, double* P, double* dP, double* d2P) {
    const size_t n = gsl_sf_legendre_array_n(L);
    std::vector<double> p(n), d(n), d2(n);
    gsl_error_handler_t* old = gsl_set_error_handler_off();
    int st = gsl_sf_legendre_deriv2_alt_array_e(GSL_SF_LEGENDRE_SPHARM, L, x, 1.0, p.data(),
                                                d.data(), d2.data());
    gsl_set_error_handler(old);
    if (st != GSL_SUCCESS) throw Error(ErrorCode::invalid_argument, "GSL Legendre evaluation failed");
    const size_t m = static_cast<size_t>((L + 1) * (L + 2) / 2);
    for (size_t i = 0; i < m; ++i) {
      P[i] = p[i];
      dP[i] = d[i];
      d2P[i] = d2[i];
    }
  }

  int nt_, np_, L_;
  std::vector<double> theta_, wt_, phi_, cos_, sin_;
  std::vector<double> P_, dP_, d2P_;
};

using GridPtr = std::shared_ptr<const SphereGrid>;

inline GridPtr make_grid(int n_theta = 36, int L = 24, int n_phi = 0) {
  return std::make_shared<const SphereGrid>(n_theta, L, n_phi);
}

/// Scalar field on S² holding both node values and real harmonic coefficients.
class SphericalFunction {
 public:
  SphericalFunction() = default;

  static SphericalFunction zeros(GridPtr g) {
    SphericalFunction f;
    f.values_ = VectorXd::Zero(g->size());
    f.coeffs_ = VectorXd::Zero(g->n_coeffs());
    f.grid_ = std::move(g);
    return f;
  }

  static SphericalFunction from_values(GridPtr g, VectorXd v) {
    if (v.size() != g->size()) throw Error(ErrorCode::invalid_argument, "value count mismatch");
    SphericalFunction f;
    f.coeffs_ = g->analyze(v);
    f.values_ = std::move(v);
    f.grid_ = std::move(g);
    return f;
  }

  static SphericalFunction from_coeffs(GridPtr g, VectorXd a) {
    if (a.size() != g->n_coeffs()) throw Error(ErrorCode::invalid_argument, "coefficient count mismatch");
    SphericalFunction f;
    f.values_ = g->synthesize(a);
    f.coeffs_ = std::move(a);
    f.grid_ = std::move(g);
    return f;
  }

  template <class Fn>
  static SphericalFunction sample(GridPtr g, Fn&& fn) {
    VectorXd v(g->size());
    for (int j = 0; j < g->n_theta(); ++j)
      for (int k = 0; k < g->n_phi(); ++k) v[g->node(j, k)] = fn(g->direction(j, k));
    return from_values(std::move(g), std::move(v));
  }

  const GridPtr& grid() const { return grid_; }
  const VectorXd& values() const { return values_; }
  const VectorXd& coeffs() const { return coeffs_; }
  double coeff(int l, int m) const { return coeffs_[sh_index(l, m)]; }
  bool empty() const { return !grid_; }

  double sup() const { return values_.size() ? values_.cwiseAbs().maxCoeff() : 0.0; }
  double integral() const { return grid_->integrate(values_); }
  double l2_norm() const { return std::sqrt(grid_->integrate(values_.cwiseProduct(values_))); }

  SphericalFunction operator+(const SphericalFunction& o) const { return combine(o, 1.0); }
  SphericalFunction operator-(const SphericalFunction& o) const { return combine(o, -1.0); }
  SphericalFunction operator*(double s) const {
    SphericalFunction f = *this;
    f.values_ *= s;
    f.coeffs_ *= s;
    return f;
  }

  /// Coefficients multiplied by mult(l).
  template <class Fn>
  SphericalFunction scale_by_degree(Fn&& mult) const {
    VectorXd a = coeffs_;
    const int L = grid_->L();
    for (int l = 0; l <= L; ++l) {
      const double s = mult(l);
      for (int m = -l; m <= l; ++m) a[sh_index(l, m)] *= s;
    }
    return from_coeffs(grid_, std::move(a));
  }

 private:
  SphericalFunction combine(const SphericalFunction& o, double s) const {
    SphericalFunction f = *this;
    f.values_ += s * o.values_;
    f.coeffs_ += s * o.coeffs_;
    return f;
  }

  GridPtr grid_;
  VectorXd values_;
  VectorXd coeffs_;
};

inline SphericalFunction operator*(double s, const SphericalFunction& f) { return f * s; }

inline double willmore_eigenvalue(int l) {
  const double ll = l * (l + 1.0);
  return ll * (ll - 2.0);
}

inline SphericalFunction laplace_beltrami(const SphericalFunction& f) {
  return f.scale_by_degree([](int l) { return -l * (l + 1.0); });
}

/// Δ(Δ+2) on S²; the flat second variation of I at the unit sphere is half of this.
inline SphericalFunction willmore_operator(const SphericalFunction& f) {
  return f.scale_by_degree(willmore_eigenvalue);
}

inline SphericalFunction project_perp(const SphericalFunction& f) {
  return f.scale_by_degree([](int l) { return l <= 1 ? 0.0 : 1.0; });
}

inline SphericalFunction invert_on_perp(const SphericalFunction& f) {
  return f.scale_by_degree([](int l) { return l <= 1 ? 0.0 : 1.0 / willmore_eigenvalue(l); });
}

/// Coordinate frame Θ_1 = ∂_θ Θ and Θ̄_2 = ∂_φ Θ / sin θ.
inline Vec3 frame_theta1(double t, double p) {
  return {std::cos(t) * std::cos(p), std::cos(t) * std::sin(p), -std::sin(t)};
}
inline Vec3 frame_theta2(double, double p) { return {-std::sin(p), std::cos(p), 0.0}; }

struct IdentityCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double abs_err = 0.0;
};

/// Quadrature checks of the four closed-form Ricci integrals over S².
inline std::array<IdentityCheck, 4> ricci_integral_identities(const Mat3& ric_in, const SphereGrid& g) {
  const Mat3 ric = 0.5 * (ric_in + ric_in.transpose());
  const double pi = std::numbers::pi;
  const double tr = ric.trace();
  const double n2 = ric.squaredNorm();
  std::array<double, 4> lhs{};
  for (int j = 0; j < g.n_theta(); ++j) {
    std::array<double, 4> row{};
    for (int k = 0; k < g.n_phi(); ++k) {
      const double t = g.theta(j), p = g.phi(k);
      const Vec3 x = g.direction(j, k);
      const Vec3 e1 = frame_theta1(t, p), e2 = frame_theta2(t, p);
      const double rtt = x.dot(ric * x);
      const double r12 = e1.dot(ric * e2);
      row[0] += x[0] * x[0];
      row[1] += rtt;
      row[2] += rtt * rtt;
      row[3] += r12 * r12 - e1.dot(ric * e1) * e2.dot(ric * e2);
    }
    for (int i = 0; i < 4; ++i) lhs[i] += g.weight(j) * row[i];
  }
  const std::array<double, 4> rhs{4.0 * pi / 3.0, 4.0 * pi / 3.0 * tr,
                                  4.0 * pi / 15.0 * (2.0 * n2 + tr * tr),
                                  2.0 * pi / 3.0 * (n2 - tr * tr)};
  std::array<IdentityCheck, 4> out;
  for (int i = 0; i < 4; ++i) out[i] = {lhs[i], rhs[i], std::abs(lhs[i] - rhs[i])};
  return out;
}

}  // namespace willmore_lab
