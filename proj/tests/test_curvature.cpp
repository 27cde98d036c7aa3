#include "oracles.hpp"
#include "willmore_lab/curvature.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace willmore_lab;

namespace {

Mat3 amp() {
  Mat3 a;
  a << 1.0, 0.4, -0.3, 0.4, -0.6, 0.2, -0.3, 0.2, 0.8;
  return a;
}

std::vector<MetricPerturbation> catalog() {
  return {MetricPerturbation::gaussian_bump(Vec3(0.1, -0.2, 0.3), 0.8, amp()),
          MetricPerturbation::conformal_bump(Vec3(0.0, 0.0, 0.0), 1.0, 0.6),
          MetricPerturbation::anisotropic_bump(Vec3(0.2, 0.0, -0.1), 0.9, amp(), Vec3(1.0, 1.5, 0.7))};
}

oracle::MetricFn as_fn(const AmbientMetric& m) {
  return [&m](const Vec3& x) { return m.g(x); };
}

double max_abs(const T3333<double>& R) {
  double s = 0.0;
  for (auto& a : R)
    for (auto& b : a)
      for (auto& c : b)
        for (double d : c) s = std::max(s, std::abs(d));
  return s;
}

}  // namespace

TEST_CASE("flat metric has no curvature") {
  AmbientMetric m(catalog()[0], 0.0);
  auto P = curvature_pack(m, Vec3(0.3, 0.1, 0.0));
  CHECK(max_abs(P.riemann) == 0.0);
  CHECK(P.traceless.cwiseAbs().maxCoeff() == 0.0);
  CHECK(P.scalar == 0.0);
  for (auto& a : P.gamma)
    for (auto& b : a)
      for (double c : b) CHECK(c == 0.0);
}

TEST_CASE("Christoffel symbols linearize as (eps/2) A") {
  auto h = catalog()[0];
  const Vec3 p = h.center() + Vec3(0.3, -0.2, 0.25);
  const MetricJet j = h.jet(p, 1);
  std::vector<double> eps, err;
  for (double e = 1e-3; e > 1e-6; e /= 2) {
    AmbientMetric m(h, e);
    auto P = curvature_pack(m, p, false);
    double num = 0.0, den = 0.0;
    for (int n = 0; n < 3; ++n)
      for (int mu = 0; mu < 3; ++mu)
        for (int l = 0; l < 3; ++l) {
          // A_{μνλ} = D_μ h_{λν} + D_λ h_{νμ} − D_ν h_{μλ}
          const double A = j.d1[mu][l][n] + j.d1[l][n][mu] - j.d1[n][mu][l];
          const double d = P.gamma[n][mu][l] - 0.5 * e * A;
          num += d * d;
          den += P.gamma[n][mu][l] * P.gamma[n][mu][l];
        }
    eps.push_back(e);
    err.push_back(std::sqrt(num / den));
  }
  CHECK(err.back() < 1e-5);
  const double slope = std::log(err.front() / err.back()) / std::log(eps.front() / eps.back());
  CHECK(slope >= 1.0 - 1e-3);
}

TEST_CASE("Ricci agrees with the finite-difference oracle") {
  for (const auto& h : catalog()) {
    AmbientMetric m(h, 0.05);
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd(0.0, 0.5);
    for (int t = 0; t < 4; ++t) {
      const Vec3 p = h.center() + Vec3(nd(rng), nd(rng), nd(rng));
      const Mat3 ric = curvature_pack(m, p, false).ricci;
      const Mat3 ref = oracle::ricci_fd(as_fn(m), p);
      CHECK((ric - ref).norm() / ref.norm() < 1e-4);
    }
  }
}

TEST_CASE("oracle slot convention is fixed by the conformal closed form") {
  // g = (1 + εαφ)δ = e^{2f}δ with f = ½ log(1 + εαφ)
  auto h = catalog()[1];
  const double eps = 0.1;
  AmbientMetric m(h, eps);
  const Vec3 p(0.3, -0.4, 0.2);
  const MetricJet j = h.jet(p, 2);
  const double u = 1.0 + eps * j.h[0][0];
  Vec3 du;
  Mat3 ddu;
  for (int a = 0; a < 3; ++a) {
    du[a] = eps * j.d1[a][0][0];
    for (int b = 0; b < 3; ++b) ddu(a, b) = eps * j.d2[a][b][0][0];
  }
  const Vec3 df = 0.5 * du / u;
  const Mat3 hf = 0.5 * (ddu / u - du * du.transpose() / (u * u));
  const Mat3 ref = oracle::conformal_ricci(df, hf);
  CHECK((oracle::ricci_fd(as_fn(m), p) - ref).norm() / ref.norm() < 1e-7);
  CHECK((curvature_pack(m, p, false).ricci - ref).norm() / ref.norm() < 1e-12);

  // The oracle's lowered tensor in slot order contracts to the same Ricci.
  const auto Rp = oracle::riemann_lowered_fd(as_fn(m), p, 1e-3);
  const Mat3 gi = m.g(p).inverse();
  Mat3 ric = Mat3::Zero();
  for (int b = 0; b < 3; ++b)
    for (int d = 0; d < 3; ++d)
      for (int a = 0; a < 3; ++a)
        for (int c = 0; c < 3; ++c) ric(b, d) += gi(a, c) * Rp[a][b][c][d];
  CHECK((ric - ref).norm() / ref.norm() < 1e-7);
  auto P = curvature_pack(m, p, false);
  double worst = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) worst = std::max(worst, std::abs(P.riemann[a][b][c][d] - Rp[a][b][c][d]));
  CHECK(worst < 1e-7 * (1.0 + max_abs(P.riemann)));
}

TEST_CASE("Riemann symmetries, Bianchi and trace-free S on random probes") {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> nd(0.0, 0.8);
  for (const auto& h : catalog()) {
    AmbientMetric m(h, 0.2);
    for (int t = 0; t < 100; ++t) {
      const Vec3 p = h.center() + Vec3(nd(rng), nd(rng), nd(rng));
      auto P = curvature_pack(m, p, false);
      const auto& R = P.riemann;
      const double tol = 1e-9 * (1.0 + max_abs(R));
      double worst = 0.0;
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) {
              worst = std::max(worst, std::abs(R[a][b][c][d] + R[b][a][c][d]));
              worst = std::max(worst, std::abs(R[a][b][c][d] + R[a][b][d][c]));
              worst = std::max(worst, std::abs(R[a][b][c][d] - R[c][d][a][b]));
              worst = std::max(worst, std::abs(R[a][b][c][d] + R[a][c][d][b] + R[a][d][b][c]));
            }
      CHECK(worst < tol);
      CHECK((P.ricci - P.ricci.transpose()).cwiseAbs().maxCoeff() < tol);
      CHECK(std::abs((P.metric_inv * P.traceless).trace()) < 1e-10);
      const double n2 = P.norm2_ricci() - P.scalar * P.scalar / 3.0;
      CHECK(std::abs(P.norm2_traceless() - n2) <= 1e-10 * std::max(std::abs(n2), 1e-300) + 1e-300);
    }
  }
}

TEST_CASE("nabla Riemann matches differences of Riemann and satisfies second Bianchi") {
  for (const auto& h : catalog()) {
    AmbientMetric m(h, 0.1);
    const Vec3 p = h.center() + Vec3(0.25, -0.3, 0.15);
    auto P = curvature_pack(m, p, true);
    const double dh = 1e-4;
    double worst = 0.0, scale = 0.0, bianchi = 0.0;
    for (int e = 0; e < 3; ++e) {
      auto Pp = curvature_pack(m, p + dh * Vec3::Unit(e), false);
      auto Pm = curvature_pack(m, p - dh * Vec3::Unit(e), false);
      for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
          for (int c = 0; c < 3; ++c)
            for (int d = 0; d < 3; ++d) {
              double v = (Pp.riemann[a][b][c][d] - Pm.riemann[a][b][c][d]) / (2 * dh);
              for (int l = 0; l < 3; ++l)
                v -= P.gamma[l][e][a] * P.riemann[l][b][c][d] + P.gamma[l][e][b] * P.riemann[a][l][c][d] +
                     P.gamma[l][e][c] * P.riemann[a][b][l][d] + P.gamma[l][e][d] * P.riemann[a][b][c][l];
              worst = std::max(worst, std::abs(v - P.nabla_riemann[e][a][b][c][d]));
              scale = std::max(scale, std::abs(v));
              bianchi = std::max(bianchi, std::abs(P.nabla_riemann[e][a][b][c][d] +
                                                   P.nabla_riemann[c][a][b][d][e] +
                                                   P.nabla_riemann[d][a][b][e][c]));
            }
    }
    CHECK(worst < 1e-6 * (1.0 + scale));
    CHECK(bianchi < 1e-10 * (1.0 + scale));
  }
}

TEST_CASE("s_tilde") {
  const Vec3 x0(0.0, 0.0, 0.0);
  CHECK(s_tilde(MetricPerturbation::zero(), x0) == 0.0);
  Mat3 a = Mat3::Zero();
  a(0, 0) = 1.0;
  auto h = MetricPerturbation::gaussian_bump(x0, 1.0, a);
  CHECK(s_tilde(h, x0 + Vec3(11.0, 0.0, 0.0)) < 1e-12);

  const double st = s_tilde(h, x0);
  // The oracle averages ±ε at ε = 1e-3 so its own O(ε) bias drops out.
  const double e = 1e-3;
  AmbientMetric mp(h, e), mm(h, -e);
  const double ref = 0.5 * (oracle::traceless_norm2_fd(as_fn(mp), x0) +
                            oracle::traceless_norm2_fd(as_fn(mm), x0)) / (e * e);
  CHECK(st > 0.0);
  CHECK(std::abs(st - ref) / ref < 1e-3);

  // Adding an affine-in-x term to h leaves s̃ unchanged.
  Mat3 M;
  M << 0.2, 0.1, 0.0, 0.1, -0.3, 0.05, 0.0, 0.05, 0.1;
  const Vec3 b(0.3, -0.1, 0.2);
  auto fn = [h, M, b](const Vec3& x, int order, MetricJet& j) {
    const MetricJet base = h.jet(x, order);
    j = base;
    j.zero = false;
    const double lin = 1.0 + b.dot(x);
    for (int r = 0; r < 3; ++r)
      for (int c = 0; c < 3; ++c) {
        j.h[r][c] += lin * M(r, c);
        for (int k = 0; k < 3; ++k) j.d1[k][r][c] += b[k] * M(r, c);
      }
  };
  auto h2 = MetricPerturbation::custom(fn, 3, 2.0, x0, 6.0);
  CHECK(std::abs(s_tilde(h2, x0) - st) < 1e-10 * (1.0 + st));
}

TEST_CASE("nabla Riemann needs third derivatives") {
  auto fn = [](const Vec3&, int, MetricJet&) {};
  auto h = MetricPerturbation::custom(fn, 2, 0.1, Vec3::Zero(), 1.0);
  AmbientMetric m(h, 0.1);
  try {
    curvature_pack(m, Vec3::Zero(), true);
    FAIL("expected CatalogDerivativeMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::catalog_derivative_missing);
  }
  CHECK_NOTHROW(curvature_pack(m, Vec3::Zero(), false));
}
