#include "willmore_lab/metric.hpp"

#include <catch_amalgamated.hpp>

#include <random>

using namespace willmore_lab;

namespace {

std::vector<MetricPerturbation> catalog() {
  Mat3 a;
  a << 1.0, 0.3, -0.2, 0.3, -0.5, 0.1, -0.2, 0.1, 0.7;
  return {MetricPerturbation::gaussian_bump(Vec3(0.1, -0.2, 0.3), 0.8, a),
          MetricPerturbation::conformal_bump(Vec3(0.0, 0.0, 0.0), 1.0, 0.6),
          MetricPerturbation::anisotropic_bump(Vec3(0.2, 0.0, -0.1), 0.9, a, Vec3(1.0, 1.5, 0.7))};
}

double rel(double got, double want, double scale) { return std::abs(got - want) / (std::abs(want) + scale); }

}  // namespace

TEST_CASE("analytic derivatives match central differences of eval") {
  std::mt19937_64 rng(42);
  std::normal_distribution<double> nd(0.0, 0.7);
  const double h = 1e-4;
  for (const auto& m : catalog()) {
    for (int trial = 0; trial < 10; ++trial) {
      const Vec3 x = m.center() + Vec3(nd(rng), nd(rng), nd(rng));
      const MetricJet j = m.jet(x, 3);
      double worst = 0.0;
      for (int k = 0; k < 3; ++k) {
        const Vec3 e = h * Vec3::Unit(k);
        const MetricJet jp = m.jet(x + e, 2), jm = m.jet(x - e, 2);
        const Mat3 fd1 = (m.eval(x + e) - m.eval(x - e)) / (2 * h);
        for (int a = 0; a < 3; ++a)
          for (int b = 0; b < 3; ++b) {
            worst = std::max(worst, rel(j.d1[k][a][b], fd1(a, b), 1e-3));
            for (int l = 0; l < 3; ++l) {
              const double fd2 = (jp.d1[l][a][b] - jm.d1[l][a][b]) / (2 * h);
              worst = std::max(worst, rel(j.d2[k][l][a][b], fd2, 1e-3));
              for (int q = 0; q < 3; ++q) {
                const double fd3 = (jp.d2[l][q][a][b] - jm.d2[l][q][a][b]) / (2 * h);
                worst = std::max(worst, rel(j.d3[k][l][q][a][b], fd3, 1e-3));
              }
            }
          }
      }
      CHECK(worst < 1e-6);
    }
  }
}

TEST_CASE("h is symmetric and decays") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> nd(0.0, 1.0);
  for (const auto& m : catalog()) {
    for (int i = 0; i < 20; ++i) {
      const Mat3 h = m.eval(m.center() + Vec3(nd(rng), nd(rng), nd(rng)));
      CHECK((h - h.transpose()).cwiseAbs().maxCoeff() == 0.0);
    }
    const Vec3 far = m.center() + Vec3(20.0, 0.0, 0.0);
    CHECK(m.eval(far).cwiseAbs().maxCoeff() < 1e-100);
    CHECK(m.jet(far, 1).zero);
  }
}

TEST_CASE("ambient metric positivity guard") {
  auto h = MetricPerturbation::gaussian_bump(Vec3::Zero(), 1.0, Mat3::Identity() * 2.0);
  CHECK_NOTHROW(AmbientMetric(h, 0.2));
  CHECK_THROWS_AS(AmbientMetric(h, 0.25), Error);
  try {
    AmbientMetric(h, -0.3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::non_positive_definite);
  }
  AmbientMetric flat(h, 0.0);
  CHECK(flat.is_flat());
  CHECK(flat.g(Vec3::Zero()) == Mat3::Identity());
}

TEST_CASE("invalid catalog parameters") {
  CHECK_THROWS_AS(MetricPerturbation::gaussian_bump(Vec3::Zero(), -1.0, Mat3::Identity()), Error);
  CHECK_THROWS_AS(
      MetricPerturbation::anisotropic_bump(Vec3::Zero(), 1.0, Mat3::Identity(), Vec3(1, 0, 1)), Error);
}

TEST_CASE("custom perturbation respects its declared order") {
  auto fn = [](const Vec3& x, int, MetricJet& j) {
    for (int a = 0; a < 3; ++a) j.h[a][a] = 0.1 * std::exp(-x.squaredNorm());
  };
  auto m = MetricPerturbation::custom(fn, 1, 0.1, Vec3::Zero(), 10.0);
  CHECK_NOTHROW(m.jet(Vec3::Zero(), 1));
  try {
    m.jet(Vec3::Zero(), 3);
    FAIL("expected CatalogDerivativeMissing");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::catalog_derivative_missing);
  }
}
