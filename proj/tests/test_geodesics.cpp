#include "oracles.hpp"
#include "willmore_lab/geodesics.hpp"

#include <catch_amalgamated.hpp>

using namespace willmore_lab;

namespace {

MetricPerturbation bump() {
  Mat3 a;
  a << 1.0, 0.3, 0.0, 0.3, -0.4, 0.2, 0.0, 0.2, 0.5;
  return MetricPerturbation::gaussian_bump(Vec3(0.1, 0.0, -0.2), 0.8, a);
}

double slope(const std::vector<double>& x, const std::vector<double>& y) {
  double mx = 0, my = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += std::log(x[i]);
    my += std::log(y[i]);
  }
  mx /= x.size();
  my /= y.size();
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxy += (std::log(x[i]) - mx) * (std::log(y[i]) - my);
    sxx += (std::log(x[i]) - mx) * (std::log(x[i]) - mx);
  }
  return sxy / sxx;
}

}  // namespace

TEST_CASE("flat exponential map is a straight line") {
  AmbientMetric m(bump(), 0.0);
  const Vec3 p(0.3, -0.1, 0.2), th = Vec3(1, 2, -2).normalized();
  CHECK((exp_map(m, p, th, 0.7) - (p + 0.7 * th)).norm() < 1e-12);
}

TEST_CASE("exp map deviates from the straight line at order eps") {
  const Vec3 p(0.2, 0.1, 0.0), th = Vec3(0.3, -1.0, 0.5).normalized();
  std::vector<double> eps, dev;
  for (double e : {1e-2, 5e-3, 2.5e-3}) {
    AmbientMetric m(bump(), e);
    eps.push_back(e);
    dev.push_back((exp_map(m, p, th, 0.8) - (p + 0.8 * th)).norm());
  }
  CHECK(std::abs(slope(eps, dev) - 1.0) < 0.05);
}

TEST_CASE("exp map matches a fixed-step RK4 oracle") {
  AmbientMetric m(bump(), 1e-2);
  const Vec3 p(0.2, 0.1, 0.0), th = Vec3(0.3, -1.0, 0.5).normalized();
  oracle::MetricFn g = [&m](const Vec3& x) { return m.g(x); };
  const Vec3 ref = oracle::rk4_geodesic(g, p, th, 1.0, 1e-4);
  CHECK((exp_map(m, p, th, 1.0) - ref).norm() < 1e-8);
}

TEST_CASE("geodesic speed is conserved") {
  AmbientMetric m(bump(), 0.1);
  const Vec3 p(-0.5, 0.3, 0.1), th = Vec3(1.0, -0.2, 0.3).normalized();
  auto sol = integrate_geodesic(m, p, th, 5.0);
  const double s0 = th.dot(m.g(p) * th);
  double worst = 0.0;
  for (size_t i = 0; i < sol.y.size(); ++i)
    worst = std::max(worst, std::abs(sol.ydot[i].dot(m.g(sol.y[i]) * sol.ydot[i]) - s0) / s0);
  CHECK(worst < 1e-8);
}

TEST_CASE("variational sensitivities match direction differences") {
  AmbientMetric m(bump(), 0.1);
  const Vec3 p(0.1, -0.2, 0.3);
  const double t = 1.1, ph = 0.4, T = 1.2;
  const std::array<Vec3, 2> d{frame_theta1(t, ph), std::sin(t) * frame_theta2(t, ph)};
  auto sol = integrate_geodesic(m, p, SphereGrid::unit(t, ph), T, {}, d);
  const double h = 1e-5;
  const Vec3 ft = (exp_map(m, p, SphereGrid::unit(t + h, ph), T) - exp_map(m, p, SphereGrid::unit(t - h, ph), T)) / (2 * h);
  const Vec3 fp = (exp_map(m, p, SphereGrid::unit(t, ph + h), T) - exp_map(m, p, SphereGrid::unit(t, ph - h), T)) / (2 * h);
  CHECK((sol.dy[0].back() - ft).norm() < 1e-6);
  CHECK((sol.dy[1].back() - fp).norm() < 1e-6);
  CHECK((sol.end() - exp_map(m, p, SphereGrid::unit(t, ph), T)).norm() < 1e-9);
}

TEST_CASE("geodesic sphere graph") {
  auto grid = make_grid(36, 24);
  const Vec3 p(0.3, 0.2, -0.1);

  AmbientMetric flat(bump(), 0.0);
  CHECK(geodesic_sphere_graph(flat, p, 0.4, grid).v.sup() == 0.0);

  AmbientMetric m(bump(), 1e-2);
  for (double rho : {0.1, 0.4, 0.8}) {
    auto G = geodesic_sphere_graph(m, p, rho, grid);
    CHECK(G.max_residual < 1e-8 * rho);
    CHECK((1.0 - G.v.values().array()).minCoeff() > 0.0);
    // every node is at geodesic distance ρ along its shooting direction
    for (int i = 0; i < grid->size(); i += 97) {
      const Vec3 end = exp_map(m, p, G.shoot[i], rho);
      const Vec3 want = p + rho * (1.0 - G.v.values()[i]) * grid->direction(i / grid->n_phi(), i % grid->n_phi());
      CHECK((end - want).norm() < 1e-8 * rho);
    }
  }
}

TEST_CASE("metric-unit shooting gives the g-unit sphere of directions") {
  auto grid = make_grid(20, 12);
  AmbientMetric m(bump(), 1e-2);
  const Vec3 p(0.0, 0.1, 0.0);
  auto G = geodesic_sphere_graph(m, p, 0.3, grid, DirectionNorm::metric);
  for (int i = 0; i < grid->size(); i += 31) CHECK(std::abs(G.shoot[i].dot(m.g(p) * G.shoot[i]) - 1.0) < 1e-14);
}

TEST_CASE("cut-off family") {
  auto grid = make_grid(24, 16);
  const Vec3 p(0.2, -0.1, 0.0);
  auto w = SphericalFunction::sample(grid, [](const Vec3& x) { return 0.01 * (x[0] * x[1] + 0.5 * x[2] * x[2]); });
  Cutoff cut;
  CHECK(cut(0.3) == 1.0);
  CHECK(cut(1.2) == 0.0);
  CHECK(cut(0.75) > 0.0);
  CHECK(cut(0.75) < 1.0);

  AmbientMetric m(bump(), 1e-2);
  {
    // ρ ≥ R2: exactly the standard graph
    auto s = approximate_surface(m, p, 1.2, 0.5, 1.0, w);
    auto ref = standard_graph(p, 1.2, w);
    double d = 0;
    for (int i = 0; i < s.size(); ++i) d = std::max(d, (s.X[i] - ref.X[i]).norm() + (s.X11[i] - ref.X11[i]).norm());
    CHECK(d == 0.0);
  }
  {
    // R1 < ρ < R2 with ε = 0: standard graph
    AmbientMetric flat(bump(), 0.0);
    auto s = approximate_surface(flat, p, 0.75, 0.5, 1.0, w);
    auto ref = standard_graph(p, 0.75, w);
    double d = 0;
    for (int i = 0; i < s.size(); ++i) d = std::max(d, (s.X[i] - ref.X[i]).norm());
    CHECK(d == 0.0);
  }
  {
    // ρ ≤ R1: the geodesic sphere graph offset by ρw along its normal
    SigmaFamily fam(m, p, 0.3, grid, cut);
    auto zero = SphericalFunction::zeros(grid);
    auto s0 = fam.surface(zero);
    auto geo = standard_graph(p, 0.3, fam.geodesic_graph().v);
    double d = 0;
    for (int i = 0; i < s0.size(); ++i) d = std::max(d, (s0.X[i] - geo.X[i]).norm());
    CHECK(d < 1e-12);
    CHECK(s0.kind == SurfaceKind::geodesic_graph);
    auto s = fam.surface(w);
    double off = 0;
    for (int i = 0; i < s.size(); ++i) {
      const Vec3 n = -geo.X1[i].cross(geo.X2[i]).normalized();
      off = std::max(off, (s.X[i] - (geo.X[i] + 0.3 * w.values()[i] * n)).norm());
    }
    CHECK(off < 1e-12);
  }
  CHECK_THROWS_AS(approximate_surface(m, p, 0.3, 0.5, 1.0, w * 80.0), Error);
}
