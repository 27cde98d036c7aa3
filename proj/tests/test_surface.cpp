#include "oracles.hpp"
#include "willmore_lab/geodesics.hpp"
#include "willmore_lab/surface.hpp"

#include <catch_amalgamated.hpp>

using namespace willmore_lab;

namespace {

MetricPerturbation bump() {
  Mat3 a;
  a << 1.0, 0.3, 0.0, 0.3, -0.4, 0.2, 0.0, 0.2, 0.5;
  return MetricPerturbation::gaussian_bump(Vec3(0.1, 0.0, -0.2), 0.8, a);
}

// Ellipsoid x²+y²+z²/4 = 1 as a graph over the unit sphere about the origin.
SphericalFunction ellipsoid_u(const GridPtr& g) {
  return SphericalFunction::sample(g, [](const Vec3& t) {
    return 1.0 - 1.0 / std::sqrt(t[0] * t[0] + t[1] * t[1] + 0.25 * t[2] * t[2]);
  });
}

SphericalFunction wobble(const GridPtr& g, double amp) {
  return SphericalFunction::sample(g, [amp](const Vec3& x) {
    return amp * (x[0] * x[1] - 0.3 * x[2] + 0.5 * x[2] * x[2] * x[0] + 0.2 * x[1] * x[1] * x[1]);
  });
}

}  // namespace

TEST_CASE("round sphere in flat space") {
  auto grid = make_grid(36, 24);
  AmbientMetric m(bump(), 0.0);
  auto G = surface_geometry(m, standard_graph(Vec3(0.4, -1.0, 2.0), 2.0, SphericalFunction::zeros(grid)));
  for (int i = 0; i < G.n; ++i) {
    CHECK(std::abs(G.H[i] - 1.0) < 1e-12);
    CHECK(std::abs(G.D[i] - 0.25) < 1e-12);
    CHECK(std::abs(G.integrand[i]) < 1e-12);
    CHECK(G.umbilic[i]);
  }
  CHECK(std::abs(G.area() - 16.0 * M_PI) < 1e-10);
}

TEST_CASE("ellipsoid mean curvature matches the closed form") {
  auto grid = make_grid(64, 60);
  AmbientMetric m(bump(), 0.0);
  auto s = standard_graph(Vec3::Zero(), 1.0, ellipsoid_u(grid));
  auto G = surface_geometry(m, s);
  double worst = 0.0;
  for (int i = 0; i < G.n; ++i) {
    worst = std::max(worst, std::abs(G.H[i] - oracle::ellipsoid_mean_curvature(Vec3(1, 1, 2), s.X[i])));
    CHECK(G.integrand[i] >= 0.0);
  }
  CHECK(worst < 1e-6);
}

TEST_CASE("curvature identities and normal conditions in a perturbed metric") {
  auto grid = make_grid(30, 20);
  AmbientMetric m(bump(), 0.2);
  auto s = standard_graph(Vec3(0.2, 0.1, -0.1), 0.9, wobble(grid, 0.05));
  auto G = surface_geometry(m, s);
  for (int i = 0; i < G.n; ++i) {
    const double l1 = G.lambda1[i], l2 = G.lambda2[i];
    const double sc = std::abs(G.H[i]) + std::abs(G.D[i]) + 1.0;
    CHECK(std::abs(G.H[i] - (l1 + l2)) < 1e-10 * sc);
    CHECK(std::abs(G.D[i] - l1 * l2) < 1e-10 * sc);
    CHECK(std::abs(G.integrand[i] - 0.25 * (l1 - l2) * (l1 - l2)) < 1e-10 * sc);
    CHECK(l1 >= l2);
    const Mat3& ga = G.g_amb[i];
    CHECK(std::abs(G.N[i].dot(ga * s.X1[i])) < 1e-10);
    CHECK(std::abs(G.N[i].dot(ga * s.X2[i])) < 1e-10);
    CHECK(std::abs(G.N[i].dot(ga * G.N[i]) - 1.0) < 1e-10);
    // inward: the normal points toward the center
    CHECK(G.N[i].dot(ga * (s.center - s.X[i])) > 0.0);
  }
}

TEST_CASE("Gauss-formula and Weingarten second forms agree") {
  auto grid = make_grid(30, 20);
  AmbientMetric m(bump(), 0.2);
  auto s = standard_graph(Vec3(0.2, 0.1, -0.1), 0.9, wobble(grid, 0.05));
  auto G = surface_geometry(m, s);
  auto W = weingarten_second_form(s, G);
  double worst = 0.0, scale = 0.0;
  for (int i = 0; i < G.n; ++i) {
    worst = std::max(worst, (W[i] - G.h[i]).cwiseAbs().maxCoeff());
    scale = std::max(scale, G.h[i].cwiseAbs().maxCoeff());
  }
  CHECK(worst < 1e-8 * scale);
}

TEST_CASE("mean curvature of small geodesic spheres") {
  auto grid = make_grid(24, 16);
  AmbientMetric m(bump(), 0.05);
  const Vec3 p(0.3, 0.2, -0.1);
  const auto P = curvature_pack(m, p, false);
  std::vector<double> rhos, res;
  for (double rho : {0.2, 0.1, 0.05}) {
    auto graph = geodesic_sphere_graph(m, p, rho, grid, DirectionNorm::metric);
    auto G = surface_geometry(m, standard_graph(p, rho, graph.v));
    double worst = 0.0;
    for (int i = 0; i < G.n; ++i) {
      const Vec3& t = graph.shoot[i];
      worst = std::max(worst, std::abs(G.H[i] - 2.0 / rho + rho / 3.0 * t.dot(P.ricci * t)));
    }
    rhos.push_back(rho);
    res.push_back(worst);
  }
  const double slope = std::log(res.front() / res.back()) / std::log(rhos.front() / rhos.back());
  INFO("residuals " << res[0] << " " << res[1] << " " << res[2] << " slope " << slope);
  CHECK(slope >= 2.0);
}

TEST_CASE("mean curvature is stable under grid refinement") {
  AmbientMetric m(bump(), 0.1);
  auto build = [&](int nt) {
    auto g = make_grid(nt, 24);
    auto G = surface_geometry(m, standard_graph(Vec3(0.0, 0.1, 0.0), 0.8, wobble(g, 0.03)));
    return SphericalFunction::from_values(g, G.H).coeffs();
  };
  const VectorXd a = build(40), b = build(80);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("degenerate and ambiguous immersions are rejected") {
  auto grid = make_grid(12, 8);
  AmbientMetric m(bump(), 0.0);
  auto s = standard_graph(Vec3::Zero(), 1.0, SphericalFunction::zeros(grid));
  s.X1[5] = Vec3::Zero();
  try {
    surface_geometry(m, s);
    FAIL("expected DegenerateImmersion");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_immersion);
  }
  auto t = standard_graph(Vec3::Zero(), 1.0, SphericalFunction::zeros(grid));
  // rotate one node's tangent plane so that it contains the ray to the center
  t.X1[3] = t.X[3];
  try {
    surface_geometry(m, t);
    FAIL("expected OrientationAmbiguous");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::orientation_ambiguous);
  }
}
