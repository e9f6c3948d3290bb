#include <doctest.h>

#include <cmath>
#include <random>

#include "cpt/minimax.hpp"

using namespace cpt;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

PairPtr saddle_pair(int res = 64) {
  PairParams params;
  params.R = 2.0;
  return make_pair(PairKind::saddle, Decomposition::axes(2, 1), params, res);
}

PairPtr double_well_path_pair(int res = 64) {
  PairParams params;
  params.rho = 0.5;
  params.path_a = vec2(-1, 0);
  params.path_b = vec2(1, 0);
  return make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, res);
}

// straight path lifted through (0, height): a deliberately bad seed map
AdmissibleMap lifted_path(PairPtr pair, double height) {
  std::vector<Vector> images;
  const double len = 2.0;
  for (const auto& node : pair->mesh.nodes) {
    const double s = node(0);
    const double bump = height * std::sin(M_PI * s / len);
    images.push_back(vec2(-1.0 + s, 0) + vec2(0, bump));
  }
  // exact pinning at the ends
  images.front() = vec2(-1, 0);
  images.back() = vec2(1, 0);
  return AdmissibleMap(pair, images);
}

}  // namespace

TEST_CASE("sup over the identity path of the double well") {
  const PairPtr pair = double_well_path_pair();
  const Functional f = make_test_functional("double_well");
  const SupResult sup = sup_on_map(f, AdmissibleMap::identity(pair));
  CHECK(sup.value == doctest::Approx(0.0).epsilon(1e-10));
  CHECK(sup.argmax_image.norm() <= 1e-6);  // the pass point is the origin
}

TEST_CASE("sup of a constant functional is flat") {
  const PairPtr pair = double_well_path_pair(16);
  const Functional constant("constant", 2,
                            [](const Vector&) { return 3.25; },
                            [](const Vector& x) {
                              return Vector(Vector::Zero(x.size()));
                            });
  const SupResult sup = sup_on_map(constant, AdmissibleMap::identity(pair));
  CHECK(sup.value == doctest::Approx(3.25));
  CHECK(sup.node_max == doctest::Approx(3.25));
}

TEST_CASE("sup of the saddle functional over V2 peaks at the origin") {
  const PairPtr pair = saddle_pair();
  const Functional f = make_test_functional("saddle");
  const SupResult sup = sup_on_map(f, AdmissibleMap::identity(pair));
  CHECK(sup.value == doctest::Approx(0.0));
  CHECK(sup.argmax_image.norm() <= 1e-9);
}

TEST_CASE("geometry bounds for the saddle instance") {
  const GeometryBounds b = check_geometry_bounds(
      make_test_functional("saddle"), *saddle_pair());
  CHECK(b.alpha == doctest::Approx(0.0));
  CHECK(b.boundary_max == doctest::Approx(-4.0));
  CHECK(b.hypothesis_b);
}

TEST_CASE("geometry bounds for the double-well path") {
  const GeometryBounds b = check_geometry_bounds(
      make_test_functional("double_well"), *double_well_path_pair());
  // minimum of x^4 - 2x^2 + y^2 on the circle of radius 1/2: attained on the
  // axis, 1/16 - 1/2
  CHECK(b.alpha == doctest::Approx(-0.4375).epsilon(1e-9));
  CHECK(b.boundary_max == doctest::Approx(-1.0));
  CHECK(b.hypothesis_b);
}

TEST_CASE("hypothesis (b) fails for an inverted functional") {
  const Functional neg("neg_norm", 2,
                       [](const Vector& x) { return -x.squaredNorm(); },
                       [](const Vector& x) { return Vector(-2.0 * x); });
  const GeometryBounds b = check_geometry_bounds(neg, *saddle_pair());
  CHECK_FALSE(b.hypothesis_b);
  CHECK_THROWS_AS(
      estimate_cgamma(neg, saddle_pair(),
                      AdmissibleMap::identity(saddle_pair())),
      std::invalid_argument);
}

TEST_CASE("mountain pass level of the double well") {
  const PairPtr pair = double_well_path_pair();
  const Functional f = make_test_functional("double_well");
  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
  CHECK(std::abs(report.c_estimate) <= 1e-4);
  CHECK((report.candidate_critical - vec2(0, 0)).norm() <= 1e-3);
  CHECK(report.grad_norm_at_candidate <= 1e-5);
  CHECK_FALSE(report.limiting_case);  // alpha = -0.4375 < c
}

TEST_CASE("driver iterates a lifted path down to the pass level") {
  const PairPtr pair = double_well_path_pair();
  const Functional f = make_test_functional("double_well");
  const MinimaxReport report = estimate_cgamma(f, pair, lifted_path(pair, 0.8));
  // sup history decreases monotonically
  for (size_t i = 1; i < report.iteration_history.size(); ++i)
    CHECK(report.iteration_history[i].second <=
          report.iteration_history[i - 1].second + 1e-12);
  CHECK(report.iteration_history.size() >= 3);
  CHECK(report.c_estimate <= 0.02);
  CHECK(report.c_estimate >= report.alpha - 1e-4);
  CHECK((report.candidate_critical - vec2(0, 0)).norm() <= 1e-3);
  // boundary nodes never moved
  for (int b : pair->mesh.boundary_nodes)
    CHECK((report.best_map.node_images()[b] -
           pair->chart.embed(pair->mesh.nodes[b]))
              .norm() == 0.0);
}

TEST_CASE("saddle instance is flagged limiting and localizes on V1") {
  const PairPtr pair = saddle_pair();
  const Functional f = make_test_functional("saddle");
  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
  CHECK(std::abs(report.c_estimate) <= 1e-4);
  CHECK(report.limiting_case);
  CHECK(report.stop == MinimaxStop::limiting);

  const Localization loc = locate_on_S(f, report, pair, 1e-3);
  CHECK(loc.dist_to_S <= 1e-3);
  CHECK(loc.grad_norm <= 1e-3);
  CHECK(loc.point.norm() <= 1e-3);  // the critical point is the origin
}

TEST_CASE("plateau path is limiting with c = alpha = 0") {
  FunctionalParams params;
  params.plateau_radius = 2.0;
  const Functional f = make_test_functional("radial_plateau", params);
  PairParams pp;
  pp.rho = 1.5;
  pp.path_b = vec2(2, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), pp, 64);
  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
  CHECK(report.alpha == doctest::Approx(0.0));
  CHECK(std::abs(report.c_estimate - report.alpha) <= 1e-4);
  CHECK(report.limiting_case);
}

TEST_CASE("locate_on_S refuses a non-limiting report") {
  const PairPtr pair = double_well_path_pair();
  const Functional f = make_test_functional("double_well");
  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
  REQUIRE_FALSE(report.limiting_case);
  CHECK_THROWS_AS(locate_on_S(f, report, pair, 1e-3), std::invalid_argument);
}

TEST_CASE("third critical point of the double well") {
  const Functional f = make_test_functional("double_well");
  const Vector third = pucci_serrin_third(f, vec2(-1, 0), vec2(1, 0), 1e-3);
  CHECK(third.norm() <= 1e-3);
}

TEST_CASE("third critical point in one dimension") {
  const Functional f("quartic1d", 1,
                     [](const Vector& x) {
                       const double a = x(0) * x(0) - 1.0;
                       return a * a;
                     },
                     [](const Vector& x) {
                       Vector g(1);
                       g(0) = 4.0 * x(0) * (x(0) * x(0) - 1.0);
                       return g;
                     });
  Vector m1(1), m2(1);
  m1 << -1.0;
  m2 << 1.0;
  const Vector third = pucci_serrin_third(f, m1, m2, 1e-6);
  CHECK(std::abs(third(0)) <= 1e-6);
}

TEST_CASE("coinciding minima are rejected") {
  const Functional f("bowl", 2,
                     [](const Vector& x) { return x.squaredNorm(); },
                     [](const Vector& x) { return Vector(2.0 * x); });
  CHECK_THROWS_AS(pucci_serrin_third(f, vec2(0, 0), vec2(0, 0), 1e-6),
                  std::invalid_argument);
}

TEST_CASE("non-minima are rejected") {
  const Functional f = make_test_functional("double_well");
  // the origin is a saddle, not a minimum
  CHECK_THROWS_AS(pucci_serrin_third(f, vec2(0, 0), vec2(1, 0), 1e-6),
                  std::invalid_argument);
}

TEST_CASE("mountain pass on the discretized boundary value problem") {
  // the energy of -u'' = u^3 on [0, 1]: zero is a local minimum, large
  // spikes have negative energy, and the pass level is a nontrivial
  // solution of the difference equation
  FunctionalParams params;
  params.grid_cells = 8;
  const Functional f = make_test_functional("bvp_quartic", params);
  const int n = f.dim();

  Vector profile(n);
  for (int i = 0; i < n; ++i)
    profile(i) = std::sin(M_PI * (i + 1) / (n + 1));
  double amp = 1.0;
  while (f.value(amp * profile) > -0.5) amp *= 2.0;
  const Vector e = amp * profile;

  PairParams pp;
  pp.rho = 0.5;
  pp.path_b = e;
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(n, n - 1), pp, 32);
  const GeometryBounds bounds = check_geometry_bounds(f, *pair);
  REQUIRE(bounds.hypothesis_b);  // 0 and the spike sit below the sphere level

  const MinimaxReport report =
      estimate_cgamma(f, pair, AdmissibleMap::identity(pair));
  CHECK(report.c_estimate >= bounds.alpha - 1e-4);
  CHECK(report.c_estimate > 0.0);
  // the polished candidate is a nontrivial near-solution of the residual
  // equation (2u_i - u_{i-1} - u_{i+1})/h^2 = u_i^3
  CHECK(report.grad_norm_at_candidate <= 1e-6);
  CHECK(report.candidate_critical.norm() >= 0.1);
}
