#include <doctest.h>

#include <cmath>
#include <random>

#include "cpt/ekeland.hpp"

using namespace cpt;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector vec1(double x) {
  Vector v(1);
  v << x;
  return v;
}

PairPtr saddle_pair(int res = 128) {
  PairParams params;
  params.R = 2.0;
  return make_pair(PairKind::saddle, Decomposition::axes(2, 1), params, res);
}

// exhaustive discretized min-max: a unit field per node over a direction net,
// measures over a simplex grid; the decoupled value collapses to
// max_i min_{h_i} <g_i, h_i> (fields decouple across nodes)
struct MinMaxOracle {
  double bound = 0.0;
  int argmin = -1;
};

MinMaxOracle min_max_oracle(const std::vector<Vector>& grads) {
  const int d = static_cast<int>(grads.front().size());
  std::vector<Vector> net;
  if (d == 1) {
    net = {vec1(1), vec1(-1)};
  } else if (d == 2) {
    for (int k = 0; k < 640; ++k) {
      const double th = 2.0 * M_PI * k / 640;
      net.push_back(vec2(std::cos(th), std::sin(th)));
    }
  } else {
    for (int a = 0; a < 80; ++a) {
      for (int b = 0; b < 40; ++b) {
        const double th = 2.0 * M_PI * a / 80, ph = M_PI * b / 39;
        Vector v(3);
        v << std::cos(th) * std::sin(ph), std::sin(th) * std::sin(ph),
            std::cos(ph);
        net.push_back(v);
      }
    }
  }
  MinMaxOracle out;
  out.bound = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < grads.size(); ++i) {
    double per_node = std::numeric_limits<double>::infinity();
    for (const auto& h : net) per_node = std::min(per_node, grads[i].dot(h));
    if (per_node > out.bound) {
      out.bound = per_node;
      out.argmin = static_cast<int>(i);
    }
  }
  out.bound = -out.bound;  // the chain value is -min ||g||
  return out;
}

}  // namespace

TEST_CASE("penalty branches") {
  Matrix xaxis(2, 1);
  xaxis << 1.0, 0.0;
  const SetPtr S = make_subspace_set(xaxis);
  const double eps = 0.5;
  CHECK(penalty_psi(vec2(3, 0), S, eps) == doctest::Approx(eps * eps));
  CHECK(penalty_psi(vec2(0, 2 * eps), S, eps) == 0.0);
  CHECK(penalty_psi(vec2(0, eps / 2), S, eps) ==
        doctest::Approx(eps * eps / 2.0));
}

TEST_CASE("penalty range and Lipschitz bound") {
  const SetPtr S = make_sphere_set(1.0, Vector::Zero(2));
  const double eps = 0.3;
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> unif(-3.0, 3.0);
  for (int k = 0; k < 500; ++k) {
    const Vector x = vec2(unif(rng), unif(rng));
    const Vector y = vec2(unif(rng), unif(rng));
    const double px = penalty_psi(x, S, eps);
    CHECK(px >= 0.0);
    CHECK(px <= eps * eps);
    CHECK(std::abs(px - penalty_psi(y, S, eps)) <=
          eps * (x - y).norm() + 1e-12);
  }
}

TEST_CASE("maximizer tie bands") {
  const auto tie = max_subdifferential({1.0, 3.0, 3.0}, 0.0);
  CHECK(tie.M == std::vector<int>{1, 2});
  CHECK(tie.simplex_dim == 1);
  tie.dirac(0).validate();

  const auto unique = max_subdifferential({0.0, 5.0, 1.0});
  CHECK(unique.M == std::vector<int>{1});
  CHECK(unique.simplex_dim == 0);

  const auto flat = max_subdifferential({2.0, 2.0, 2.0}, 0.0);
  CHECK(flat.M.size() == 3);
}

TEST_CASE("discrete measures must have mass one") {
  DiscreteMeasure mu;
  mu.support = {0, 1};
  mu.weights = {0.5, 0.4};
  CHECK_THROWS_AS(mu.validate(), std::invalid_argument);
  mu.weights = {0.5, 0.5};
  mu.validate();
}

TEST_CASE("min-norm descent on one and two nodes") {
  const MinNormDescent single = min_norm_descent({vec2(3, 4)});
  CHECK(single.t0 == 0);
  CHECK(single.bound == doctest::Approx(5.0));
  CHECK(single.direction.isApprox(vec2(-0.6, -0.8)));

  const MinNormDescent two = min_norm_descent({vec2(0, 1), vec2(2, 0)});
  CHECK(two.t0 == 0);
  CHECK(two.bound == doctest::Approx(1.0));
}

TEST_CASE("min-norm descent matches the discretized min-max oracle") {
  std::mt19937_64 rng(2025);
  std::normal_distribution<double> gauss;
  std::uniform_int_distribution<int> msize(1, 6), dsize(1, 3);
  for (int trial = 0; trial < 100; ++trial) {
    const int m = msize(rng), d = dsize(rng);
    std::vector<Vector> grads;
    for (int i = 0; i < m; ++i) {
      Vector g(d);
      for (int j = 0; j < d; ++j) g(j) = gauss(rng);
      grads.push_back(g);
    }
    const MinNormDescent mnd = min_norm_descent(grads);
    const MinMaxOracle oracle = min_max_oracle(grads);
    CHECK(std::abs(mnd.bound - oracle.bound) <= 1e-2);
    CHECK(mnd.t0 == oracle.argmin);
  }
}

TEST_CASE("ekeland point on the exponential grid") {
  GridSpace grid;
  std::vector<double> values;
  for (int k = 0; k <= 100; ++k) {
    grid.points.push_back(vec1(-10.0 + 0.1 * k));
    values.push_back(std::exp(grid.points.back()(0)));
  }
  const int start = 70;  // x = -3, value 0.0498 <= inf + 0.1
  const auto cert = ekeland_point_on_grid(grid, values, start, 0.1, 1.0);
  CHECK(cert.a_holds);
  CHECK(cert.b_holds);
  CHECK(cert.y == start);  // no grid move wins against the slope
  // exhaustive c): every z obeys the strict slope inequality
  for (int z = 0; z <= 100; ++z) {
    if (z == cert.y) continue;
    CHECK(values[z] > cert.value - 0.1 * grid.distance(z, cert.y));
  }
}

TEST_CASE("ekeland certificates on seeded random grids") {
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    GridSpace grid;
    std::vector<double> values;
    const int npts = 40 + static_cast<int>(unif(rng) * 80);
    const double a = 2.0 * unif(rng) - 1.0, b = 2.0 * unif(rng) - 1.0;
    for (int k = 0; k < npts; ++k) {
      const double x = -5.0 + 10.0 * k / (npts - 1);
      grid.points.push_back(vec1(x));
      values.push_back(std::cos(3.0 * a * x) + b * x * x + 0.2 * a * x);
    }
    const double inf = *std::min_element(values.begin(), values.end());
    const double eps = 0.05 + unif(rng);
    const double delta = 0.2 + 2.0 * unif(rng);
    // start anywhere eps-optimal
    int start = static_cast<int>(unif(rng) * npts);
    while (values[start] > inf + eps)
      start = static_cast<int>(unif(rng) * npts);

    const auto cert = ekeland_point_on_grid(grid, values, start, eps, delta);
    CHECK(cert.a_holds);
    CHECK(cert.b_holds);
    CHECK(grid.distance(start, cert.y) <= delta + 1e-12);
    long violations = 0;
    for (int z = 0; z < npts; ++z) {
      if (z == cert.y) continue;
      if (!(values[z] > cert.value - (eps / delta) * grid.distance(z, cert.y)))
        ++violations;
    }
    CHECK(violations == 0);
  }
}

TEST_CASE("ekeland precondition is enforced") {
  GridSpace grid;
  std::vector<double> values;
  for (int k = 0; k <= 10; ++k) {
    grid.points.push_back(vec1(k));
    values.push_back(static_cast<double>(k));
  }
  CHECK_THROWS_AS(ekeland_point_on_grid(grid, values, 10, 0.5, 1.0),
                  std::invalid_argument);
}

TEST_CASE("unique strict minimizer absorbs the iteration") {
  GridSpace grid;
  std::vector<double> values;
  for (int k = 0; k <= 20; ++k) {
    grid.points.push_back(vec1(k * 0.1));
    values.push_back((k * 0.1 - 1.3) * (k * 0.1 - 1.3));
  }
  const double range = 1.69;
  const auto cert = ekeland_point_on_grid(grid, values, 0, range + 0.1, 2.0);
  CHECK(cert.b_holds);
  CHECK(grid.distance(0, cert.y) <= 2.0);
  for (int z = 0; z <= 20; ++z) {
    if (z == cert.y) continue;
    CHECK(values[z] >
          cert.value - ((range + 0.1) / 2.0) * grid.distance(z, cert.y));
  }
}

TEST_CASE("build_A restricts the saddle mesh to the obstacle tube") {
  const PairPtr pair = saddle_pair(64);
  const AdmissibleMap g = AdmissibleMap::identity(pair);
  const ASubmesh sub = build_A(g, pair, 0.5);
  REQUIRE(!sub.mesh.nodes.empty());
  for (size_t i = 0; i < sub.mesh.nodes.size(); ++i)
    CHECK(pair->S->distance(sub.g_images[i]) <= 0.5 + 1e-12);
  // pins sit at the rim of the tube
  for (int b : sub.boundary_ids)
    CHECK(pair->S->distance(sub.g_images[b]) >=
          0.5 - 2.0 * pair->mesh.max_cell_diameter());
  // the crossing node is present: some node image lies on the axis
  double best = 1e9;
  for (const auto& img : sub.g_images)
    best = std::min(best, pair->S->distance(img));
  CHECK(best <= 1e-9);
}

TEST_CASE("build_A rejects tubes reaching the relative boundary") {
  const PairPtr pair = saddle_pair(64);
  const AdmissibleMap g = AdmissibleMap::identity(pair);
  CHECK_THROWS_AS(build_A(g, pair, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(build_A(g, pair, 2.5), std::invalid_argument);
}

TEST_CASE("build_A on the double-well path finds two components") {
  PairParams params;
  params.rho = 0.5;
  params.path_a = vec2(-1, 0);
  params.path_b = vec2(1, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
  const ASubmesh sub = build_A(AdmissibleMap::identity(pair), pair, 0.1);
  // images sit in |x| in (0.4, 0.6): two parameter intervals
  int left = 0, right = 0;
  for (const auto& img : sub.g_images) {
    CHECK(std::abs(std::abs(img(0)) - 0.5) <= 0.1 + 1e-12);
    (img(0) < 0 ? left : right) += 1;
  }
  CHECK(left > 0);
  CHECK(right > 0);
  CHECK(sub.boundary_ids.size() == 4);  // two rim nodes per component
}

TEST_CASE("map space metric and pinning") {
  const PairPtr pair = saddle_pair(64);
  const MapSpace space =
      make_map_space(build_A(AdmissibleMap::identity(pair), pair, 0.5));
  const MapPoint g = space.g_restriction();
  space.validate(g);

  MapPoint moved = g;
  int interior = -1;
  for (size_t i = 0; i < moved.images.size(); ++i)
    if (!space.base.pinned(static_cast<int>(i))) interior = static_cast<int>(i);
  REQUIRE(interior >= 0);
  moved.images[interior] += vec2(0.25, 0);
  CHECK(space.distance(g, moved) == doctest::Approx(0.25));
  space.validate(moved);

  MapPoint broken = g;
  broken.images[space.base.boundary_ids.front()] += vec2(1e-3, 0);
  CHECK_THROWS_AS(space.validate(broken), std::invalid_argument);
}

TEST_CASE("penalized functional at the identity restriction") {
  const PairPtr pair = saddle_pair(64);
  const Functional f = make_test_functional("saddle");
  const double eps = 0.5;
  const MapSpace space =
      make_map_space(build_A(AdmissibleMap::identity(pair), pair, eps));
  const IScore score =
      functional_I(f, space, space.g_restriction(), pair->S, eps);
  // at the crossing node (the origin): f = 0 and the penalty saturates
  CHECK(score.value == doctest::Approx(eps * eps));
  CHECK(score.node_max == doctest::Approx(eps * eps));
  REQUIRE(score.M.size() == 1);
  CHECK(space.g_restriction().images[score.M[0]].norm() <= 1e-9);
}

TEST_CASE("penalty vanishes for maps pushed away from the obstacle") {
  const PairPtr pair = saddle_pair(64);
  const Functional f = make_test_functional("saddle");
  const double eps = 0.25;
  const MapSpace space =
      make_map_space(build_A(AdmissibleMap::identity(pair), pair, 0.5));
  MapPoint k = space.g_restriction();
  for (size_t i = 0; i < k.images.size(); ++i)
    if (!space.base.pinned(static_cast<int>(i)))
      k.images[i] = vec2(0.0, 1.5);  // far from the x-axis
  const IScore score = functional_I(f, space, k, pair->S, eps);
  double expected = -std::numeric_limits<double>::infinity();
  for (const auto& img : k.images)
    expected = std::max(expected, f.value(img) +
                                      penalty_psi(img, pair->S, eps));
  CHECK(score.node_max == doctest::Approx(expected));
}

TEST_CASE("constant image on the obstacle saturates the penalty") {
  const PairPtr pair = saddle_pair(64);
  const Functional f = make_test_functional("saddle");
  const double eps = 0.5;
  const MapSpace space =
      make_map_space(build_A(AdmissibleMap::identity(pair), pair, eps));
  MapPoint k = space.g_restriction();
  const Vector s0 = vec2(0.3, 0.0);  // on S
  for (size_t i = 0; i < k.images.size(); ++i)
    if (!space.base.pinned(static_cast<int>(i))) k.images[i] = s0;
  const IScore score = functional_I(f, space, k, pair->S, eps);
  CHECK(score.node_max >= f.value(s0) + eps * eps - 1e-12);
}

TEST_CASE("penalized functional dominates c + eps^2 for perturbed maps") {
  const PairPtr pair = saddle_pair(128);
  const Functional f = make_test_functional("saddle");
  const double eps = 0.2, c = 0.0;
  const MapSpace space =
      make_map_space(build_A(AdmissibleMap::identity(pair), pair, eps));
  std::mt19937_64 rng(31);
  std::normal_distribution<double> gauss;
  for (int trial = 0; trial < 20; ++trial) {
    MapPoint k = space.g_restriction();
    for (size_t i = 0; i < k.images.size(); ++i) {
      if (space.base.pinned(static_cast<int>(i))) continue;
      k.images[i] += 0.05 * vec2(gauss(rng), gauss(rng));
    }
    const IScore score = functional_I(f, space, k, pair->S, eps);
    CHECK(score.value >= c + eps * eps - 1e-6);
  }
}

TEST_CASE("limiting search on the saddle instance") {
  const PairPtr pair = saddle_pair(128);
  const Functional f = make_test_functional("saddle");
  const LocalizedPoint lp = limiting_case_search(
      f, pair, AdmissibleMap::identity(pair), 0.1, 0.0);
  CHECK(lp.dist_to_S <= 0.15);
  CHECK(lp.f_value >= 0.0 - 1e-8);
  CHECK(lp.f_value <= 0.0125 + 1e-8);
  CHECK(lp.grad_norm <= 0.15);
  CHECK(lp.bound_checks.value_ok);
  CHECK(lp.bound_checks.dist_ok);
  CHECK(lp.bound_checks.grad_ok);
  CHECK(lp.bound_checks.chain_ok);
  // cross-check against the analytic critical point at the origin
  CHECK((lp.x_eps - vec2(0, 0)).norm() <= 0.15);
}

TEST_CASE("limiting search on the plateau instance keeps a flat gradient") {
  FunctionalParams params;
  params.plateau_radius = 2.0;
  const Functional f = make_test_functional("radial_plateau", params);
  PairParams pp;
  pp.rho = 1.0;
  pp.path_b = vec2(1.5, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), pp, 64);
  const LocalizedPoint lp = limiting_case_search(
      f, pair, AdmissibleMap::identity(pair), 0.1, 0.0);
  CHECK(lp.x_eps.norm() <= 2.0);  // inside the plateau
  CHECK(lp.grad_norm == 0.0);     // the gradient vanishes exactly there
  CHECK(lp.dist_to_S <= 0.15);
}

TEST_CASE("limiting search guards its eps range") {
  PairParams params;
  params.R = 1.0;  // boundary distance to S is 1
  const PairPtr pair =
      make_pair(PairKind::saddle, Decomposition::axes(2, 1), params, 64);
  const Functional f = make_test_functional("saddle");
  CHECK_THROWS_AS(limiting_case_search(f, pair, AdmissibleMap::identity(pair),
                                       0.6, 0.0),
                  std::invalid_argument);
}

TEST_CASE("limiting search refuses seeds with too high a sup") {
  const PairPtr pair = saddle_pair(128);
  const Functional f = make_test_functional("saddle");
  // lift an interior node so the sup exceeds c + eps^2/4
  std::vector<Vector> images;
  for (const auto& node : pair->mesh.nodes)
    images.push_back(pair->chart.embed(node));
  for (size_t i = 0; i < images.size(); ++i)
    if (!pair->mesh.is_boundary(static_cast<int>(i)) &&
        std::abs(images[i](1)) < 0.02)
      images[i] = vec2(0.5, images[i](1));  // f = 0.25 up there
  const AdmissibleMap lifted(pair, images);
  CHECK_THROWS_AS(limiting_case_search(f, pair, lifted, 0.1, 0.0),
                  std::invalid_argument);
}

TEST_CASE("strict case on the double-well path") {
  PairParams params;
  params.rho = 0.5;
  params.path_a = vec2(-1, 0);
  params.path_b = vec2(1, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
  const Functional f = make_test_functional("double_well");
  const MapSpace space = make_map_space_from_pair(pair);
  const MapPoint p = map_point_from(AdmissibleMap::identity(pair));

  const StrictCasePoint u = strict_case_search(f, space, 0.25, p, 0.0);
  CHECK(u.value_ok);
  CHECK(u.dist_ok);
  CHECK(u.grad_ok);
  CHECK(u.grad_norm <= 0.5);
  CHECK(u.dist_to_image <= 0.5);
  CHECK((u.u - vec2(0, 0)).norm() <= 0.5);  // near the analytic pass point
}

TEST_CASE("strict case guards") {
  PairParams params;
  params.rho = 0.5;
  params.path_a = vec2(-1, 0);
  params.path_b = vec2(1, 0);
  const PairPtr pair =
      make_pair(PairKind::mp_path, Decomposition::axes(2, 1), params, 64);
  const Functional f = make_test_functional("double_well");
  const MapSpace space = make_map_space_from_pair(pair);
  const MapPoint p = map_point_from(AdmissibleMap::identity(pair));

  // eps at least the gap c - d = 1 is rejected
  CHECK_THROWS_AS(strict_case_search(f, space, 1.0, p, 0.0),
                  std::invalid_argument);

  // a seed violating max f(p) <= c + eps is rejected
  MapPoint lifted = p;
  for (size_t i = 0; i < lifted.images.size(); ++i)
    if (!space.base.pinned(static_cast<int>(i)))
      lifted.images[i] += vec2(0, 0.9);
  CHECK_THROWS_AS(strict_case_search(f, space, 0.25, lifted, 0.0),
                  std::invalid_argument);
}
