#include <doctest.h>

#include <random>

#include "cpt/space.hpp"

using namespace cpt;

namespace {

Vector vec2(double x, double y) {
  Vector v(2);
  v << x, y;
  return v;
}

Vector vec3(double x, double y, double z) {
  Vector v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST_CASE("projection onto coordinate subspaces") {
  const Decomposition dec = Decomposition::axes(3, 1);
  CHECK(dec.project(Projector::P2, vec3(1, 2, 3)).isApprox(vec3(0, 2, 3)));

  // identity on its own subspace
  const Vector v1 = vec3(-2.5, 0, 0);
  CHECK((dec.project(Projector::P1, v1) - v1).norm() == 0.0);
}

TEST_CASE("resolution of identity and idempotence") {
  const Decomposition dec = Decomposition::axes(5, 2, true);
  std::mt19937_64 rng(7);
  std::normal_distribution<double> gauss;
  for (int k = 0; k < 1000; ++k) {
    Vector v(5);
    for (int i = 0; i < 5; ++i) v(i) = gauss(rng);
    const Vector p1 = dec.project(Projector::P1, v);
    const Vector p2 = dec.project(Projector::P2, v);
    const Vector pe = dec.project(Projector::Pe, v);
    CHECK((p1 + p2 + pe - v).norm() <= 1e-12 * (1.0 + v.norm()));
    CHECK((dec.project(Projector::P1, p1) - p1).norm() <= 1e-12);
    CHECK((dec.project(Projector::P2, p2) - p2).norm() <= 1e-12);
    // Pythagoras
    CHECK(v.squaredNorm() ==
          doctest::Approx(p1.squaredNorm() + p2.squaredNorm() +
                          pe.squaredNorm())
              .epsilon(1e-10));
  }
}

TEST_CASE("Pe without a configured direction is rejected") {
  const Decomposition dec = Decomposition::axes(3, 1);
  CHECK_THROWS_AS(dec.project(Projector::Pe, vec3(1, 1, 1)),
                  std::invalid_argument);
}

TEST_CASE("non-orthonormal bases are rejected") {
  Matrix b1(2, 1), b2(2, 1);
  b1 << 1.0, 0.0;
  b2 << 1.0, 0.0;  // parallel to b1
  CHECK_THROWS_AS(Decomposition(b1, b2), std::invalid_argument);
}

TEST_CASE("distance to spheres and subspaces") {
  const SetPtr sphere = make_sphere_set(1.0, Vector::Zero(2));
  CHECK(sphere->distance(vec2(3, 4)) == doctest::Approx(4.0).epsilon(1e-14));
  CHECK(sphere->distance(vec2(0, 1)) == doctest::Approx(0.0));
  CHECK(sphere->contains(vec2(1, 0)));

  Matrix xaxis(2, 1);
  xaxis << 1.0, 0.0;
  const SetPtr sub = make_subspace_set(xaxis);
  CHECK(sub->distance(vec2(2, 3)) == doctest::Approx(3.0));
  CHECK(sub->contains(vec2(-7, 0)));
}

TEST_CASE("distance is 1-Lipschitz") {
  std::vector<SetPtr> sets;
  Matrix xaxis(2, 1);
  xaxis << 1.0, 0.0;
  sets.push_back(make_subspace_set(xaxis));
  sets.push_back(make_sphere_set(1.5, vec2(0.5, -0.25)));
  sets.push_back(make_ball_set(1.0, Vector::Zero(2)));
  sets.push_back(make_finite_set({vec2(1, 1), vec2(-2, 0.5)}));
  sets.push_back(make_segment_set(vec2(-1, -1), vec2(2, 0)));
  sets.push_back(make_union_set({sets[0], sets[1]}));

  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  for (const auto& set : sets) {
    for (int k = 0; k < 300; ++k) {
      const Vector v = vec2(unif(rng), unif(rng));
      const Vector w = vec2(unif(rng), unif(rng));
      CHECK(std::abs(set->distance(v) - set->distance(w)) <=
            (v - w).norm() + 1e-12);
    }
  }
}

TEST_CASE("half-sphere distance uses the equator beyond the cap") {
  // cap of the unit circle in the (e1, e2)-plane with axis e1
  const SetPtr cap = make_sphere_set(1.0, Vector::Zero(2),
                                     Matrix::Identity(2, 2), Vector(vec2(1, 0)));
  CHECK(cap->distance(vec2(1, 0)) == doctest::Approx(0.0));
  CHECK(cap->distance(vec2(0, 1)) == doctest::Approx(0.0));
  // behind the cap: nearest point is the equator point (0, 1)
  CHECK(cap->distance(vec2(-1, 0)) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("union distance is the minimum over parts") {
  const SetPtr a = make_finite_set({vec2(1, 0)});
  const SetPtr b = make_finite_set({vec2(-1, 0)});
  const SetPtr u = make_union_set({a, b});
  CHECK(u->distance(vec2(0.75, 0)) == doctest::Approx(0.25));
  CHECK(u->distance(vec2(-0.9, 0)) == doctest::Approx(0.1));
}

TEST_CASE("subspace shell distance") {
  Matrix zaxis(3, 1);
  zaxis << 0.0, 0.0, 1.0;
  const SetPtr shell = make_subspace_shell_set(zaxis, 1.0);
  CHECK(shell->distance(vec3(0, 0, 2)) == doctest::Approx(0.0));
  CHECK(shell->distance(vec3(0, 0, 0.25)) == doctest::Approx(0.75));
  CHECK(shell->distance(vec3(1, 0, 2)) == doctest::Approx(1.0));
}

TEST_CASE("decomposition text round trip") {
  const Decomposition dec = Decomposition::axes(4, 2, true);
  const Decomposition back = Decomposition::from_text(dec.to_text());
  CHECK(back.dim() == 4);
  CHECK(back.dim1() == 2);
  CHECK(back.has_e());
  std::mt19937_64 rng(5);
  std::normal_distribution<double> gauss;
  Vector v(4);
  for (int i = 0; i < 4; ++i) v(i) = gauss(rng);
  CHECK((back.project(Projector::P1, v) - dec.project(Projector::P1, v))
            .norm() == 0.0);
}
