#pragma once

#include <Eigen/Dense>

#include <memory>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace cpt {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Default tolerance for set membership: dist(v, set) <= kSetTol means "v in set".
inline constexpr double kSetTol = 1e-9;

enum class Projector { P1, P2, Pe };

/// Orthogonal splitting of R^n into V1 (optionally plus R e) plus V2.
///
/// Subspaces are stored as orthonormal column bases so that projections are
/// plain basis multiplications, exact up to floating point. The optional unit
/// vector e is orthogonal to both bases; together the columns span R^n.
class Decomposition {
 public:
  Decomposition(Matrix basis1, Matrix basis2,
                std::optional<Vector> e = std::nullopt);

  int dim() const { return n_; }
  int dim1() const { return static_cast<int>(basis1_.cols()); }
  int dim2() const { return static_cast<int>(basis2_.cols()); }
  bool has_e() const { return e_.has_value(); }

  const Matrix& basis1() const { return basis1_; }
  const Matrix& basis2() const { return basis2_; }
  const Vector& e() const;

  /// Orthogonal projection of v onto V1, V2 or R e.
  Vector project(Projector which, const Vector& v) const;

  /// Scalar coefficient of v along e.
  double e_coefficient(const Vector& v) const;

  /// Structured text block: dimension, basis columns (row-major), optional e.
  std::string to_text() const;
  static Decomposition from_text(const std::string& text);

  /// Axis-aligned splitting of R^n: V1 = first d1 coordinates, V2 = next d2,
  /// with e along coordinate d1 when with_e is set.
  static Decomposition axes(int n, int d1, bool with_e = false);

 private:
  int n_;
  Matrix basis1_;
  Matrix basis2_;
  std::optional<Vector> e_;
};

Vector project(const Decomposition& decomp, Projector which, const Vector& v);

/// A closed subset of R^n described by an exact distance function.
/// Membership and distance agree: dist(v, set) = 0 iff v lies in the set
/// (up to kSetTol).
class Set {
 public:
  virtual ~Set() = default;

  virtual double distance(const Vector& v) const = 0;
  virtual std::string describe() const = 0;

  /// Deterministic point sample of the set, used for inf/sup estimates and
  /// hypothesis checks. Unbounded sets are sampled within `radius` of the
  /// origin.
  virtual std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                                     double radius) const = 0;

  bool contains(const Vector& v, double tol = kSetTol) const {
    return distance(v) <= tol;
  }
};

using SetPtr = std::shared_ptr<const Set>;

double dist_to_set(const SetPtr& set, const Vector& v);

// Factories for the set kinds used by the linking geometries.

/// Linear subspace span(basis); basis columns must be orthonormal.
SetPtr make_subspace_set(Matrix basis);

/// Sphere of radius r about `center` inside the affine subspace
/// center + span(basis); an empty basis means the full-space sphere.
/// If `axis` is given, only the closed half where <u - center, axis> >= 0.
SetPtr make_sphere_set(double radius, Vector center, Matrix basis = {},
                       std::optional<Vector> axis = std::nullopt);

/// Solid ball of radius r about `center` inside center + span(basis).
SetPtr make_ball_set(double radius, Vector center, Matrix basis = {});

/// {u in span(basis): ||u|| >= rmin}, the closure of a subspace minus a ball.
SetPtr make_subspace_shell_set(Matrix basis, double rmin);

/// Closed segment [a, b].
SetPtr make_segment_set(Vector a, Vector b);

/// {s e + u2 : s in [0, s_max], u2 in span(basis2), ||u2|| <= r2}.
SetPtr make_cylinder_set(Vector e, double s_max, Matrix basis2, double r2);

/// Finite point cloud; distance is the minimum over the points.
SetPtr make_finite_set(std::vector<Vector> points);

/// Union of parts; distance is the minimum over the parts.
SetPtr make_union_set(std::vector<SetPtr> parts);

}  // namespace cpt
