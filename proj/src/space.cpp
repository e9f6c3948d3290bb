#include "cpt/space.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>
#include <utility>

namespace cpt {

namespace {

constexpr double kOrthoTol = 1e-10;

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Vector project_onto(const Matrix& basis, const Vector& v) {
  if (basis.cols() == 0) return Vector::Zero(v.size());
  return basis * (basis.transpose() * v);
}

}  // namespace

Decomposition::Decomposition(Matrix basis1, Matrix basis2,
                             std::optional<Vector> e)
    : n_(0), basis1_(std::move(basis1)), basis2_(std::move(basis2)),
      e_(std::move(e)) {
  n_ = static_cast<int>(basis1_.rows() > 0 ? basis1_.rows() : basis2_.rows());
  if (n_ == 0 && e_) n_ = static_cast<int>(e_->size());
  require(n_ >= 1, "decomposition: ambient dimension must be >= 1");
  if (basis1_.size() == 0) basis1_.resize(n_, 0);
  if (basis2_.size() == 0) basis2_.resize(n_, 0);
  require(basis1_.rows() == n_ && basis2_.rows() == n_,
          "decomposition: basis row counts disagree");

  const int d_total = dim1() + dim2() + (e_ ? 1 : 0);
  require(d_total == n_, "decomposition: bases (+ e) must span R^n");

  Matrix all(n_, n_);
  if (dim1() > 0) all.leftCols(dim1()) = basis1_;
  if (dim2() > 0) all.middleCols(dim1(), dim2()) = basis2_;
  if (e_) {
    require(e_->size() == n_, "decomposition: e has wrong dimension");
    all.col(n_ - 1) = *e_;
  }
  const Matrix gram = all.transpose() * all;
  require((gram - Matrix::Identity(n_, n_)).cwiseAbs().maxCoeff() < kOrthoTol,
          "decomposition: columns are not mutually orthonormal");
}

const Vector& Decomposition::e() const {
  if (!e_) throw std::logic_error("decomposition: no e direction configured");
  return *e_;
}

Vector Decomposition::project(Projector which, const Vector& v) const {
  require(v.size() == n_, "project: vector has wrong dimension");
  switch (which) {
    case Projector::P1:
      return project_onto(basis1_, v);
    case Projector::P2:
      return project_onto(basis2_, v);
    case Projector::Pe:
      if (!e_)
        throw std::invalid_argument(
            "project: Pe requested but no e is configured");
      return (*e_) * e_->dot(v);
  }
  throw std::logic_error("project: unknown projector");
}

double Decomposition::e_coefficient(const Vector& v) const {
  return e().dot(v);
}

std::string Decomposition::to_text() const {
  std::ostringstream out;
  out.precision(17);
  out << "decomposition\n";
  out << "n " << n_ << "\n";
  out << "d1 " << dim1() << "\n";
  for (int j = 0; j < dim1(); ++j) {
    for (int i = 0; i < n_; ++i) out << basis1_(i, j) << (i + 1 < n_ ? ' ' : '\n');
  }
  out << "d2 " << dim2() << "\n";
  for (int j = 0; j < dim2(); ++j) {
    for (int i = 0; i < n_; ++i) out << basis2_(i, j) << (i + 1 < n_ ? ' ' : '\n');
  }
  out << "e " << (e_ ? 1 : 0) << "\n";
  if (e_) {
    for (int i = 0; i < n_; ++i) out << (*e_)(i) << (i + 1 < n_ ? ' ' : '\n');
  }
  return out.str();
}

Decomposition Decomposition::from_text(const std::string& text) {
  std::istringstream in(text);
  std::string tag;
  in >> tag;
  require(tag == "decomposition", "decomposition text: bad header");
  int n = 0, d1 = 0, d2 = 0, has_e = 0;
  in >> tag >> n;
  require(tag == "n" && n >= 1, "decomposition text: bad dimension");
  in >> tag >> d1;
  require(tag == "d1" && d1 >= 0, "decomposition text: bad d1");
  Matrix b1(n, d1);
  for (int j = 0; j < d1; ++j)
    for (int i = 0; i < n; ++i) in >> b1(i, j);
  in >> tag >> d2;
  require(tag == "d2" && d2 >= 0, "decomposition text: bad d2");
  Matrix b2(n, d2);
  for (int j = 0; j < d2; ++j)
    for (int i = 0; i < n; ++i) in >> b2(i, j);
  in >> tag >> has_e;
  require(tag == "e", "decomposition text: bad e marker");
  std::optional<Vector> e;
  if (has_e) {
    Vector ev(n);
    for (int i = 0; i < n; ++i) in >> ev(i);
    e = ev;
  }
  require(!in.fail(), "decomposition text: truncated");
  return Decomposition(std::move(b1), std::move(b2), std::move(e));
}

Decomposition Decomposition::axes(int n, int d1, bool with_e) {
  require(n >= 1 && d1 >= 0 && d1 + (with_e ? 1 : 0) <= n,
          "decomposition axes: bad split");
  const Matrix id = Matrix::Identity(n, n);
  const int d2 = n - d1 - (with_e ? 1 : 0);
  std::optional<Vector> e;
  if (with_e) e = id.col(d1);
  return Decomposition(id.leftCols(d1), id.rightCols(d2), std::move(e));
}

Vector project(const Decomposition& decomp, Projector which, const Vector& v) {
  return decomp.project(which, v);
}

double dist_to_set(const SetPtr& set, const Vector& v) {
  require(set != nullptr, "dist_to_set: null set");
  return set->distance(v);
}

namespace {

// Distance from v to the sphere {u in c + span(B): ||u - c|| = r}, optionally
// restricted to the half <u - c, axis> >= 0. Splits v - c into the in-plane
// part w and the orthogonal remainder.
double sphere_distance(const Vector& v, const Vector& center, double radius,
                       const Matrix& basis, const std::optional<Vector>& axis) {
  const Vector d = v - center;
  Vector w = basis.cols() > 0 ? Vector(project_onto(basis, d)) : d;
  const double ortho2 = (d - w).squaredNorm();
  if (!axis) {
    const double radial = std::abs(w.norm() - radius);
    return std::sqrt(ortho2 + radial * radial);
  }
  const double s = axis->dot(w);
  const Vector u = w - (*axis) * s;  // component within the plane, across axis
  const double un = u.norm();
  if (s >= 0.0) {
    const double radial = std::abs(std::hypot(s, un) - radius);
    return std::sqrt(ortho2 + radial * radial);
  }
  // Nearest admissible point sits on the equator {s = 0, ||u|| = r}.
  const double du = un - radius;
  return std::sqrt(ortho2 + s * s + du * du);
}

class SubspaceSet final : public Set {
 public:
  explicit SubspaceSet(Matrix basis) : basis_(std::move(basis)) {}

  double distance(const Vector& v) const override {
    return (v - project_onto(basis_, v)).norm();
  }

  std::string describe() const override {
    return "subspace(dim=" + std::to_string(basis_.cols()) + ")";
  }

  std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                             double radius) const override {
    std::vector<Vector> out;
    const int n = static_cast<int>(basis_.rows());
    const int k = static_cast<int>(basis_.cols());
    out.push_back(Vector::Zero(n));
    if (k == 0) return out;
    // axis sweeps first, then random in-plane directions
    const int per_axis = std::max(2, budget / (4 * k + 1));
    for (int j = 0; j < k; ++j) {
      for (int i = 1; i <= per_axis; ++i) {
        const double r = radius * static_cast<double>(i) / per_axis;
        out.push_back(basis_.col(j) * r);
        out.push_back(basis_.col(j) * -r);
      }
    }
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (static_cast<int>(out.size()) < budget) {
      Vector c(k);
      for (int j = 0; j < k; ++j) c(j) = gauss(rng);
      if (c.norm() == 0.0) continue;
      c *= radius * std::pow(unif(rng), 1.0 / k) / c.norm();
      out.push_back(basis_ * c);
    }
    return out;
  }

 private:
  Matrix basis_;
};

class SphereSet final : public Set {
 public:
  SphereSet(double radius, Vector center, Matrix basis,
            std::optional<Vector> axis)
      : radius_(radius), center_(std::move(center)), basis_(std::move(basis)),
        axis_(std::move(axis)) {}

  double distance(const Vector& v) const override {
    return sphere_distance(v, center_, radius_, basis_, axis_);
  }

  std::string describe() const override {
    return std::string(axis_ ? "half-sphere" : "sphere") +
           "(r=" + std::to_string(radius_) + ")";
  }

  std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                             double /*radius*/) const override {
    std::vector<Vector> out;
    const int n = static_cast<int>(center_.size());
    const int k = basis_.cols() > 0 ? static_cast<int>(basis_.cols()) : n;
    const Matrix frame =
        basis_.cols() > 0 ? basis_ : Matrix(Matrix::Identity(n, n));
    auto push = [&](const Vector& dir) {
      if (axis_ && axis_->dot(dir) < 0.0) return;
      out.push_back(center_ + dir * radius_);
    };
    for (int j = 0; j < k; ++j) {
      push(frame.col(j));
      push(-frame.col(j));
    }
    if (k == 2) {
      const int m = std::max(8, budget - static_cast<int>(out.size()));
      for (int i = 0; i < m; ++i) {
        const double th = 2.0 * M_PI * i / m;
        push(frame.col(0) * std::cos(th) + frame.col(1) * std::sin(th));
      }
    } else if (k > 2) {
      std::normal_distribution<double> gauss;
      while (static_cast<int>(out.size()) < budget) {
        Vector c(k);
        for (int j = 0; j < k; ++j) c(j) = gauss(rng);
        if (c.norm() == 0.0) continue;
        push(frame * (c / c.norm()));
      }
    }
    return out;
  }

 private:
  double radius_;
  Vector center_;
  Matrix basis_;
  std::optional<Vector> axis_;
};

class BallSet final : public Set {
 public:
  BallSet(double radius, Vector center, Matrix basis)
      : radius_(radius), center_(std::move(center)), basis_(std::move(basis)) {}

  double distance(const Vector& v) const override {
    const Vector d = v - center_;
    Vector w = basis_.cols() > 0 ? Vector(project_onto(basis_, d)) : d;
    const double ortho2 = (d - w).squaredNorm();
    const double radial = std::max(0.0, w.norm() - radius_);
    return std::sqrt(ortho2 + radial * radial);
  }

  std::string describe() const override {
    return "ball(r=" + std::to_string(radius_) + ")";
  }

  std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                             double /*radius*/) const override {
    std::vector<Vector> out{center_};
    const int n = static_cast<int>(center_.size());
    const int k = basis_.cols() > 0 ? static_cast<int>(basis_.cols()) : n;
    const Matrix frame =
        basis_.cols() > 0 ? basis_ : Matrix(Matrix::Identity(n, n));
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (static_cast<int>(out.size()) < budget) {
      Vector c(k);
      for (int j = 0; j < k; ++j) c(j) = gauss(rng);
      if (c.norm() == 0.0) continue;
      c *= radius_ * std::pow(unif(rng), 1.0 / k) / c.norm();
      out.push_back(center_ + frame * c);
    }
    return out;
  }

 private:
  double radius_;
  Vector center_;
  Matrix basis_;
};

class SubspaceShellSet final : public Set {
 public:
  SubspaceShellSet(Matrix basis, double rmin)
      : basis_(std::move(basis)), rmin_(rmin) {}

  double distance(const Vector& v) const override {
    const Vector w = project_onto(basis_, v);
    const double ortho2 = (v - w).squaredNorm();
    const double radial = std::max(0.0, rmin_ - w.norm());
    return std::sqrt(ortho2 + radial * radial);
  }

  std::string describe() const override {
    return "subspace-shell(rmin=" + std::to_string(rmin_) + ")";
  }

  std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                             double radius) const override {
    std::vector<Vector> out;
    const int k = static_cast<int>(basis_.cols());
    const double rmax = std::max(radius, 2.0 * rmin_);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(rmin_, rmax);
    for (int j = 0; j < k; ++j) {
      out.push_back(basis_.col(j) * rmin_);
      out.push_back(basis_.col(j) * -rmin_);
    }
    while (static_cast<int>(out.size()) < budget) {
      Vector c(k);
      for (int j = 0; j < k; ++j) c(j) = gauss(rng);
      if (c.norm() == 0.0) continue;
      out.push_back(basis_ * (c * (unif(rng) / c.norm())));
    }
    return out;
  }

 private:
  Matrix basis_;
  double rmin_;
};

class SegmentSet final : public Set {
 public:
  SegmentSet(Vector a, Vector b) : a_(std::move(a)), b_(std::move(b)) {}

  double distance(const Vector& v) const override {
    const Vector d = b_ - a_;
    const double len2 = d.squaredNorm();
    double t = len2 > 0.0 ? d.dot(v - a_) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return (v - (a_ + t * d)).norm();
  }

  std::string describe() const override { return "segment"; }

  std::vector<Vector> sample(int budget, std::mt19937_64& /*rng*/,
                             double /*radius*/) const override {
    std::vector<Vector> out;
    const int m = std::max(2, budget);
    for (int i = 0; i < m; ++i) {
      const double t = static_cast<double>(i) / (m - 1);
      out.push_back(a_ + t * (b_ - a_));
    }
    return out;
  }

 private:
  Vector a_;
  Vector b_;
};

class CylinderSet final : public Set {
 public:
  CylinderSet(Vector e, double s_max, Matrix basis2, double r2)
      : e_(std::move(e)), s_max_(s_max), basis2_(std::move(basis2)), r2_(r2) {}

  double distance(const Vector& v) const override {
    const double s = e_.dot(v);
    const Vector u2 = project_onto(basis2_, v);
    const Vector rest = v - e_ * s - u2;
    const double ds = s - std::clamp(s, 0.0, s_max_);
    const double du = std::max(0.0, u2.norm() - r2_);
    return std::sqrt(rest.squaredNorm() + ds * ds + du * du);
  }

  std::string describe() const override { return "cylinder"; }

  std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                             double /*radius*/) const override {
    std::vector<Vector> out;
    const int k = static_cast<int>(basis2_.cols());
    std::uniform_real_distribution<double> us(0.0, s_max_);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    while (static_cast<int>(out.size()) < budget) {
      Vector p = e_ * us(rng);
      if (k > 0) {
        Vector c(k);
        for (int j = 0; j < k; ++j) c(j) = gauss(rng);
        if (c.norm() > 0.0)
          p += basis2_ * (c * (r2_ * std::pow(unif(rng), 1.0 / k) / c.norm()));
      }
      out.push_back(std::move(p));
    }
    return out;
  }

 private:
  Vector e_;
  double s_max_;
  Matrix basis2_;
  double r2_;
};

class FiniteSet final : public Set {
 public:
  explicit FiniteSet(std::vector<Vector> points) : points_(std::move(points)) {
    require(!points_.empty(), "finite set: needs at least one point");
  }

  double distance(const Vector& v) const override {
    double best = std::numeric_limits<double>::infinity();
    for (const Vector& p : points_) best = std::min(best, (v - p).norm());
    return best;
  }

  std::string describe() const override {
    return "finite(" + std::to_string(points_.size()) + " points)";
  }

  std::vector<Vector> sample(int /*budget*/, std::mt19937_64& /*rng*/,
                             double /*radius*/) const override {
    return points_;
  }

 private:
  std::vector<Vector> points_;
};

class UnionSet final : public Set {
 public:
  explicit UnionSet(std::vector<SetPtr> parts) : parts_(std::move(parts)) {
    require(!parts_.empty(), "union set: needs at least one part");
    for (const auto& p : parts_) require(p != nullptr, "union set: null part");
  }

  double distance(const Vector& v) const override {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& p : parts_) best = std::min(best, p->distance(v));
    return best;
  }

  std::string describe() const override {
    std::string s = "union(";
    for (size_t i = 0; i < parts_.size(); ++i)
      s += (i ? ", " : "") + parts_[i]->describe();
    return s + ")";
  }

  std::vector<Vector> sample(int budget, std::mt19937_64& rng,
                             double radius) const override {
    std::vector<Vector> out;
    const int per = std::max(1, budget / static_cast<int>(parts_.size()));
    for (const auto& p : parts_) {
      auto s = p->sample(per, rng, radius);
      out.insert(out.end(), s.begin(), s.end());
    }
    return out;
  }

 private:
  std::vector<SetPtr> parts_;
};

}  // namespace

SetPtr make_subspace_set(Matrix basis) {
  return std::make_shared<SubspaceSet>(std::move(basis));
}

SetPtr make_sphere_set(double radius, Vector center, Matrix basis,
                       std::optional<Vector> axis) {
  require(radius > 0.0, "sphere set: radius must be positive");
  return std::make_shared<SphereSet>(radius, std::move(center),
                                     std::move(basis), std::move(axis));
}

SetPtr make_ball_set(double radius, Vector center, Matrix basis) {
  require(radius > 0.0, "ball set: radius must be positive");
  return std::make_shared<BallSet>(radius, std::move(center), std::move(basis));
}

SetPtr make_subspace_shell_set(Matrix basis, double rmin) {
  require(rmin >= 0.0, "subspace shell: rmin must be nonnegative");
  return std::make_shared<SubspaceShellSet>(std::move(basis), rmin);
}

SetPtr make_segment_set(Vector a, Vector b) {
  return std::make_shared<SegmentSet>(std::move(a), std::move(b));
}

SetPtr make_cylinder_set(Vector e, double s_max, Matrix basis2, double r2) {
  require(s_max > 0.0 && r2 >= 0.0, "cylinder set: bad extents");
  return std::make_shared<CylinderSet>(std::move(e), s_max, std::move(basis2),
                                       r2);
}

SetPtr make_finite_set(std::vector<Vector> points) {
  return std::make_shared<FiniteSet>(std::move(points));
}

SetPtr make_union_set(std::vector<SetPtr> parts) {
  return std::make_shared<UnionSet>(std::move(parts));
}

}  // namespace cpt
