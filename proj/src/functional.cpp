#include "cpt/functional.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace cpt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

Functional::Functional(std::string name, int dim, ValueFn value,
                       GradFn gradient,
                       std::vector<CriticalPoint> known_critical_points)
    : name_(std::move(name)), dim_(dim), value_(std::move(value)),
      gradient_(std::move(gradient)),
      known_critical_points_(std::move(known_critical_points)) {
  require(dim_ >= 1, "functional: dimension must be >= 1");
  require(static_cast<bool>(value_) && static_cast<bool>(gradient_),
          "functional: value and gradient maps required");
}

Functional Functional::negated() const {
  auto v = value_;
  auto g = gradient_;
  std::vector<CriticalPoint> crit = known_critical_points_;
  for (auto& c : crit) c.level = -c.level;
  return Functional("neg_" + name_, dim_,
                    [v](const Vector& x) { return -v(x); },
                    [g](const Vector& x) { return Vector(-g(x)); },
                    std::move(crit));
}

Functional Functional::shifted(const Vector& shift) const {
  require(shift.size() == dim_, "shifted: wrong shift dimension");
  auto v = value_;
  auto g = gradient_;
  Vector s = shift;
  std::vector<CriticalPoint> crit = known_critical_points_;
  for (auto& c : crit) c.point -= s;
  return Functional(name_ + "_shifted", dim_,
                    [v, s](const Vector& x) { return v(x + s); },
                    [g, s](const Vector& x) { return g(x + s); },
                    std::move(crit));
}

Functional make_test_functional(const std::string& name,
                                const FunctionalParams& params) {
  if (name == "double_well") {
    // f(x, y) = x^4 - 2 x^2 + y^2; wells at (+-1, 0), saddle at the origin.
    auto value = [](const Vector& x) {
      const double a = x(0);
      return a * a * a * a - 2.0 * a * a + x.segment(1, x.size() - 1).squaredNorm();
    };
    auto grad = [](const Vector& x) {
      Vector g = 2.0 * x;
      g(0) = 4.0 * x(0) * x(0) * x(0) - 4.0 * x(0);
      return g;
    };
    const int n = params.dim;
    require(n >= 1, "double_well: dim must be >= 1");
    std::vector<CriticalPoint> crit;
    Vector p = Vector::Zero(n);
    crit.push_back({p, 0.0});
    p(0) = 1.0;
    crit.push_back({p, -1.0});
    p(0) = -1.0;
    crit.push_back({p, -1.0});
    return Functional("double_well", n, value, grad, std::move(crit));
  }
  if (name == "saddle") {
    const int n = params.dim;
    const int k = params.n_plus;
    require(n >= 1 && k >= 0 && k <= n, "saddle: need 0 <= n_plus <= dim");
    auto value = [k](const Vector& x) {
      double s = 0.0;
      for (int i = 0; i < x.size(); ++i)
        s += (i < k ? 1.0 : -1.0) * x(i) * x(i);
      return s;
    };
    auto grad = [k](const Vector& x) {
      Vector g(x.size());
      for (int i = 0; i < x.size(); ++i)
        g(i) = (i < k ? 2.0 : -2.0) * x(i);
      return g;
    };
    return Functional("saddle", n, value, grad, {{Vector::Zero(n), 0.0}});
  }
  if (name == "exp1d") {
    require(params.dim == 1 || params.dim == 2,
            "exp1d: one-dimensional family");
    auto value = [](const Vector& x) { return std::exp(x(0)); };
    auto grad = [](const Vector& x) {
      Vector g(1);
      g(0) = std::exp(x(0));
      return g;
    };
    // No critical point; inf = 0 is not attained.
    return Functional("exp1d", 1, value, grad, {});
  }
  if (name == "radial_plateau") {
    // f(x) = max(0, ||x|| - a)^2: C^1, critical set = closed ball of radius a.
    const double a = params.plateau_radius;
    const int n = params.dim;
    require(a > 0.0, "radial_plateau: plateau_radius must be positive");
    require(n >= 1, "radial_plateau: dim must be >= 1");
    auto value = [a](const Vector& x) {
      const double t = std::max(0.0, x.norm() - a);
      return t * t;
    };
    auto grad = [a](const Vector& x) {
      const double r = x.norm();
      if (r <= a) return Vector(Vector::Zero(x.size()));
      return Vector((2.0 * (r - a) / r) * x);
    };
    return Functional("radial_plateau", n, value, grad,
                      {{Vector::Zero(n), 0.0}});
  }
  if (name == "bvp_quartic") {
    // Energy of -u'' = u^3 on [0, 1] with u(0) = u(1) = 0, discretized on m
    // subintervals: Phi(u) = 1/2 sum ((u_{i+1} - u_i)/h)^2 h - 1/4 sum u_i^4 h.
    // Unknowns are the m - 1 interior values.
    const int m = params.grid_cells;
    require(m >= 2, "bvp_quartic: grid_cells must be >= 2");
    const double h = 1.0 / m;
    const int n = m - 1;
    auto at = [n](const Vector& u, int i) {
      return (i <= 0 || i > n) ? 0.0 : u(i - 1);
    };
    auto value = [m, h, n, at](const Vector& u) {
      double quad = 0.0, quart = 0.0;
      for (int i = 0; i < m; ++i) {
        const double d = (at(u, i + 1) - at(u, i)) / h;
        quad += d * d * h;
      }
      for (int i = 1; i <= n; ++i) quart += std::pow(at(u, i), 4) * h;
      return 0.5 * quad - 0.25 * quart;
    };
    auto grad = [h, n, at](const Vector& u) {
      Vector g(n);
      for (int i = 1; i <= n; ++i) {
        const double lap = (2.0 * at(u, i) - at(u, i - 1) - at(u, i + 1)) / (h * h);
        g(i - 1) = h * (lap - std::pow(at(u, i), 3));
      }
      return g;
    };
    return Functional("bvp_quartic", n, value, grad,
                      {{Vector::Zero(n), 0.0}});
  }
  throw std::invalid_argument("make_test_functional: unknown name '" + name +
                              "'");
}

Vector pseudogradient(const Functional& f, const Vector& x) {
  Vector g = f.gradient(x);
  if (g.norm() == 0.0)
    throw std::invalid_argument(
        "pseudogradient: requested at a critical point");
  return g;
}

GradientCheck check_gradient_consistency(const Functional& f, int npoints,
                                         std::mt19937_64& rng, double box,
                                         double step, double tol) {
  GradientCheck out;
  out.pass = true;
  std::uniform_real_distribution<double> unif(-box, box);
  const int n = f.dim();
  for (int k = 0; k < npoints; ++k) {
    Vector x(n);
    for (int i = 0; i < n; ++i) x(i) = unif(rng);
    Vector fd(n);
    for (int i = 0; i < n; ++i) {
      const double h = step * std::max(1.0, std::abs(x(i)));
      Vector xp = x, xm = x;
      xp(i) += h;
      xm(i) -= h;
      fd(i) = (f.value(xp) - f.value(xm)) / (2.0 * h);
    }
    const Vector g = f.gradient(x);
    const double rel = (fd - g).norm() / std::max(1.0, g.norm());
    if (rel > out.max_rel_err) {
      out.max_rel_err = rel;
      out.worst_point = x;
    }
    if (rel > tol) out.pass = false;
  }
  return out;
}

PalaisSmaleTrace make_trace(const Functional& f, std::vector<Vector> points,
                            double level) {
  PalaisSmaleTrace trace;
  trace.level = level;
  trace.points = std::move(points);
  trace.values.reserve(trace.points.size());
  trace.gradient_norms.reserve(trace.points.size());
  for (const Vector& p : trace.points) {
    trace.values.push_back(f.value(p));
    trace.gradient_norms.push_back(f.gradient(p).norm());
  }
  return trace;
}

PsDiagnosis check_ps(const Functional& f, const PalaisSmaleTrace& trace,
                     double c, const PsOptions& opts) {
  require(!trace.points.empty(), "check_ps: empty trace");
  require(trace.points.size() == trace.values.size() &&
              trace.points.size() == trace.gradient_norms.size(),
          "check_ps: trace lists must share length");
  for (size_t i = 0; i < trace.points.size(); ++i) {
    require(std::abs(f.value(trace.points[i]) - trace.values[i]) <= 1e-12,
            "check_ps: recorded value does not match re-evaluation");
    require(std::abs(f.gradient(trace.points[i]).norm() -
                     trace.gradient_norms[i]) <= 1e-12,
            "check_ps: recorded gradient norm does not match re-evaluation");
  }

  PsDiagnosis d;
  const int len = static_cast<int>(trace.points.size());
  const int start = std::max(0, len - opts.tail);

  d.tail_value_gap = 0.0;
  d.tail_max_gradient = 0.0;
  for (int i = start; i < len; ++i) {
    d.tail_value_gap = std::max(d.tail_value_gap, std::abs(trace.values[i] - c));
    d.tail_max_gradient = std::max(d.tail_max_gradient, trace.gradient_norms[i]);
  }
  d.almost_critical =
      d.tail_value_gap <= opts.tol_v && d.tail_max_gradient <= opts.tol_g;

  d.min_tail_pair_dist = std::numeric_limits<double>::infinity();
  for (int i = start; i < len; ++i)
    for (int j = i + 1; j < len; ++j)
      d.min_tail_pair_dist = std::min(
          d.min_tail_pair_dist, (trace.points[i] - trace.points[j]).norm());
  if (len - start < 2) d.min_tail_pair_dist = 0.0;  // a single point clusters
  d.clustered = d.min_tail_pair_dist <= opts.tol_x;

  bool monotone = len >= 2;
  for (int i = std::max(1, start); i < len; ++i)
    monotone = monotone &&
               trace.points[i].norm() > trace.points[i - 1].norm() - 1e-15;
  d.divergent = monotone && len >= 2 &&
                trace.points.back().norm() > opts.norm_bound;
  return d;
}

PolishResult polish_critical_point(const Functional& f, const Vector& x0,
                                   double tol, int max_iter) {
  const int n = f.dim();
  PolishResult res;
  res.point = x0;
  Vector g = f.gradient(res.point);
  res.grad_norm = g.norm();
  const double fd_step = 1e-6;
  for (int it = 0; it < max_iter && res.grad_norm > tol; ++it) {
    Matrix jac(n, n);
    for (int j = 0; j < n; ++j) {
      const double h = fd_step * std::max(1.0, std::abs(res.point(j)));
      Vector xp = res.point, xm = res.point;
      xp(j) += h;
      xm(j) -= h;
      jac.col(j) = (f.gradient(xp) - f.gradient(xm)) / (2.0 * h);
    }
    Vector step = jac.colPivHouseholderQr().solve(-g);
    if (!step.allFinite()) break;
    double scale = 1.0;
    bool moved = false;
    for (int back = 0; back < 12; ++back) {
      const Vector trial = res.point + scale * step;
      const double gn = f.gradient(trial).norm();
      if (gn < res.grad_norm) {
        res.point = trial;
        res.grad_norm = gn;
        g = f.gradient(res.point);
        moved = true;
        break;
      }
      scale *= 0.5;
    }
    if (!moved) break;
  }
  res.converged = res.grad_norm <= tol;
  return res;
}

}  // namespace cpt
