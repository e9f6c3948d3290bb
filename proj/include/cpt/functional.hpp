#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cpt/space.hpp"

namespace cpt {

struct CriticalPoint {
  Vector point;
  double level;
};

/// A C^1 functional given by explicit value and gradient maps.
///
/// The gradient must be consistent with central finite differences of the
/// value (checked by check_gradient_consistency). Value and gradient maps are
/// required to be reentrant; callers evaluate them concurrently.
class Functional {
 public:
  using ValueFn = std::function<double(const Vector&)>;
  using GradFn = std::function<Vector(const Vector&)>;

  Functional(std::string name, int dim, ValueFn value, GradFn gradient,
             std::vector<CriticalPoint> known_critical_points = {});

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  double value(const Vector& x) const { return value_(x); }
  Vector gradient(const Vector& x) const { return gradient_(x); }
  const std::vector<CriticalPoint>& known_critical_points() const {
    return known_critical_points_;
  }

  /// The functional x -> -f(x) (gradient negated, critical set unchanged).
  Functional negated() const;

  /// The functional x -> f(x + shift).
  Functional shifted(const Vector& shift) const;

 private:
  std::string name_;
  int dim_;
  ValueFn value_;
  GradFn gradient_;
  std::vector<CriticalPoint> known_critical_points_;
};

struct FunctionalParams {
  int dim = 2;          // ambient dimension where the family is dimension-free
  int n_plus = 1;       // saddle: number of positive-curvature coordinates
  double plateau_radius = 1.0;  // radial_plateau: radius of the flat region
  int grid_cells = 16;  // bvp_quartic: number of subintervals of [0, 1]
};

/// Test functional library. Names: double_well, saddle, exp1d, radial_plateau,
/// bvp_quartic. Unknown names and invalid parameters are rejected.
Functional make_test_functional(const std::string& name,
                                const FunctionalParams& params = {});

/// Pseudogradient field W at a non-critical point: here W = f'(x), which
/// satisfies ||W|| <= 2||f'|| and <f', W> >= ||f'||^2 with room to spare.
/// Throws if x is a critical point.
Vector pseudogradient(const Functional& f, const Vector& x);

struct GradientCheck {
  bool pass = false;
  double max_rel_err = 0.0;
  Vector worst_point;
};

/// Central finite-difference consistency check at `npoints` seeded random
/// points drawn from [-box, box]^n, with step scaled to the coordinate size.
GradientCheck check_gradient_consistency(const Functional& f, int npoints,
                                         std::mt19937_64& rng,
                                         double box = 2.0, double step = 1e-5,
                                         double tol = 1e-6);

struct PalaisSmaleTrace {
  std::vector<Vector> points;
  std::vector<double> values;
  std::vector<double> gradient_norms;
  double level = 0.0;
};

/// Evaluates f along the points and records values and gradient norms.
PalaisSmaleTrace make_trace(const Functional& f, std::vector<Vector> points,
                            double level);

struct PsOptions {
  double tol_v = 1e-3;   // tail values within tol_v of the level
  double tol_g = 1e-3;   // tail gradient norms below tol_g
  double tol_x = 1e-3;   // some tail pair within tol_x counts as a cluster
  int tail = 20;         // tail window length
  double norm_bound = 10.0;  // monotone norm growth beyond this flags escape
};

struct PsDiagnosis {
  bool almost_critical = false;
  bool clustered = false;
  bool divergent = false;
  double tail_value_gap = 0.0;
  double tail_max_gradient = 0.0;
  double min_tail_pair_dist = 0.0;
};

/// Desk-scale Palais-Smale diagnostic: is the trace almost critical at level
/// c, does a cluster pair exist in the tail, and do the norms escape to
/// infinity (monotone growth beyond the bound)?
PsDiagnosis check_ps(const Functional& f, const PalaisSmaleTrace& trace,
                     double c, const PsOptions& opts = {});

struct PolishResult {
  Vector point;
  double grad_norm = 0.0;
  bool converged = false;
};

/// Local refinement of a near-critical point: damped Newton on f' = 0 with a
/// finite-difference Jacobian, falling back to gradient-norm descent steps.
PolishResult polish_critical_point(const Functional& f, const Vector& x0,
                                   double tol = 1e-10, int max_iter = 60);

}  // namespace cpt
