#pragma once

#include <functional>
#include <stdexcept>
#include <vector>

#include "cpt/functional.hpp"
#include "cpt/space.hpp"

namespace cpt {

/// Thrown when a deformation cannot be built because the level looks
/// critical (gradient lower bound fails on the working band) or a verified
/// property cannot be certified.
struct DeformationRefused : std::runtime_error {
  explicit DeformationRefused(const std::string& what)
      : std::runtime_error(what) {}
};

struct DeformationConfig {
  double c = 0.0;        // target level
  double eps_bar = 1.0;  // half-width of the working value band
  double delta = 0.5;    // tube width around E; clamped to dist(D, E) / 3
  double b = 1e-3;       // gradient lower bound certified on A
  double ode_step = 0.02;
  int max_steps = 1 << 20;
  int verify_samples = 1200;
  int set_sample_budget = 64;
  double sample_radius = 4.0;  // sampling radius for unbounded sets
  uint64_t seed = 2024;
};

/// Quotient cutoff dist(x, A1) / (dist(x, A1) + dist(x, A2)): 0 on A1, 1 on
/// A2, continuous in between. The sets must be disjoint.
double cutoff_h(const Vector& x, const SetPtr& A1, const SetPtr& A2);

/// Speed limiter: 1 on [0, 1], 1/s beyond, so s * cutoff_rho(s) = min(s, 1).
double cutoff_rho(double s);

/// The bounded descent field of the deformation construction:
///   X(x) = -(delta/3) h(x) q(x) rho(||W(x)||) W(x)  inside the working set
///   A = N_delta(E) cut to the value band, and 0 outside. h fades between the
/// inner and outer tube/band; q kills the field on D1 (points at least as
/// close to D as to the flow envelope E1 of E).
class FlowField {
 public:
  FlowField(Functional f, SetPtr D, SetPtr E, DeformationConfig config,
            std::vector<Vector> envelope, double tube_radius);

  Vector operator()(const Vector& x) const;

  bool in_A(const Vector& x) const;
  bool in_D1(const Vector& x) const;
  double h_cutoff(const Vector& x) const;
  double q_cutoff(const Vector& x) const;

  double speed_bound() const { return config_.delta / 3.0; }
  const DeformationConfig& config() const { return config_; }
  const std::vector<Vector>& envelope() const { return envelope_; }

 private:
  double envelope_distance(const Vector& x) const;

  Functional f_;
  SetPtr D_;  // may be null (empty D)
  SetPtr E_;
  DeformationConfig config_;
  std::vector<Vector> envelope_;  // sampled trajectories of E under X1
  double tube_radius_;
};

/// Builds the field and certifies the construction hypotheses on samples:
/// D and E disjoint, f <= c on E and >= c on D, gradient norm >= b on A.
/// Throws DeformationRefused when the gradient bound fails (the level may be
/// critical on E).
FlowField build_field(const Functional& f, SetPtr D, SetPtr E,
                      DeformationConfig config);

struct Trajectory {
  std::vector<double> t;
  std::vector<Vector> points;
  std::vector<double> field_norms;

  const Vector& endpoint() const { return points.back(); }
};

using VectorField = std::function<Vector(const Vector&)>;

/// Classical fixed-step RK4 with step halving until the endpoint moves by
/// less than `endpoint_tol`. Negative T integrates the reversed flow.
Trajectory flow(const VectorField& field, const Vector& x0, double T,
                double ode_step = 0.02, double endpoint_tol = 1e-9,
                int max_steps = 1 << 20);

struct DeformResult {
  double eps = 0.0;
  FlowField field;
  // verification summary over the sampled contract checks
  double max_reversibility_error = 0.0;
  double max_monotonicity_violation = 0.0;
  bool d_points_fixed = false;
  double max_e_value_after = 0.0;  // max f(eta(1, x)) over sampled x in E
};

/// The deformation lemma as a certified construction: returns eps > 0 and the
/// flow field with (i) reversibility, (ii) descent, (iii) D fixed, and
/// (iv) f(eta(1, x)) <= c - eps on E, all verified on samples. eps starts at
/// eps_bar / 3 and is halved (at most 5 times) until (iv) certifies.
DeformResult deform(const Functional& f, SetPtr D, SetPtr E, double c,
                    DeformationConfig config);

struct ClassicalDeformation {
  double eps = 0.0;
  double c = 0.0;
  VectorField field;
};

/// Level-set deformation at a noncritical level: pushes every sampled point
/// with f <= c + eps to f <= c - eps in unit time, fixing everything outside
/// the band [c - eps_bar, c + eps_bar]. Refuses (DeformationRefused) when a
/// sampled band point has gradient norm below b.
ClassicalDeformation classical_deform(const Functional& f, double c,
                                      double eps_bar,
                                      const std::vector<Vector>& sample,
                                      double b = 1e-3,
                                      double ode_step = 0.02);

}  // namespace cpt
