#include "cpt/deformation.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cpt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// 1 for v <= a, 0 for v >= b, linear in between.
double ramp_down(double v, double a, double b) {
  if (v <= a) return 1.0;
  if (v >= b) return 0.0;
  return (b - v) / (b - a);
}

}  // namespace

double cutoff_h(const Vector& x, const SetPtr& A1, const SetPtr& A2) {
  require(A1 != nullptr && A2 != nullptr, "cutoff_h: null set");
  const double d1 = A1->distance(x);
  const double d2 = A2->distance(x);
  if (d1 + d2 <= 0.0)
    throw std::invalid_argument("cutoff_h: A1 and A2 overlap at the point");
  return d1 / (d1 + d2);
}

double cutoff_rho(double s) {
  if (s < 0.0) throw std::invalid_argument("cutoff_rho: negative argument");
  return s <= 1.0 ? 1.0 : 1.0 / s;
}

FlowField::FlowField(Functional f, SetPtr D, SetPtr E, DeformationConfig config,
                     std::vector<Vector> envelope, double tube_radius)
    : f_(std::move(f)), D_(std::move(D)), E_(std::move(E)),
      config_(std::move(config)), envelope_(std::move(envelope)),
      tube_radius_(tube_radius) {}

double FlowField::envelope_distance(const Vector& x) const {
  double best = std::numeric_limits<double>::infinity();
  for (const Vector& p : envelope_) best = std::min(best, (x - p).norm());
  return std::max(0.0, best - tube_radius_);
}

bool FlowField::in_A(const Vector& x) const {
  if (E_->distance(x) > config_.delta) return false;
  const double v = f_.value(x);
  return std::abs(v - config_.c) <= config_.eps_bar;
}

double FlowField::h_cutoff(const Vector& x) const {
  const double de = E_->distance(x);
  const double dv = std::abs(f_.value(x) - config_.c);
  return ramp_down(de, config_.delta / 3.0, config_.delta / 2.0) *
         ramp_down(dv, config_.eps_bar / 3.0, config_.eps_bar / 2.0);
}

bool FlowField::in_D1(const Vector& x) const {
  if (!D_) return false;
  return D_->distance(x) <= envelope_distance(x);
}

double FlowField::q_cutoff(const Vector& x) const {
  if (!D_) return 1.0;
  const double dd = D_->distance(x);
  const double de = envelope_distance(x);
  if (dd + de <= 0.0) return 0.0;  // cannot happen when D and E1 are disjoint
  return std::max(0.0, dd - de) / (dd + de);
}

Vector FlowField::operator()(const Vector& x) const {
  const int n = static_cast<int>(x.size());
  if (!in_A(x)) return Vector::Zero(n);
  const double h = h_cutoff(x);
  if (h == 0.0) return Vector::Zero(n);
  const double q = q_cutoff(x);
  if (q == 0.0) return Vector::Zero(n);
  const Vector w = f_.gradient(x);
  const double wn = w.norm();
  if (wn == 0.0) return Vector::Zero(n);
  return (-(config_.delta / 3.0) * h * q * cutoff_rho(wn)) * w;
}

FlowField build_field(const Functional& f, SetPtr D, SetPtr E,
                      DeformationConfig config) {
  require(E != nullptr, "build_field: E required");
  require(config.eps_bar > 0.0 && config.delta > 0.0 && config.b > 0.0,
          "build_field: eps_bar, delta, b must be positive");
  std::mt19937_64 rng(config.seed);
  const auto e_samples = E->sample(config.set_sample_budget, rng,
                                   config.sample_radius);
  require(!e_samples.empty(), "build_field: E produced no samples");

  if (D) {
    const auto d_samples = D->sample(config.set_sample_budget, rng,
                                     config.sample_radius);
    double dist_de = std::numeric_limits<double>::infinity();
    for (const auto& p : d_samples)
      dist_de = std::min(dist_de, E->distance(p));
    require(dist_de > 0.0, "build_field: D and E are not disjoint");
    config.delta = std::min(config.delta, dist_de / 3.0);
    for (const auto& p : d_samples)
      require(f.value(p) >= config.c - 1e-9,
              "build_field: f < c on D (hypothesis f|_D >= c fails)");
  }
  for (const auto& p : e_samples)
    require(f.value(p) <= config.c + 1e-9,
            "build_field: f > c on E (hypothesis f|_E <= c fails)");

  // Gradient lower bound on A = N_delta(E) within the value band. The sample
  // is E itself plus random offsets within the tube; a failure here is the
  // E-meets-critical-set obstruction.
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  auto check_point = [&](const Vector& x) {
    if (E->distance(x) > config.delta) return;
    if (std::abs(f.value(x) - config.c) > config.eps_bar) return;
    const double gn = f.gradient(x).norm();
    if (gn < config.b) {
      std::ostringstream msg;
      msg << "build_field: gradient bound " << config.b
          << " violated on A (||f'|| = " << gn << " at ["
          << x.transpose() << "])";
      throw DeformationRefused(msg.str());
    }
  };
  for (const auto& p : e_samples) {
    check_point(p);
    const int n = static_cast<int>(p.size());
    for (int k = 0; k < 12; ++k) {
      Vector off(n);
      for (int i = 0; i < n; ++i) off(i) = gauss(rng);
      if (off.norm() == 0.0) continue;
      off *= config.delta * unif(rng) / off.norm();
      check_point(p + off);
    }
  }

  // Envelope E1 = flow of E under X1 (the field without the D1 cutoff),
  // realized as sampled trajectories with a tube radius.
  FlowField x1_field(f, nullptr, E, config, {}, 0.0);
  std::vector<Vector> cloud;
  double tube = 0.0;
  constexpr int kTimeSamples = 16;
  for (const auto& p : e_samples) {
    Trajectory traj = flow([&x1_field](const Vector& x) { return x1_field(x); },
                           p, 1.0, 1.0 / kTimeSamples, 1e-9, config.max_steps);
    Vector prev = p;
    const size_t stride = std::max<size_t>(1, traj.points.size() / kTimeSamples);
    for (size_t i = 0; i < traj.points.size(); i += stride) {
      cloud.push_back(traj.points[i]);
      tube = std::max(tube, (traj.points[i] - prev).norm());
      prev = traj.points[i];
    }
    cloud.push_back(traj.points.back());
  }
  FlowField out(f, std::move(D), std::move(E), config, std::move(cloud), tube);

  // Contract sweep: speed bound, locality outside A and on D1, and a finite
  // local Lipschitz estimate, over a random box around the envelope.
  Vector lo = e_samples.front(), hi = e_samples.front();
  for (const auto& p : e_samples) {
    lo = lo.cwiseMin(p);
    hi = hi.cwiseMax(p);
  }
  const int n = static_cast<int>(lo.size());
  lo.array() -= 2.0 * config.delta + 1.0;
  hi.array() += 2.0 * config.delta + 1.0;
  const double speed_cap = config.delta / 3.0;
  for (int k = 0; k < std::max(1000, config.verify_samples); ++k) {
    Vector x(n);
    for (int i = 0; i < n; ++i)
      x(i) = lo(i) + (hi(i) - lo(i)) * unif(rng);
    const Vector v = out(x);
    if (v.norm() > speed_cap * (1.0 + 1e-12))
      throw std::logic_error("build_field: speed bound delta/3 violated");
    if ((!out.in_A(x) || out.in_D1(x)) && v.norm() != 0.0)
      throw std::logic_error("build_field: field not local to A \\ D1");
    Vector dx(n);
    for (int i = 0; i < n; ++i) dx(i) = gauss(rng);
    if (dx.norm() == 0.0) continue;
    dx *= 1e-5 / dx.norm();
    if (!((out(x + dx) - v).norm() / 1e-5 < 1e6))
      throw std::logic_error("build_field: field looks non-Lipschitz");
  }
  return out;
}

Trajectory flow(const VectorField& field, const Vector& x0, double T,
                double ode_step, double endpoint_tol, int max_steps) {
  require(std::isfinite(T), "flow: T must be finite");
  require(ode_step > 0.0, "flow: ode_step must be positive");

  auto integrate = [&](int steps, bool record) {
    Trajectory traj;
    const double h = T / steps;
    Vector x = x0;
    if (record) {
      traj.t.push_back(0.0);
      traj.points.push_back(x);
      traj.field_norms.push_back(field(x).norm());
    }
    for (int k = 0; k < steps; ++k) {
      const Vector k1 = field(x);
      const Vector k2 = field(x + 0.5 * h * k1);
      const Vector k3 = field(x + 0.5 * h * k2);
      const Vector k4 = field(x + h * k3);
      x += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      if (record) {
        traj.t.push_back(h * (k + 1));
        traj.points.push_back(x);
        traj.field_norms.push_back(field(x).norm());
      }
    }
    if (!record) {
      traj.t = {0.0, T};
      traj.points = {x0, x};
    }
    return traj;
  };

  if (T == 0.0) return integrate(1, true);
  int steps = std::max(1, static_cast<int>(std::ceil(std::abs(T) / ode_step)));
  Vector end = integrate(steps, false).points.back();
  while (2 * steps <= max_steps) {
    const Vector end2 = integrate(2 * steps, false).points.back();
    if ((end2 - end).norm() < endpoint_tol) {
      steps *= 2;
      break;
    }
    steps *= 2;
    end = end2;
    if (2 * steps > max_steps)
      throw std::runtime_error("flow: step-size underflow, no convergence");
  }
  return integrate(steps, true);
}

DeformResult deform(const Functional& f, SetPtr D, SetPtr E, double c,
                    DeformationConfig config) {
  config.c = c;
  FlowField field = build_field(f, D, E, config);
  const DeformationConfig& cfg = field.config();  // delta may be clamped
  auto field_fn = [&field](const Vector& x) { return field(x); };

  std::mt19937_64 rng(cfg.seed + 1);
  const auto e_samples = E->sample(cfg.set_sample_budget, rng,
                                   cfg.sample_radius);

  DeformResult result{0.0, field};

  // (iv): f(eta(1, x)) <= c - eps on E, eps halved until certified.
  std::vector<Trajectory> e_trajs;
  e_trajs.reserve(e_samples.size());
  double max_after = -std::numeric_limits<double>::infinity();
  for (const auto& p : e_samples) {
    e_trajs.push_back(flow(field_fn, p, 1.0, cfg.ode_step));
    max_after = std::max(max_after, f.value(e_trajs.back().endpoint()));
  }
  result.max_e_value_after = max_after;
  double eps = cfg.eps_bar / 3.0;
  bool certified = false;
  for (int attempt = 0; attempt <= 5; ++attempt) {
    if (max_after <= c - eps) {
      certified = true;
      break;
    }
    eps /= 2.0;
  }
  if (!certified) {
    std::ostringstream msg;
    msg << "deform: could not certify f(eta(1, E)) <= c - eps (max value "
        << max_after << " vs c = " << c << ")";
    throw DeformationRefused(msg.str());
  }
  result.eps = eps;

  // (ii): descent along every computed trajectory.
  double worst_violation = 0.0;
  for (const auto& traj : e_trajs)
    for (size_t k = 0; k + 1 < traj.points.size(); ++k)
      worst_violation =
          std::max(worst_violation, f.value(traj.points[k + 1]) -
                                        f.value(traj.points[k]));
  result.max_monotonicity_violation = std::max(0.0, worst_violation);

  // (i): reversibility on random starts around E.
  std::normal_distribution<double> gauss;
  double worst_rev = 0.0;
  const int n = static_cast<int>(e_samples.front().size());
  for (int k = 0; k < 200; ++k) {
    Vector x0 = e_samples[k % e_samples.size()];
    for (int i = 0; i < n; ++i) x0(i) += 0.5 * cfg.delta * gauss(rng);
    const Vector fwd = flow(field_fn, x0, 1.0, cfg.ode_step).endpoint();
    const Vector back = flow(field_fn, fwd, -1.0, cfg.ode_step).endpoint();
    worst_rev = std::max(worst_rev, (back - x0).norm());
  }
  result.max_reversibility_error = worst_rev;

  // (iii): D is exactly fixed (zero field on D1, which contains D).
  result.d_points_fixed = true;
  if (D) {
    const auto d_samples = D->sample(cfg.set_sample_budget, rng,
                                     cfg.sample_radius);
    for (const auto& p : d_samples) {
      if (field(p).norm() != 0.0 ||
          (flow(field_fn, p, 1.0, cfg.ode_step).endpoint() - p).norm() != 0.0)
        result.d_points_fixed = false;
    }
  }
  return result;
}

ClassicalDeformation classical_deform(const Functional& f, double c,
                                      double eps_bar,
                                      const std::vector<Vector>& sample,
                                      double b, double ode_step) {
  require(eps_bar > 0.0, "classical_deform: eps_bar must be positive");
  for (const auto& x : sample) {
    if (std::abs(f.value(x) - c) <= eps_bar) {
      const double gn = f.gradient(x).norm();
      if (gn < b) {
        std::ostringstream msg;
        msg << "classical_deform: near-critical sample in the band (||f'|| = "
            << gn << "), level " << c << " may be critical";
        throw DeformationRefused(msg.str());
      }
    }
  }

  ClassicalDeformation out;
  out.c = c;
  out.eps = eps_bar / 2.0;
  const double eps = out.eps;
  const double b2 = b * b;
  out.field = [f, c, eps, eps_bar, b2](const Vector& x) -> Vector {
    const double band = ramp_down(std::abs(f.value(x) - c), eps, eps_bar);
    if (band == 0.0) return Vector::Zero(x.size());
    const Vector g = f.gradient(x);
    const double g2 = g.squaredNorm();
    if (g2 == 0.0) return Vector::Zero(x.size());
    // descends at rate exactly 2 eps while ||f'|| >= b inside the band
    return (-2.0 * eps * band / std::max(g2, b2)) * g;
  };

  // Contract check: sampled sublevel points cross the band in unit time.
  double worst = -std::numeric_limits<double>::infinity();
  for (const auto& x : sample) {
    if (f.value(x) > c + eps) continue;
    const Vector end = flow(out.field, x, 1.0, ode_step).endpoint();
    worst = std::max(worst, f.value(end));
  }
  if (worst > c - eps + 1e-12) {
    std::ostringstream msg;
    msg << "classical_deform: band crossing failed (max endpoint value "
        << worst << " > " << c - eps << "); level may be critical";
    throw DeformationRefused(msg.str());
  }
  return out;
}

}  // namespace cpt
