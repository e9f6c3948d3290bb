#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "cpt/functional.hpp"
#include "cpt/geometry.hpp"

namespace cpt {

/// Finite-support probability measure on mesh node indices: the discrete
/// realization of a mass-one Radon measure supported on a maximizer set.
struct DiscreteMeasure {
  std::vector<int> support;
  std::vector<double> weights;

  void validate() const;  // weights >= 0 and sum to one, sizes agree
};

struct MaxSubdifferential {
  std::vector<int> M;   // indices within tau_M of the maximum
  int simplex_dim = 0;  // dimension of the admissible-measure simplex
  DiscreteMeasure dirac(int which) const;
};

/// Maximizer tie band of a value list: M = {i : v_i >= max - tau_M}. The
/// admissible measures are exactly the unit simplex over M.
MaxSubdifferential max_subdifferential(const std::vector<double>& values,
                                       double tau_M = 1e-8);

struct MinNormDescent {
  int t0 = -1;         // position within the supplied gradient list
  double bound = 0.0;  // min gradient norm over the list
  Vector direction;    // -g/||g|| at t0; zero when bound == 0
};

/// The decoupled min-max over unit fields and maximizer measures collapses to
/// the minimal gradient norm over M; returns that argmin, bound, and descent
/// direction.
MinNormDescent min_norm_descent(const std::vector<Vector>& gradients);

/// Penalty concentrating mass near S: max(0, eps^2 - eps dist(x, S)).
/// Values in [0, eps^2], equal to eps^2 on S, vanishing at distance >= eps,
/// and eps-Lipschitz.
double penalty_psi(const Vector& x, const SetPtr& S, double eps);

// ---------------------------------------------------------------------------
// Ekeland points on discrete spaces

template <typename Point>
struct EkelandCertificate {
  Point y;
  double value = 0.0;
  bool a_holds = false;        // Phi(y) <= Phi(x)
  bool b_holds = false;        // dist(x, y) <= delta
  long c_witness_count = 0;    // candidates the slope condition was checked on
  double dist_moved = 0.0;
  double eps = 0.0;
  double delta = 0.0;
  int iterations = 0;
};

/// Iterative Ekeland construction: starting from x with
/// Phi(x) <= inf_lower_bound + eps, repeatedly move to the best candidate z
/// satisfying Phi(z) <= Phi(y) - (eps/delta) dist(z, y), until none exists.
/// The terminal y then satisfies a), b) and c) of the variational principle
/// against every candidate the oracle produces.
template <typename Point>
EkelandCertificate<Point> ekeland_point(
    const std::function<double(const Point&, const Point&)>& dist,
    const std::function<double(const Point&)>& phi, const Point& x, double eps,
    double delta,
    const std::function<std::vector<Point>(const Point&)>& candidates,
    double inf_lower_bound, int max_moves = 100000) {
  if (!(eps > 0.0) || !(delta > 0.0))
    throw std::invalid_argument("ekeland_point: eps and delta must be > 0");
  const double phi_x = phi(x);
  if (phi_x > inf_lower_bound + eps + 1e-12)
    throw std::invalid_argument(
        "ekeland_point: Phi(x) > inf + eps (precondition fails)");

  EkelandCertificate<Point> cert;
  cert.eps = eps;
  cert.delta = delta;
  const double slope = eps / delta;

  Point y = x;
  double phi_y = phi_x;
  for (;;) {
    const std::vector<Point> cands = candidates(y);
    cert.c_witness_count = static_cast<long>(cands.size());
    bool moved = false;
    Point best = y;
    double best_phi = phi_y;
    for (const Point& z : cands) {
      const double d = dist(z, y);
      if (d <= 0.0) continue;
      const double pz = phi(z);
      if (pz <= phi_y - slope * d && pz < best_phi) {
        best = z;
        best_phi = pz;
        moved = true;
      }
    }
    if (!moved) break;
    y = best;
    phi_y = best_phi;
    if (++cert.iterations >= max_moves)
      throw std::runtime_error(
          "ekeland_point: no stabilization (is Phi bounded below?)");
  }
  cert.y = y;
  cert.value = phi_y;
  cert.a_holds = phi_y <= phi_x;
  cert.dist_moved = dist(x, y);
  cert.b_holds = cert.dist_moved <= delta + 1e-12;
  return cert;
}

/// Finite point grid in R^n with the Euclidean metric; the candidate set is
/// the whole grid, so property c) is checked exhaustively.
struct GridSpace {
  std::vector<Vector> points;

  double distance(int i, int j) const {
    return (points[i] - points[j]).norm();
  }
};

EkelandCertificate<int> ekeland_point_on_grid(
    const GridSpace& grid, const std::vector<double>& values, int start,
    double eps, double delta);

// ---------------------------------------------------------------------------
// The map space Gamma(A) over a submesh of Q

/// Submesh of Q covering A = {t in Q : dist(g(t), S) <= eps}, with the exact
/// S-crossing of g inserted as a node, and the nodes adjacent to the
/// complement marked as the pinned boundary of A.
struct ASubmesh {
  PairPtr pair;
  Mesh mesh;                      // local coordinates
  std::vector<int> boundary_ids;  // pinned nodes (sorted)
  std::vector<Vector> g_images;   // g at every submesh node

  bool pinned(int node) const;
};

ASubmesh build_A(const AdmissibleMap& g, PairPtr pair, double eps);

/// A point of the map space: one image per submesh node.
struct MapPoint {
  std::vector<Vector> images;
};

/// Gamma(A) with the uniform distance; pinned nodes must carry g's images.
struct MapSpace {
  ASubmesh base;

  double distance(const MapPoint& p, const MapPoint& q) const;
  void validate(const MapPoint& p) const;
  MapPoint g_restriction() const;  // g tilde
};

MapSpace make_map_space(ASubmesh base);

/// Map space over the full mesh of the pair with identity pins on the
/// relative boundary (the strict-case setting: K = Q, K0 = boundary).
MapSpace make_map_space_from_pair(PairPtr pair);

MapPoint map_point_from(const AdmissibleMap& gamma);

struct IScore {
  double value = 0.0;     // sup of the integrand over the PL map
  double node_max = 0.0;  // exact node maximum
  std::vector<int> M;     // maximizer node band (tie width tau_M)
  Vector argmax_image;
};

/// The penalized level functional: sup over the submesh of
/// f(k(t)) + Psi(k(t)), with the maximizer node set M.
IScore functional_I(const Functional& f, const MapSpace& space,
                    const MapPoint& k, const SetPtr& S, double eps,
                    double tau_M = 1e-8, bool precise = true);

/// Same mechanics without the penalty: sup of f over the map image.
IScore sup_f_on_map(const Functional& f, const MapSpace& space,
                    const MapPoint& k, double tau_M = 1e-8,
                    bool precise = true);

struct BoundChecks {
  bool value_ok = false;  // c <= f(x_eps) <= c + (5/4) eps^2
  bool dist_ok = false;   // dist(x_eps, S) <= (3/2) eps
  bool grad_ok = false;   // ||f'(x_eps)|| <= (3/2) eps
  bool chain_ok = false;  // c + eps^2 <= I(ghat) <= I(gtilde) <= c + (5/4) eps^2
  double I_ghat = 0.0;
  double I_gtilde = 0.0;
};

struct LocalizedPoint {
  Vector x_eps;
  double f_value = 0.0;
  double grad_norm = 0.0;
  double dist_to_S = 0.0;
  double eps = 0.0;
  BoundChecks bound_checks;
  int ekeland_iterations = 0;
  long c_witnesses = 0;
};

struct LimitingOptions {
  double tau_c = 1e-4;   // |c - inf_S f| certification band
  double tau_M = 1e-8;
  int sample_budget = 512;
  double sample_radius = 8.0;
  uint64_t seed = 17;
};

/// The limiting-case pipeline: build A, pin Gamma(A) to g on the boundary of
/// A, minimize the penalized functional by the Ekeland construction
/// (eps_Ek = eps^2/4, delta_Ek = eps/2), extract the maximizer set and the
/// minimal-gradient node, and return x_eps with the value/distance/gradient
/// bound checks and the proof-chain record.
LocalizedPoint limiting_case_search(const Functional& f, PairPtr pair,
                                    const AdmissibleMap& g, double eps,
                                    double c_level,
                                    const LimitingOptions& opts = {});

struct StrictCasePoint {
  Vector u;
  double f_value = 0.0;
  double grad_norm = 0.0;
  double dist_to_image = 0.0;  // dist(u, p(K))
  bool value_ok = false;       // c - eps <= f(u) <= max f(p)
  bool dist_ok = false;        // dist(u, p(K)) <= sqrt(eps)
  bool grad_ok = false;        // ||f'(u)|| <= sqrt(eps)
};

/// Strict-case search (level gap c > d): Ekeland on the sup functional with
/// delta = sqrt(eps), then the maximizer-set gradient extraction. Requires
/// eps in (0, c - d) and max f(p) <= c + eps.
StrictCasePoint strict_case_search(const Functional& f, const MapSpace& space,
                                   double eps, const MapPoint& p,
                                   double c_level, double tau_M = 1e-8);

}  // namespace cpt
