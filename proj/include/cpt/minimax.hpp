#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "cpt/deformation.hpp"
#include "cpt/ekeland.hpp"
#include "cpt/functional.hpp"
#include "cpt/geometry.hpp"

namespace cpt {

struct SampleOptions {
  int budget = 512;
  double radius = 8.0;   // sampling radius for unbounded sets
  uint64_t seed = 11;
  double tau_b = 1e-8;   // tolerance of the boundary_max <= alpha comparison
};

struct GeometryBounds {
  double alpha = 0.0;         // inf of f over sampled S
  double boundary_max = 0.0;  // max of f over the boundary nodes of Q
  bool hypothesis_b = false;  // boundary_max <= alpha within tau_b
};

GeometryBounds check_geometry_bounds(const Functional& f,
                                     const LinkingPair& pair,
                                     const SampleOptions& opts = {});

struct SupResult {
  double value = 0.0;     // sup of f over the PL image (cell-refined)
  double node_max = 0.0;  // max over node images
  int node = -1;          // argmax node
  Vector argmax_image;    // image point achieving `value`
};

/// sup of f over the image of the admissible map, with in-cell refinement of
/// the leading cells (the map is linear on cells, f is not).
SupResult sup_on_map(const Functional& f, const AdmissibleMap& gamma);

enum class MinimaxStop {
  limiting,       // sup reached alpha: the c = alpha branch
  near_critical,  // working band contains a near-critical point
  stalled,        // deformation stopped making progress
  max_iters
};

struct MinimaxOptions {
  int max_iters = 60;
  double tau_c = 1e-4;       // limiting-case detection band |c - alpha|
  double b = 1e-3;           // near-critical gradient threshold
  double eps_bar_min = 1e-5; // smallest deformation band half-width tried
  double ode_step = 0.02;
  SampleOptions sampling;
};

struct MinimaxReport {
  double c_estimate = 0.0;
  double alpha = 0.0;
  std::vector<std::pair<int, double>> iteration_history;  // (iter, sup)
  AdmissibleMap best_map;
  Vector argmax_point;        // point of Q realizing the final sup
  Vector candidate_critical;  // polished image-side candidate
  double grad_norm_at_candidate = 0.0;
  bool limiting_case = false;
  std::optional<double> location_check;  // dist(candidate, S) when limiting
  MinimaxStop stop = MinimaxStop::max_iters;
  PalaisSmaleTrace ps_trace;  // per-iteration argmax images
};

/// The inf-max driver: iterates gamma_{k+1} = eta(1, .) o gamma_k with the
/// classical level deformation at the current sup while that level is
/// noncritical, stops at a near-critical band or at the limiting case
/// sup = alpha, and polishes the final argmax image into a critical-point
/// candidate. Boundary nodes are re-pinned exactly after every composition.
MinimaxReport estimate_cgamma(const Functional& f, PairPtr pair,
                              const AdmissibleMap& gamma0,
                              const MinimaxOptions& opts = {});

struct Localization {
  Vector point;
  double f_value = 0.0;
  double grad_norm = 0.0;
  double dist_to_S = 0.0;
  LocalizedPoint certificate;
};

/// Limiting-case localization: runs the penalized Ekeland pipeline at an eps
/// matched to `tol` and polishes with local descent kept near S. Refuses when
/// the report is not in the limiting case.
Localization locate_on_S(const Functional& f, const MinimaxReport& report,
                         PairPtr pair, double tol = 1e-3);

/// Third critical point between two local minima: runs the mountain-pass
/// driver on the segment geometry between m1 and m2 (shifted so m1 is the
/// origin) and returns the localized or polished pass point.
Vector pucci_serrin_third(const Functional& f, const Vector& m1,
                          const Vector& m2, double tol = 1e-6);

}  // namespace cpt
