#pragma once

#include <memory>
#include <string>
#include <vector>

#include "cpt/mesh.hpp"
#include "cpt/space.hpp"

namespace cpt {

enum class PairKind { saddle, mp_cylinder, silva, mp_path };

const char* to_string(PairKind kind);
PairKind pair_kind_from_string(const std::string& name);

struct PairParams {
  double rho = 0.0;
  double R = 0.0;
  double R1 = 0.0;
  double R2 = 0.0;
  Vector path_a;        // mp_path: start point (defaults to the origin)
  Vector path_b;        // mp_path: end point
  Vector sphere_center; // mp_path: center of S (defaults to the origin)
};

/// A linking geometry: the obstacle set S, the domain Q meshed in local
/// coordinates of its carrier subspace, and the relative boundary as mesh
/// boundary nodes. Construction certifies S and the boundary are disjoint
/// (positive link_margin).
///
/// Kinds:
///   saddle       S = V1,                     Q = ball_R in V2
///   mp_cylinder  S = sphere_rho in V1+Re,    Q = [0,R1] e x ball_R2 in V2
///   silva        S = shell(V2, rho) u cap,   Q = ball_R in V1+Re
///   mp_path      S = sphere_rho(center),     Q = segment [a, b]
struct LinkingPair {
  PairKind kind;
  Decomposition decomp;
  PairParams params;
  SetPtr S;
  SetPtr Q_set;
  Mesh mesh;
  Chart chart;
  double link_margin = 0.0;
};

using PairPtr = std::shared_ptr<const LinkingPair>;

PairPtr make_pair(PairKind kind, const Decomposition& decomp,
                  const PairParams& params, int mesh_resolution);

/// Continuous map on Q in the identity-on-boundary class, stored as node
/// images of the pair's mesh and interpolated linearly on cells. Boundary
/// nodes must map to themselves exactly.
///
/// A map may carry the continuous generator it was sampled from; adaptive
/// refinement (find_intersection) then re-samples the generator instead of
/// being limited by the node resolution.
class AdmissibleMap {
 public:
  using Generator = std::function<Vector(const Vector&)>;

  AdmissibleMap(PairPtr pair, std::vector<Vector> node_images,
                Generator generator = nullptr);

  static AdmissibleMap identity(PairPtr pair);

  const PairPtr& pair() const { return pair_; }
  const std::vector<Vector>& node_images() const { return node_images_; }
  const Generator& generator() const { return generator_; }

  Vector image_at(int cell, const std::vector<double>& barycentric) const;

  /// Same mesh, new images; the generator is dropped (the new images no
  /// longer sample it).
  AdmissibleMap with_images(std::vector<Vector> node_images) const;

 private:
  PairPtr pair_;
  std::vector<Vector> node_images_;
  Generator generator_;
};

/// Boundary-pinned perturbation of the identity: a smooth random displacement
/// field damped to zero at the boundary nodes, scaled to the given amplitude.
AdmissibleMap make_perturbed_identity(PairPtr pair, double amplitude,
                                      std::mt19937_64& rng);

struct PreimageCell {
  int cell = -1;
  std::vector<double> barycentric;
  int sign = 0;
};

struct DegreeResult {
  int degree = 0;
  double boundary_margin = 0.0;           // dist(y, PL image of the boundary)
  std::vector<PreimageCell> certificate;  // signed preimage cells
};

/// Brouwer degree of the piecewise-linear interpolant of `values` (one R^d
/// vector per mesh node) at the target y, by signed simplicial counting of
/// preimages. Requires mesh dimension <= 3 and a positive boundary margin
/// (>= eta_deg); throws otherwise.
DegreeResult brouwer_degree(const Mesh& mesh, const std::vector<Vector>& values,
                            const Vector& y, double eta_deg = 1e-6);

struct IntersectionResult {
  Vector domain_point;  // point of Q, ambient coordinates
  Vector image;         // map value there
  double residual = 0.0;  // dist(image, S)
  int cell = -1;
};

/// Finds a point of Q whose image under the map lies on S (residual below
/// tau_link), by a node scan followed by adaptive in-cell refinement. Throws
/// a linking-violation report if the residual stays above tau_link.
IntersectionResult find_intersection(const AdmissibleMap& gamma,
                                     const LinkingPair& pair,
                                     double tau_link = 1e-3,
                                     int max_refine = 6);

struct HomotopyStep {
  double t = 0.0;
  int degree = 0;
  double margin = 0.0;
};

struct LinkingReport {
  bool conclusive = false;
  bool linked = false;
  std::vector<HomotopyStep> steps;
  IntersectionResult witness;
  std::string message;
};

/// Verifies the linking of S and the boundary of Q under the given map by the
/// kind-specific boundary-value homotopy: samples t on a grid (with bisection
/// refinement where margins get small), checks degree constancy equal to the
/// identity degree 1, and extracts an intersection witness at t = 1.
/// Supported kinds: saddle, mp_cylinder, silva.
LinkingReport verify_linking(const AdmissibleMap& gamma,
                             const LinkingPair& pair, double beta = 2.0,
                             int t_samples = 11, double eta_deg = 1e-6);

/// Continuous ramp used by the silva homotopy: 0 for x <= 0, beta x / rho on
/// [0, rho / beta], and 1 beyond.
double chi_beta(double beta, double rho, double x);

}  // namespace cpt
