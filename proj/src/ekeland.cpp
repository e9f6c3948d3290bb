#include "cpt/ekeland.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace cpt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

}  // namespace

void DiscreteMeasure::validate() const {
  require(support.size() == weights.size(),
          "discrete measure: support/weight size mismatch");
  require(!support.empty(), "discrete measure: empty support");
  double sum = 0.0;
  for (double w : weights) {
    require(w >= 0.0, "discrete measure: negative weight");
    sum += w;
  }
  require(std::abs(sum - 1.0) <= 1e-12, "discrete measure: mass is not one");
}

DiscreteMeasure MaxSubdifferential::dirac(int which) const {
  DiscreteMeasure mu;
  mu.support = {M.at(which)};
  mu.weights = {1.0};
  return mu;
}

MaxSubdifferential max_subdifferential(const std::vector<double>& values,
                                       double tau_M) {
  require(!values.empty(), "max_subdifferential: empty value list");
  const double top = *std::max_element(values.begin(), values.end());
  MaxSubdifferential out;
  for (size_t i = 0; i < values.size(); ++i)
    if (values[i] >= top - tau_M) out.M.push_back(static_cast<int>(i));
  out.simplex_dim = static_cast<int>(out.M.size()) - 1;
  return out;
}

MinNormDescent min_norm_descent(const std::vector<Vector>& gradients) {
  require(!gradients.empty(), "min_norm_descent: empty maximizer set");
  MinNormDescent out;
  out.bound = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < gradients.size(); ++i) {
    const double n = gradients[i].norm();
    if (n < out.bound) {
      out.bound = n;
      out.t0 = static_cast<int>(i);
    }
  }
  const Vector& g = gradients[out.t0];
  out.direction =
      out.bound > 0.0 ? Vector(-g / out.bound) : Vector(Vector::Zero(g.size()));
  return out;
}

double penalty_psi(const Vector& x, const SetPtr& S, double eps) {
  require(eps > 0.0, "penalty_psi: eps must be positive");
  require(S != nullptr, "penalty_psi: null set");
  return std::max(0.0, eps * eps - eps * S->distance(x));
}

EkelandCertificate<int> ekeland_point_on_grid(const GridSpace& grid,
                                              const std::vector<double>& values,
                                              int start, double eps,
                                              double delta) {
  require(grid.points.size() == values.size(),
          "ekeland_point_on_grid: one value per grid point required");
  require(start >= 0 && start < static_cast<int>(values.size()),
          "ekeland_point_on_grid: bad start index");
  const double inf = *std::min_element(values.begin(), values.end());
  std::vector<int> everyone(values.size());
  for (size_t i = 0; i < values.size(); ++i) everyone[i] = static_cast<int>(i);
  return ekeland_point<int>(
      [&grid](const int& i, const int& j) { return grid.distance(i, j); },
      [&values](const int& i) { return values[i]; }, start, eps, delta,
      [&everyone](const int&) { return everyone; }, inf);
}

// ---------------------------------------------------------------------------

bool ASubmesh::pinned(int node) const {
  return std::binary_search(boundary_ids.begin(), boundary_ids.end(), node);
}

ASubmesh build_A(const AdmissibleMap& g, PairPtr pair, double eps) {
  require(pair != nullptr, "build_A: null pair");
  require(eps > 0.0, "build_A: eps must be positive");
  require(eps < pair->link_margin,
          "build_A: eps >= dist(boundary of Q, S); A would touch the "
          "boundary of Q");
  const Mesh& qmesh = pair->mesh;
  const auto& images = g.node_images();

  std::vector<double> dist(qmesh.nodes.size());
  std::vector<bool> in_a(qmesh.nodes.size());
  for (size_t i = 0; i < qmesh.nodes.size(); ++i) {
    dist[i] = pair->S->distance(images[i]);
    in_a[i] = dist[i] <= eps;
  }

  // The exact S-crossing of g becomes a node, so the witness value is
  // attained on the node set even when the mesh does not resolve A.
  IntersectionResult cross;
  try {
    cross = find_intersection(g, *pair, 1e-8);
  } catch (const std::runtime_error& err) {
    throw std::runtime_error(std::string("build_A: no crossing found (") +
                             err.what() + ")");
  }

  std::vector<int> new_id(qmesh.nodes.size(), -1);
  ASubmesh sub;
  sub.pair = pair;
  sub.mesh.dim = qmesh.dim;
  for (size_t i = 0; i < qmesh.nodes.size(); ++i) {
    if (!in_a[i]) continue;
    new_id[i] = static_cast<int>(sub.mesh.nodes.size());
    sub.mesh.nodes.push_back(qmesh.nodes[i]);
    sub.g_images.push_back(images[i]);
  }

  for (const auto& cell : qmesh.cells) {
    bool inside = true;
    for (int id : cell) inside = inside && in_a[id];
    if (!inside) continue;
    std::vector<int> mapped;
    mapped.reserve(cell.size());
    for (int id : cell) mapped.push_back(new_id[id]);
    sub.mesh.cells.push_back(std::move(mapped));
  }

  // Pins: A-nodes adjacent (in Q) to nodes outside A.
  const auto q_adj = qmesh.adjacency();
  std::set<int> pins;
  for (size_t i = 0; i < qmesh.nodes.size(); ++i) {
    if (!in_a[i]) continue;
    for (int nb : q_adj[i])
      if (!in_a[nb]) pins.insert(new_id[i]);
  }

  const Vector cross_local = pair->chart.to_local(cross.domain_point);
  double nearest = std::numeric_limits<double>::infinity();
  for (const auto& node : sub.mesh.nodes)
    nearest = std::min(nearest, (node - cross_local).norm());
  if (nearest > 1e-9) {
    const int cnode = static_cast<int>(sub.mesh.nodes.size());
    sub.mesh.nodes.push_back(cross_local);
    sub.g_images.push_back(cross.image);
    // find a submesh cell containing the crossing and star-split it
    const int d = sub.mesh.dim;
    int owner = -1;
    std::vector<double> lambda;
    for (size_t k = 0; k < sub.mesh.cells.size() && owner < 0; ++k) {
      const auto& cell = sub.mesh.cells[k];
      Matrix T(d, d);
      for (int j = 0; j < d; ++j)
        T.col(j) = sub.mesh.nodes[cell[j + 1]] - sub.mesh.nodes[cell[0]];
      const Vector mu =
          T.partialPivLu().solve(cross_local - sub.mesh.nodes[cell[0]]);
      double l0 = 1.0;
      bool ok = true;
      for (int j = 0; j < d; ++j) {
        ok = ok && mu(j) >= -1e-10;
        l0 -= mu(j);
      }
      if (ok && l0 >= -1e-10) {
        owner = static_cast<int>(k);
        lambda.assign(1, l0);
        for (int j = 0; j < d; ++j) lambda.push_back(mu(j));
      }
    }
    if (owner >= 0) {
      const std::vector<int> cell = sub.mesh.cells[owner];
      sub.mesh.cells.erase(sub.mesh.cells.begin() + owner);
      for (size_t drop = 0; drop < cell.size(); ++drop) {
        if (lambda[drop] <= 1e-12) continue;  // crossing on that facet
        std::vector<int> piece;
        for (size_t i = 0; i < cell.size(); ++i)
          piece.push_back(i == drop ? cnode : cell[i]);
        sub.mesh.cells.push_back(std::move(piece));
      }
    } else {
      pins.insert(cnode);  // isolated witness node stays pinned to g
    }
  }

  sub.boundary_ids.assign(pins.begin(), pins.end());
  sub.mesh.boundary_nodes = sub.boundary_ids;
  return sub;
}

double MapSpace::distance(const MapPoint& p, const MapPoint& q) const {
  require(p.images.size() == base.mesh.nodes.size() &&
              q.images.size() == base.mesh.nodes.size(),
          "map space: point size mismatch");
  double d = 0.0;
  for (size_t i = 0; i < p.images.size(); ++i)
    d = std::max(d, (p.images[i] - q.images[i]).norm());
  return d;
}

void MapSpace::validate(const MapPoint& p) const {
  require(p.images.size() == base.mesh.nodes.size(),
          "map space: one image per node required");
  for (int id : base.boundary_ids)
    require((p.images[id] - base.g_images[id]).norm() == 0.0,
            "map space: pinned node image differs from g");
}

MapPoint MapSpace::g_restriction() const { return MapPoint{base.g_images}; }

MapSpace make_map_space(ASubmesh base) { return MapSpace{std::move(base)}; }

MapSpace make_map_space_from_pair(PairPtr pair) {
  require(pair != nullptr, "make_map_space_from_pair: null pair");
  ASubmesh base;
  base.pair = pair;
  base.mesh = pair->mesh;
  base.boundary_ids = pair->mesh.boundary_nodes;
  base.g_images.reserve(pair->mesh.nodes.size());
  for (const auto& node : pair->mesh.nodes)
    base.g_images.push_back(pair->chart.embed(node));
  return MapSpace{std::move(base)};
}

MapPoint map_point_from(const AdmissibleMap& gamma) {
  return MapPoint{gamma.node_images()};
}

namespace {

IScore score_map(const MapSpace& space, const MapPoint& k,
                 const std::function<double(const Vector&)>& phi,
                 double tau_M, bool precise) {
  space.validate(k);
  IScore out;
  // refine every cell: the sup of the PL map is what the chain bounds need,
  // and the crossing cell does not always lead the node-value ranking.
  // Candidate screening inside the Ekeland walk uses the faster zoom.
  const NodeSup sup =
      refined_sup(space.base.mesh.cells, k.images, phi,
                  static_cast<int>(space.base.mesh.cells.size()),
                  precise ? 60 : 18);
  out.value = sup.value;
  out.node_max = sup.node_max;
  out.argmax_image = sup.argmax_image;
  for (size_t i = 0; i < k.images.size(); ++i)
    if (phi(k.images[i]) >= out.value - tau_M)
      out.M.push_back(static_cast<int>(i));
  if (out.M.empty()) out.M.push_back(sup.node);
  return out;
}

}  // namespace

IScore functional_I(const Functional& f, const MapSpace& space,
                    const MapPoint& k, const SetPtr& S, double eps,
                    double tau_M, bool precise) {
  auto phi = [&](const Vector& x) {
    return f.value(x) + penalty_psi(x, S, eps);
  };
  return score_map(space, k, phi, tau_M, precise);
}

IScore sup_f_on_map(const Functional& f, const MapSpace& space,
                    const MapPoint& k, double tau_M, bool precise) {
  auto phi = [&](const Vector& x) { return f.value(x); };
  return score_map(space, k, phi, tau_M, precise);
}

namespace {

// Single-node and smoothed-bump perturbations of the current map, magnitudes
// on a geometric ladder below `scale`; pinned nodes never move.
std::vector<MapPoint> map_candidates(const MapSpace& space,
                                     const Functional& f, const MapPoint& p,
                                     double scale) {
  const ASubmesh& base = space.base;
  const auto adj = base.mesh.adjacency();
  const int n = static_cast<int>(p.images.front().size());
  std::vector<MapPoint> out;
  for (size_t i = 0; i < p.images.size(); ++i) {
    if (base.pinned(static_cast<int>(i))) continue;
    std::vector<Vector> dirs;
    for (int j = 0; j < n; ++j) {
      dirs.push_back(Vector::Unit(n, j));
      dirs.push_back(-Vector::Unit(n, j));
    }
    const Vector g = f.gradient(p.images[i]);
    if (g.norm() > 0.0) dirs.push_back(-g / g.norm());
    for (int rung = 1; rung <= 6; ++rung) {
      const double mag = scale / std::pow(2.0, rung);
      for (const Vector& dir : dirs) {
        MapPoint single = p;
        single.images[i] += mag * dir;
        out.push_back(std::move(single));
        MapPoint bump = p;
        bump.images[i] += mag * dir;
        for (int nb : adj[i])
          if (!base.pinned(nb)) bump.images[nb] += 0.5 * mag * dir;
        out.push_back(std::move(bump));
      }
    }
  }
  return out;
}

}  // namespace

LocalizedPoint limiting_case_search(const Functional& f, PairPtr pair,
                                    const AdmissibleMap& g, double eps,
                                    double c_level,
                                    const LimitingOptions& opts) {
  require(pair != nullptr, "limiting_case_search: null pair");

  // limiting-case certification: c agrees with inf_S f on samples
  std::mt19937_64 rng(opts.seed);
  double alpha = std::numeric_limits<double>::infinity();
  for (const auto& s :
       pair->S->sample(opts.sample_budget, rng, opts.sample_radius))
    alpha = std::min(alpha, f.value(s));
  require(std::abs(c_level - alpha) <= opts.tau_c,
          "limiting_case_search: not in the limiting case (c differs from "
          "inf_S f)");

  const double eps_cap = std::min(1.0, pair->link_margin) / 2.0;
  if (!(eps > 0.0 && eps < eps_cap)) {
    std::ostringstream msg;
    msg << "limiting_case_search: eps = " << eps
        << " outside (0, min{1, dist(boundary Q, S)}/2) = (0, " << eps_cap
        << ")";
    throw std::invalid_argument(msg.str());
  }

  // inequality (1): the seed map must be eps^2/4-optimal in value
  {
    const MapSpace full = make_map_space_from_pair(pair);
    const IScore sup_g = sup_f_on_map(f, full, map_point_from(g));
    if (!(sup_g.value < c_level + eps * eps / 4.0)) {
      std::ostringstream msg;
      msg << "limiting_case_search: sup f(g) = " << sup_g.value
          << " not below c + eps^2/4 = " << c_level + eps * eps / 4.0;
      throw std::invalid_argument(msg.str());
    }
  }

  MapSpace space = make_map_space(build_A(g, pair, eps));
  const MapPoint g_tilde = space.g_restriction();
  const SetPtr S = pair->S;

  auto phi = [&](const MapPoint& k) {
    return functional_I(f, space, k, S, eps, opts.tau_M, false).value;
  };
  auto dist = [&](const MapPoint& a, const MapPoint& b) {
    return space.distance(a, b);
  };
  auto cands = [&](const MapPoint& k) {
    return map_candidates(space, f, k, eps);
  };

  const double eps_ek = eps * eps / 4.0;
  const double delta_ek = eps / 2.0;
  const double inf_lb = c_level + eps * eps;
  const auto cert = ekeland_point<MapPoint>(dist, phi, g_tilde, eps_ek,
                                            delta_ek, cands, inf_lb);

  const IScore score = functional_I(f, space, cert.y, S, eps, opts.tau_M);
  std::vector<Vector> grads;
  grads.reserve(score.M.size());
  for (int id : score.M) grads.push_back(f.gradient(cert.y.images[id]));
  const MinNormDescent mnd = min_norm_descent(grads);

  LocalizedPoint out;
  out.x_eps = cert.y.images[score.M[mnd.t0]];
  out.f_value = f.value(out.x_eps);
  out.grad_norm = mnd.bound;
  out.dist_to_S = S->distance(out.x_eps);
  out.eps = eps;
  out.ekeland_iterations = cert.iterations;
  out.c_witnesses = cert.c_witness_count;

  BoundChecks& bc = out.bound_checks;
  bc.I_ghat = score.value;
  bc.I_gtilde = functional_I(f, space, g_tilde, S, eps, opts.tau_M).value;
  const double slack = 1e-8;
  bc.value_ok = out.f_value >= c_level - slack &&
                out.f_value <= c_level + 1.25 * eps * eps + slack;
  bc.dist_ok = out.dist_to_S <= 1.5 * eps + slack;
  bc.grad_ok = out.grad_norm <= 1.5 * eps + slack;
  bc.chain_ok = bc.I_ghat >= c_level + eps * eps - slack &&
                bc.I_ghat <= bc.I_gtilde + slack &&
                bc.I_gtilde <= c_level + 1.25 * eps * eps + slack;
  return out;
}

StrictCasePoint strict_case_search(const Functional& f, const MapSpace& space,
                                   double eps, const MapPoint& p,
                                   double c_level, double tau_M) {
  space.validate(p);
  double d_level = -std::numeric_limits<double>::infinity();
  for (int id : space.base.boundary_ids)
    d_level = std::max(d_level, f.value(space.base.g_images[id]));
  if (!(c_level > d_level))
    throw std::invalid_argument(
        "strict_case_search: c <= d (no level gap; route to "
        "limiting_case_search)");
  if (!(eps > 0.0 && eps < c_level - d_level)) {
    std::ostringstream msg;
    msg << "strict_case_search: eps = " << eps << " outside (0, c - d) = (0, "
        << c_level - d_level << ")";
    throw std::invalid_argument(msg.str());
  }
  const IScore sup_p = sup_f_on_map(f, space, p, tau_M);
  if (!(sup_p.value <= c_level + eps)) {
    std::ostringstream msg;
    msg << "strict_case_search: max f(p) = " << sup_p.value
        << " above c + eps = " << c_level + eps;
    throw std::invalid_argument(msg.str());
  }

  auto phi = [&](const MapPoint& k) {
    return sup_f_on_map(f, space, k, tau_M, false).value;
  };
  auto dist = [&](const MapPoint& a, const MapPoint& b) {
    return space.distance(a, b);
  };
  const double delta = std::sqrt(eps);
  auto cands = [&](const MapPoint& k) {
    return map_candidates(space, f, k, delta);
  };
  const auto cert =
      ekeland_point<MapPoint>(dist, phi, p, eps, delta, cands, c_level);

  const IScore score = sup_f_on_map(f, space, cert.y, tau_M);
  std::vector<Vector> grads;
  grads.reserve(score.M.size());
  for (int id : score.M) grads.push_back(f.gradient(cert.y.images[id]));
  const MinNormDescent mnd = min_norm_descent(grads);

  StrictCasePoint out;
  out.u = cert.y.images[score.M[mnd.t0]];
  out.f_value = f.value(out.u);
  out.grad_norm = mnd.bound;

  // dist(u, p(K)) over the PL image of p
  double best = std::numeric_limits<double>::infinity();
  for (const auto& cell : space.base.mesh.cells) {
    const int nv = static_cast<int>(cell.size());
    auto fn = [&](const Vector& lam) {
      Vector img = Vector::Zero(out.u.size());
      for (int i = 0; i < nv; ++i) img += lam(i) * p.images[cell[i]];
      return (img - out.u).norm();
    };
    SimplexOpt opt;
    opt.rounds = 40;
    best = std::min(
        best, optimize_over_simplex(fn, Matrix::Identity(nv, nv), opt).value);
  }
  for (const auto& img : p.images) best = std::min(best, (img - out.u).norm());
  out.dist_to_image = best;

  const double slack = 1e-9;
  out.value_ok = out.f_value >= c_level - eps - slack &&
                 out.f_value <= sup_p.value + slack;
  out.dist_ok = out.dist_to_image <= delta + slack;
  out.grad_ok = out.grad_norm <= delta + slack;
  return out;
}

}  // namespace cpt
