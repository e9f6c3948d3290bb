#include "cpt/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <sstream>
#include <stdexcept>

namespace cpt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

Vector zero(int n) { return Vector::Zero(n); }

Matrix hcat(const Matrix& a, const Matrix& b) {
  Matrix out(a.rows() > 0 ? a.rows() : b.rows(), a.cols() + b.cols());
  if (a.cols() > 0) out.leftCols(a.cols()) = a;
  if (b.cols() > 0) out.rightCols(b.cols()) = b;
  return out;
}

Matrix as_column(const Vector& v) {
  Matrix m(v.size(), 1);
  m.col(0) = v;
  return m;
}

// Closest-point distance from y to the simplex spanned by the given vertices
// (1 to 3 of them) in R^d.
double point_simplex_distance(const Vector& y,
                              const std::vector<Vector>& verts) {
  switch (verts.size()) {
    case 1:
      return (y - verts[0]).norm();
    case 2: {
      const Vector d = verts[1] - verts[0];
      const double len2 = d.squaredNorm();
      double t = len2 > 0.0 ? d.dot(y - verts[0]) / len2 : 0.0;
      t = std::clamp(t, 0.0, 1.0);
      return (y - (verts[0] + t * d)).norm();
    }
    case 3: {
      // Ericson, Real-Time Collision Detection, closest point on triangle.
      const Vector &a = verts[0], &b = verts[1], &c = verts[2];
      const Vector ab = b - a, ac = c - a, ap = y - a;
      const double d1 = ab.dot(ap), d2 = ac.dot(ap);
      if (d1 <= 0.0 && d2 <= 0.0) return (y - a).norm();
      const Vector bp = y - b;
      const double d3 = ab.dot(bp), d4 = ac.dot(bp);
      if (d3 >= 0.0 && d4 <= d3) return (y - b).norm();
      const double vc = d1 * d4 - d3 * d2;
      if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) {
        const double v = d1 / (d1 - d3);
        return (y - (a + v * ab)).norm();
      }
      const Vector cp = y - c;
      const double d5 = ab.dot(cp), d6 = ac.dot(cp);
      if (d6 >= 0.0 && d5 <= d6) return (y - c).norm();
      const double vb = d5 * d2 - d1 * d6;
      if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) {
        const double w = d2 / (d2 - d6);
        return (y - (a + w * ac)).norm();
      }
      const double va = d3 * d6 - d5 * d4;
      if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0) {
        const double w = (d4 - d3) / ((d4 - d3) + (d5 - d6));
        return (y - (b + w * (c - b))).norm();
      }
      const double denom = 1.0 / (va + vb + vc);
      const double v = vb * denom, w = vc * denom;
      return (y - (a + ab * v + ac * w)).norm();
    }
    default:
      throw std::logic_error("point_simplex_distance: unsupported facet size");
  }
}

// Faces of cells all of whose vertices lie on the boundary, deduplicated.
std::set<std::vector<int>> boundary_facets(const Mesh& mesh) {
  std::set<std::vector<int>> facets;
  for (const auto& cell : mesh.cells) {
    for (size_t drop = 0; drop < cell.size(); ++drop) {
      std::vector<int> face;
      bool on_boundary = true;
      for (size_t i = 0; i < cell.size(); ++i) {
        if (i == drop) continue;
        face.push_back(cell[i]);
        on_boundary = on_boundary && mesh.is_boundary(cell[i]);
      }
      if (on_boundary) {
        std::sort(face.begin(), face.end());
        facets.insert(std::move(face));
      }
    }
  }
  return facets;
}

// xorshift-based deterministic unit direction for degree target perturbation
Vector perturbation_direction(int dim, int attempt) {
  uint64_t s = 0x9e3779b97f4a7c15ull + 0x100000001b3ull * (attempt + 1);
  auto next = [&s]() {
    s ^= s << 13;
    s ^= s >> 7;
    s ^= s << 17;
    return s;
  };
  Vector dir(dim);
  for (int i = 0; i < dim; ++i)
    dir(i) = static_cast<double>(next() % 20011) / 20011.0 - 0.5;
  const double n = dir.norm();
  return n > 0.0 ? Vector(dir / n) : Vector(Vector::Unit(dim, 0));
}

}  // namespace

const char* to_string(PairKind kind) {
  switch (kind) {
    case PairKind::saddle: return "saddle";
    case PairKind::mp_cylinder: return "mp_cylinder";
    case PairKind::silva: return "silva";
    case PairKind::mp_path: return "mp_path";
  }
  return "unknown";
}

PairKind pair_kind_from_string(const std::string& name) {
  if (name == "saddle") return PairKind::saddle;
  if (name == "mp_cylinder") return PairKind::mp_cylinder;
  if (name == "silva") return PairKind::silva;
  if (name == "mp_path") return PairKind::mp_path;
  throw std::invalid_argument("unknown pair kind '" + name + "'");
}

PairPtr make_pair(PairKind kind, const Decomposition& decomp,
                  const PairParams& params, int mesh_resolution) {
  require(mesh_resolution >= 1, "make_pair: mesh_resolution must be >= 1");
  LinkingPair p{kind, decomp, params, nullptr, nullptr, Mesh{}, Chart{}, 0.0};
  const int n = decomp.dim();
  double q_diam = 0.0;

  switch (kind) {
    case PairKind::saddle: {
      require(!decomp.has_e(), "saddle pair: decomposition must not carry e");
      require(decomp.dim2() >= 1, "saddle pair: dim V2 >= 1 required");
      require(decomp.dim2() <= 3, "saddle pair: mesh dimension limited to 3");
      require(params.R > 0.0, "saddle pair: R > 0 violated");
      p.S = make_subspace_set(decomp.basis1());
      p.Q_set = make_ball_set(params.R, zero(n), decomp.basis2());
      p.mesh = make_ball_mesh(decomp.dim2(), params.R, mesh_resolution);
      p.chart = Chart{decomp.basis2(), zero(n)};
      q_diam = 2.0 * params.R;
      break;
    }
    case PairKind::mp_cylinder: {
      require(decomp.has_e(),
              "mp_cylinder pair: decomposition must carry e (the V1 "
              "direction spanning the cylinder axis)");
      require(params.rho > 0.0, "mp_cylinder pair: rho > 0 violated");
      require(params.rho < params.R1, "mp_cylinder pair: rho < R1 violated");
      require(params.R2 > 0.0, "mp_cylinder pair: R2 > 0 violated");
      require(1 + decomp.dim2() <= 3,
              "mp_cylinder pair: mesh dimension limited to 3");
      const Matrix v1_full = hcat(as_column(decomp.e()), decomp.basis1());
      p.S = make_sphere_set(params.rho, zero(n), v1_full);
      p.Q_set = make_cylinder_set(decomp.e(), params.R1, decomp.basis2(),
                                  params.R2);
      p.mesh = make_cylinder_mesh(params.R1, decomp.dim2(), params.R2,
                                  mesh_resolution);
      p.chart = Chart{hcat(as_column(decomp.e()), decomp.basis2()), zero(n)};
      q_diam = std::hypot(params.R1, 2.0 * params.R2);
      break;
    }
    case PairKind::silva: {
      require(decomp.has_e(), "silva pair: decomposition must carry e");
      require(params.rho > 0.0, "silva pair: rho > 0 violated");
      require(params.rho < params.R, "silva pair: rho < R violated");
      require(decomp.dim1() + 1 <= 3,
              "silva pair: mesh dimension limited to 3");
      const Matrix v2e = hcat(as_column(decomp.e()), decomp.basis2());
      p.S = make_union_set(
          {make_subspace_shell_set(decomp.basis2(), params.rho),
           make_sphere_set(params.rho, zero(n), v2e, decomp.e())});
      const Matrix v1e = hcat(decomp.basis1(), as_column(decomp.e()));
      p.Q_set = make_ball_set(params.R, zero(n), v1e);
      p.mesh = make_ball_mesh(decomp.dim1() + 1, params.R, mesh_resolution);
      p.chart = Chart{v1e, zero(n)};
      q_diam = 2.0 * params.R;
      break;
    }
    case PairKind::mp_path: {
      require(params.path_b.size() > 0, "mp_path pair: end point required");
      const int nn = static_cast<int>(params.path_b.size());
      require(nn == n, "mp_path pair: end point dimension mismatch");
      const Vector a =
          params.path_a.size() > 0 ? params.path_a : zero(n);
      const Vector center =
          params.sphere_center.size() > 0 ? params.sphere_center : zero(n);
      require(params.rho > 0.0, "mp_path pair: rho > 0 violated");
      const double len = (params.path_b - a).norm();
      require(len > 0.0, "mp_path pair: endpoints coincide");
      p.S = make_sphere_set(params.rho, center);
      p.Q_set = make_segment_set(a, params.path_b);
      p.mesh = make_segment_mesh(0.0, len, mesh_resolution);
      p.chart = Chart{as_column((params.path_b - a) / len), a};
      q_diam = len;
      break;
    }
  }

  // (L1): the boundary stays clear of S.
  double margin = std::numeric_limits<double>::infinity();
  for (int b : p.mesh.boundary_nodes)
    margin = std::min(margin, p.S->distance(p.chart.embed(p.mesh.nodes[b])));
  require(margin > 0.0,
          std::string("make_pair(") + to_string(kind) +
              "): (L1) violated, S meets the relative boundary of Q");
  p.link_margin = margin;

  for (const auto& node : p.mesh.nodes)
    require(p.Q_set->distance(p.chart.embed(node)) <= 1e-7,
            "make_pair: mesh node escaped Q");
  require(p.mesh.max_cell_diameter() <=
              q_diam / mesh_resolution * (1.0 + 1e-9),
          "make_pair: mesh diameter bound violated");

  return std::make_shared<const LinkingPair>(std::move(p));
}

AdmissibleMap::AdmissibleMap(PairPtr pair, std::vector<Vector> node_images,
                             Generator generator)
    : pair_(std::move(pair)), node_images_(std::move(node_images)),
      generator_(std::move(generator)) {
  require(pair_ != nullptr, "admissible map: null pair");
  const Mesh& mesh = pair_->mesh;
  require(node_images_.size() == mesh.nodes.size(),
          "admissible map: one image per mesh node required");
  for (const auto& img : node_images_)
    require(img.allFinite() && img.size() == pair_->chart.ambient_dim(),
            "admissible map: node image must be finite and ambient");
  for (int b : mesh.boundary_nodes)
    require((node_images_[b] - pair_->chart.embed(mesh.nodes[b])).norm() == 0.0,
            "admissible map: boundary node not pinned to the identity");
}

AdmissibleMap AdmissibleMap::identity(PairPtr pair) {
  require(pair != nullptr, "admissible map: null pair");
  std::vector<Vector> images;
  images.reserve(pair->mesh.nodes.size());
  for (const auto& node : pair->mesh.nodes)
    images.push_back(pair->chart.embed(node));
  return AdmissibleMap(std::move(pair), std::move(images));
}

Vector AdmissibleMap::image_at(int cell,
                               const std::vector<double>& barycentric) const {
  const auto& c = pair_->mesh.cells[cell];
  require(barycentric.size() == c.size(),
          "admissible map: barycentric size mismatch");
  Vector out = Vector::Zero(pair_->chart.ambient_dim());
  for (size_t i = 0; i < c.size(); ++i)
    out += barycentric[i] * node_images_[c[i]];
  return out;
}

AdmissibleMap AdmissibleMap::with_images(
    std::vector<Vector> node_images) const {
  return AdmissibleMap(pair_, std::move(node_images));
}

AdmissibleMap make_perturbed_identity(PairPtr pair, double amplitude,
                                      std::mt19937_64& rng) {
  require(pair != nullptr, "make_perturbed_identity: null pair");
  require(amplitude >= 0.0, "make_perturbed_identity: negative amplitude");
  const Mesh& mesh = pair->mesh;
  const int n = pair->chart.ambient_dim();
  const int d = mesh.dim;

  double diam = 0.0;
  for (int b : mesh.boundary_nodes)
    for (int b2 : mesh.boundary_nodes)
      diam = std::max(diam, (mesh.nodes[b] - mesh.nodes[b2]).norm());
  if (diam == 0.0) diam = 1.0;

  // a few random plane waves, damped to zero at the boundary nodes
  constexpr int kWaves = 3;
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> unif(0.0, 2.0 * M_PI);
  std::vector<Vector> freq(kWaves), dir(kWaves);
  std::vector<double> phase(kWaves);
  for (int k = 0; k < kWaves; ++k) {
    freq[k] = Vector(d);
    for (int i = 0; i < d; ++i) freq[k](i) = gauss(rng) * 4.0 / diam;
    Vector u(n);
    for (int i = 0; i < n; ++i) u(i) = gauss(rng);
    dir[k] = u.norm() > 0.0 ? Vector(u / u.norm()) : Vector(Vector::Unit(n, 0));
    phase[k] = unif(rng);
  }

  // exact distance to the meshed relative boundary, so the continuous map is
  // the identity on all of it (not only at the boundary nodes)
  std::vector<std::vector<Vector>> facets;
  for (const auto& face : boundary_facets(mesh)) {
    std::vector<Vector> verts;
    verts.reserve(face.size());
    for (int id : face) verts.push_back(mesh.nodes[id]);
    facets.push_back(std::move(verts));
  }
  const Chart chart = pair->chart;
  auto displacement = [=](const Vector& local) {
    double bdist = std::numeric_limits<double>::infinity();
    for (const auto& verts : facets)
      bdist = std::min(bdist, point_simplex_distance(local, verts));
    const double w = std::min(1.0, bdist / (diam / 6.0));
    if (w == 0.0) return Vector(Vector::Zero(n));
    Vector v = Vector::Zero(n);
    for (int k = 0; k < kWaves; ++k)
      v += std::sin(freq[k].dot(local) + phase[k]) * dir[k];
    return Vector(w * v);
  };

  double peak = 0.0;
  for (const auto& node : mesh.nodes)
    peak = std::max(peak, displacement(node).norm());
  const double scale = peak > 0.0 ? amplitude / peak : 0.0;

  AdmissibleMap::Generator generator = [=](const Vector& x) {
    return Vector(x + scale * displacement(chart.to_local(x)));
  };
  std::vector<Vector> images;
  images.reserve(mesh.nodes.size());
  for (const auto& node : mesh.nodes)
    images.push_back(generator(chart.embed(node)));
  return AdmissibleMap(std::move(pair), std::move(images),
                       std::move(generator));
}

DegreeResult brouwer_degree(const Mesh& mesh, const std::vector<Vector>& values,
                            const Vector& y, double eta_deg) {
  const int d = mesh.dim;
  require(d >= 1 && d <= 3, "brouwer_degree: mesh dimension must be 1..3");
  require(values.size() == mesh.nodes.size(),
          "brouwer_degree: one value per node required");
  require(y.size() == d, "brouwer_degree: target dimension mismatch");
  for (const auto& v : values)
    require(v.size() == d && v.allFinite(),
            "brouwer_degree: values must be finite R^d vectors");

  double margin = std::numeric_limits<double>::infinity();
  for (const auto& face : boundary_facets(mesh)) {
    std::vector<Vector> verts;
    verts.reserve(face.size());
    for (int id : face) verts.push_back(values[id]);
    margin = std::min(margin, point_simplex_distance(y, verts));
  }
  if (!(margin >= eta_deg))
    throw std::domain_error(
        "brouwer_degree: degree undefined near boundary zero (margin " +
        std::to_string(margin) + " < " + std::to_string(eta_deg) + ")");

  constexpr double kBand = 1e-10;
  for (int attempt = 0; attempt < 12; ++attempt) {
    Vector target = y;
    if (attempt > 0) {
      // irrational-scaled magnitudes so retries cannot keep hitting the
      // node lattice of a structured mesh
      const double mag =
          (margin / 7.0) * std::pow(0.6180339887498949, attempt) *
          0.9182736455463728;
      target += mag * perturbation_direction(d, attempt);
    }

    DegreeResult out;
    out.boundary_margin = margin;
    bool ambiguous = false;
    for (size_t k = 0; k < mesh.cells.size() && !ambiguous; ++k) {
      const auto& cell = mesh.cells[k];
      Matrix df(d, d), dv(d, d);
      for (int j = 0; j < d; ++j) {
        df.col(j) = values[cell[j + 1]] - values[cell[0]];
        dv.col(j) = mesh.nodes[cell[j + 1]] - mesh.nodes[cell[0]];
      }
      const double det = df.determinant();
      double scale = 1.0;
      for (int j = 0; j < d; ++j) scale = std::max(scale, df.col(j).norm());
      if (std::abs(det) <= 1e-13 * std::pow(scale, d)) {
        // Flat image cell: only a problem if the target could lie on it.
        std::vector<Vector> verts;
        for (int id : cell) verts.push_back(values[id]);
        verts.resize(std::min<size_t>(verts.size(), 3));
        if (point_simplex_distance(target, verts) <= 1e-6 * scale)
          ambiguous = true;
        continue;
      }
      const Vector mu = df.partialPivLu().solve(target - values[cell[0]]);
      std::vector<double> lambda(d + 1);
      lambda[0] = 1.0;
      for (int j = 0; j < d; ++j) {
        lambda[j + 1] = mu(j);
        lambda[0] -= mu(j);
      }
      bool outside = false, boundary_hit = false;
      for (double l : lambda) {
        if (l < -kBand) outside = true;
        else if (l <= kBand) boundary_hit = true;
      }
      if (outside) continue;
      if (boundary_hit) {
        ambiguous = true;
        continue;
      }
      PreimageCell pre;
      pre.cell = static_cast<int>(k);
      pre.barycentric = lambda;
      pre.sign = (det > 0.0 ? 1 : -1) * (dv.determinant() > 0.0 ? 1 : -1);
      out.degree += pre.sign;
      out.certificate.push_back(std::move(pre));
    }
    if (!ambiguous) return out;
  }
  throw std::runtime_error(
      "brouwer_degree: preimage kept landing on cell boundaries");
}

namespace {

// In-cell zoom for dist(gamma(.), S) in barycentric coordinates. When the
// map carries its continuous generator, refinement re-samples it; otherwise
// the PL interpolant is the map.
IntersectionResult zoom_cell(const AdmissibleMap& gamma,
                             const LinkingPair& pair, int cell) {
  const auto& c = pair.mesh.cells[cell];
  const int k = static_cast<int>(c.size());
  const auto& gen = gamma.generator();
  auto image_at = [&](const Vector& lam) {
    if (gen) {
      Vector local = Vector::Zero(pair.mesh.dim);
      for (int i = 0; i < k; ++i) local += lam(i) * pair.mesh.nodes[c[i]];
      return gen(pair.chart.embed(local));
    }
    Vector img = Vector::Zero(pair.chart.ambient_dim());
    for (int i = 0; i < k; ++i) img += lam(i) * gamma.node_images()[c[i]];
    return img;
  };
  auto fn = [&](const Vector& lam) { return pair.S->distance(image_at(lam)); };
  SimplexOpt opt;
  opt.rounds = 70;
  opt.subdiv = 4;
  const SimplexOptResult r =
      optimize_over_simplex(fn, Matrix::Identity(k, k), opt);

  IntersectionResult res;
  res.cell = cell;
  res.residual = r.value;
  Vector local = Vector::Zero(pair.mesh.dim);
  for (int i = 0; i < k; ++i) local += r.point(i) * pair.mesh.nodes[c[i]];
  res.domain_point = pair.chart.embed(local);
  res.image = image_at(r.point);
  return res;
}

}  // namespace

IntersectionResult find_intersection(const AdmissibleMap& gamma,
                                     const LinkingPair& pair, double tau_link,
                                     int max_refine) {
  require(gamma.pair().get() == &pair ||
              gamma.node_images().size() == pair.mesh.nodes.size(),
          "find_intersection: map does not match the pair mesh");
  const size_t ncells = pair.mesh.cells.size();
  std::vector<double> node_dist(pair.mesh.nodes.size());
  for (size_t i = 0; i < node_dist.size(); ++i)
    node_dist[i] = pair.S->distance(gamma.node_images()[i]);

  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(ncells);
  for (size_t k = 0; k < ncells; ++k) {
    double best = std::numeric_limits<double>::infinity();
    for (int id : pair.mesh.cells[k]) best = std::min(best, node_dist[id]);
    ranked.emplace_back(best, static_cast<int>(k));
  }
  std::sort(ranked.begin(), ranked.end());

  IntersectionResult best;
  best.residual = std::numeric_limits<double>::infinity();
  size_t budget = std::max<size_t>(8, static_cast<size_t>(max_refine));
  for (int stage = 0; stage < 3; ++stage) {
    const size_t limit = std::min(ncells, budget);
    for (size_t r = 0; r < limit; ++r) {
      const IntersectionResult cand = zoom_cell(gamma, pair, ranked[r].second);
      if (cand.residual < best.residual) best = cand;
      if (best.residual <= tau_link) return best;
    }
    budget *= 8;
  }
  std::ostringstream msg;
  msg << "find_intersection: residual " << best.residual
      << " above tolerance " << tau_link
      << " after refinement (inadmissible map or insufficient resolution?)";
  throw std::runtime_error(msg.str());
}

double chi_beta(double beta, double rho, double x) {
  require(beta > 0.0, "chi_beta: beta must be positive");
  require(rho > 0.0, "chi_beta: rho must be positive");
  if (x <= 0.0) return 0.0;
  if (x >= rho / beta) return 1.0;
  return beta * x / rho;
}

namespace {

struct Homotopy {
  Vector target;
  // node values of H_t for all nodes at once
  std::function<std::vector<Vector>(double)> values;
};

Homotopy build_homotopy(const AdmissibleMap& gamma, const LinkingPair& pair,
                        double beta) {
  const Mesh& mesh = pair.mesh;
  const Decomposition& dec = pair.decomp;
  const int d = mesh.dim;
  Homotopy h;
  switch (pair.kind) {
    case PairKind::saddle: {
      h.target = Vector::Zero(d);
      const Matrix b2t = dec.basis2().transpose();
      std::vector<Vector> gcoord(mesh.nodes.size());
      for (size_t i = 0; i < mesh.nodes.size(); ++i)
        gcoord[i] = b2t * gamma.node_images()[i];
      h.values = [&mesh, gcoord](double t) {
        std::vector<Vector> out(mesh.nodes.size());
        for (size_t i = 0; i < mesh.nodes.size(); ++i)
          out[i] = t * gcoord[i] + (1.0 - t) * mesh.nodes[i];
        return out;
      };
      return h;
    }
    case PairKind::mp_cylinder: {
      h.target = Vector::Zero(d);
      const Matrix b2t = dec.basis2().transpose();
      const double rho = pair.params.rho;
      std::vector<double> p1n(mesh.nodes.size());
      std::vector<Vector> p2c(mesh.nodes.size());
      for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vector& g = gamma.node_images()[i];
        const Vector p1full = dec.project(Projector::P1, g) +
                              dec.project(Projector::Pe, g);
        p1n[i] = p1full.norm();
        p2c[i] = b2t * g;
      }
      h.values = [&mesh, p1n, p2c, rho, d](double t) {
        std::vector<Vector> out(mesh.nodes.size());
        for (size_t i = 0; i < mesh.nodes.size(); ++i) {
          Vector v(d);
          v(0) = t * p1n[i] - rho + (1.0 - t) * mesh.nodes[i](0);
          v.segment(1, d - 1) = t * p2c[i] +
                                (1.0 - t) * mesh.nodes[i].segment(1, d - 1);
          out[i] = v;
        }
        return out;
      };
      return h;
    }
    case PairKind::silva: {
      h.target = Vector::Zero(d);
      h.target(d - 1) = pair.params.rho;
      const double rho = pair.params.rho;
      std::vector<Vector> test_local(mesh.nodes.size());
      for (size_t i = 0; i < mesh.nodes.size(); ++i) {
        const Vector& g = gamma.node_images()[i];
        const Vector p1g = dec.project(Projector::P1, g);
        const double chi = chi_beta(beta, rho, dec.e_coefficient(g));
        const Vector mapped = p1g + chi * (g - p1g).norm() * dec.e();
        test_local[i] = pair.chart.to_local(mapped);
      }
      h.values = [&mesh, test_local](double t) {
        std::vector<Vector> out(mesh.nodes.size());
        for (size_t i = 0; i < mesh.nodes.size(); ++i)
          out[i] = (1.0 - t) * mesh.nodes[i] + t * test_local[i];
        return out;
      };
      return h;
    }
    case PairKind::mp_path:
      throw std::invalid_argument(
          "verify_linking: mp_path is not degree-verified (use "
          "find_intersection)");
  }
  throw std::logic_error("build_homotopy: unknown pair kind");
}

}  // namespace

LinkingReport verify_linking(const AdmissibleMap& gamma,
                             const LinkingPair& pair, double beta,
                             int t_samples, double eta_deg) {
  require(t_samples >= 2, "verify_linking: need at least 2 homotopy samples");
  const Homotopy h = build_homotopy(gamma, pair, beta);

  LinkingReport report;
  auto evaluate = [&](double t) -> bool {
    HomotopyStep step;
    step.t = t;
    try {
      const DegreeResult deg = brouwer_degree(pair.mesh, h.values(t), h.target,
                                              eta_deg);
      step.degree = deg.degree;
      step.margin = deg.boundary_margin;
      report.steps.push_back(step);
      return true;
    } catch (const std::domain_error& err) {
      report.message = std::string("inconclusive at t=") + std::to_string(t) +
                       ": " + err.what() + " (refine mesh)";
      return false;
    }
  };

  for (int i = 0; i < t_samples; ++i) {
    const double t = static_cast<double>(i) / (t_samples - 1);
    if (!evaluate(t)) return report;
  }

  // Bisect near small margins so degree constancy is sampled densely where
  // the homotopy gets tight.
  for (int level = 0; level < 4; ++level) {
    std::sort(report.steps.begin(), report.steps.end(),
              [](const HomotopyStep& a, const HomotopyStep& b) {
                return a.t < b.t;
              });
    std::vector<double> to_add;
    for (size_t i = 0; i + 1 < report.steps.size(); ++i) {
      const auto& a = report.steps[i];
      const auto& b = report.steps[i + 1];
      const bool tight = std::min(a.margin, b.margin) < 10.0 * eta_deg;
      if ((tight || a.degree != b.degree) && b.t - a.t > 1e-3)
        to_add.push_back(0.5 * (a.t + b.t));
    }
    if (to_add.empty()) break;
    for (double t : to_add)
      if (!evaluate(t)) return report;
  }
  std::sort(report.steps.begin(), report.steps.end(),
            [](const HomotopyStep& a, const HomotopyStep& b) {
              return a.t < b.t;
            });

  if (report.steps.front().degree != 1)
    throw std::logic_error(
        "verify_linking: identity degree at t=0 is not 1 (internal "
        "inconsistency)");

  report.conclusive = true;
  report.linked = true;
  for (const auto& s : report.steps)
    if (s.degree != 1) {
      report.linked = false;
      report.conclusive = false;
      report.message = "degree changed along the homotopy at t=" +
                       std::to_string(s.t) + " (refine mesh)";
      return report;
    }

  report.witness = find_intersection(gamma, pair);
  return report;
}

}  // namespace cpt
