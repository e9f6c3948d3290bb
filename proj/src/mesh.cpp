#include "cpt/mesh.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

namespace cpt {

namespace {

void require(bool cond, const std::string& msg) {
  if (!cond) throw std::invalid_argument(msg);
}

// Flip two vertices if the cell is negatively oriented; degenerate cells are
// rejected.
void orient_positively(const std::vector<Vector>& nodes,
                       std::vector<int>& cell) {
  const int d = static_cast<int>(cell.size()) - 1;
  Matrix edges(d, d);
  for (int j = 0; j < d; ++j)
    edges.col(j) = nodes[cell[j + 1]] - nodes[cell[0]];
  const double det = edges.determinant();
  if (det == 0.0)
    throw std::logic_error("mesh: degenerate cell encountered");
  if (det < 0.0) std::swap(cell[d], cell[d - 1]);
}

}  // namespace

bool Mesh::is_boundary(int node) const {
  return std::binary_search(boundary_nodes.begin(), boundary_nodes.end(), node);
}

double Mesh::cell_diameter(int cell) const {
  const auto& c = cells[cell];
  double diam = 0.0;
  for (size_t i = 0; i < c.size(); ++i)
    for (size_t j = i + 1; j < c.size(); ++j)
      diam = std::max(diam, (nodes[c[i]] - nodes[c[j]]).norm());
  return diam;
}

double Mesh::max_cell_diameter() const {
  double diam = 0.0;
  for (size_t k = 0; k < cells.size(); ++k)
    diam = std::max(diam, cell_diameter(static_cast<int>(k)));
  return diam;
}

std::vector<std::vector<int>> Mesh::adjacency() const {
  std::vector<std::set<int>> adj(nodes.size());
  for (const auto& c : cells)
    for (int a : c)
      for (int b : c)
        if (a != b) adj[a].insert(b);
  std::vector<std::vector<int>> out(nodes.size());
  for (size_t i = 0; i < adj.size(); ++i)
    out[i].assign(adj[i].begin(), adj[i].end());
  return out;
}

Mesh make_segment_mesh(double a, double b, int cells) {
  require(cells >= 1, "segment mesh: need at least one cell");
  require(b > a, "segment mesh: empty interval");
  Mesh m;
  m.dim = 1;
  for (int i = 0; i <= cells; ++i) {
    Vector p(1);
    p(0) = a + (b - a) * i / cells;
    m.nodes.push_back(p);
  }
  for (int i = 0; i < cells; ++i) m.cells.push_back({i, i + 1});
  m.boundary_nodes = {0, cells};
  return m;
}

Mesh make_box_mesh(const Vector& lo, const Vector& hi,
                   const std::vector<int>& per_axis) {
  const int d = static_cast<int>(lo.size());
  require(d >= 1 && d <= 3, "box mesh: dimension must be 1..3");
  require(static_cast<int>(per_axis.size()) == d, "box mesh: bad subdivisions");
  for (int i = 0; i < d; ++i) {
    require(per_axis[i] >= 1, "box mesh: need >= 1 cell per axis");
    require(hi(i) > lo(i), "box mesh: empty extent");
  }
  Mesh m;
  m.dim = d;
  std::vector<int> counts(d);
  for (int i = 0; i < d; ++i) counts[i] = per_axis[i] + 1;
  auto node_id = [&](const std::vector<int>& idx) {
    int id = 0;
    for (int i = d - 1; i >= 0; --i) id = id * counts[i] + idx[i];
    return id;
  };
  std::vector<int> idx(d, 0);
  const int total = [&] {
    int t = 1;
    for (int i = 0; i < d; ++i) t *= counts[i];
    return t;
  }();
  m.nodes.resize(total);
  std::set<int> boundary;
  for (int flat = 0; flat < total; ++flat) {
    int rest = flat;
    bool on_boundary = false;
    Vector p(d);
    for (int i = 0; i < d; ++i) {
      idx[i] = rest % counts[i];
      rest /= counts[i];
      p(i) = lo(i) + (hi(i) - lo(i)) * idx[i] / per_axis[i];
      on_boundary = on_boundary || idx[i] == 0 || idx[i] == per_axis[i];
    }
    m.nodes[flat] = p;
    if (on_boundary) boundary.insert(flat);
  }
  m.boundary_nodes.assign(boundary.begin(), boundary.end());

  // Freudenthal triangulation of each grid cell: one simplex per axis
  // permutation (d! of them), consistent across shared faces.
  std::vector<std::vector<int>> perms;
  std::vector<int> perm(d);
  for (int i = 0; i < d; ++i) perm[i] = i;
  do {
    perms.push_back(perm);
  } while (std::next_permutation(perm.begin(), perm.end()));

  std::vector<int> base(d, 0);
  std::function<void(int)> recurse = [&](int axis) {
    if (axis == d) {
      for (const auto& pm : perms) {
        std::vector<int> cell;
        std::vector<int> corner = base;
        cell.push_back(node_id(corner));
        for (int step = 0; step < d; ++step) {
          corner[pm[step]] += 1;
          cell.push_back(node_id(corner));
        }
        orient_positively(m.nodes, cell);
        m.cells.push_back(std::move(cell));
      }
      return;
    }
    for (base[axis] = 0; base[axis] < per_axis[axis]; ++base[axis]) recurse(axis + 1);
    base[axis] = 0;
  };
  recurse(0);
  return m;
}

namespace {

Mesh make_disk_mesh(double radius, int resolution) {
  // Polar mesh: `rings` concentric circles with a fixed angular count, chosen
  // so cells stay below the diameter bound (2 R / resolution).
  Mesh m;
  m.dim = 2;
  const int rings = resolution;
  const int K = std::max(8, static_cast<int>(std::ceil(3.7 * resolution)));
  Vector center = Vector::Zero(2);
  m.nodes.push_back(center);
  auto ring_node = [&](int ring, int k) {
    return 1 + (ring - 1) * K + (k % K);
  };
  for (int ring = 1; ring <= rings; ++ring) {
    const double r = radius * ring / rings;
    for (int k = 0; k < K; ++k) {
      const double th = 2.0 * M_PI * k / K;
      Vector p(2);
      p << r * std::cos(th), r * std::sin(th);
      m.nodes.push_back(p);
    }
  }
  for (int k = 0; k < K; ++k) {
    std::vector<int> cell{0, ring_node(1, k), ring_node(1, k + 1)};
    orient_positively(m.nodes, cell);
    m.cells.push_back(std::move(cell));
  }
  for (int ring = 1; ring < rings; ++ring) {
    for (int k = 0; k < K; ++k) {
      const int a = ring_node(ring, k), b = ring_node(ring, k + 1);
      const int c = ring_node(ring + 1, k), d2 = ring_node(ring + 1, k + 1);
      std::vector<int> c1{a, c, d2};
      std::vector<int> c2{a, d2, b};
      orient_positively(m.nodes, c1);
      orient_positively(m.nodes, c2);
      m.cells.push_back(std::move(c1));
      m.cells.push_back(std::move(c2));
    }
  }
  for (int k = 0; k < K; ++k) m.boundary_nodes.push_back(ring_node(rings, k));
  std::sort(m.boundary_nodes.begin(), m.boundary_nodes.end());
  return m;
}

Mesh make_ball3_mesh(double radius, int resolution) {
  // Box grid radially remapped so the cube boundary lands on the sphere.
  // The remap can stretch cells near the diagonals, so the grid is refined
  // until the diameter bound holds.
  for (double factor : {1.8, 2.4, 3.2}) {
    const int g = std::max(2, static_cast<int>(std::ceil(factor * resolution)));
    Vector lo = Vector::Constant(3, -1.0), hi = Vector::Constant(3, 1.0);
    Mesh m = make_box_mesh(lo, hi, {g, g, g});
    for (auto& p : m.nodes) {
      const double linf = p.cwiseAbs().maxCoeff();
      const double l2 = p.norm();
      if (l2 > 0.0) p *= radius * linf / l2;
    }
    for (auto& cell : m.cells) orient_positively(m.nodes, cell);
    if (m.max_cell_diameter() <= 2.0 * radius / resolution) return m;
  }
  throw std::logic_error("ball mesh: diameter bound not reached in 3-D");
}

// Dompierre et al. prism split: rotate the smallest global index to corner 0,
// then pick the diagonal pattern from the remaining indices.
void split_prism(const std::vector<int>& prism, const std::vector<Vector>& nodes,
                 std::vector<std::vector<int>>& cells) {
  // prism = (b0, b1, b2, t0, t1, t2), ti above bi
  std::array<int, 6> v{prism[0], prism[1], prism[2],
                       prism[3], prism[4], prism[5]};
  auto rotate = [&] {
    v = {v[1], v[2], v[0], v[4], v[5], v[3]};
  };
  auto flip = [&] {
    v = {v[3], v[5], v[4], v[0], v[2], v[1]};
  };
  int min_pos = 0;
  for (int i = 1; i < 6; ++i)
    if (v[i] < v[min_pos]) min_pos = i;
  if (min_pos >= 3) flip();
  min_pos = 0;
  for (int i = 1; i < 3; ++i)
    if (v[i] < v[min_pos]) min_pos = i;
  for (int r = 0; r < min_pos; ++r) rotate();

  std::vector<std::vector<int>> tets;
  if (std::min(v[1], v[5]) < std::min(v[2], v[4])) {
    tets = {{v[0], v[1], v[2], v[5]},
            {v[0], v[1], v[5], v[4]},
            {v[0], v[4], v[5], v[3]}};
  } else {
    tets = {{v[0], v[1], v[2], v[4]},
            {v[0], v[4], v[2], v[5]},
            {v[0], v[4], v[5], v[3]}};
  }
  for (auto& t : tets) {
    orient_positively(nodes, t);
    cells.push_back(std::move(t));
  }
}

}  // namespace

Mesh make_ball_mesh(int dim, double radius, int resolution) {
  require(radius > 0.0, "ball mesh: radius must be positive");
  require(resolution >= 1, "ball mesh: resolution must be >= 1");
  require(dim >= 1 && dim <= 3, "ball mesh: dimension must be 1..3");
  if (dim == 1) return make_segment_mesh(-radius, radius, 2 * resolution);
  if (dim == 2) return make_disk_mesh(radius, resolution);
  return make_ball3_mesh(radius, resolution);
}

Mesh make_cylinder_mesh(double s_max, int d2, double r2, int resolution) {
  require(s_max > 0.0 && r2 > 0.0, "cylinder mesh: bad extents");
  require(d2 >= 1 && d2 <= 2, "cylinder mesh: fiber dimension must be 1 or 2");
  require(resolution >= 2, "cylinder mesh: resolution must be >= 2");
  const double diam = std::hypot(s_max, 2.0 * r2);
  const double target = diam / resolution;
  if (d2 == 1) {
    const int ms = std::max(
        2, static_cast<int>(std::ceil(std::sqrt(2.0) * s_max / target)));
    const int mu = std::max(
        2, static_cast<int>(std::ceil(std::sqrt(2.0) * 2.0 * r2 / target)));
    Vector lo(2), hi(2);
    lo << 0.0, -r2;
    hi << s_max, r2;
    return make_box_mesh(lo, hi, {ms, mu});
  }

  // d2 == 2: stack disk layers along s and split the prisms into tets.
  const int disk_res = std::max(
      2, static_cast<int>(std::ceil(std::sqrt(2.0) * 2.0 * r2 / target)));
  const Mesh disk = make_disk_mesh(r2, disk_res);
  const int layers = std::max(
      1, static_cast<int>(std::ceil(std::sqrt(2.0) * s_max / target)));
  const int dn = static_cast<int>(disk.nodes.size());

  Mesh m;
  m.dim = 3;
  for (int l = 0; l <= layers; ++l) {
    const double s = s_max * l / layers;
    for (const auto& q : disk.nodes) {
      Vector p(3);
      p << s, q(0), q(1);
      m.nodes.push_back(p);
    }
  }
  for (int l = 0; l < layers; ++l) {
    for (const auto& tri : disk.cells) {
      std::vector<int> prism{l * dn + tri[0],       l * dn + tri[1],
                             l * dn + tri[2],       (l + 1) * dn + tri[0],
                             (l + 1) * dn + tri[1], (l + 1) * dn + tri[2]};
      split_prism(prism, m.nodes, m.cells);
    }
  }
  std::set<int> boundary;
  for (int i = 0; i < dn; ++i) {
    boundary.insert(i);                 // s = 0
    boundary.insert(layers * dn + i);   // s = s_max
  }
  for (int l = 0; l <= layers; ++l)
    for (int b : disk.boundary_nodes) boundary.insert(l * dn + b);
  m.boundary_nodes.assign(boundary.begin(), boundary.end());
  return m;
}

std::vector<std::vector<double>> barycentric_lattice(int d, int subdiv) {
  std::vector<std::vector<double>> out;
  std::vector<int> comp(d + 1, 0);
  std::function<void(int, int)> rec = [&](int pos, int left) {
    if (pos == d) {
      comp[pos] = left;
      std::vector<double> lam(d + 1);
      for (int i = 0; i <= d; ++i)
        lam[i] = static_cast<double>(comp[i]) / subdiv;
      out.push_back(std::move(lam));
      return;
    }
    for (int k = 0; k <= left; ++k) {
      comp[pos] = k;
      rec(pos + 1, left - k);
    }
  };
  rec(0, subdiv);
  return out;
}

NodeSup refined_sup(const std::vector<std::vector<int>>& cells,
                    const std::vector<Vector>& images,
                    const std::function<double(const Vector&)>& phi,
                    int top_cells, int rounds) {
  require(!images.empty(), "refined_sup: no images");
  NodeSup out;
  std::vector<double> node_vals(images.size());
  out.node_max = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < images.size(); ++i) {
    node_vals[i] = phi(images[i]);
    if (node_vals[i] > out.node_max) {
      out.node_max = node_vals[i];
      out.node = static_cast<int>(i);
    }
  }
  out.value = out.node_max;
  out.argmax_image = images[out.node];

  if (cells.empty()) return out;
  std::vector<std::pair<double, int>> ranked;
  ranked.reserve(cells.size());
  for (size_t k = 0; k < cells.size(); ++k) {
    double best = -std::numeric_limits<double>::infinity();
    for (int id : cells[k]) best = std::max(best, node_vals[id]);
    ranked.emplace_back(-best, static_cast<int>(k));
  }
  std::sort(ranked.begin(), ranked.end());
  const size_t limit = std::min<size_t>(cells.size(),
                                        std::max(1, top_cells));
  for (size_t r = 0; r < limit; ++r) {
    const int k = ranked[r].second;
    const auto& cell = cells[k];
    const int nv = static_cast<int>(cell.size());
    auto fn = [&](const Vector& lam) {
      Vector img = Vector::Zero(images[cell[0]].size());
      for (int i = 0; i < nv; ++i) img += lam(i) * images[cell[i]];
      return phi(img);
    };
    SimplexOpt opt;
    opt.maximize = true;
    opt.rounds = rounds;
    const SimplexOptResult res =
        optimize_over_simplex(fn, Matrix::Identity(nv, nv), opt);
    if (res.value > out.value) {
      out.value = res.value;
      out.cell = k;
      out.argmax_barycentric.assign(res.point.data(),
                                    res.point.data() + res.point.size());
      Vector img = Vector::Zero(images[cell[0]].size());
      for (int i = 0; i < nv; ++i) img += res.point(i) * images[cell[i]];
      out.argmax_image = img;
    }
  }
  return out;
}

SimplexOptResult optimize_over_simplex(
    const std::function<double(const Vector&)>& fn, const Matrix& vertices,
    const SimplexOpt& opt) {
  const int d = static_cast<int>(vertices.cols()) - 1;
  const double sign = opt.maximize ? -1.0 : 1.0;
  const auto lattice = barycentric_lattice(d, opt.subdiv);

  // seed pass: rank lattice points, then run a shrink descent from each of
  // the leading basins (the objective may be only piecewise smooth)
  std::vector<std::pair<double, Vector>> seeds;
  for (const auto& lam : lattice) {
    Vector p = Vector::Zero(vertices.rows());
    for (int i = 0; i <= d; ++i) p += lam[i] * vertices.col(i);
    seeds.emplace_back(sign * fn(p), p);
  }
  std::sort(seeds.begin(), seeds.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  const int starts = std::min<int>(3, static_cast<int>(seeds.size()));

  SimplexOptResult best;
  best.value = std::numeric_limits<double>::infinity();
  for (int s = 0; s < starts; ++s) {
    Vector incumbent_pt = seeds[s].second;
    double incumbent = seeds[s].first;
    Matrix verts = vertices;
    for (int round = 0; round < opt.rounds; ++round) {
      for (int i = 0; i <= d; ++i)
        verts.col(i) = incumbent_pt + opt.shrink * (verts.col(i) - incumbent_pt);
      for (const auto& lam : lattice) {
        Vector p = Vector::Zero(verts.rows());
        for (int i = 0; i <= d; ++i) p += lam[i] * verts.col(i);
        const double v = sign * fn(p);
        if (v < incumbent) {
          incumbent = v;
          incumbent_pt = p;
        }
      }
    }
    if (incumbent < best.value) {
      best.value = incumbent;
      best.point = incumbent_pt;
    }
  }
  best.value *= sign;
  return best;
}

}  // namespace cpt
