#pragma once

#include <functional>
#include <vector>

#include "cpt/space.hpp"

namespace cpt {

/// Simplicial mesh in local coordinates of dimension dim (1, 2 or 3).
/// Cells are (dim + 1)-tuples of node indices with positive orientation.
struct Mesh {
  int dim = 0;
  std::vector<Vector> nodes;               // local coordinates, size dim each
  std::vector<std::vector<int>> cells;     // dim + 1 indices per cell
  std::vector<int> boundary_nodes;         // sorted node ids on the boundary

  bool is_boundary(int node) const;
  double max_cell_diameter() const;
  double cell_diameter(int cell) const;

  /// node -> neighbouring nodes (shared cell), sorted, without self.
  std::vector<std::vector<int>> adjacency() const;
};

/// Affine chart embedding local mesh coordinates into R^n:
/// x = offset + basis * u with orthonormal basis columns.
struct Chart {
  Matrix basis;
  Vector offset;

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int local_dim() const { return static_cast<int>(basis.cols()); }
  Vector embed(const Vector& local) const { return offset + basis * local; }
  Vector to_local(const Vector& ambient) const {
    return basis.transpose() * (ambient - offset);
  }
};

/// Uniform mesh of the segment [a, b] with `cells` subintervals.
Mesh make_segment_mesh(double a, double b, int cells);

/// Axis-aligned box [lo, hi] split into a uniform grid with `per_axis[i]`
/// subdivisions, triangulated (Freudenthal in 3-D).
Mesh make_box_mesh(const Vector& lo, const Vector& hi,
                   const std::vector<int>& per_axis);

/// Ball of given radius centered at the local origin.
/// dim 1: segment; dim 2: polar rings; dim 3: radially mapped box grid.
/// Boundary nodes lie exactly on the sphere. Max cell diameter is at most
/// (2 radius) / resolution.
Mesh make_ball_mesh(int dim, double radius, int resolution);

/// Product mesh [0, s_max] x ball_{d2}(r2) in coordinates (s, u2).
/// Boundary: s in {0, s_max} or ||u2|| = r2.
Mesh make_cylinder_mesh(double s_max, int d2, double r2, int resolution);

/// Barycentric weight vectors (size d + 1) on the lattice with `subdiv`
/// subdivisions of the reference d-simplex.
std::vector<std::vector<double>> barycentric_lattice(int d, int subdiv);

struct SimplexOpt {
  bool maximize = false;
  int rounds = 48;       // shrink iterations
  int subdiv = 4;        // lattice subdivisions per round
  double shrink = 0.55;  // contraction factor toward the incumbent
};

struct SimplexOptResult {
  Vector point;
  double value = 0.0;
};

/// Derivative-free optimization of fn over the simplex spanned by `vertices`
/// (columns): iterated barycentric lattice sampling, shrinking toward the
/// incumbent. Converges linearly for Lipschitz objectives; enough to polish
/// piecewise-smooth cell maxima to machine precision.
SimplexOptResult optimize_over_simplex(
    const std::function<double(const Vector&)>& fn, const Matrix& vertices,
    const SimplexOpt& opt = {});

struct NodeSup {
  double value = 0.0;     // sup over the PL interpolant (refined)
  double node_max = 0.0;  // max over node images
  int node = -1;          // argmax node
  int cell = -1;          // cell owning the refined argmax (-1: at a node)
  Vector argmax_image;    // image point achieving `value`
  std::vector<double> argmax_barycentric;  // within `cell` when cell >= 0
};

/// Supremum of phi over the piecewise-linear map defined by `images` on the
/// given cells: exact node maximum plus in-cell refinement of the best
/// candidate cells (phi need not be linear along a cell). `rounds` controls
/// the in-cell zoom depth.
NodeSup refined_sup(const std::vector<std::vector<int>>& cells,
                    const std::vector<Vector>& images,
                    const std::function<double(const Vector&)>& phi,
                    int top_cells = 8, int rounds = 60);

}  // namespace cpt
