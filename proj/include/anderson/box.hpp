#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "anderson/grid.hpp"

namespace anderson {

/// Axis-aligned block of lattice nodes lo..hi (inclusive) inside a torus grid.
/// Its physical extent is [h*lo, h*hi] per axis; boxes never wrap around.
struct Box {
  std::array<int, 3> lo{0, 0, 0};
  std::array<int, 3> hi{0, 0, 0};

  /// Box with corner `origin` (in lattice units) and `cells` lattice cells per axis.
  static Box from_cells(const Grid& grid, const std::array<int, 3>& origin, const std::array<int, 3>& cells);
  /// Box of physical side `side` per axis, centered in the torus.
  static Box centered(const Grid& grid, double side);

  int cells(int axis) const { return hi[axis] - lo[axis]; }
  bool contains(const std::array<int, 3>& m, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (m[a] < lo[a] || m[a] > hi[a]) return false;
    return true;
  }
  bool strictly_inside(const std::array<int, 3>& m, int dim) const {
    for (int a = 0; a < dim; ++a)
      if (m[a] <= lo[a] || m[a] >= hi[a]) return false;
    return true;
  }
  std::size_t node_count(int dim) const;
  /// Physical volume of the box.
  double volume(const Grid& grid) const;
  std::string describe(int dim) const;
};

/// Trapezoid-rule node on a face of the box boundary.
struct BoundaryNode {
  std::array<int, 3> m{0, 0, 0};
  int axis = 0;        // the face is normal to this axis
  int sign = 1;        // outward normal is sign * e_axis
  double weight = 0.0; // surface quadrature weight
};

/// Boundary quadrature of the box: every face carries the tensor trapezoid
/// rule, so nodes on edges and corners appear once per adjacent face.
std::vector<BoundaryNode> boundary_quadrature(const Grid& grid, const Box& box);

/// Fraction of the 2^d lattice cells around node m that lie inside the box.
double cell_fraction(const Box& box, const std::array<int, 3>& m, int dim, int skip_axis = -1);

/// Throws GeometryError unless the box has at least one cell per axis and
/// keeps one node of clearance from the torus seam (1 <= lo, hi <= n-2).
void validate_box(const Grid& grid, const Box& box);

}  // namespace anderson
