#include "anderson/box.hpp"

#include <cmath>
#include <sstream>

#include "anderson/error.hpp"

namespace anderson {

Box Box::from_cells(const Grid& grid, const std::array<int, 3>& origin, const std::array<int, 3>& cells) {
  Box b;
  for (int a = 0; a < grid.dim(); ++a) {
    b.lo[a] = origin[a];
    b.hi[a] = origin[a] + cells[a];
  }
  validate_box(grid, b);
  return b;
}

Box Box::centered(const Grid& grid, double side) {
  const double c = side / grid.spacing();
  const int cells = static_cast<int>(std::lround(c));
  if (std::abs(c - cells) > 1e-9 * std::max(1.0, c))
    throw GeometryError("box side is not a multiple of the lattice spacing");
  const int origin = (grid.n() - cells) / 2;
  return from_cells(grid, {origin, origin, origin}, {cells, cells, cells});
}

std::size_t Box::node_count(int dim) const {
  std::size_t s = 1;
  for (int a = 0; a < dim; ++a) s *= static_cast<std::size_t>(hi[a] - lo[a] + 1);
  return s;
}

double Box::volume(const Grid& grid) const {
  double v = 1.0;
  for (int a = 0; a < grid.dim(); ++a) v *= cells(a) * grid.spacing();
  return v;
}

std::string Box::describe(int dim) const {
  std::ostringstream os;
  for (int a = 0; a < dim; ++a) os << (a ? "x" : "") << "[" << lo[a] << "," << hi[a] << "]";
  return os.str();
}

double cell_fraction(const Box& box, const std::array<int, 3>& m, int dim, int skip_axis) {
  double f = 1.0;
  for (int a = 0; a < dim; ++a)
    if (a != skip_axis && (m[a] == box.lo[a] || m[a] == box.hi[a])) f *= 0.5;
  return f;
}

std::vector<BoundaryNode> boundary_quadrature(const Grid& grid, const Box& box) {
  const int d = grid.dim();
  const double area = std::pow(grid.spacing(), d - 1);
  std::vector<BoundaryNode> out;
  for (int axis = 0; axis < d; ++axis)
    for (int sign : {-1, 1}) {
      std::array<int, 3> m = box.lo;
      m[axis] = sign < 0 ? box.lo[axis] : box.hi[axis];
      for (;;) {
        out.push_back({m, axis, sign, area * cell_fraction(box, m, d, axis)});
        int a = 0;
        for (; a < d; ++a) {
          if (a == axis) continue;
          if (++m[a] <= box.hi[a]) break;
          m[a] = box.lo[a];
        }
        if (a == d) break;
      }
    }
  return out;
}

void validate_box(const Grid& grid, const Box& box) {
  for (int a = 0; a < grid.dim(); ++a) {
    if (box.hi[a] <= box.lo[a]) throw GeometryError("box must span at least one cell per axis");
    if (box.lo[a] < 1 || box.hi[a] > grid.n() - 2)
      throw GeometryError("box " + box.describe(grid.dim()) + " reaches the edge of the sampled torus");
  }
}

}  // namespace anderson
