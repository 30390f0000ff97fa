#include <cmath>

#include "anderson/error.hpp"
#include "anderson/harmonic.hpp"

namespace anderson {

namespace {

// Calls fn(index, multi-index) for every node of the box.
template <class Fn>
void for_box(const Grid& g, const Box& box, Fn&& fn) {
  const int d = g.dim();
  std::array<int, 3> m = box.lo;
  for (;;) {
    fn(g.index(m), m);
    int a = 0;
    while (a < d) {
      if (++m[a] <= box.hi[a]) break;
      m[a] = box.lo[a];
      ++a;
    }
    if (a == d) return;
  }
}

void check_box(const Grid& g, const Box& box) {
  for (int a = 0; a < g.dim(); ++a)
    if (box.lo[a] < 0 || box.hi[a] >= g.n() || box.hi[a] < box.lo[a])
      throw GeometryError("Hoelder box outside the grid");
}

}  // namespace

double holder_norm(const Field& g, double delta, const Box& box) {
  const Grid& grid = g.grid();
  check_box(grid, box);
  const int d = grid.dim();
  const double h = grid.spacing();
  double sup = 0.0;
  for_box(grid, box, [&](std::size_t i, const std::array<int, 3>&) { sup = std::max(sup, std::abs(g[i])); });

  std::vector<std::array<int, 3>> dirs;
  for (int i = 0; i < d; ++i) {
    std::array<int, 3> e{0, 0, 0};
    e[i] = 1;
    dirs.push_back(e);
    for (int j = i + 1; j < d; ++j)
      for (int s : {1, -1}) {
        std::array<int, 3> v{0, 0, 0};
        v[i] = 1;
        v[j] = s;
        dirs.push_back(v);
      }
  }
  double semi = 0.0;
  for (const auto& dir : dirs) {
    double len1 = 0.0;
    for (int a = 0; a < d; ++a) len1 += dir[a] * dir[a];
    len1 = std::sqrt(len1) * h;
    for (int step = 1; step * len1 <= 1.0 + 1e-12; step *= 2) {
      const double denom = std::pow(step * len1, delta);
      std::array<int, 3> off{dir[0] * step, dir[1] * step, dir[2] * step};
      for_box(grid, box, [&](std::size_t i, const std::array<int, 3>& m) {
        std::array<int, 3> y = m;
        for (int a = 0; a < d; ++a) y[a] += off[a];
        if (!box.contains(y, d)) return;
        semi = std::max(semi, std::abs(g[grid.index(y)] - g[i]) / denom);
      });
    }
  }
  return sup + semi;
}

double holder_norm_exhaustive(const Field& g, double delta, const Box& box) {
  const Grid& grid = g.grid();
  check_box(grid, box);
  const int d = grid.dim();
  const double h = grid.spacing();
  std::vector<std::pair<std::size_t, std::array<int, 3>>> nodes;
  for_box(grid, box, [&](std::size_t i, const std::array<int, 3>& m) { nodes.push_back({i, m}); });
  double sup = 0.0, semi = 0.0;
  for (std::size_t a = 0; a < nodes.size(); ++a) {
    sup = std::max(sup, std::abs(g[nodes[a].first]));
    for (std::size_t b = a + 1; b < nodes.size(); ++b) {
      double r2 = 0.0;
      for (int k = 0; k < d; ++k) {
        const double dx = (nodes[a].second[k] - nodes[b].second[k]) * h;
        r2 += dx * dx;
      }
      if (r2 > 1.0 + 1e-12) continue;
      semi = std::max(semi, std::abs(g[nodes[a].first] - g[nodes[b].first]) / std::pow(r2, delta / 2.0));
    }
  }
  return sup + semi;
}

}  // namespace anderson
