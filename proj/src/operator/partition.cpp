#include <cmath>
#include <limits>
#include <numbers>

#include "anderson/error.hpp"
#include "anderson/harmonic.hpp"
#include "anderson/operator.hpp"

namespace anderson {

std::pair<double, double> bracket_lambda(const BracketParams& p, double lambda) {
  if (!(p.theta > 0.0)) throw ParameterError("bracket_lambda needs theta > 0");
  if (!(p.s > 0.0 && p.s < 1.0)) throw ParameterError("bracket_lambda needs s in (0, 1)");
  if (p.w_sup < 0.0 || p.z_norm < 0.0 || p.c_ip < 0.0) throw ParameterError("bracket_lambda norms must be nonnegative");
  if (!std::isfinite(lambda) || !std::isfinite(p.theta) || !std::isfinite(p.w_sup) || !std::isfinite(p.z_norm) ||
      !std::isfinite(p.c_ip))
    throw ParameterError("bracket_lambda inputs must be finite");
  const double q = p.s / (1.0 - p.s);
  const double tail = std::pow(p.c_ip, 2.0 / (1.0 - p.s)) * std::pow(p.z_norm, 1.0 / (1.0 - p.s));
  auto a_pm = [&](double sign) {
    const double ratio = p.theta / (1.0 + sign * p.theta);
    return p.theta + std::pow(ratio, -q) * tail * std::exp((2.0 + sign * 2.0 * q) * p.w_sup);
  };
  const double upper = (1.0 + p.theta) * std::exp(4.0 * p.w_sup) * (lambda + a_pm(1.0));
  double lower;
  if (p.theta == 1.0) lower = 0.0;
  else if (p.theta > 1.0) lower = -std::numeric_limits<double>::infinity();
  else lower = (1.0 - p.theta) * std::exp(-4.0 * p.w_sup) * (lambda - a_pm(-1.0));
  return {lower, upper};
}

namespace {

// One-dimensional profiles phi_k on nodes 0..cells with sum_k phi_k^2 = 1.
std::vector<std::vector<double>> axis_profiles(int cells, double h, double tile_L, double l, int tiles) {
  std::vector<std::vector<double>> phi(tiles, std::vector<double>(cells + 1, 0.0));
  for (int i = 0; i <= cells; ++i) {
    const double t = i * h;
    int k = static_cast<int>(std::floor(t / tile_L + 0.5));  // nearest tile boundary
    k = std::clamp(k, 0, tiles);
    const double tk = k * tile_L;
    if (k >= 1 && k < tiles && std::abs(t - tk) < l) {
      const double theta = 0.5 * std::numbers::pi * smooth_step((t - tk + l) / (2.0 * l));
      phi[k - 1][i] = std::cos(theta);
      phi[k][i] = std::sin(theta);
    } else {
      const int owner = std::clamp(static_cast<int>(std::floor(t / tile_L)), 0, tiles - 1);
      phi[owner][i] = 1.0;
    }
  }
  return phi;
}

}  // namespace

ImsPartition ims_partition(const Grid& grid, const Box& box, double tile_L, double overlap_l) {
  validate_box(grid, box);
  if (!(overlap_l > 0.0) || !(tile_L > 2.0 * overlap_l)) throw GeometryError("IMS partition needs tile_L > 2 l > 0");
  const int d = grid.dim();
  const double h = grid.spacing();
  std::array<int, 3> tiles{1, 1, 1};
  std::array<std::vector<std::vector<double>>, 3> prof;
  for (int a = 0; a < d; ++a) {
    const double side = box.cells(a) * h;
    const double r = side / tile_L;
    tiles[a] = static_cast<int>(std::lround(r));
    if (tiles[a] < 1 || std::abs(r - tiles[a]) > 1e-9 * std::max(1.0, r))
      throw GeometryError("box side is not a multiple of the tile length");
    if (tiles[a] > 1 && overlap_l < h) throw GeometryError("overlap shorter than the lattice spacing");
    prof[a] = axis_profiles(box.cells(a), h, tile_L, overlap_l, tiles[a]);
  }

  ImsPartition part;
  part.tile_L = tile_L;
  part.overlap = overlap_l;
  std::array<int, 3> k{0, 0, 0};
  for (;;) {
    Field eta(grid);
    Box tile;
    for (int a = 0; a < d; ++a) {
      tile.lo[a] = box.hi[a];
      tile.hi[a] = box.lo[a];
      for (int i = 0; i <= box.cells(a); ++i)
        if (prof[a][k[a]][i] != 0.0) {
          // Support plus the adjacent zero nodes, clipped to the box.
          tile.lo[a] = std::min(tile.lo[a], std::max(box.lo[a], box.lo[a] + i - 1));
          tile.hi[a] = std::max(tile.hi[a], std::min(box.hi[a], box.lo[a] + i + 1));
        }
    }
    std::array<int, 3> m = box.lo;
    for (;;) {
      double v = 1.0;
      for (int a = 0; a < d; ++a) v *= prof[a][k[a]][m[a] - box.lo[a]];
      eta[grid.index(m)] = v;
      int a = 0;
      for (; a < d; ++a) {
        if (++m[a] <= box.hi[a]) break;
        m[a] = box.lo[a];
      }
      if (a == d) break;
    }
    part.eta.push_back(std::move(eta));
    part.tiles.push_back(tile);
    int a = 0;
    for (; a < d; ++a) {
      if (++k[a] < tiles[a]) break;
      k[a] = 0;
    }
    if (a == d) break;
  }

  double worst = 0.0;
  std::array<int, 3> m = box.lo;
  for (;;) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) {
      std::array<int, 3> y = m;
      ++y[a];
      if (!box.contains(y, d)) continue;
      for (const Field& e : part.eta) {
        const double g = (e[grid.index(y)] - e[grid.index(m)]) / h;
        s += g * g;
      }
    }
    worst = std::max(worst, s);
    int a = 0;
    for (; a < d; ++a) {
      if (++m[a] <= box.hi[a]) break;
      m[a] = box.lo[a];
    }
    if (a == d) break;
  }
  part.K = worst * overlap_l * overlap_l;
  return part;
}

double ims_penalty(const AssembledForm& form, const ImsPartition& partition) {
  const Grid& g = form.grid;
  Eigen::VectorXd acc = Eigen::VectorXd::Zero(form.size());
  for (const auto& e : form.edges) {
    double s = 0.0;
    for (const Field& eta : partition.eta) {
      const double diff = eta[g.index(form.nodes[e.i])] - eta[g.index(form.nodes[e.j])];
      s += diff * diff;
    }
    acc[e.i] += 0.5 * e.w * s;
    acc[e.j] += 0.5 * e.w * s;
  }
  return (acc.array() / form.mass.array()).maxCoeff();
}

}  // namespace anderson
