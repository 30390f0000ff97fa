#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "anderson/eigensolve.hpp"
#include "anderson/noise.hpp"
#include "anderson/operator.hpp"
#include "anderson/renorm.hpp"
#include "anderson/stats.hpp"

namespace anderson {

/// Direct operator -Lap - xi_eps + c_eps against the transformed generalized
/// problem built from W = G_N * X and Y_N on the same box.
struct TransformComparison {
  int level = 0;         // N used for W_N (M when selected automatically)
  double w_sup = 0.0;    // ||W_N||_inf on the torus
  double c_eps = 0.0;
  std::vector<double> direct, transformed;
  double max_rel_diff = 0.0;
};

struct TransformOptions {
  Boundary bc = Boundary::dirichlet;
  int k = 5;
  std::optional<int> level;  // absent: select_M
  double delta_minus = 0.3;
  double gamma = 1.0;
};

/// `xi` is raw 2D white noise on the torus; the box must sit inside it.
TransformComparison compare_transform(const Field& xi, const Mollifier& mollifier, const Box& box,
                                      const TransformOptions& opts = {});

struct RenormScan {
  std::vector<double> epsilon;
  std::vector<RenormResult> results;
  stats::LinearFit fit;  // c_eps against log(1/eps)
};

RenormScan renorm_scan(const Grid& grid, const std::vector<double>& epsilons, RenormMethod method, int samples = 256,
                       std::uint64_t seed = 0x7e57);

/// 1/(2 pi): growth rate of the 2D constant in log(1/eps).
double renorm_log_rate_2d();

struct LpSlope {
  std::vector<int> levels;
  std::vector<double> mean_log2;  // sample mean of log2 ||Delta_j f||_{L^p}
  stats::LinearFit fit;
};

/// Last LP block whose annulus lies inside the lattice cube.
int last_complete_block(const Grid& grid);

/// Slope of log2 of the L^p norms of the LP blocks j_min..j_max, averaged over
/// samples. j_max < 0 selects last_complete_block.
LpSlope lp_slope(const std::vector<Field>& samples, double p, int j_min, int j_max);

/// Smallest eigenvalue of -Lap - potential + c on the box.
double principal_eigenvalue(const Field& potential, double c, Boundary bc, const Box& box);

}  // namespace anderson
