#include "anderson/experiments.hpp"

#include <cmath>
#include <numbers>

#include "anderson/error.hpp"
#include "anderson/harmonic.hpp"

namespace anderson {

TransformComparison compare_transform(const Field& xi, const Mollifier& mollifier, const Box& box,
                                      const TransformOptions& opts) {
  StochasticPack pack = build_pack_2d(xi, mollifier, -1);
  TransformComparison out;
  out.c_eps = pack.c_eps;
  out.level = opts.level ? *opts.level : select_M(pack, opts.delta_minus, opts.gamma, box);
  const Field W = pack.W_level(out.level);
  out.w_sup = W.max_abs();
  const Field Y = build_Y(pack, CutoffF{}, out.level, true);

  const AssembledForm direct = assemble_direct(pack.xi_eps, pack.c_eps, opts.bc, box);
  const AssembledForm transformed =
      opts.bc == Boundary::neumann ? assemble_transformed(W, Y, opts.bc, box, W) : assemble_transformed(W, Y, opts.bc, box);
  out.direct = eigen_smallest(direct, opts.k).values;
  out.transformed = eigen_smallest(transformed, opts.k).values;
  for (int i = 0; i < opts.k; ++i)
    out.max_rel_diff =
        std::max(out.max_rel_diff, std::abs(out.direct[i] - out.transformed[i]) / std::max(1.0, std::abs(out.direct[i])));
  return out;
}

double renorm_log_rate_2d() { return 1.0 / (2.0 * std::numbers::pi); }

RenormScan renorm_scan(const Grid& grid, const std::vector<double>& epsilons, RenormMethod method, int samples,
                       std::uint64_t seed) {
  RenormScan scan;
  std::vector<double> x, y;
  for (double eps : epsilons) {
    RenormSpec spec{grid.dim(), eps, method, samples, seed};
    scan.epsilon.push_back(eps);
    scan.results.push_back(renorm_constant(spec, grid));
    x.push_back(std::log(1.0 / eps));
    y.push_back(scan.results.back().value);
  }
  scan.fit = stats::linear_fit(x, y);
  return scan;
}

int last_complete_block(const Grid& grid) {
  // The block j reaches |k| = (8/3) 2^j; the cube half-width is n / (2L).
  return static_cast<int>(std::floor(std::log2(3.0 * grid.n() / (16.0 * grid.side()))));
}

LpSlope lp_slope(const std::vector<Field>& samples, double p, int j_min, int j_max) {
  if (samples.empty()) throw ParameterError("lp_slope needs samples");
  const Grid& g = samples.front().grid();
  if (j_max < 0) j_max = last_complete_block(g);
  if (j_min < -1 || j_max - j_min < 2) throw FitError("LP slope needs at least 3 blocks");
  LpSlope out;
  for (int j = j_min; j <= j_max; ++j) out.levels.push_back(j);
  out.mean_log2.assign(out.levels.size(), 0.0);
  for (const Field& f : samples) {
    const std::vector<double> norms = lp_block_norms(f, p);
    for (std::size_t i = 0; i < out.levels.size(); ++i) {
      const std::size_t slot = static_cast<std::size_t>(out.levels[i] + 1);
      if (slot >= norms.size()) throw FitError("requested LP block lies beyond the lattice");
      out.mean_log2[i] += std::log2(norms[slot]) / static_cast<double>(samples.size());
    }
  }
  std::vector<double> x(out.levels.begin(), out.levels.end());
  out.fit = stats::linear_fit(x, out.mean_log2);
  return out;
}

double principal_eigenvalue(const Field& potential, double c, Boundary bc, const Box& box) {
  return eigen_smallest(assemble_direct(potential, c, bc, box), 1).values.front();
}

}  // namespace anderson
