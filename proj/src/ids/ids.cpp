#include "anderson/ids.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "anderson/error.hpp"
#include "anderson/format.hpp"
#include "anderson/noise.hpp"
#include "anderson/parallel.hpp"
#include "anderson/renorm.hpp"
#include "anderson/rng.hpp"
#include "anderson/stats.hpp"

namespace anderson {

namespace {

Grid realization_grid(double L, const IdsOptions& opts) {
  const double cells = 2.0 * L / opts.spacing;
  const int n = static_cast<int>(std::lround(cells));
  if (n < 8 || std::abs(cells - n) > 1e-9 * cells)
    throw ParameterError("torus side 2L must be a multiple of the spacing");
  return Grid(opts.dim, 2.0 * L, n);
}

double subtracted_constant(const Grid& g, double epsilon, const IdsOptions& opts) {
  if (opts.zero_potential || !opts.renormalize) return 0.0;
  return renorm_constant({g.dim(), epsilon}, g).value;
}

Realization realize(const Grid& g, double L, double epsilon, double c, std::uint64_t seed, const IdsOptions& opts) {
  Realization r;
  r.grid = g;
  r.box = Box::centered(g, L);
  r.c_eps = c;
  r.potential = opts.zero_potential ? Field(g) : mollify(sample_white_noise(g, seed), Mollifier{epsilon});
  return r;
}

std::vector<long> count(const Field& potential, double c, Boundary bc, const Box& box, const std::vector<double>& grid,
                        double shift = 0.0) {
  std::vector<double> shifted(grid);
  for (double& l : shifted) l += shift;
  return counting(assemble_direct(potential, c, bc, box), shifted).counts;
}

void add_into(std::vector<long>& acc, const std::vector<long>& v) {
  if (acc.empty()) acc.assign(v.size(), 0);
  for (std::size_t i = 0; i < v.size(); ++i) acc[i] += v[i];
}

}  // namespace

Realization make_realization(double L, double epsilon, std::uint64_t seed, const IdsOptions& opts) {
  const Grid g = realization_grid(L, opts);
  return realize(g, L, epsilon, subtracted_constant(g, epsilon, opts), seed, opts);
}

std::vector<double> bootstrap_se(const std::vector<std::vector<double>>& rows, int resamples, std::uint64_t seed) {
  if (rows.empty()) return {};
  const std::size_t n = rows.size(), m = rows.front().size();
  std::vector<double> sum(m, 0.0), sum_sq(m, 0.0), mean(m);
  rng::Stream stream(seed);
  for (int b = 0; b < resamples; ++b) {
    std::fill(mean.begin(), mean.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& row = rows[stream.below(n)];
      for (std::size_t j = 0; j < m; ++j) mean[j] += row[j];
    }
    for (std::size_t j = 0; j < m; ++j) {
      mean[j] /= static_cast<double>(n);
      sum[j] += mean[j];
      sum_sq[j] += mean[j] * mean[j];
    }
  }
  std::vector<double> se(m);
  const double r = resamples;
  for (std::size_t j = 0; j < m; ++j) se[j] = std::sqrt(std::max(0.0, (sum_sq[j] - sum[j] * sum[j] / r) / (r - 1.0)));
  return se;
}

void summarize(IdsCurve& curve, int resamples, std::uint64_t seed) {
  const std::size_t m = curve.lambda.size();
  std::vector<std::vector<double>> rows;
  for (const auto& c : curve.counts) {
    std::vector<double> row(m);
    for (std::size_t j = 0; j < m; ++j) row[j] = static_cast<double>(c[j]) / curve.volume;
    rows.push_back(std::move(row));
  }
  curve.mean.assign(m, 0.0);
  for (const auto& row : rows)
    for (std::size_t j = 0; j < m; ++j) curve.mean[j] += row[j] / static_cast<double>(rows.size());
  curve.std_error = rows.size() > 1 ? bootstrap_se(rows, resamples, seed) : std::vector<double>(m, 0.0);
}

std::vector<IdsCurve> estimate_ids(Boundary bc, const std::vector<double>& L_list, double epsilon,
                                   const std::vector<std::uint64_t>& seeds, const std::vector<double>& lambda_grid,
                                   const IdsOptions& opts) {
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) throw ParameterError("lambda grid must be sorted");
  if (seeds.empty() || (!opts.zero_potential && seeds.size() < 8))
    throw ParameterError("the IDS estimate needs at least 8 seeds");
  std::vector<IdsCurve> curves;
  for (double L : L_list) {
    if (bc == Boundary::neumann && L != std::round(L)) throw ParameterError("Neumann IDS is restricted to integer L");
    const Grid g = realization_grid(L, opts);
    const double c = subtracted_constant(g, epsilon, opts);
    std::vector<std::vector<long>> counts(seeds.size());
    std::vector<char> ok(seeds.size(), 0);
    parallel_for(seeds.size(), opts.jobs, [&](std::size_t i) {
      try {
        const Realization r = realize(g, L, epsilon, c, seeds[i], opts);
        counts[i] = count(r.potential, r.c_eps, bc, r.box, lambda_grid);
        ok[i] = 1;
      } catch (const Error&) {
      }
    });
    IdsCurve curve;
    curve.bc = bc;
    curve.dim = opts.dim;
    curve.L = L;
    curve.epsilon = epsilon;
    curve.volume = std::pow(L, opts.dim);
    curve.lambda = lambda_grid;
    for (std::size_t i = 0; i < seeds.size(); ++i) {
      if (ok[i]) {
        curve.counts.push_back(std::move(counts[i]));
        curve.seeds.push_back(seeds[i]);
      } else {
        curve.failed.push_back(seeds[i]);
      }
    }
    curve.partial = !curve.failed.empty();
    summarize(curve, opts.bootstrap, rng::key(opts.bootstrap_seed, std::bit_cast<std::uint64_t>(L)));
    curves.push_back(std::move(curve));
  }
  return curves;
}

double weyl_constant(int dim) {
  const double pi = std::numbers::pi;
  const double ball = dim == 1 ? 2.0 : dim == 2 ? pi : 4.0 * pi / 3.0;
  return ball / std::pow(2.0 * pi, dim);
}

WeylFit weyl_fit(const IdsCurve& curve, double min_count) {
  WeylFit f;
  f.dim = curve.dim;
  f.target = weyl_constant(curve.dim);
  const double d = curve.dim;
  // Normal equations for y = a x1 + b x2 without intercept.
  double s11 = 0, s12 = 0, s22 = 0, s1y = 0, s2y = 0;
  for (std::size_t j = 0; j < curve.lambda.size(); ++j) {
    const double l = curve.lambda[j], y = curve.mean[j];
    if (l <= 0.0 || y * curve.volume < min_count) continue;
    const double x1 = std::pow(l, d / 2), x2 = std::pow(l, (d - 1) / 2);
    s11 += x1 * x1;
    s12 += x1 * x2;
    s22 += x2 * x2;
    s1y += x1 * y;
    s2y += x2 * y;
    ++f.points;
    if (l >= f.lambda_top) {
      f.lambda_top = l;
      f.raw_ratio = y / x1;
    }
  }
  if (f.points < 3) throw FitError("Weyl fit needs at least 3 grid points with " + fmt(min_count) + " eigenvalues");
  const double det = s11 * s22 - s12 * s12;
  f.leading = (s1y * s22 - s2y * s12) / det;
  f.boundary = (s11 * s2y - s12 * s1y) / det;
  return f;
}

TailFit tail_fit(const std::vector<double>& lambda, const std::vector<double>& y, double lo, double hi) {
  if (!(lo < hi) || hi >= 0.0) throw ParameterError("tail window must satisfy lo < hi < 0");
  std::vector<double> t, ly;
  for (std::size_t j = 0; j < lambda.size(); ++j)
    if (lambda[j] >= lo && lambda[j] <= hi && y[j] > 0.0) {
      t.push_back(-lambda[j]);
      ly.push_back(std::log(y[j]));
    }
  if (t.size() < 4) throw FitError("tail fit needs at least 4 positive points in the window");
  std::vector<double> x(t.size());
  auto fit_at = [&](double alpha) {
    for (std::size_t i = 0; i < t.size(); ++i) x[i] = -std::pow(t[i], alpha);
    const stats::LinearFit lf = stats::linear_fit(x, ly);
    double sse = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) sse += std::pow(ly[i] - lf.intercept - lf.slope * x[i], 2);
    return std::pair{sse, lf};
  };
  double best = 0.05, best_sse = fit_at(best).first;
  for (double a = 0.05; a <= 4.0 + 1e-12; a += 0.005) {
    const double s = fit_at(a).first;
    if (s < best_sse) {
      best_sse = s;
      best = a;
    }
  }
  // Golden-section refinement inside the neighbouring grid cells.
  double a = std::max(0.05, best - 0.005), b = std::min(4.0, best + 0.005);
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  for (int it = 0; it < 40; ++it) {
    const double c = b - g * (b - a), d = a + g * (b - a);
    if (fit_at(c).first < fit_at(d).first) b = d;
    else a = c;
  }
  const double alpha = 0.5 * (a + b);
  const stats::LinearFit lf = fit_at(alpha).second;
  TailFit out;
  out.lambda_lo = lo;
  out.lambda_hi = hi;
  out.alpha = alpha;
  out.C = lf.slope;
  out.log_prefactor = lf.intercept;
  out.r2 = lf.r2;
  out.points = static_cast<int>(t.size());
  return out;
}

TailFit lifschitz_fit(const IdsCurve& curve, double lo, double hi) { return tail_fit(curve.lambda, curve.mean, lo, hi); }

TailFit principal_tail_fit(const std::vector<double>& principal_samples, const std::vector<double>& lambda, double lo,
                           double hi) {
  std::vector<double> sorted(principal_samples);
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> p;
  for (double l : lambda)
    p.push_back(static_cast<double>(std::upper_bound(sorted.begin(), sorted.end(), l) - sorted.begin()) /
                static_cast<double>(sorted.size()));
  return tail_fit(lambda, p, lo, hi);
}

TailComparison tail_vs_principal(const IdsCurve& curve, const std::vector<double>& principal_samples, double lo,
                                 double hi) {
  if (principal_samples.empty()) throw ParameterError("no principal eigenvalue samples");
  TailComparison out;
  out.ids = lifschitz_fit(curve, lo, hi);
  std::vector<double> sorted(principal_samples);
  std::sort(sorted.begin(), sorted.end());
  std::vector<long> distinct;
  for (double l : curve.lambda)
    if (l >= lo && l <= hi) {
      const long k = std::upper_bound(sorted.begin(), sorted.end(), l) - sorted.begin();
      if (k > 0 && (distinct.empty() || distinct.back() != k)) distinct.push_back(k);
    }
  out.degenerate = distinct.size() < 4;
  if (!out.degenerate) {
    out.principal = principal_tail_fit(principal_samples, curve.lambda, lo, hi);
    out.exponent_gap = std::abs(out.ids.alpha - out.principal->alpha);
  }
  return out;
}

std::vector<Box> tile_box(const Grid& grid, const Box& box, const std::array<int, 3>& parts) {
  validate_box(grid, box);
  const int d = grid.dim();
  std::array<int, 3> step{1, 1, 1}, count{1, 1, 1};
  for (int a = 0; a < d; ++a) {
    if (parts[a] < 1 || box.cells(a) % parts[a] != 0)
      throw GeometryError("box cells along axis " + std::to_string(a) + " do not split into " +
                          std::to_string(parts[a]) + " tiles");
    step[a] = box.cells(a) / parts[a];
    count[a] = parts[a];
  }
  std::vector<Box> tiles;
  for (int k = 0; k < count[2]; ++k)
    for (int j = 0; j < count[1]; ++j)
      for (int i = 0; i < count[0]; ++i) {
        const std::array<int, 3> idx{i, j, k};
        Box t;
        for (int a = 0; a < d; ++a) {
          t.lo[a] = box.lo[a] + idx[a] * step[a];
          t.hi[a] = t.lo[a] + step[a];
        }
        tiles.push_back(t);
      }
  return tiles;
}

AdditivityReport additivity_check(const Field& potential, double c, const Box& box,
                                  const std::vector<double>& lambda_grid, const AdditivityOptions& opts) {
  const Grid& g = potential.grid();
  AdditivityReport r;
  r.lambda = lambda_grid;
  r.dirichlet = count(potential, c, Boundary::dirichlet, box, lambda_grid);
  r.neumann = count(potential, c, Boundary::neumann, box, lambda_grid);
  for (const Box& t : tile_box(g, box, opts.parts)) {
    add_into(r.dirichlet_tiles, count(potential, c, Boundary::dirichlet, t, lambda_grid));
    add_into(r.neumann_tiles, count(potential, c, Boundary::neumann, t, lambda_grid));
  }
  if (opts.nested) {
    for (int a = 0; a < g.dim(); ++a)
      if (opts.nested->lo[a] < box.lo[a] || opts.nested->hi[a] > box.hi[a])
        throw GeometryError("nested box is not contained in the box");
    r.nested = count(potential, c, Boundary::dirichlet, *opts.nested, lambda_grid);
  }
  if (opts.ims_tile) {
    const ImsPartition part = ims_partition(g, box, *opts.ims_tile, opts.ims_overlap);
    r.ims_penalty = ims_penalty(assemble_direct(potential, c, Boundary::dirichlet, box), part);
    for (const Box& t : part.tiles)
      add_into(r.ims_tiles, count(potential, c, Boundary::dirichlet, t, lambda_grid, r.ims_penalty));
  }
  for (std::size_t j = 0; j < lambda_grid.size(); ++j) {
    r.bracket_violations += r.dirichlet[j] > r.neumann[j];
    r.dirichlet_violations += r.dirichlet[j] < r.dirichlet_tiles[j];
    r.neumann_violations += r.neumann[j] > r.neumann_tiles[j];
    if (!r.nested.empty()) r.nested_violations += r.nested[j] > r.dirichlet[j];
    if (!r.ims_tiles.empty()) r.ims_violations += r.dirichlet[j] > r.ims_tiles[j];
  }
  return r;
}

bool cauchy_trend(const std::vector<double>& v) {
  for (std::size_t i = 2; i < v.size(); ++i)
    if (std::abs(v[i] - v[i - 1]) > std::abs(v[i - 1] - v[i - 2])) return false;
  return true;
}

void write_ids_csv(std::ostream& os, const std::vector<IdsCurve>& curves) {
  os << "bc,L,epsilon,lambda,mean_count_per_volume,stderr,n_seeds\n";
  for (const IdsCurve& c : curves)
    for (std::size_t j = 0; j < c.lambda.size(); ++j)
      os << to_string(c.bc) << ',' << fmt(c.L) << ',' << fmt(c.epsilon) << ',' << fmt(c.lambda[j]) << ','
         << fmt(c.mean[j]) << ',' << fmt(c.std_error[j]) << ',' << c.n_seeds() << '\n';
}

std::string to_json(const WeylFit& fit) {
  nlohmann::ordered_json j;
  j["dim"] = fit.dim;
  j["target"] = fit.target;
  j["lambda_top"] = fit.lambda_top;
  j["raw_ratio"] = fit.raw_ratio;
  j["leading"] = fit.leading;
  j["boundary"] = fit.boundary;
  j["points"] = fit.points;
  return j.dump(2);
}

std::string to_json(const TailFit& fit) {
  nlohmann::ordered_json j;
  j["lambda_lo"] = fit.lambda_lo;
  j["lambda_hi"] = fit.lambda_hi;
  j["alpha"] = fit.alpha;
  j["C"] = fit.C;
  j["log_prefactor"] = fit.log_prefactor;
  j["r2"] = fit.r2;
  j["points"] = fit.points;
  return j.dump(2);
}

}  // namespace anderson
