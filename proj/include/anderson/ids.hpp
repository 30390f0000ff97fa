#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "anderson/eigensolve.hpp"
#include "anderson/operator.hpp"

namespace anderson {

/// One white-noise realization: torus of side 2L with the box of side L
/// centred in it, potential xi_eps and the subtracted constant.
struct Realization {
  Grid grid{2, 1.0, 8};
  Box box;
  Field potential{Grid{2, 1.0, 8}};
  double c_eps = 0.0;
};

struct IdsOptions {
  int dim = 2;
  double spacing = 1.0 / 32.0;  // lattice spacing h
  bool renormalize = true;      // subtract the Fourier-sum c_eps
  bool zero_potential = false;  // free Laplacian (oracle runs)
  int bootstrap = 1000;         // resamples for the standard error
  std::uint64_t bootstrap_seed = 0xb007;
  int jobs = 1;
};

/// Torus side must be a multiple of h. With zero_potential the noise is not sampled.
Realization make_realization(double L, double epsilon, std::uint64_t seed, const IdsOptions& opts);

struct IdsCurve {
  Boundary bc = Boundary::dirichlet;
  int dim = 2;
  double L = 0.0;
  double epsilon = 0.0;
  double volume = 0.0;                // |U_L|
  std::vector<double> lambda;
  std::vector<double> mean;           // mean over seeds of N(U_L, lambda) / |U_L|
  std::vector<double> std_error;      // bootstrap standard error of the mean
  std::vector<std::vector<long>> counts;  // raw counts per completed seed
  std::vector<std::uint64_t> seeds;       // completed seeds
  std::vector<std::uint64_t> failed;      // seeds whose realization failed
  bool partial = false;
  int n_seeds() const { return static_cast<int>(seeds.size()); }
};

/// Seed-averaged per-volume counting functions, one curve per L. Neumann
/// requires integer L. Failed realizations are dropped and flag the curve as partial.
std::vector<IdsCurve> estimate_ids(Boundary bc, const std::vector<double>& L_list, double epsilon,
                                   const std::vector<std::uint64_t>& seeds, const std::vector<double>& lambda_grid,
                                   const IdsOptions& opts = {});

/// Bootstrap standard error of the column means of `rows` (one row per sample).
std::vector<double> bootstrap_se(const std::vector<std::vector<double>>& rows, int resamples, std::uint64_t seed);

/// Per-volume mean and bootstrap error from raw counts; fills curve.mean and curve.std_error.
void summarize(IdsCurve& curve, int resamples, std::uint64_t seed);

/// |B(0,1)| / (2 pi)^d.
double weyl_constant(int dim);

struct WeylFit {
  int dim = 2;
  double target = 0.0;
  double lambda_top = 0.0;
  double raw_ratio = 0.0;  // lambda_top^{-d/2} N(lambda_top)
  double leading = 0.0;    // a in a lambda^{d/2} + b lambda^{(d-1)/2}
  double boundary = 0.0;   // b
  int points = 0;
};

/// Window: grid points where at least `min_count` eigenvalues are counted in the
/// mean over seeds. FitError with fewer than 3 points.
WeylFit weyl_fit(const IdsCurve& curve, double min_count = 50.0);

struct TailFit {
  double lambda_lo = 0.0;
  double lambda_hi = 0.0;
  double alpha = 0.0;      // exponent in log N ~ log A - C (-lambda)^alpha
  double C = 0.0;
  double log_prefactor = 0.0;
  double r2 = 0.0;
  int points = 0;
};

/// Fit of log y against -(-lambda)^alpha for lambda in [lo, hi] (lo < hi < 0),
/// best alpha over [0.05, 4] by least squares. FitError below 4 positive points.
TailFit tail_fit(const std::vector<double>& lambda, const std::vector<double>& y, double lo, double hi);
TailFit lifschitz_fit(const IdsCurve& curve, double lo, double hi);

struct TailComparison {
  TailFit ids;
  std::optional<TailFit> principal;  // absent when the empirical tail is degenerate
  bool degenerate = false;           // fewer than 4 distinct positive probabilities in the window
  double exponent_gap = 0.0;
};

/// Tail exponents of the IDS and of the empirical law of the principal
/// eigenvalue over a shared window.
TailComparison tail_vs_principal(const IdsCurve& curve, const std::vector<double>& principal_samples, double lo,
                                 double hi);
/// Exponent fit of the empirical P(lambda_1 <= lambda) on its own.
TailFit principal_tail_fit(const std::vector<double>& principal_samples, const std::vector<double>& lambda, double lo,
                           double hi);

/// Splits a box into parts[a] equal pieces per axis that share their faces.
std::vector<Box> tile_box(const Grid& grid, const Box& box, const std::array<int, 3>& parts);

struct AdditivityReport {
  std::vector<double> lambda;
  std::vector<long> dirichlet, neumann;          // whole box
  std::vector<long> dirichlet_tiles, neumann_tiles;  // sums over tiles
  std::vector<long> nested;                      // Dirichlet on a box inside the whole box
  std::vector<long> ims_tiles;                   // sum of N^D(tile_k, lambda + A); empty without a cover
  double ims_penalty = 0.0;
  long bracket_violations = 0;     // N^D > N^N
  long nested_violations = 0;      // N^D(inner) > N^D(whole)
  long dirichlet_violations = 0;   // N^D(U) < sum N^D(U_j)
  long neumann_violations = 0;     // N^N(U) > sum N^N(U_j)
  long ims_violations = 0;         // N^D(U, lambda) > sum N^D(tile_k, lambda + A)
  long total_violations() const {
    return bracket_violations + nested_violations + dirichlet_violations + neumann_violations + ims_violations;
  }
};

struct AdditivityOptions {
  std::array<int, 3> parts{2, 1, 1};
  std::optional<Box> nested;        // inner Dirichlet box
  std::optional<double> ims_tile;   // tile length for the overlapping cover
  double ims_overlap = 0.0;
};

/// All bracketing and additivity inequalities for one potential on one box.
AdditivityReport additivity_check(const Field& potential, double c, const Box& box,
                                  const std::vector<double>& lambda_grid, const AdditivityOptions& opts);

/// True when the increments |v_{i+1} - v_i| are nonincreasing in i.
bool cauchy_trend(const std::vector<double>& v);

void write_ids_csv(std::ostream& os, const std::vector<IdsCurve>& curves);
std::string to_json(const WeylFit& fit);
std::string to_json(const TailFit& fit);

}  // namespace anderson
