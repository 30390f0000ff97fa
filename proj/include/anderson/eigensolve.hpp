#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "anderson/operator.hpp"

namespace anderson {

/// Smallest eigenpairs of  A x = lambda M x  for an assembled form.
struct Spectrum {
  std::vector<double> values;     // ascending, with multiplicity
  std::vector<double> residuals;  // ||A v - lambda M v|| / ||v||_M
  Eigen::MatrixXd vectors;        // M-orthonormal columns
  int iterations = 0;
  double tol = 0.0;
  std::string method;
};

enum class SolverMethod { automatic, dense, iterative };

struct SolverOptions {
  SolverMethod method = SolverMethod::automatic;
  int dense_limit = 2000;  // automatic uses the dense path up to this dimension
  int max_iterations = 400;
  std::uint64_t seed = 0x5eed;
};

/// k smallest eigenpairs to B-norm residual tol. The iterative path is block
/// shift-invert subspace iteration with Rayleigh-Ritz; the shift stays below the
/// spectrum, checked through the inertia of the LDL^T factor. Throws
/// ConvergenceError (with the worst residual) when the budget runs out.
Spectrum eigen_smallest(const AssembledForm& form, int k, double tol = 1e-8, const SolverOptions& opts = {});

/// Full spectrum through LAPACK on the symmetrically scaled dense matrix.
Spectrum eigen_dense(const AssembledForm& form);

/// Groups of eigenvalues whose relative gap is below rel_gap: (first index, size).
std::vector<std::pair<int, int>> multiplicities(const std::vector<double>& values, double rel_gap = 1e-7);

/// Tie-break band: an eigenvalue within 1e-9 (1 + |lambda|) above a grid point counts as <= lambda.
inline double tie_band(double lambda) { return 1e-9 * (1.0 + (lambda < 0 ? -lambda : lambda)); }

struct CountingCurve {
  std::vector<double> lambda;
  std::vector<long> counts;  // N(U, lambda) = #{k : lambda_k <= lambda}
};

/// Counting function by spectrum slicing (Sylvester inertia of A - sigma M).
CountingCurve counting(const AssembledForm& form, const std::vector<double>& lambda_grid);
/// Same counts from a known sorted spectrum (oracle and small problems).
CountingCurve counting_from_values(const std::vector<double>& values, const std::vector<double>& lambda_grid);

struct MinMaxReport {
  int k = 0;
  std::vector<double> eigenvalues;  // dense reference lambda_1..lambda_k
  std::vector<double> ritz;         // Rayleigh-Ritz values on the span of the eigenvectors
  double max_ritz_error = 0.0;
  double min_random_sup = 0.0;      // min over trials of the sup-Rayleigh quotient
  int trials = 0;
  bool holds = false;
};

/// Courant-Fischer probe on small instances (dimension <= 400): the span of the
/// first k eigenvectors attains lambda_k, random k-dimensional subspaces do not beat it.
MinMaxReport minmax_verify(const AssembledForm& form, int k, int trials = 50, std::uint64_t seed = 1);

void write_spectrum_csv(std::ostream& os, const Spectrum& s);
void write_counting_csv(std::ostream& os, const CountingCurve& c);

}  // namespace anderson
