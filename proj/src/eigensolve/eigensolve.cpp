#include "anderson/eigensolve.hpp"

#include <lapacke.h>

#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>

#include "anderson/error.hpp"
#include "anderson/format.hpp"
#include "anderson/inertia.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

using SpMat = Eigen::SparseMatrix<double>;

void fill_residuals(const SpMat& a, const Eigen::VectorXd& mass, Spectrum& s) {
  s.residuals.resize(s.values.size());
  for (std::size_t i = 0; i < s.values.size(); ++i) {
    const Eigen::VectorXd v = s.vectors.col(static_cast<Eigen::Index>(i));
    const Eigen::VectorXd r = a * v - s.values[i] * mass.cwiseProduct(v);
    s.residuals[i] = r.norm() / std::sqrt(v.dot(mass.cwiseProduct(v)));
  }
}

// Dense symmetric eigenproblem for M^{-1/2} A M^{-1/2}; returns ascending values and M-orthonormal vectors.
void dense_generalized(const Eigen::MatrixXd& a, const Eigen::VectorXd& mass, std::vector<double>& values,
                       Eigen::MatrixXd& vectors) {
  const int n = static_cast<int>(a.rows());
  const Eigen::VectorXd s = mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd c = s.asDiagonal() * a * s.asDiagonal();
  std::vector<double> w(n);
  if (n > 0 && LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, c.data(), n, w.data()) != 0)
    throw ConvergenceError("dense eigensolver failed", std::nan(""));
  values = w;
  vectors = s.asDiagonal() * c;
}

double gershgorin_lower(const SpMat& a, const Eigen::VectorXd& mass) {
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(a.rows()), off = Eigen::VectorXd::Zero(a.rows());
  for (int k = 0; k < a.outerSize(); ++k)
    for (SpMat::InnerIterator it(a, k); it; ++it) {
      if (it.row() == it.col()) diag[it.row()] += it.value();
      else off[it.row()] += std::abs(it.value());
    }
  return ((diag - off).array() / mass.array()).minCoeff();
}

}  // namespace

Spectrum eigen_dense(const AssembledForm& form) {
  const SpMat a = form.matrix();
  Spectrum s;
  dense_generalized(Eigen::MatrixXd(a), form.mass, s.values, s.vectors);
  s.method = "dense";
  fill_residuals(a, form.mass, s);
  s.tol = s.residuals.empty() ? 0.0 : *std::max_element(s.residuals.begin(), s.residuals.end());
  return s;
}

Spectrum eigen_smallest(const AssembledForm& form, int k, double tol, const SolverOptions& opts) {
  const int n = form.size();
  if (k < 1 || k > n) throw ParameterError("eigen_smallest needs 1 <= k <= dimension");
  const bool dense = opts.method == SolverMethod::dense ||
                     (opts.method == SolverMethod::automatic && n <= opts.dense_limit);
  const SpMat a = form.matrix();
  const Eigen::VectorXd& mass = form.mass;

  if (dense) {
    Spectrum full = eigen_dense(form);
    full.values.resize(k);
    full.residuals.resize(k);
    full.vectors = full.vectors.leftCols(k).eval();
    full.tol = tol;
    return full;
  }

  const int p = std::min(n, k + std::max(6, k / 2));
  Eigen::MatrixXd x(n, p);
  rng::Stream stream(opts.seed);
  for (int j = 0; j < p; ++j)
    for (int i = 0; i < n; ++i) x(i, j) = stream.normal();

  // Shift strictly below the spectrum, so A - sigma M is positive definite.
  double sigma = gershgorin_lower(a, mass);
  sigma -= 1e-3 * (1.0 + std::abs(sigma));
  Eigen::SimplicialLDLT<SpMat, Eigen::Lower> ldlt;
  auto factor = [&](double s) {
    SpMat shifted = a;
    for (int i = 0; i < n; ++i) shifted.coeffRef(i, i) -= s * mass[i];
    ldlt.compute(shifted);
    return ldlt.info() == Eigen::Success && (ldlt.vectorD().array() > 0.0).all();
  };
  if (!factor(sigma)) throw ConvergenceError("shifted operator is not definite below the Gershgorin bound", std::nan(""));

  Spectrum s;
  s.method = "shift-invert subspace iteration";
  s.tol = tol;
  double worst = std::numeric_limits<double>::infinity();
  int reshifts = 0;
  for (int it = 1; it <= opts.max_iterations; ++it) {
    Eigen::MatrixXd y = ldlt.solve(mass.asDiagonal() * x);
    Eigen::HouseholderQR<Eigen::MatrixXd> qr(y);
    const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(n, p);
    const Eigen::MatrixXd aq = q.transpose() * (a * q);
    const Eigen::MatrixXd mq = q.transpose() * mass.asDiagonal() * q;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> rr(0.5 * (aq + aq.transpose()),
                                                                 0.5 * (mq + mq.transpose()));
    x = q * rr.eigenvectors();
    const Eigen::VectorXd theta = rr.eigenvalues();

    s.values.assign(theta.data(), theta.data() + k);
    s.vectors = x.leftCols(k);
    fill_residuals(a, mass, s);
    worst = *std::max_element(s.residuals.begin(), s.residuals.end());
    s.iterations = it;
    if (worst <= tol) return s;

    // Move the shift up towards the wanted cluster while it stays below lambda_1.
    const double spread = theta[p - 1] - theta[0];
    const double target = theta[0] - std::max(0.5 * spread, 10.0 * s.residuals[0]);
    if (reshifts < 4 && it >= 2 && target > sigma + 0.5 * spread) {
      if (factor(target)) {
        sigma = target;
        ++reshifts;
      } else if (!factor(sigma)) {
        throw ConvergenceError("lost the factorization while reshifting", worst);
      }
    }
  }
  throw ConvergenceError("eigen_smallest did not converge within " + std::to_string(opts.max_iterations) +
                             " iterations",
                         worst);
}

std::vector<std::pair<int, int>> multiplicities(const std::vector<double>& values, double rel_gap) {
  std::vector<std::pair<int, int>> groups;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!groups.empty()) {
      const double prev = values[i - 1];
      if (std::abs(values[i] - prev) <= rel_gap * std::max({1.0, std::abs(prev), std::abs(values[i])})) {
        ++groups.back().second;
        continue;
      }
    }
    groups.push_back({static_cast<int>(i), 1});
  }
  return groups;
}

CountingCurve counting(const AssembledForm& form, const std::vector<double>& lambda_grid) {
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) throw ParameterError("lambda grid must be sorted");
  CountingCurve c;
  c.lambda = lambda_grid;
  if (form.size() == 0) {
    c.counts.assign(lambda_grid.size(), 0);
    return c;
  }
  const InertiaCounter counter(form.matrix(), form.mass, form.nodes, form.grid.dim());
  for (double l : lambda_grid) c.counts.push_back(counter.count_below(l + tie_band(l)));
  return c;
}

CountingCurve counting_from_values(const std::vector<double>& values, const std::vector<double>& lambda_grid) {
  if (!std::is_sorted(lambda_grid.begin(), lambda_grid.end())) throw ParameterError("lambda grid must be sorted");
  CountingCurve c;
  c.lambda = lambda_grid;
  for (double l : lambda_grid)
    c.counts.push_back(std::count_if(values.begin(), values.end(), [&](double v) { return v < l + tie_band(l); }));
  return c;
}

MinMaxReport minmax_verify(const AssembledForm& form, int k, int trials, std::uint64_t seed) {
  const int n = form.size();
  if (n > 400) throw ParameterError("minmax_verify is meant for dimension <= 400");
  if (k < 1 || k > n) throw ParameterError("minmax_verify needs 1 <= k <= dimension");
  const Eigen::MatrixXd a(form.matrix());
  const Eigen::VectorXd& mass = form.mass;
  std::vector<double> values;
  Eigen::MatrixXd vectors;
  dense_generalized(a, mass, values, vectors);

  MinMaxReport rep;
  rep.k = k;
  rep.trials = trials;
  rep.eigenvalues.assign(values.begin(), values.begin() + k);

  auto ritz = [&](const Eigen::MatrixXd& basis) {
    const Eigen::MatrixXd ab = basis.transpose() * a * basis;
    const Eigen::MatrixXd mb = basis.transpose() * mass.asDiagonal() * basis;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (ab + ab.transpose()),
                                                                 0.5 * (mb + mb.transpose()), Eigen::EigenvaluesOnly);
    return Eigen::VectorXd(es.eigenvalues());
  };
  const Eigen::VectorXd r = ritz(vectors.leftCols(k));
  for (int i = 0; i < k; ++i) {
    rep.ritz.push_back(r[i]);
    rep.max_ritz_error = std::max(rep.max_ritz_error, std::abs(r[i] - values[i]));
  }
  rng::Stream stream(seed);
  rep.min_random_sup = std::numeric_limits<double>::infinity();
  for (int t = 0; t < trials; ++t) {
    Eigen::MatrixXd q(n, k);
    for (int j = 0; j < k; ++j)
      for (int i = 0; i < n; ++i) q(i, j) = stream.normal();
    rep.min_random_sup = std::min(rep.min_random_sup, ritz(q)[k - 1]);
  }
  const double lk = values[k - 1];
  rep.holds = rep.max_ritz_error <= 1e-8 * (1.0 + std::abs(lk)) && rep.min_random_sup >= lk - 1e-8 * (1.0 + std::abs(lk));
  return rep;
}

void write_spectrum_csv(std::ostream& os, const Spectrum& s) {
  os << "index,eigenvalue,residual\n";
  for (std::size_t i = 0; i < s.values.size(); ++i)
    os << i + 1 << ',' << fmt(s.values[i]) << ',' << fmt(i < s.residuals.size() ? s.residuals[i] : 0.0) << '\n';
}

void write_counting_csv(std::ostream& os, const CountingCurve& c) {
  os << "lambda,count\n";
  for (std::size_t i = 0; i < c.lambda.size(); ++i) os << fmt(c.lambda[i]) << ',' << c.counts[i] << '\n';
}

}  // namespace anderson
