#include <doctest.h>

#include <Eigen/SparseCholesky>
#include <cmath>
#include <numbers>
#include <sstream>

#include "anderson/eigensolve.hpp"
#include "anderson/error.hpp"
#include "anderson/inertia.hpp"
#include "anderson/noise.hpp"

using namespace anderson;

namespace {

constexpr double kPi = std::numbers::pi;

AssembledForm unit_square(int cells, Boundary bc, const Field* xi = nullptr) {
  Grid g(2, 2.0, 2 * cells);
  const Box box = Box::from_cells(g, {cells / 2, cells / 2, 0}, {cells, cells, 0});
  return assemble_direct(xi ? *xi : Field(g), 0.0, bc, box);
}

std::vector<double> fd_dirichlet(int cells) {
  const double h = 1.0 / cells;
  std::vector<double> v;
  for (int m = 1; m < cells; ++m)
    for (int k = 1; k < cells; ++k)
      v.push_back(4.0 / (h * h) * (std::pow(std::sin(m * kPi * h / 2), 2) + std::pow(std::sin(k * kPi * h / 2), 2)));
  std::sort(v.begin(), v.end());
  return v;
}

}  // namespace

TEST_CASE("free Dirichlet Laplacian on the unit square") {
  const AssembledForm form = unit_square(128, Boundary::dirichlet);
  const Spectrum s = eigen_smallest(form, 6, 1e-8);
  CHECK(s.method == "shift-invert subspace iteration");
  CHECK(std::abs(s.values[0] / (2 * kPi * kPi) - 1.0) < 0.005);
  CHECK(std::abs(s.values[1] - s.values[2]) <= 1e-7 * s.values[1]);
  const auto groups = multiplicities(s.values);
  REQUIRE(groups.size() >= 2);
  CHECK(groups[1] == std::pair<int, int>{1, 2});
  for (double r : s.residuals) CHECK(r <= 1e-8);
  // M-orthonormality.
  const Eigen::MatrixXd gram = s.vectors.transpose() * form.mass.asDiagonal() * s.vectors;
  CHECK((gram - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("iterative solver matches the dense oracle on 12x12 instances") {
  Grid g(2, 1.0, 16);
  for (std::uint64_t seed : {1, 2, 3}) {
    const Field xi = sample_white_noise(g, seed);
    for (Boundary bc : {Boundary::dirichlet, Boundary::neumann}) {
      const AssembledForm form = assemble_direct(xi, 0.0, bc, Box::from_cells(g, {2, 2, 0}, {12, 12, 0}));
      const Spectrum dense = eigen_dense(form);
      SolverOptions it;
      it.method = SolverMethod::iterative;
      const Spectrum iter = eigen_smallest(form, 8, 1e-9, it);
      for (int i = 0; i < 8; ++i) CHECK(std::abs(iter.values[i] - dense.values[i]) <= 1e-8 * (1 + std::abs(dense.values[i])));
    }
  }
}

TEST_CASE("generalized problems with a non-uniform mass") {
  Grid g(2, 1.0, 32);
  const Field W = 0.4 * mollify(sample_white_noise(g, 8), Mollifier{0.15});
  const Field Y = mollify(sample_white_noise(g, 9), Mollifier{0.1});
  const AssembledForm form = assemble_transformed(W, Y, Boundary::dirichlet, Box::from_cells(g, {3, 3, 0}, {24, 20, 0}));
  const Spectrum dense = eigen_dense(form);
  SolverOptions it;
  it.method = SolverMethod::iterative;
  const Spectrum iter = eigen_smallest(form, 5, 1e-9, it);
  for (int i = 0; i < 5; ++i) CHECK(std::abs(iter.values[i] - dense.values[i]) <= 1e-8 * (1 + std::abs(dense.values[i])));
  for (double r : dense.residuals) CHECK(r <= 1e-7 * (1 + std::abs(dense.values.back())));
}

TEST_CASE("counting by inertia agrees with dense spectra") {
  Grid g2(2, 1.0, 32);
  Grid g3(3, 1.0, 16);
  const Field xi2 = 30.0 * sample_white_noise(g2, 4);
  const Field xi3 = 10.0 * sample_white_noise(g3, 5);
  const Field W = 0.5 * mollify(sample_white_noise(g2, 6), Mollifier{0.1});
  std::vector<AssembledForm> forms = {
      assemble_direct(xi2, 0.0, Boundary::dirichlet, Box::from_cells(g2, {2, 3, 0}, {27, 22, 0})),
      assemble_direct(xi2, 0.0, Boundary::neumann, Box::from_cells(g2, {2, 3, 0}, {27, 22, 0})),
      assemble_transformed(W, xi2, Boundary::neumann, Box::from_cells(g2, {1, 1, 0}, {29, 29, 0})),
      assemble_direct(xi3, 0.0, Boundary::dirichlet, Box::from_cells(g3, {1, 2, 3}, {13, 11, 11})),
      assemble_direct(xi3, 0.0, Boundary::neumann, Box::from_cells(g3, {1, 2, 3}, {9, 11, 10})),
  };
  for (const AssembledForm& form : forms) {
    const Spectrum dense = eigen_dense(form);
    std::vector<double> grid;
    const double lo = dense.values.front(), hi = dense.values.back();
    for (int i = 0; i <= 40; ++i) grid.push_back(lo - 1.0 + (hi - lo + 2.0) * i / 40.0);
    for (int i = 0; i < 5; ++i) grid.push_back(dense.values[37 * i + 3]);  // exact eigenvalues: tie-break
    std::sort(grid.begin(), grid.end());
    const CountingCurve sliced = counting(form, grid);
    const CountingCurve oracle = counting_from_values(dense.values, grid);
    CHECK(sliced.counts == oracle.counts);
  }
}

TEST_CASE("inertia counter against a sparse LDL^T on a large indefinite problem") {
  Grid g(2, 1.0, 128);
  const Field xi = 50.0 * sample_white_noise(g, 12);
  const AssembledForm form = assemble_direct(xi, 0.0, Boundary::neumann, Box::from_cells(g, {1, 1, 0}, {120, 100, 0}));
  const InertiaCounter counter(form.matrix(), form.mass, form.nodes, 2);
  CHECK(counter.size() == form.size());
  CHECK(counter.max_front() > 0);
  for (double sigma : {-2e4, -500.0, 0.0, 3e3, 6e4}) {
    Eigen::SparseMatrix<double> s = form.matrix();
    for (int i = 0; i < form.size(); ++i) s.coeffRef(i, i) -= sigma * form.mass[i];
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> ldlt(s);
    REQUIRE(ldlt.info() == Eigen::Success);
    const long neg = (ldlt.vectorD().array() < 0.0).count();
    CHECK(counter.count_below(sigma) == neg);
  }
}

TEST_CASE("counting examples") {
  const AssembledForm neu = unit_square(16, Boundary::neumann);
  CHECK(counting(neu, {0.0}).counts[0] >= 1);

  const AssembledForm dir = unit_square(64, Boundary::dirichlet);
  const auto fd = fd_dirichlet(64);
  const std::vector<double> grid = {10.0, 50.0, 100.0, 400.0, 1000.0};
  const CountingCurve c = counting(dir, grid);
  for (std::size_t i = 0; i < grid.size(); ++i)
    CHECK(c.counts[i] == std::count_if(fd.begin(), fd.end(), [&](double v) { return v <= grid[i]; }));
  for (std::size_t i = 1; i < grid.size(); ++i) CHECK(c.counts[i - 1] <= c.counts[i]);
  CHECK_THROWS_AS(counting(dir, {2.0, 1.0}), ParameterError);
}

TEST_CASE("min-max principle and spectral shift") {
  Grid g(2, 1.0, 32);
  const Field xi = mollify(sample_white_noise(g, 31), Mollifier{0.1});
  const AssembledForm form = assemble_direct(xi, 0.0, Boundary::dirichlet, Box::from_cells(g, {4, 4, 0}, {15, 15, 0}));
  const MinMaxReport one = minmax_verify(form, 1, 10);
  CHECK(std::abs(one.ritz[0] - one.eigenvalues[0]) <= 1e-10 * (1 + std::abs(one.eigenvalues[0])));
  const MinMaxReport three = minmax_verify(form, 3, 50);
  CHECK(three.holds);
  CHECK(three.min_random_sup >= three.eigenvalues[2] - 1e-8);

  const Spectrum base = eigen_dense(form);
  const Spectrum moved = eigen_dense(form.shifted(3.25));
  for (std::size_t i = 0; i < base.values.size(); ++i)
    CHECK(std::abs(moved.values[i] - base.values[i] - 3.25) <= 1e-10 * (1 + std::abs(base.values[i])));
}

TEST_CASE("solver budget and reports") {
  const AssembledForm form = unit_square(64, Boundary::dirichlet);
  SolverOptions opts;
  opts.method = SolverMethod::iterative;
  opts.max_iterations = 1;
  CHECK_THROWS_AS(eigen_smallest(form, 4, 1e-12, opts), ConvergenceError);
  try {
    eigen_smallest(form, 4, 1e-12, opts);
  } catch (const ConvergenceError& e) {
    CHECK(e.best_residual() > 0.0);
  }
  CHECK_THROWS_AS(eigen_smallest(form, 0, 1e-8), ParameterError);

  Spectrum s;
  s.values = {1.0, 2.5};
  s.residuals = {1e-10, 2e-10};
  std::ostringstream os;
  write_spectrum_csv(os, s);
  CHECK(os.str() == "index,eigenvalue,residual\n1,1,1e-10\n2,2.5,2e-10\n");
  std::ostringstream cs;
  write_counting_csv(cs, CountingCurve{{-1.0, 0.5}, {0, 3}});
  CHECK(cs.str() == "lambda,count\n-1,0\n0.5,3\n");
}
