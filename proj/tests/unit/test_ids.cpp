#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "anderson/error.hpp"
#include "anderson/ids.hpp"
#include "anderson/noise.hpp"
#include "anderson/rng.hpp"

using namespace anderson;

namespace {

constexpr double kPi = std::numbers::pi;

// Closed-form FD spectrum of the free Laplacian on an a x b cell rectangle.
std::vector<double> fd_spectrum(int a, int b, double h, Boundary bc) {
  const int lo = bc == Boundary::dirichlet ? 1 : 0;
  std::vector<double> v;
  for (int i = lo; i <= (bc == Boundary::dirichlet ? a - 1 : a); ++i)
    for (int j = lo; j <= (bc == Boundary::dirichlet ? b - 1 : b); ++j)
      v.push_back(4.0 / (h * h) * (std::pow(std::sin(i * kPi / (2.0 * a)), 2) + std::pow(std::sin(j * kPi / (2.0 * b)), 2)));
  std::sort(v.begin(), v.end());
  return v;
}

long fd_count(const std::vector<double>& spec, double lambda) {
  return std::count_if(spec.begin(), spec.end(), [&](double e) { return e <= lambda + tie_band(lambda); });
}

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * i / (n - 1);
  return v;
}

IdsCurve synthetic(const std::vector<double>& lambda, auto fn) {
  IdsCurve c;
  c.lambda = lambda;
  for (double l : lambda) c.mean.push_back(fn(l));
  return c;
}

}  // namespace

TEST_CASE("free-Laplacian IDS equals the FD enumeration") {
  IdsOptions opts;
  opts.spacing = 1.0 / 16.0;
  opts.zero_potential = true;
  const std::vector<double> grid = linspace(-5.0, 600.0, 60);
  for (Boundary bc : {Boundary::dirichlet, Boundary::neumann}) {
    const auto curves = estimate_ids(bc, {1.0, 2.0}, 0.125, {1}, grid, opts);
    REQUIRE(curves.size() == 2);
    for (const IdsCurve& c : curves) {
      const int cells = static_cast<int>(std::lround(c.L / opts.spacing));
      const auto spec = fd_spectrum(cells, cells, opts.spacing, bc);
      for (std::size_t j = 0; j < grid.size(); ++j) CHECK(c.mean[j] == fd_count(spec, grid[j]) / (c.L * c.L));
      CHECK(c.mean[0] == 0.0);
      CHECK_FALSE(c.partial);
    }
  }
  CHECK_THROWS_AS(estimate_ids(Boundary::neumann, {1.5}, 0.125, {1}, grid, opts), ParameterError);
  opts.zero_potential = false;
  CHECK_THROWS_AS(estimate_ids(Boundary::dirichlet, {1.0}, 0.125, {1, 2, 3}, grid, opts), ParameterError);
}

TEST_CASE("bootstrap standard error") {
  rng::Stream s(3);
  std::vector<std::vector<double>> small, large;
  for (int i = 0; i < 800; ++i) (i < 400 ? small : large).push_back({s.normal(), 2.0 * s.normal()});
  large.insert(large.end(), small.begin(), small.end());
  const auto se_small = bootstrap_se(small, 1000, 1), se_large = bootstrap_se(large, 1000, 2);
  CHECK(se_small[0] == doctest::Approx(1.0 / 20.0).epsilon(0.1));
  CHECK(se_small[1] == doctest::Approx(2.0 / 20.0).epsilon(0.1));
  for (int j = 0; j < 2; ++j) {
    const double ratio = std::pow(se_large[j] / se_small[j], 2);  // doubling the sample halves the variance
    CHECK(ratio >= 0.35);
    CHECK(ratio <= 0.65);
  }
  CHECK(bootstrap_se(small, 1000, 1) == se_small);
}

TEST_CASE("Weyl constants and the FD-enumeration pre-check") {
  CHECK(weyl_constant(2) == doctest::Approx(1.0 / (4 * kPi)).epsilon(1e-15));
  CHECK(weyl_constant(3) == doctest::Approx(1.0 / (6 * kPi * kPi)).epsilon(1e-15));

  // Unit square, n = 256, up to lambda = 3000.
  const auto spec = fd_spectrum(256, 256, 1.0 / 256, Boundary::dirichlet);
  IdsCurve c = synthetic(linspace(10.0, 3000.0, 300), [&](double l) { return static_cast<double>(fd_count(spec, l)); });
  c.volume = 1.0;
  const WeylFit f = weyl_fit(c);
  const double target = 1.0 / (4 * kPi);
  CHECK(f.target == doctest::Approx(target));
  CHECK(f.lambda_top == 3000.0);
  CHECK(f.raw_ratio >= 0.88 * target);
  CHECK(f.raw_ratio <= 1.00 * target);
  CHECK(f.leading >= 0.95 * target);
  CHECK(f.leading <= 1.05 * target);
  CHECK(f.boundary < 0.0);  // Dirichlet boundary deficit
  CHECK(f.boundary == doctest::Approx(-4.0 / (4 * kPi)).epsilon(0.25));

  IdsCurve few = synthetic({1.0, 2.0}, [](double) { return 1.0; });
  few.volume = 1.0;
  CHECK_THROWS_AS(weyl_fit(few), FitError);
}

TEST_CASE("tail fits recover their generators") {
  const auto lam = linspace(-30.0, -5.0, 60);
  const TailFit e = lifschitz_fit(synthetic(lam, [](double l) { return std::exp(-(-l)); }), -30.0, -5.0);
  CHECK(e.alpha == doctest::Approx(1.0).epsilon(0.02));
  CHECK(e.C == doctest::Approx(1.0).epsilon(0.05));
  const TailFit r = lifschitz_fit(synthetic(lam, [](double l) { return std::exp(-2.0 * std::sqrt(-l)); }), -30.0, -5.0);
  CHECK(std::abs(r.alpha - 0.5) <= 0.03);
  CHECK(r.C == doctest::Approx(2.0).epsilon(0.05));
  CHECK(r.points == 60);

  CHECK_THROWS_AS(lifschitz_fit(synthetic(lam, [](double) { return 0.0; }), -30.0, -5.0), FitError);
  CHECK_THROWS_AS(lifschitz_fit(synthetic(lam, [](double) { return 1.0; }), -5.0, 1.0), ParameterError);
}

TEST_CASE("principal eigenvalue tail against the IDS tail") {
  // Gaussian samples: log P(X <= l) ~ -l^2/2; the log prefactor biases the
  // exponent downwards at moderate |l|, hence the tolerance.
  rng::Stream s(11);
  std::vector<double> samples(1000000);
  for (double& x : samples) x = s.normal();
  const auto lam = linspace(-4.0, -2.0, 21);
  const TailFit p = principal_tail_fit(samples, lam, -4.0, -2.0);
  CHECK(std::abs(p.alpha - 2.0) <= 0.25);

  const IdsCurve ids = synthetic(lam, [](double l) { return std::exp(-0.5 * l * l); });
  const TailComparison cmp = tail_vs_principal(ids, samples, -4.0, -2.0);
  REQUIRE(cmp.principal.has_value());
  CHECK(cmp.exponent_gap == doctest::Approx(std::abs(cmp.ids.alpha - cmp.principal->alpha)));
  CHECK(cmp.exponent_gap <= 0.25);

  // Deterministic principal eigenvalue: the empirical law is a step.
  const TailComparison step = tail_vs_principal(ids, std::vector<double>(200, -3.0), -4.0, -2.0);
  CHECK(step.degenerate);
  CHECK_FALSE(step.principal.has_value());
}

TEST_CASE("additivity for the free Laplacian matches the enumeration") {
  Grid g(2, 4.0, 64);
  const double h = g.spacing();
  const Box box = Box::from_cells(g, {16, 24, 0}, {32, 16, 0});  // (0,2)x(0,1)
  const auto grid = linspace(-1.0, 400.0, 80);
  AdditivityOptions opts;
  opts.parts = {2, 1, 1};
  const AdditivityReport r = additivity_check(Field(g), 0.0, box, grid, opts);
  const auto whole_d = fd_spectrum(32, 16, h, Boundary::dirichlet), whole_n = fd_spectrum(32, 16, h, Boundary::neumann);
  const auto tile_d = fd_spectrum(16, 16, h, Boundary::dirichlet), tile_n = fd_spectrum(16, 16, h, Boundary::neumann);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(r.dirichlet[j] == fd_count(whole_d, grid[j]));
    CHECK(r.neumann[j] == fd_count(whole_n, grid[j]));
    CHECK(r.dirichlet_tiles[j] == 2 * fd_count(tile_d, grid[j]));
    CHECK(r.neumann_tiles[j] == 2 * fd_count(tile_n, grid[j]));
  }
  CHECK(r.total_violations() == 0);
  CHECK_THROWS_AS(tile_box(g, box, {3, 1, 1}), GeometryError);
}

TEST_CASE("bracketing and additivity for random potentials") {
  Grid g(2, 4.0, 64);
  const Box box = Box::from_cells(g, {16, 16, 0}, {32, 32, 0});  // side 2
  const auto grid = linspace(-30.0, 60.0, 120);
  AdditivityOptions opts;
  opts.parts = {2, 1, 1};
  opts.nested = Box::from_cells(g, {20, 18, 0}, {20, 24, 0});
  opts.ims_tile = 1.0;
  opts.ims_overlap = 0.25;
  const double c = 0.0;
  long violations = 0;
  for (std::uint64_t s = 0; s < 16; ++s) {
    const Field xi = mollify(sample_white_noise(g, 700 + s), Mollifier{0.125});
    const AdditivityReport r = additivity_check(xi, c, box, grid, opts);
    violations += r.total_violations();
    CHECK(r.ims_penalty > 0.0);
  }
  CHECK(violations == 0);
}

TEST_CASE("seed-averaged IDS: Neumann dominates and Dirichlet grows with L") {
  IdsOptions opts;
  opts.spacing = 1.0 / 16.0;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 0; s < 32; ++s) seeds.push_back(100 + s);
  const auto grid = linspace(-20.0, 60.0, 41);
  const auto dir = estimate_ids(Boundary::dirichlet, {1.0, 2.0}, 0.125, seeds, grid, opts);
  const auto neu = estimate_ids(Boundary::neumann, {1.0, 2.0}, 0.125, seeds, grid, opts);
  for (int k = 0; k < 2; ++k)
    for (std::size_t i = 0; i < seeds.size(); ++i)
      for (std::size_t j = 0; j < grid.size(); ++j) CHECK(dir[k].counts[i][j] <= neu[k].counts[i][j]);
  for (std::size_t j = 0; j < grid.size(); ++j) {
    CHECK(dir[1].mean[j] >= dir[0].mean[j] - 2.0 * std::hypot(dir[0].std_error[j], dir[1].std_error[j]));
    if (j > 0) CHECK(dir[1].mean[j] >= dir[1].mean[j - 1]);
  }
  CHECK(dir[1].n_seeds() == 32);

  opts.jobs = 3;
  const auto again = estimate_ids(Boundary::dirichlet, {2.0}, 0.125, seeds, grid, opts);
  CHECK(again[0].mean == dir[1].mean);
  CHECK(again[0].std_error == dir[1].std_error);
}

TEST_CASE("Cauchy trend and output formats") {
  CHECK(cauchy_trend({1.0, 0.5, 0.3, 0.25}));
  CHECK_FALSE(cauchy_trend({1.0, 0.9, 0.3}));
  CHECK(cauchy_trend({2.0, 1.0}));

  IdsCurve c = synthetic({0.0, 1.5}, [](double l) { return l; });
  c.L = 8;
  c.epsilon = 0.0625;
  c.std_error = {0.0, 0.25};
  c.seeds = {1, 2};
  std::ostringstream os;
  write_ids_csv(os, {c});
  CHECK(os.str() == "bc,L,epsilon,lambda,mean_count_per_volume,stderr,n_seeds\n"
                    "dirichlet,8,0.0625,0,0,0,2\n"
                    "dirichlet,8,0.0625,1.5,1.5,0.25,2\n");
  const auto j = nlohmann::json::parse(to_json(TailFit{-30, -5, 1.0, 1.0, 0.0, 0.99, 12}));
  CHECK(j["alpha"] == 1.0);
  CHECK(j["points"] == 12);
}
