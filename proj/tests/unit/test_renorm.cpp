#include <doctest.h>

#include <cmath>
#include <json.hpp>
#include <numbers>
#include <sstream>

#include "anderson/error.hpp"
#include "anderson/harmonic.hpp"
#include "anderson/noise.hpp"
#include "anderson/renorm.hpp"
#include "anderson/stats.hpp"

using namespace anderson;

namespace {

constexpr double kPi = std::numbers::pi;

Field from_function(const Grid& g, auto fn) {
  Field f(g);
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto m = g.multi_index(i);
    f[i] = fn(m[0] * g.spacing(), m[1] * g.spacing());
  }
  return f;
}

// Variance of grad G_0 * xi_eps at a site from the impulse response of the
// pipeline: site noise has variance h^{-d}, so Var g_a(0) = h^{-d} sum_y K_a(y)^2.
double impulse_oracle(const Grid& g, double eps) {
  Field e0(g);
  e0[0] = 1.0;
  double acc = 0.0;
  for (const Field& k : green_gradient(mollify(e0, Mollifier{eps}), GreenKernel{0}))
    for (double v : k.values()) acc += v * v;
  return acc / g.cell_volume();
}

double max_diff(const Field& a, const Field& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace

TEST_CASE("Fourier-sum constant equals the impulse-response oracle") {
  for (auto [n, eps] : {std::pair{32, 0.125}, {64, 0.0625}, {64, 0.5}}) {
    Grid g(2, 1.0, n);
    CHECK(renorm_constant({2, eps}, g).value == doctest::Approx(impulse_oracle(g, eps)).epsilon(1e-10));
  }
  Grid g3(3, 1.0, 16);
  CHECK(renorm_constant({3, 0.125, RenormMethod::fourier_sum, 64}, g3).e1 ==
        doctest::Approx(impulse_oracle(g3, 0.125)).epsilon(1e-10));
}

TEST_CASE("renormalization constant examples") {
  Grid g(2, 1.0, 64);
  CHECK(renorm_constant({2, 0.5}, g).value <= 0.2);
  CHECK(renorm_constant({2, 1.0}, g).value <= 0.2);

  double prev = 0.0;
  for (double eps : {0.5, 0.25, 0.125, 0.0625, 0.03125}) {
    const double c = renorm_constant({2, eps}, g).value;
    CHECK(c >= prev);
    prev = c;
  }

  const auto [f, m] = renorm_cross_check({2, 0.0625, RenormMethod::fourier_sum, 1024}, g);
  CHECK(m.samples == 1024);
  CHECK(m.std_error > 0.0);
  CHECK(std::abs(f.value - m.value) <= 3.0 * m.std_error);

  CHECK_THROWS_AS(renorm_constant({2, 0.02}, g), ResolutionError);
  CHECK_THROWS_AS(renorm_constant({3, 0.1}, g), ParameterError);
  CHECK(renorm_method_from_string("monte_carlo") == RenormMethod::monte_carlo);
  CHECK_THROWS_AS(renorm_method_from_string("exact"), SchemaError);
}

TEST_CASE("3D constant carries a sampled correction at 2% error") {
  Grid g(3, 1.0, 16);
  const RenormResult r = renorm_constant({3, 0.125, RenormMethod::fourier_sum, 32}, g);
  CHECK(r.e3 > 0.0);
  CHECK(r.e3_error >= 0.0);
  CHECK(r.e3_error <= 0.02 * r.e3);
  CHECK(r.value == doctest::Approx(r.e1 + r.e3));
  CHECK(r.samples >= 32);
}

TEST_CASE("Nyquist level and cutoff F") {
  CHECK(nyquist_level(Grid(2, 1.0, 64)) == 6);  // 0.75 * 64 >= sqrt(2) * 32
  CHECK(nyquist_level(Grid(2, 1.0, 8)) == 3);
  const CutoffF F;
  for (double x : {-2.0, -1.3, 0.0, 0.7, 2.0}) CHECK(F(x) == -std::exp(2 * x));
  for (double x : {-3.0, -4.5, 3.0, 7.0}) CHECK(F(x) == 0.0);
  for (double x = 2.0; x < 3.0; x += 0.01) {
    CHECK(F(x) <= 0.0);
    CHECK(F(x) >= -std::exp(2 * x));
  }
  CHECK(F(2.0 + 1e-3) / -std::exp(2 * (2.0 + 1e-3)) == doctest::Approx(1.0).epsilon(1e-12));  // flat plateau edge
  CHECK(std::abs(F(3.0 - 1e-6)) < 1e-12);
}

TEST_CASE("packs at zero noise") {
  Grid g(2, 1.0, 32);
  const StochasticPack p = build_pack_2d(Field(g), Mollifier{0.0625}, 3);
  REQUIRE(p.tau.size() == 1);
  for (double v : p.tau[0].values()) CHECK(v == -p.c_eps);
  for (double v : p.X.values()) CHECK(v == -p.c_eps);
  for (const Field& w : p.W) CHECK(w.max_abs() < 1e-12);
  const Field y = build_Y(p, CutoffF{}, 2, false);
  for (double v : y.values()) CHECK(v == doctest::Approx(p.c_eps).epsilon(1e-12));

  Grid g3(3, 1.0, 16);
  const RenormResult consts = renorm_constant({3, 0.125, RenormMethod::fourier_sum, 32}, g3);
  const StochasticPack q = build_pack_3d(Field(g3), Mollifier{0.125}, 1, consts);
  REQUIRE(q.tau.size() == 4);
  for (double v : q.tau[0].values()) CHECK(v == -consts.e1);
  CHECK(q.tau[1].max_abs() == 0.0);
  CHECK(q.tau[3].max_abs() == 0.0);
  CHECK(q.c_eps == consts.e1 + consts.e3);

  StochasticPack zero = build_pack_2d(Field(g), Mollifier{0.0625}, 3);
  CHECK(select_M(zero, 0.3, 1.0, Box::from_cells(g, {4, 4, 0}, {20, 20, 0})) == 0);
  CHECK_THROWS_AS(build_pack_2d(Field(g), Mollifier{0.0625}, nyquist_level(g) + 1), ResolutionError);
}

TEST_CASE("pack field identities hold exactly") {
  Grid g(2, 1.0, 64);
  const StochasticPack p = build_pack_2d(sample_white_noise(g, 12), Mollifier{0.0625}, 4);
  CHECK(max_diff(p.X, p.xi_eps + p.tau[0]) == 0.0);
  CHECK(max_diff(p.W[3], green_apply(p.X, GreenKernel{3})) == 0.0);

  Grid g3(3, 1.0, 16);
  const RenormResult consts = renorm_constant({3, 0.125, RenormMethod::fourier_sum, 32}, g3);
  const StochasticPack q = build_pack_3d(sample_white_noise(g3, 4), Mollifier{0.125}, 1, consts);
  CHECK(max_diff(q.X, q.xi_eps + q.tau[0] + 2.0 * q.tau[1] + q.tau[2]) == 0.0);
  const StochasticPack again = build_pack_3d(sample_white_noise(g3, 4), Mollifier{0.125}, 1, consts);
  CHECK(max_diff(q.X, again.X) == 0.0);
}

TEST_CASE("tau terms are centred") {
  Grid g(2, 1.0, 32);
  std::vector<double> means;
  for (std::uint64_t s = 0; s < 256; ++s)
    means.push_back(build_pack_2d(sample_white_noise(g, 9000 + s), Mollifier{0.125}, -1).tau[0].mean());
  CHECK(std::abs(stats::mean(means)) <= 3.0 * stats::standard_error(means));

  Grid g3(3, 1.0, 16);
  const RenormResult consts = renorm_constant({3, 0.125, RenormMethod::fourier_sum, 64, 77}, g3);
  std::vector<double> m3;
  for (std::uint64_t s = 0; s < 128; ++s)
    m3.push_back(build_pack_3d(sample_white_noise(g3, 5000 + s), Mollifier{0.125}, -1, consts).tau[2].mean());
  // The centring constant carries its own 2% sampling error.
  CHECK(std::abs(stats::mean(m3)) <= 3.0 * std::hypot(stats::standard_error(m3), consts.e3_error));
}

TEST_CASE("spectral gradient against central differences") {
  // Smooth input so that G_0 * f is resolved at every grid: the difference is the O(h^2) FD error.
  auto fn = [](double x, double y) { return std::sin(2 * kPi * x) * std::cos(4 * kPi * y) + 0.5 * std::cos(2 * kPi * (x + 2 * y)); };
  std::vector<double> err;
  for (int n : {32, 64, 128}) {
    Grid g(2, 1.0, n);
    const Field f = from_function(g, fn);
    const Field u = green_apply(f, GreenKernel{0});
    Field spec(g), fd(g);
    const auto grad = green_gradient(f, GreenKernel{0});
    for (std::size_t i = 0; i < g.size(); ++i) {
      const auto m = g.multi_index(i);
      double s = 0.0;
      for (int a = 0; a < 2; ++a) {
        auto p = m, q = m;
        p[a] = g.wrap(p[a] + 1);
        q[a] = g.wrap(q[a] - 1);
        const double d = (u.at(p) - u.at(q)) / (2 * g.spacing());
        s += d * d;
      }
      fd[i] = s;
      spec[i] = grad[0][i] * grad[0][i] + grad[1][i] * grad[1][i];
    }
    err.push_back(max_diff(spec, fd));
  }
  CHECK(std::log2(err[0] / err[1]) >= 1.8);
  CHECK(std::log2(err[1] / err[2]) >= 1.8);
}

TEST_CASE("Y re-inversion and the two F variants") {
  Grid g(2, 1.0, 64);
  StochasticPack p = build_pack_2d(sample_white_noise(g, 31), Mollifier{0.0625}, nyquist_level(g));
  const Box box = Box::from_cells(g, {8, 8, 0}, {40, 40, 0});
  const int M = select_M(p, 0.3, 1.0, box);
  for (int N = M; N <= nyquist_level(g); ++N) {
    if (p.W[N].max_abs() > 2.0) continue;
    const Field raw = build_Y(p, CutoffF{}, N, false);
    const Field cut = build_Y(p, CutoffF{}, N, true);
    CHECK(max_diff(raw, cut) <= 1e-12 * (1.0 + raw.max_abs()));
    const Field z = transform_source(p, N);
    Field back(g);
    for (std::size_t i = 0; i < g.size(); ++i) back[i] = -std::exp(-2.0 * p.W[N][i]) * raw[i];
    CHECK(max_diff(back, z) <= 1e-9 * (1.0 + z.max_abs()));
  }
  StochasticPack big = build_pack_2d(100.0 * sample_white_noise(g, 31), Mollifier{0.0625}, 0);
  if (big.W[0].max_abs() > 2.0) CHECK_THROWS_AS(build_Y(big, CutoffF{}, 0, false), GuardError);
}

TEST_CASE("M is monotone in gamma") {
  Grid g(2, 1.0, 64);
  const Box box = Box::from_cells(g, {8, 8, 0}, {40, 40, 0});
  int checked = 0;
  for (std::uint64_t s = 0; s < 64; ++s) {
    StochasticPack p = build_pack_2d(sample_white_noise(g, 300 + s), Mollifier{0.0625}, -1);
    int tight = -1, loose = -1;
    try {
      tight = select_M(p, 0.3, 0.5, box);
    } catch (const SaturationError& e) {
      tight = nyquist_level(g);
      CHECK(e.min_norm() > 0.5);
    }
    loose = select_M(p, 0.3, 1.0, box);
    CHECK(tight >= loose);
    CHECK(select_M(p, 0.3, std::numeric_limits<double>::infinity(), box) == 0);
    ++checked;
  }
  CHECK(checked == 64);
}

TEST_CASE("boundary pairing: flux of a quadratic and integration by parts") {
  Grid g(2, 1.0, 64);
  const Box box = Box::from_cells(g, {10, 12, 0}, {30, 20, 0});
  const Field f = from_function(g, [](double x, double y) { return (x - 0.3) * (x - 0.3) + (y - 0.41) * (y - 0.41); });
  CHECK(boundary_flux_pairing(constant_field(g, 1.0), f, box) == doctest::Approx(4.0 * box.volume(g)).epsilon(1e-12));
  const Field xi = mollify(sample_white_noise(g, 2), Mollifier{0.0625});
  CHECK(boundary_pairing(Field(g), xi, box) == 0.0);
  CHECK_THROWS_AS(boundary_pairing(Field(g), xi, Box{{0, 2, 0}, {10, 10, 0}}), GeometryError);

  auto phi_fn = [](double x, double y) { return 1.0 + x * y + std::sin(2 * kPi * x); };
  auto xi_fn = [](double x, double y) { return std::cos(2 * kPi * x) * std::sin(4 * kPi * y) + std::sin(2 * kPi * (x - y)); };
  std::vector<double> res;
  double scale = 0.0;
  for (int n : {32, 64, 128}) {
    Grid gn(2, 1.0, n);
    const Box b = Box::from_cells(gn, {n / 8, n / 4, 0}, {n / 2, n / 2, 0});
    const PairingCheck c = boundary_pairing_check(from_function(gn, phi_fn), from_function(gn, xi_fn), b);
    res.push_back(c.residual);
    scale = std::abs(c.boundary) + std::abs(c.bulk_gradient) + std::abs(c.bulk_laplacian);
  }
  CHECK(res[2] <= 1e-2 * scale);
  CHECK(std::log2(res[0] / res[1]) >= 0.9);
  CHECK(std::log2(res[1] / res[2]) >= 0.9);
}

TEST_CASE("mollified noise is Gaussian") {
  Grid g(2, 1.0, 32);
  const Field phi = from_function(g, [](double x, double y) { return std::exp(-20 * ((x - 0.5) * (x - 0.5) + (y - 0.5) * (y - 0.5))); });
  std::vector<double> z;
  for (std::uint64_t s = 0; s < 4000; ++s) {
    const Field xi = mollify(sample_white_noise(g, 40000 + s), Mollifier{0.0625});
    double acc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) acc += xi[i] * phi[i];
    z.push_back(acc * g.cell_volume());
  }
  const double mu = stats::mean(z), var = stats::variance(z);
  double m4 = 0.0;
  for (double v : z) m4 += std::pow(v - mu, 4);
  m4 /= static_cast<double>(z.size());
  CHECK(m4 / (var * var) == doctest::Approx(3.0).epsilon(0.1));
}

TEST_CASE("pack manifest") {
  Grid g(2, 1.0, 32);
  StochasticPack p = build_pack_2d(sample_white_noise(g, 7), Mollifier{0.125}, -1);
  p.seed = 7;
  select_M(p, 0.3, 1.0, Box::from_cells(g, {4, 4, 0}, {20, 20, 0}));
  std::ostringstream os;
  write_pack_manifest(os, p);
  const auto j = nlohmann::json::parse(os.str());
  CHECK(j["seed"] == 7);
  CHECK(j["d"] == 2);
  CHECK(j["method"] == "fourier_sum");
  CHECK(j["M"] == p.M);
  CHECK(j["norms"].size() == static_cast<std::size_t>(nyquist_level(g) + 1));
}
