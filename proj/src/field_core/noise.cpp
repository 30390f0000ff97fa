#include "anderson/noise.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "anderson/error.hpp"
#include "anderson/fft.hpp"
#include "anderson/rng.hpp"

namespace anderson {

namespace {

void require_torus(const Grid& g) {
  if (g.topology() != Topology::torus) throw ParameterError("noise is sampled on torus grids only");
}

std::uint64_t mode_key(std::uint64_t seed, const std::array<int, 3>& m) {
  auto enc = [](int v) { return static_cast<std::uint64_t>(static_cast<std::int64_t>(v) + (1 << 20)); };
  return rng::key(rng::key(seed, 0x6d6f6465ULL), enc(m[0]) | (enc(m[1]) << 21) | (enc(m[2]) << 42));
}

// Representative of m modulo n with every component in [-n/2, n/2).
std::array<int, 3> centered(const Grid& g, std::array<int, 3> m) {
  const int n = g.n();
  for (int a = 0; a < g.dim(); ++a) {
    if (m[a] >= n / 2) m[a] -= n;
    if (m[a] < -n / 2) m[a] += n;
  }
  return m;
}

// Unit complex Gaussian (E|z|^2 = 1) attached to the pair {m, -m}; real
// N(0,1) when the mode is its own conjugate.
std::complex<double> mode_variate(const Grid& g, std::uint64_t seed, const std::array<int, 3>& m) {
  const auto pos = centered(g, m);
  const auto neg = centered(g, {-pos[0], -pos[1], -pos[2]});
  double z0, z1;
  if (neg == pos) {
    rng::normal_pair(mode_key(seed, pos), z0, z1);
    return {z0, 0.0};
  }
  const bool canonical = std::lexicographical_compare(neg.begin(), neg.end(), pos.begin(), pos.end());
  rng::normal_pair(mode_key(seed, canonical ? pos : neg), z0, z1);
  const std::complex<double> z(z0 * std::numbers::sqrt2 / 2.0, z1 * std::numbers::sqrt2 / 2.0);
  return canonical ? z : std::conj(z);
}

// Mean of |k|^{alpha-d} over the reciprocal cell [-a,a]^d, a = 1/(2L). Splitting
// the cube into 2d pyramids over its faces reduces the integral to
// (2d a/alpha) int_{[-a,a]^{d-1}} (a^2+|y|^2)^{(alpha-d)/2} dy.
double origin_cell_average(int d, double alpha, double side) {
  static constexpr double nodes[8] = {-0.9602898564975363, -0.7966664774136267, -0.5255324099163290,
                                      -0.1834346424956498, 0.1834346424956498,  0.5255324099163290,
                                      0.7966664774136267,  0.9602898564975363};
  static constexpr double weights[8] = {0.1012285362903763, 0.2223810344533745, 0.3137066458778873,
                                        0.3626837833783620, 0.3626837833783620, 0.3137066458778873,
                                        0.2223810344533745, 0.1012285362903763};
  const double a = 0.5 / side;
  double face = 0.0;
  if (d == 2) {
    for (int i = 0; i < 8; ++i) {
      const double y = a * nodes[i];
      face += a * weights[i] * std::pow(a * a + y * y, (alpha - d) / 2.0);
    }
  } else {
    for (int i = 0; i < 8; ++i)
      for (int j = 0; j < 8; ++j) {
        const double y = a * nodes[i], z = a * nodes[j];
        face += a * a * weights[i] * weights[j] * std::pow(a * a + y * y + z * z, (alpha - d) / 2.0);
      }
  }
  const double integral = 2.0 * d * a / alpha * face;
  return integral * std::pow(side, d);
}

}  // namespace

Field sample_white_noise(const Grid& grid, std::uint64_t seed) {
  require_torus(grid);
  Field f(grid, FieldMeta{NoiseKind::white, 0.0, seed, 0.0});
  const double sd = 1.0 / std::sqrt(grid.cell_volume());
  auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = sd * rng::normal(seed, i);
  return f;
}

Field sample_spectral_gaussian(const Grid& grid, std::uint64_t seed,
                               const std::function<double(double)>& density) {
  require_torus(grid);
  FourierField hat(grid);
  const double vol = std::pow(grid.side(), grid.dim());
  auto c = hat.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto m = grid.wave_index(i);
    const double s = density(wavenumber_sq(grid, m));
    if (!std::isfinite(s) || s <= 0.0) continue;
    c[i] = std::sqrt(vol * s) * mode_variate(grid, seed, m);
  }
  Field f = fft_inverse(hat);
  f.meta() = FieldMeta{NoiseKind::derived, 0.0, seed, 0.0};
  return f;
}

Field sample_white_noise_spectral(const Grid& grid, std::uint64_t seed) {
  Field f = sample_spectral_gaussian(grid, seed, [](double) { return 1.0; });
  f.meta().kind = NoiseKind::white;
  return f;
}

double riesz_unit_constant(int dim, double alpha) {
  const double d = dim;
  return 1.0 / (std::pow(std::numbers::pi, alpha - d / 2.0) * std::tgamma((d - alpha) / 2.0) /
                std::tgamma(alpha / 2.0));
}

Field sample_riesz_noise(const Grid& grid, double alpha, double c, std::uint64_t seed) {
  const int d = grid.dim();
  if (!(alpha > 0.0) || !(alpha < std::min(d, 4))) throw ParameterError("Riesz exponent outside (0, min(d,4))");
  if (!(c > 0.0)) throw ParameterError("Riesz covariance constant must be positive");
  const double pref = c / riesz_unit_constant(d, alpha);
  const double zero_mode = pref * origin_cell_average(d, alpha, grid.side());
  Field f = sample_spectral_gaussian(grid, seed, [&](double k_sq) {
    if (k_sq == 0.0) return zero_mode;
    return pref * std::pow(k_sq, (alpha - d) / 2.0);
  });
  f.meta() = FieldMeta{NoiseKind::riesz, alpha, seed, 0.0};
  return f;
}

double Mollifier::fourier(double k_sq) const {
  return std::exp(-std::numbers::pi * std::numbers::pi * epsilon * epsilon * k_sq);
}

double Mollifier::lattice_fourier(const Grid& grid, const std::array<int, 3>& m) const {
  const double c = std::numbers::pi * epsilon / grid.side();
  double prod = 1.0;
  for (int a = 0; a < grid.dim(); ++a) {
    double s = 0.0;
    for (int j = -2; j <= 2; ++j) {
      const double k = m[a] + static_cast<double>(j) * grid.n();
      s += std::exp(-c * c * k * k);
    }
    prod *= s;
  }
  return prod;
}

double Mollifier::kernel(int dim, double r_sq) const {
  return std::pow(std::numbers::pi, -dim / 2.0) * std::pow(epsilon, -dim) *
         std::exp(-r_sq / (epsilon * epsilon));
}

Field mollify(const Field& f, const Mollifier& mollifier) {
  if (!(mollifier.epsilon >= 2.0 * f.grid().spacing() * (1.0 - 1e-12)))
    throw ResolutionError("mollifier scale below 2h is not resolved by the grid");
  Field out = apply_multiplier(f, [&](const std::array<int, 3>& m, const std::array<double, 3>&) {
    return mollifier.lattice_fourier(f.grid(), m);
  });
  out.meta() = f.meta();
  out.meta().epsilon = mollifier.epsilon;
  return out;
}

}  // namespace anderson
