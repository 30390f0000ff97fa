#include <cmath>
#include <complex>
#include <numbers>

#include "anderson/error.hpp"
#include "anderson/fft.hpp"
#include "anderson/harmonic.hpp"
#include "anderson/stats.hpp"

namespace anderson {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// (2 pi i k)^m over the axes, zero for odd orders on the Nyquist plane.
std::complex<double> derivative_symbol(const Grid& g, const std::array<int, 3>& m, const std::array<double, 3>& k,
                                       const std::array<int, 3>& order) {
  std::complex<double> s = 1.0;
  for (int a = 0; a < g.dim(); ++a) {
    if (order[a] == 0) continue;
    if (order[a] % 2 == 1 && std::abs(m[a]) == g.n() / 2) return 0.0;
    const std::complex<double> ik(0.0, kTwoPi * k[a]);
    for (int p = 0; p < order[a]; ++p) s *= ik;
  }
  return s;
}

}  // namespace

double GreenKernel::multiplier(double k_sq) const {
  if (k_sq == 0.0) return 0.0;
  const double r = std::sqrt(k_sq);
  return (1.0 - dyadic::chi_low(std::ldexp(r, -level))) / (kTwoPi * kTwoPi * k_sq);
}

Field green_apply(const Field& f, const GreenKernel& kernel, const std::array<int, 3>& derivative) {
  int total = 0;
  for (int a = 0; a < 3; ++a) {
    if (derivative[a] < 0) throw ParameterError("negative derivative order");
    total += derivative[a];
  }
  if (total > 2) throw ParameterError("Green kernel derivatives are limited to order 2");
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](const std::array<int, 3>& m, const std::array<double, 3>& k) {
    return kernel.multiplier(wavenumber_sq(g, m)) * derivative_symbol(g, m, k, derivative);
  });
}

std::vector<Field> green_gradient(const Field& f, const GreenKernel& kernel) {
  const Grid& g = f.grid();
  const FourierField hat = fft_forward(f);
  std::vector<Field> out;
  for (int a = 0; a < g.dim(); ++a) {
    std::array<int, 3> order{0, 0, 0};
    order[a] = 1;
    FourierField b = hat;
    multiply_spectrum(b, [&](const std::array<int, 3>& m, const std::array<double, 3>& k) {
      return kernel.multiplier(wavenumber_sq(g, m)) * derivative_symbol(g, m, k, order);
    });
    out.push_back(fft_inverse(b));
  }
  return out;
}

Field spectral_laplacian(const Field& f) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](const std::array<int, 3>& m, const std::array<double, 3>&) {
    return -kTwoPi * kTwoPi * wavenumber_sq(g, m);
  });
}

Field spectral_derivative(const Field& f, int axis) {
  const Grid& g = f.grid();
  std::array<int, 3> order{0, 0, 0};
  order[axis] = 1;
  return apply_multiplier(f, [&](const std::array<int, 3>& m, const std::array<double, 3>& k) {
    return derivative_symbol(g, m, k, order);
  });
}

Field low_pass(const Field& f, int level) {
  const Grid& g = f.grid();
  return apply_multiplier(f, [&](const std::array<int, 3>& m, const std::array<double, 3>&) {
    return dyadic::chi_low(std::ldexp(std::sqrt(wavenumber_sq(g, m)), -level));
  });
}

SmoothingRate green_smoothing_rate(const std::vector<Field>& samples, int n_min, int n_max, double delta_minus,
                                   const Box& box) {
  if (n_max - n_min + 1 < 3) throw FitError("smoothing-rate fit needs at least three levels");
  if (samples.empty()) throw FitError("smoothing-rate fit needs at least one sample");
  SmoothingRate out;
  for (int level = n_min; level <= n_max; ++level) {
    double acc = 0.0;
    for (const Field& g : samples) acc += holder_norm(green_apply(g, GreenKernel{level}), delta_minus, box);
    out.levels.push_back(level);
    out.norms.push_back(acc / static_cast<double>(samples.size()));
  }
  std::vector<double> x, y;
  for (std::size_t i = 0; i < out.levels.size(); ++i)
    if (out.norms[i] > 0.0) {
      x.push_back(out.levels[i]);
      y.push_back(std::log2(out.norms[i]));
    }
  if (x.size() < 3) {
    out.degenerate = true;
    out.slope = out.intercept = std::nan("");
    return out;
  }
  const auto fit = stats::linear_fit(x, y);
  out.slope = fit.slope;
  out.intercept = fit.intercept;
  out.r2 = fit.r2;
  return out;
}

}  // namespace anderson
