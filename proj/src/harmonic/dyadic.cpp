#include <cmath>

#include "anderson/fft.hpp"
#include "anderson/harmonic.hpp"

namespace anderson {

double smooth_step(double t) {
  if (t <= 0.0) return 0.0;
  if (t >= 1.0) return 1.0;
  const double a = std::exp(-1.0 / t), b = std::exp(-1.0 / (1.0 - t));
  return a / (a + b);
}

namespace dyadic {

double chi_low(double r) { return 1.0 - smooth_step((r - 0.75) / (4.0 / 3.0 - 0.75)); }

double chi(double r) { return chi_low(0.5 * r) - chi_low(r); }

double block(int j, double r) {
  if (j < 0) return chi_low(r);
  return chi(std::ldexp(r, -j));
}

int max_block(const Grid& grid) {
  const double kmax = std::sqrt(static_cast<double>(grid.dim())) * (grid.n() / 2) / grid.side();
  int j = -1;
  while (0.75 * std::ldexp(1.0, j + 1) < kmax) ++j;
  return j;
}

}  // namespace dyadic

LpBlock lp_block(const Field& f, int j) {
  if (j > dyadic::max_block(f.grid())) return {Field(f.grid(), f.meta()), true};
  Field out = apply_multiplier(f, [&](const std::array<int, 3>& m, const std::array<double, 3>&) {
    return dyadic::block(j, std::sqrt(wavenumber_sq(f.grid(), m)));
  });
  return {std::move(out), false};
}

std::vector<Field> lp_decompose(const Field& f) {
  const Grid& g = f.grid();
  const FourierField hat = fft_forward(f);
  std::vector<Field> blocks;
  for (int j = -1; j <= dyadic::max_block(g); ++j) {
    FourierField b = hat;
    multiply_spectrum(b, [&](const std::array<int, 3>& m, const std::array<double, 3>&) {
      return dyadic::block(j, std::sqrt(wavenumber_sq(g, m)));
    });
    blocks.push_back(fft_inverse(b));
  }
  return blocks;
}

namespace {

double weighted_lp(const Field& f, double p, double sigma) {
  const Grid& g = f.grid();
  const double h = g.spacing(), c = g.side() / 2.0;
  double acc = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    double w = 1.0;
    if (sigma != 0.0) {
      const auto m = g.multi_index(i);
      double r2 = 0.0;
      for (int a = 0; a < g.dim(); ++a) r2 += (m[a] * h - c) * (m[a] * h - c);
      w = std::pow(1.0 + r2, -sigma / 2.0);
    }
    const double v = std::abs(w * f[i]);
    if (std::isinf(p)) acc = std::max(acc, v);
    else acc += std::pow(v, p);
  }
  return std::isinf(p) ? acc : std::pow(acc * g.cell_volume(), 1.0 / p);
}

}  // namespace

std::vector<double> lp_block_norms(const Field& f, double p, double sigma) {
  std::vector<double> out;
  for (const Field& b : lp_decompose(f)) out.push_back(weighted_lp(b, p, sigma));
  return out;
}

double besov_norm(const Field& f, const BesovParams& params) {
  const auto norms = lp_block_norms(f, params.p, params.sigma);
  double acc = 0.0;
  for (std::size_t i = 0; i < norms.size(); ++i) {
    const int j = static_cast<int>(i) - 1;
    const double term = std::pow(2.0, params.r * j) * norms[i];
    if (std::isinf(params.q)) acc = std::max(acc, term);
    else acc += std::pow(term, params.q);
  }
  return std::isinf(params.q) ? acc : std::pow(acc, 1.0 / params.q);
}

}  // namespace anderson
