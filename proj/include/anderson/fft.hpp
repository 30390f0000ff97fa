#pragma once

#include <array>
#include <complex>

#include "anderson/field.hpp"

namespace anderson {

/// f_hat(k) = h^d sum_x f(x) exp(-2 pi i k.x), k = m/L.
FourierField fft_forward(const Field& f);
/// f(x) = L^{-d} sum_k f_hat(k) exp(2 pi i k.x).
Field fft_inverse(const FourierField& f);

/// True when some axis of the centered index sits on the Nyquist frequency.
inline bool on_nyquist(const Grid& g, const std::array<int, 3>& m) {
  for (int a = 0; a < g.dim(); ++a)
    if (m[a] == g.n() / 2 || m[a] == -g.n() / 2) return true;
  return false;
}

/// |k|^2 for a centered integer index.
inline double wavenumber_sq(const Grid& g, const std::array<int, 3>& m) {
  double s = 0.0;
  for (int a = 0; a < g.dim(); ++a) s += static_cast<double>(m[a]) * m[a];
  return s / (g.side() * g.side());
}

/// In-place multiplication of a half spectrum by mult(m, k) where m is the
/// centered index and k the wavevector.
template <class Mult>
void multiply_spectrum(FourierField& f, Mult&& mult) {
  const Grid& g = f.grid();
  auto c = f.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    const auto m = g.wave_index(i);
    c[i] *= mult(m, wavevector(g, m));
  }
}

/// F^{-1}(mult . F f).
template <class Mult>
Field apply_multiplier(const Field& f, Mult&& mult) {
  FourierField hat = fft_forward(f);
  multiply_spectrum(hat, mult);
  Field out = fft_inverse(hat);
  out.meta() = f.meta();
  out.meta().kind = NoiseKind::derived;
  return out;
}

}  // namespace anderson
