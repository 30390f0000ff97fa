#pragma once

#include <cstdint>
#include <functional>

#include "anderson/field.hpp"

namespace anderson {

/// I.i.d. N(0, h^{-d}) per site, keyed by (seed, site index).
Field sample_white_noise(const Grid& grid, std::uint64_t seed);

/// White noise synthesized mode by mode, keyed by (seed, integer wavevector).
/// Grids of equal side share all resolved modes, so refinement studies see the
/// same realization at every resolution. Same law as sample_white_noise.
Field sample_white_noise_spectral(const Grid& grid, std::uint64_t seed);

/// Stationary Gaussian field with covariance c|x|^{-alpha}; spectral density
/// c pi^{alpha-d/2} Gamma((d-alpha)/2)/Gamma(alpha/2) |k|^{alpha-d}. The integrable
/// singularity at k = 0 is replaced by its average over the reciprocal cell.
Field sample_riesz_noise(const Grid& grid, double alpha, double c, std::uint64_t seed);

/// The c for which the Riesz spectral density is exactly |k|^{alpha-d}.
double riesz_unit_constant(int dim, double alpha);

/// Gaussian field with spectral density S(|k|^2) and the zero mode removed
/// when S is not finite there.
Field sample_spectral_gaussian(const Grid& grid, std::uint64_t seed,
                               const std::function<double(double)>& density);

/// rho(x) = pi^{-d/2} exp(-|x|^2), rho_eps = eps^{-d} rho(x/eps).
struct Mollifier {
  double epsilon = 0.0;

  /// rho_hat(eps k) = exp(-pi^2 eps^2 |k|^2).
  double fourier(double k_sq) const;
  /// Transform of the lattice-sampled periodized kernel at mode m, i.e. the
  /// Poisson sum of rho_hat over aliases k + (n/L)j. Differs from fourier()
  /// only near the Nyquist frequency.
  double lattice_fourier(const Grid& grid, const std::array<int, 3>& m) const;
  /// rho_eps(x) for a displacement with squared length r_sq.
  double kernel(int dim, double r_sq) const;
};

/// h^d sum_y rho_eps(x - y) f(y) on the torus, evaluated spectrally. Requires eps >= 2h.
Field mollify(const Field& f, const Mollifier& mollifier);

}  // namespace anderson
