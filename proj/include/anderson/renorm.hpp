#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "anderson/box.hpp"
#include "anderson/field.hpp"
#include "anderson/noise.hpp"

namespace anderson {

enum class RenormMethod { fourier_sum, monte_carlo };

std::string to_string(RenormMethod m);
RenormMethod renorm_method_from_string(const std::string& s);

struct RenormSpec {
  int dim = 2;
  double epsilon = 0.0;
  RenormMethod method = RenormMethod::fourier_sum;
  int samples = 256;           // Monte-Carlo sample count (initial count for the 3D correction)
  std::uint64_t seed = 0x7e57; // Monte-Carlo seed namespace
  int max_samples = 4096;      // cap for the adaptive 3D correction
};

/// c_eps = E|grad G_0 * xi_eps|^2(0)  (+ E|grad G_0 * tau_1^eps|^2(0) in 3D).
struct RenormResult {
  double value = 0.0;
  double std_error = 0.0;
  double e1 = 0.0;  // first contribution and its standard error
  double e1_error = 0.0;
  double e3 = 0.0;  // 3D correction, always Monte Carlo
  double e3_error = 0.0;
  int samples = 0;  // Monte-Carlo samples actually used
  RenormMethod method = RenormMethod::fourier_sum;
};

/// Fourier sum: the exact Gaussian expectation for the lattice noise, summed
/// over modes with the same multipliers the sampler pipeline applies.
/// Monte Carlo: mean over samples of the spatial average, with its standard
/// error. In 3D the correction term is sampled until its standard error is at
/// most 2% of its value (ConvergenceError past max_samples).
RenormResult renorm_constant(const RenormSpec& spec, const Grid& grid);

/// Runs both methods and throws ConsistencyError if they differ by more than
/// 5 combined standard errors.
std::pair<RenormResult, RenormResult> renorm_cross_check(RenormSpec spec, const Grid& grid);

/// Last level with a nonzero G_N multiplier on the lattice, plus one: G_N = 0 for N >= this.
int nyquist_level(const Grid& grid);

/// Smooth compactly supported F with F(x) = -e^{2x} on [-2, 2], supp F in [-3, 3].
struct CutoffF {
  double operator()(double x) const;
  double radius() const { return 3.0; }
};

struct StochasticPack {
  explicit StochasticPack(const Grid& grid) : xi_eps(grid), X(grid) {}

  int dim = 2;
  double epsilon = 0.0;
  std::uint64_t seed = 0;
  Field xi_eps;
  std::vector<Field> tau;  // 2D: {tau}; 3D: {tau_1, tau_2, tau_3, tau_4}
  Field X;
  RenormResult renorm;
  double c_eps = 0.0;
  std::vector<Field> W;             // W_N = G_N * X for N = 0..N_max
  int M = -1;                       // set by select_M
  std::vector<double> level_norms;  // Hoelder norms of W_n recorded by select_M

  /// G_N * X (stored levels are returned directly).
  Field W_level(int N) const;
};

StochasticPack build_pack_2d(const Field& xi, const Mollifier& mollifier, int N_max);
/// When `constants` is absent they come from renorm_constant(fourier_sum).
StochasticPack build_pack_3d(const Field& xi, const Mollifier& mollifier, int N_max,
                             const std::optional<RenormResult>& constants = std::nullopt);

/// Y_N = F(W_N)(xi_eps - c_eps + |grad W_N|^2 + Lap W_N). Without the cutoff F
/// is -e^{2x}, and GuardError is raised if ||W_N||_inf > 2.
Field build_Y(const StochasticPack& pack, const CutoffF& F, int N, bool use_cutoff);

/// The bracket  xi_eps - c_eps + |grad W_N|^2 + Lap W_N  alone.
Field transform_source(const StochasticPack& pack, int N);

/// Smallest N such that the dyadic Hoelder norm of W_n on the box is <= gamma
/// for every computable n >= N. Records the norms in the pack. Throws
/// SaturationError when only the trivial level (W = 0) qualifies.
int select_M(StochasticPack& pack, double delta_minus, double gamma, const Box& box);

/// Trapezoid surface integral of  phi d_nu f  with central differences for d_nu f.
double boundary_flux_pairing(const Field& phi, const Field& f, const Box& box);
/// int_{dU} phi grad(G_0 * xi_eps) . dS with the spectral gradient.
double boundary_pairing(const Field& phi, const Field& xi_eps, const Box& box);

/// Both sides of  int_{dU} phi d_nu f = int_U grad phi . grad f + int_U phi Lap f
/// for f = G_0 * xi_eps; bulk integrals by the tensor trapezoid rule, derivatives spectral.
struct PairingCheck {
  double boundary = 0.0;
  double bulk_gradient = 0.0;
  double bulk_laplacian = 0.0;
  double residual = 0.0;  // |boundary - (bulk_gradient + bulk_laplacian)|
};
PairingCheck boundary_pairing_check(const Field& phi, const Field& xi_eps, const Box& box);

/// {seed, d, epsilon, c_eps, method, M, norms}.
void write_pack_manifest(std::ostream& os, const StochasticPack& pack);

}  // namespace anderson
