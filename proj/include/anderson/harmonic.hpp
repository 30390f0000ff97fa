#pragma once

#include <array>
#include <limits>
#include <ostream>
#include <string>
#include <vector>

#include "anderson/box.hpp"
#include "anderson/field.hpp"

namespace anderson {

/// Smooth transition: 0 for t <= 0, 1 for t >= 1, psi(t) = f(t)/(f(t)+f(1-t)), f(t) = exp(-1/t).
double smooth_step(double t);

/// Dyadic partition of unity in frequency. chi_low equals 1 on |k| <= 3/4 and
/// vanishes for |k| >= 4/3; chi(k) = chi_low(k/2) - chi_low(k) is supported in
/// 3/4 <= |k| <= 8/3, and chi_low + sum_{j>=0} chi(2^{-j} .) = 1.
namespace dyadic {
double chi_low(double r);
double chi(double r);
/// Multiplier of block j >= -1 at radius r.
double block(int j, double r);
/// Largest j whose annulus meets the grid's Fourier lattice.
int max_block(const Grid& grid);
}  // namespace dyadic

struct LpBlock {
  Field field;
  bool beyond_nyquist = false;
};

/// Delta_j f = F^{-1}(chi(2^{-j} .) F f); Delta_{-1} uses chi_low. Blocks beyond
/// the lattice come back as zero fields with the flag set.
LpBlock lp_block(const Field& f, int j);
/// All blocks j = -1..max_block with a single forward transform.
std::vector<Field> lp_decompose(const Field& f);

inline constexpr double kInf = std::numeric_limits<double>::infinity();

struct BesovParams {
  double p = kInf;
  double q = kInf;
  double r = 0.0;
  double sigma = 0.0;
};

/// ||(2^{rj} ||w_sigma Delta_j f||_{L^p})_{j>=-1}||_{l^q}, with w_sigma centered at
/// the middle of the torus and L^p = (h^d sum |.|^p)^{1/p}.
double besov_norm(const Field& f, const BesovParams& params);
/// Per-block weighted L^p norms, index 0 holding j = -1.
std::vector<double> lp_block_norms(const Field& f, double p, double sigma = 0.0);

/// sup_box |g| + max over offsets o = h 2^m {e_i, e_i +- e_j}, |o| <= 1, of
/// |g(x+o) - g(x)| / |o|^delta with x, x+o in the box.
double holder_norm(const Field& g, double delta, const Box& box);
/// Same quantity over all node pairs at distance <= 1 in the box (O(N^2)).
double holder_norm_exhaustive(const Field& g, double delta, const Box& box);

/// m_N(k) = (1 - chi_low(2^{-N} k)) |2 pi k|^{-2}, zero at k = 0.
struct GreenKernel {
  int level = 0;
  double multiplier(double k_sq) const;
};

/// d^m G_N * f for a multi-index with |m| <= 2; odd derivatives vanish on the
/// Nyquist plane of their axis.
Field green_apply(const Field& f, const GreenKernel& kernel, const std::array<int, 3>& derivative = {0, 0, 0});
/// nabla(G_N * f), one field per axis.
std::vector<Field> green_gradient(const Field& f, const GreenKernel& kernel);
/// Spectral Laplacian -4 pi^2 |k|^2.
Field spectral_laplacian(const Field& f);
/// Spectral first derivative along an axis (zero on the Nyquist plane).
Field spectral_derivative(const Field& f, int axis);
/// F^{-1}(chi_low(2^{-N} .) F f).
Field low_pass(const Field& f, int level);

struct SmoothingRate {
  std::vector<int> levels;
  std::vector<double> norms;
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  /// Set when every norm vanishes and the rate is undefined.
  bool degenerate = false;
};

/// Least-squares slope of log2 ||G_N * g||_{C^{delta_minus}(box)} against N,
/// averaged over the supplied samples. Throws FitError with fewer than 3 levels.
SmoothingRate green_smoothing_rate(const std::vector<Field>& samples, int n_min, int n_max, double delta_minus,
                                   const Box& box);

/// Wavelet estimator of the Besov norm with Daubechies wavelets carrying four
/// vanishing moments, periodic multiresolution down to unit scale.
double wavelet_besov_norm(const Field& f, const BesovParams& params);

struct NormRow {
  std::string field_id;
  BesovParams params;
  std::string estimator;
  double value = 0.0;
};
void write_norm_report(std::ostream& os, const std::vector<NormRow>& rows);

}  // namespace anderson
