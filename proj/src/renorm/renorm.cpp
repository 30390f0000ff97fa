#include "anderson/renorm.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>

#include "anderson/error.hpp"
#include "anderson/fft.hpp"
#include "anderson/harmonic.hpp"
#include "anderson/rng.hpp"
#include "anderson/stats.hpp"

namespace anderson {

std::string to_string(RenormMethod m) { return m == RenormMethod::fourier_sum ? "fourier_sum" : "monte_carlo"; }

RenormMethod renorm_method_from_string(const std::string& s) {
  if (s == "fourier_sum") return RenormMethod::fourier_sum;
  if (s == "monte_carlo") return RenormMethod::monte_carlo;
  throw SchemaError("unknown renormalization method '" + s + "'");
}

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

Field squared_norm(const std::vector<Field>& v) {
  Field out(v.front().grid());
  for (const Field& c : v)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += c[i] * c[i];
  return out;
}

Field dot(const std::vector<Field>& a, const std::vector<Field>& b) {
  Field out(a.front().grid());
  for (std::size_t k = 0; k < a.size(); ++k)
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += a[k][i] * b[k][i];
  return out;
}

std::vector<Field> grad_g0(const Field& f) { return green_gradient(f, GreenKernel{0}); }

void check_spec(const RenormSpec& spec, const Grid& grid) {
  if (spec.dim != grid.dim()) throw ParameterError("renormalization dimension differs from the grid");
  if (grid.topology() != Topology::torus) throw ParameterError("renormalization constants live on a torus");
  if (spec.epsilon < 2.0 * grid.spacing() * (1.0 - 1e-12))
    throw ResolutionError("epsilon must be at least twice the lattice spacing");
}

// Exact lattice expectation of |grad G_0 * xi_eps|^2 at a point.
double fourier_sum(const Grid& g, const Mollifier& mol) {
  const int n = g.n(), d = g.dim();
  const GreenKernel g0{0};
  double acc = 0.0;
  std::array<int, 3> m{0, 0, 0};
  std::array<int, 3> lo{-n / 2, -n / 2, -n / 2}, hi{n / 2 - 1, n / 2 - 1, n / 2 - 1};
  for (int a = d; a < 3; ++a) lo[a] = hi[a] = 0;
  m = lo;
  for (;;) {
    const double ks = wavenumber_sq(g, m);
    if (ks > 0.0) {
      double sym = 0.0;
      for (int a = 0; a < d; ++a)
        if (std::abs(m[a]) != n / 2) {
          const double ka = kTwoPi * m[a] / g.side();
          sym += ka * ka;
        }
      const double r = mol.lattice_fourier(g, m) * g0.multiplier(ks);
      acc += r * r * sym;
    }
    int a = 0;
    for (; a < d; ++a) {
      if (++m[a] <= hi[a]) break;
      m[a] = lo[a];
    }
    if (a == d) break;
  }
  return acc / std::pow(g.side(), d);
}

struct Moments {
  std::vector<double> e1, e3;
};

// Per-sample spatial means of |grad G_0 * xi_eps|^2 and, in 3D, |grad G_0 * tau_1|^2.
void sample_moments(const Grid& g, const Mollifier& mol, std::uint64_t ns, int first, int count, bool third,
                    Moments& out) {
  for (int i = first; i < first + count; ++i) {
    const Field xi = mollify(sample_white_noise(g, rng::key(ns, static_cast<std::uint64_t>(i))), mol);
    const Field t1 = squared_norm(grad_g0(xi));
    out.e1.push_back(t1.mean());
    if (third) out.e3.push_back(squared_norm(grad_g0(t1)).mean());
  }
}

}  // namespace

int nyquist_level(const Grid& grid) {
  const double kmax = std::sqrt(static_cast<double>(grid.dim())) * (grid.n() / 2) / grid.side();
  int N = 0;
  while (0.75 * std::ldexp(1.0, N) < kmax) ++N;
  return N;
}

RenormResult renorm_constant(const RenormSpec& spec, const Grid& grid) {
  check_spec(spec, grid);
  const Mollifier mol{spec.epsilon};
  RenormResult r;
  r.method = spec.method;
  const bool third = spec.dim == 3;
  Moments mom;
  if (spec.method == RenormMethod::monte_carlo || third) {
    if (spec.samples < 2) throw ParameterError("Monte Carlo needs at least two samples");
    sample_moments(grid, mol, spec.seed, 0, spec.samples, third, mom);
  }
  if (spec.method == RenormMethod::fourier_sum) {
    r.e1 = fourier_sum(grid, mol);
  } else {
    r.e1 = stats::mean(mom.e1);
    r.e1_error = stats::standard_error(mom.e1);
  }
  if (third) {
    // The correction is only known by sampling; refine until its error is 2% of it.
    while (stats::standard_error(mom.e3) > 0.02 * stats::mean(mom.e3)) {
      const int have = static_cast<int>(mom.e3.size());
      if (have >= spec.max_samples)
        throw ConvergenceError("3D renormalization correction did not reach 2% standard error",
                               stats::standard_error(mom.e3));
      sample_moments(grid, mol, spec.seed, have, std::min(have, spec.max_samples - have), true, mom);
    }
    r.e3 = stats::mean(mom.e3);
    r.e3_error = stats::standard_error(mom.e3);
    if (spec.method == RenormMethod::monte_carlo) {
      r.e1 = stats::mean(mom.e1);
      r.e1_error = stats::standard_error(mom.e1);
    }
  }
  r.samples = static_cast<int>(std::max(mom.e1.size(), mom.e3.size()));
  r.value = r.e1 + r.e3;
  r.std_error = std::hypot(r.e1_error, r.e3_error);
  return r;
}

std::pair<RenormResult, RenormResult> renorm_cross_check(RenormSpec spec, const Grid& grid) {
  spec.method = RenormMethod::fourier_sum;
  const RenormResult f = renorm_constant(spec, grid);
  spec.method = RenormMethod::monte_carlo;
  const RenormResult m = renorm_constant(spec, grid);
  // In 3D both share the sampled correction, so only the first term is compared.
  const double diff = std::abs(f.e1 - m.e1);
  const double se = std::hypot(f.e1_error, m.e1_error);
  if (diff > 5.0 * se)
    throw ConsistencyError("Fourier-sum and Monte-Carlo constants differ by " + std::to_string(diff / se) +
                           " standard errors");
  return {f, m};
}

double CutoffF::operator()(double x) const {
  const double ax = std::abs(x);
  if (ax >= 3.0) return 0.0;
  const double base = -std::exp(2.0 * x);
  if (ax <= 2.0) return base;
  return base * (1.0 - smooth_step(ax - 2.0));
}

Field StochasticPack::W_level(int N) const {
  if (N >= 0 && N < static_cast<int>(W.size())) return W[N];
  if (N < 0) throw ParameterError("Green kernel level must be nonnegative");
  return green_apply(X, GreenKernel{N});
}

namespace {

StochasticPack start_pack(const Field& xi, const Mollifier& mollifier, int N_max, int dim) {
  const Grid& g = xi.grid();
  if (g.dim() != dim) throw ParameterError("pack dimension differs from the noise grid");
  if (g.topology() != Topology::torus) throw ParameterError("packs are built on a torus");
  if (N_max > nyquist_level(g))
    throw ResolutionError("N_max = " + std::to_string(N_max) + " exceeds the Nyquist level " +
                          std::to_string(nyquist_level(g)));
  StochasticPack p(g);
  p.dim = dim;
  p.epsilon = mollifier.epsilon;
  p.seed = xi.meta().seed;
  p.xi_eps = mollify(xi, mollifier);
  return p;
}

void finish_pack(StochasticPack& p, int N_max) {
  for (int N = 0; N <= N_max; ++N) p.W.push_back(green_apply(p.X, GreenKernel{N}));
}

}  // namespace

StochasticPack build_pack_2d(const Field& xi, const Mollifier& mollifier, int N_max) {
  StochasticPack p = start_pack(xi, mollifier, N_max, 2);
  p.renorm = renorm_constant(RenormSpec{2, mollifier.epsilon}, xi.grid());
  p.c_eps = p.renorm.value;
  Field tau = squared_norm(grad_g0(p.xi_eps));
  for (double& v : tau.values()) v -= p.c_eps;
  p.X = p.xi_eps + tau;
  p.tau.push_back(std::move(tau));
  finish_pack(p, N_max);
  return p;
}

StochasticPack build_pack_3d(const Field& xi, const Mollifier& mollifier, int N_max,
                             const std::optional<RenormResult>& constants) {
  StochasticPack p = start_pack(xi, mollifier, N_max, 3);
  p.renorm = constants ? *constants : renorm_constant(RenormSpec{3, mollifier.epsilon}, xi.grid());
  p.c_eps = p.renorm.e1 + p.renorm.e3;
  const std::vector<Field> g = grad_g0(p.xi_eps);
  Field tau1 = squared_norm(g);
  for (double& v : tau1.values()) v -= p.renorm.e1;
  const std::vector<Field> g1 = grad_g0(tau1);
  Field tau2 = dot(g, g1);
  Field tau3 = squared_norm(g1);
  for (double& v : tau3.values()) v -= p.renorm.e3;
  Field tau4 = dot(g, grad_g0(tau2));
  p.X = p.xi_eps + tau1 + 2.0 * tau2 + tau3;
  p.tau = {std::move(tau1), std::move(tau2), std::move(tau3), std::move(tau4)};
  finish_pack(p, N_max);
  return p;
}

Field transform_source(const StochasticPack& pack, int N) {
  const Field W = pack.W_level(N);
  std::vector<Field> grad;
  for (int a = 0; a < W.grid().dim(); ++a) grad.push_back(spectral_derivative(W, a));
  Field z = pack.xi_eps + squared_norm(grad) + spectral_laplacian(W);
  for (double& v : z.values()) v -= pack.c_eps;
  return z;
}

Field build_Y(const StochasticPack& pack, const CutoffF& F, int N, bool use_cutoff) {
  const Field W = pack.W_level(N);
  if (!use_cutoff && W.max_abs() > 2.0)
    throw GuardError("||W_N||_inf = " + std::to_string(W.max_abs()) + " leaves the window where F = -exp(2x)");
  Field y = transform_source(pack, N);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] *= use_cutoff ? F(W[i]) : -std::exp(2.0 * W[i]);
  return y;
}

int select_M(StochasticPack& pack, double delta_minus, double gamma, const Box& box) {
  const int top = nyquist_level(pack.X.grid());
  pack.level_norms.clear();
  for (int n = 0; n <= top; ++n) pack.level_norms.push_back(holder_norm(pack.W_level(n), delta_minus, box));
  int M = top;
  while (M > 0 && pack.level_norms[M - 1] <= gamma) --M;
  if (M == top && top > 0) {
    double best = pack.level_norms[0];
    for (int n = 0; n < top; ++n) best = std::min(best, pack.level_norms[n]);
    throw SaturationError("no level below the Nyquist level meets the Hoelder bound", best);
  }
  pack.M = M;
  return M;
}

double boundary_flux_pairing(const Field& phi, const Field& f, const Box& box) {
  const Grid& g = f.grid();
  validate_box(g, box);
  double acc = 0.0;
  for (const BoundaryNode& b : boundary_quadrature(g, box)) {
    std::array<int, 3> out = b.m, in = b.m;
    out[b.axis] += b.sign;
    in[b.axis] -= b.sign;
    acc += b.weight * phi.at(b.m) * (f.at(out) - f.at(in)) / (2.0 * g.spacing());
  }
  return acc;
}

double boundary_pairing(const Field& phi, const Field& xi_eps, const Box& box) {
  const Grid& g = xi_eps.grid();
  validate_box(g, box);
  const std::vector<Field> grad = grad_g0(xi_eps);
  double acc = 0.0;
  for (const BoundaryNode& b : boundary_quadrature(g, box)) acc += b.weight * phi.at(b.m) * b.sign * grad[b.axis].at(b.m);
  return acc;
}

PairingCheck boundary_pairing_check(const Field& phi, const Field& xi_eps, const Box& box) {
  const Grid& g = xi_eps.grid();
  validate_box(g, box);
  const int d = g.dim();
  const Field f = green_apply(xi_eps, GreenKernel{0});
  const std::vector<Field> gf = grad_g0(xi_eps);
  std::vector<Field> gphi;
  for (int a = 0; a < d; ++a) gphi.push_back(spectral_derivative(phi, a));
  const Field lap = spectral_laplacian(f);
  PairingCheck c;
  c.boundary = boundary_pairing(phi, xi_eps, box);
  const double cell = g.cell_volume();
  std::array<int, 3> m = box.lo;
  for (;;) {
    const std::size_t i = g.index(m);
    const double w = cell * cell_fraction(box, m, d);
    double gg = 0.0;
    for (int a = 0; a < d; ++a) gg += gphi[a][i] * gf[a][i];
    c.bulk_gradient += w * gg;
    c.bulk_laplacian += w * phi[i] * lap[i];
    int a = 0;
    for (; a < d; ++a) {
      if (++m[a] <= box.hi[a]) break;
      m[a] = box.lo[a];
    }
    if (a == d) break;
  }
  c.residual = std::abs(c.boundary - (c.bulk_gradient + c.bulk_laplacian));
  return c;
}

void write_pack_manifest(std::ostream& os, const StochasticPack& pack) {
  nlohmann::ordered_json j;
  j["seed"] = pack.seed;
  j["d"] = pack.dim;
  j["epsilon"] = pack.epsilon;
  j["c_eps"] = pack.c_eps;
  j["method"] = to_string(pack.renorm.method);
  j["M"] = pack.M;
  j["norms"] = pack.level_norms;
  os << j.dump(2) << '\n';
}

}  // namespace anderson
