#include <cmath>

#include "anderson/error.hpp"
#include "anderson/format.hpp"
#include "anderson/harmonic.hpp"

namespace anderson {

namespace {

// Daubechies scaling filter with four vanishing moments (8 taps).
constexpr double kLow[8] = {0.2303778133088964,  0.7148465705529154,  0.6308807679298587, -0.0279837694168599,
                            -0.1870348117190931, 0.0308413818355607,  0.0328830116668852, -0.0105974017850690};

double high(int i) { return ((i % 2) ? -1.0 : 1.0) * kLow[7 - i]; }

// One periodic analysis step along `axis` of an s^d block: lows to the first
// half, highs to the second.
void analyse_axis(std::vector<double>& a, int s, int d, int axis) {
  const int half = s / 2;
  std::vector<double> line(s), out(s);
  std::size_t stride = 1;
  for (int k = 0; k < axis; ++k) stride *= static_cast<std::size_t>(s);
  std::size_t total = 1;
  for (int k = 0; k < d; ++k) total *= static_cast<std::size_t>(s);
  for (std::size_t base = 0; base < total; ++base) {
    if ((base / stride) % static_cast<std::size_t>(s) != 0) continue;
    for (int i = 0; i < s; ++i) line[i] = a[base + i * stride];
    for (int k = 0; k < half; ++k) {
      double lo = 0.0, hi = 0.0;
      for (int t = 0; t < 8; ++t) {
        const double v = line[(2 * k + t) % s];
        lo += kLow[t] * v;
        hi += high(t) * v;
      }
      out[k] = lo;
      out[half + k] = hi;
    }
    for (int i = 0; i < s; ++i) a[base + i * stride] = out[i];
  }
}

}  // namespace

double wavelet_besov_norm(const Field& f, const BesovParams& params) {
  const Grid& g = f.grid();
  const int d = g.dim();
  const double L = g.side();
  if (params.p < 1.0 || params.q < 1.0) throw ParameterError("wavelet Besov norm needs p, q >= 1");
  if (params.r >= 4.0) throw ParameterError("four vanishing moments cannot resolve regularity r >= 4");

  int s = g.n();
  std::vector<double> a(f.values().begin(), f.values().end());
  const double h = g.spacing();
  for (double& v : a) v *= std::pow(h, d / 2.0);

  auto weight = [&](const std::array<int, 3>& k, int side) {
    if (params.sigma == 0.0) return 1.0;
    double r2 = 0.0;
    for (int ax = 0; ax < d; ++ax) {
      const double x = (k[ax] + 0.5) * L / side - L / 2.0;
      r2 += x * x;
    }
    return std::pow(1.0 + r2, -params.sigma / 2.0);
  };
  auto accumulate = [&](double& acc, double v) {
    if (std::isinf(params.p)) acc = std::max(acc, v);
    else acc += std::pow(v, params.p);
  };
  auto level_term = [&](int level, double acc) {
    const double lp = std::isinf(params.p) ? acc : std::pow(acc, 1.0 / params.p);
    const double dp = std::isinf(params.p) ? 0.0 : d / params.p;
    return std::pow(2.0, level * (params.r - dp)) * lp;
  };

  std::vector<double> terms;
  // Details produced by halving a side of s samples live at scale 2L/s = 2^{-(level-1)}.
  while (s >= 2 && s % 2 == 0 && s >= 2.0 * L - 1e-9) {
    const int level = static_cast<int>(std::lround(1.0 + std::log2(s / (2.0 * L))));
    for (int ax = 0; ax < d; ++ax) analyse_axis(a, s, d, ax);
    const int half = s / 2;
    std::vector<double> next(static_cast<std::size_t>(std::pow(half, d)));
    double acc = 0.0;
    const double scale = std::pow(2.0, level * d / 2.0);
    std::size_t total = a.size();
    for (std::size_t i = 0; i < total; ++i) {
      std::array<int, 3> m{0, 0, 0};
      std::size_t r = i;
      bool detail = false;
      for (int ax = 0; ax < d; ++ax) {
        m[ax] = static_cast<int>(r % s);
        r /= s;
        if (m[ax] >= half) {
          detail = true;
          m[ax] -= half;
        }
      }
      if (detail) {
        accumulate(acc, weight(m, half) * scale * std::abs(a[i]));
      } else {
        std::size_t j = 0;
        for (int ax = d - 1; ax >= 0; --ax) j = j * half + m[ax];
        next[j] = a[i];
      }
    }
    terms.push_back(level_term(level, acc));
    a.swap(next);
    s = half;
  }
  double acc0 = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::array<int, 3> m{0, 0, 0};
    std::size_t r = i;
    for (int ax = 0; ax < d; ++ax) {
      m[ax] = static_cast<int>(r % s);
      r /= s;
    }
    accumulate(acc0, weight(m, s) * std::abs(a[i]));
  }
  terms.push_back(level_term(0, acc0));

  double norm = 0.0;
  for (double t : terms) {
    if (std::isinf(params.q)) norm = std::max(norm, t);
    else norm += std::pow(t, params.q);
  }
  return std::isinf(params.q) ? norm : std::pow(norm, 1.0 / params.q);
}

void write_norm_report(std::ostream& os, const std::vector<NormRow>& rows) {
  auto num = [](double v) { return fmt(v); };
  os << "field_id,p,q,r,sigma,estimator,value\n";
  for (const auto& row : rows)
    os << row.field_id << ',' << num(row.params.p) << ',' << num(row.params.q) << ',' << num(row.params.r) << ','
       << num(row.params.sigma) << ',' << row.estimator << ',' << num(row.value) << '\n';
}

}  // namespace anderson
