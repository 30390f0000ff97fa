#include "anderson/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>
#include <utility>

namespace anderson {

namespace {

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

// Plans are created once per shape on private buffers and executed through
// the new-array interface, which is thread safe.
struct PlanPair {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
};

class PlanCache {
 public:
  static PlanCache& instance() {
    static PlanCache cache;
    return cache;
  }

  PlanPair get(int dim, int n) {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = plans_.find({dim, n});
    if (it != plans_.end()) return it->second;
    std::size_t real_size = 1, spec_size = static_cast<std::size_t>(n / 2 + 1);
    for (int a = 0; a < dim; ++a) real_size *= static_cast<std::size_t>(n);
    for (int a = 1; a < dim; ++a) spec_size *= static_cast<std::size_t>(n);
    std::unique_ptr<double, FftwFree> r(fftw_alloc_real(real_size));
    std::unique_ptr<fftw_complex, FftwFree> c(fftw_alloc_complex(spec_size));
    // FFTW is row major with the last axis fastest; our axis 0 is fastest.
    int dims[3] = {n, n, n};
    PlanPair p;
    p.forward = fftw_plan_dft_r2c(dim, dims, r.get(), c.get(), FFTW_ESTIMATE);
    p.backward = fftw_plan_dft_c2r(dim, dims, c.get(), r.get(), FFTW_ESTIMATE);
    plans_[{dim, n}] = p;
    return p;
  }

 private:
  std::mutex mutex_;
  std::map<std::pair<int, int>, PlanPair> plans_;
};

}  // namespace

FourierField fft_forward(const Field& f) {
  const Grid& g = f.grid();
  const PlanPair p = PlanCache::instance().get(g.dim(), g.n());
  std::unique_ptr<double, FftwFree> in(fftw_alloc_real(g.size()));
  std::unique_ptr<fftw_complex, FftwFree> out(fftw_alloc_complex(g.spectral_size()));
  std::memcpy(in.get(), f.values().data(), g.size() * sizeof(double));
  fftw_execute_dft_r2c(p.forward, in.get(), out.get());
  FourierField hat(g, f.meta());
  auto c = hat.coefficients();
  const double scale = g.cell_volume();
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = {out.get()[i][0] * scale, out.get()[i][1] * scale};
  return hat;
}

Field fft_inverse(const FourierField& hat) {
  const Grid& g = hat.grid();
  const PlanPair p = PlanCache::instance().get(g.dim(), g.n());
  std::unique_ptr<fftw_complex, FftwFree> in(fftw_alloc_complex(g.spectral_size()));
  std::unique_ptr<double, FftwFree> out(fftw_alloc_real(g.size()));
  auto c = hat.coefficients();
  for (std::size_t i = 0; i < c.size(); ++i) {
    in.get()[i][0] = c[i].real();
    in.get()[i][1] = c[i].imag();
  }
  fftw_execute_dft_c2r(p.backward, in.get(), out.get());
  Field f(g, hat.meta());
  const double scale = 1.0 / std::pow(g.side(), g.dim());
  auto v = f.values();
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = out.get()[i] * scale;
  return f;
}

}  // namespace anderson
