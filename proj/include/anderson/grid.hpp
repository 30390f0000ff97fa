#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string>

namespace anderson {

enum class Topology { torus, box };

/// Uniform lattice of n^d sites with spacing h = L/n. Sites sit at x = h*m,
/// m in {0..n-1}^d; index 0 runs fastest in linear storage.
class Grid {
 public:
  Grid(int dim, double side_length, int points_per_side,
       Topology topology = Topology::torus);

  int dim() const { return dim_; }
  double side() const { return side_; }
  int n() const { return n_; }
  double spacing() const { return side_ / n_; }
  Topology topology() const { return topology_; }

  std::size_t size() const;
  /// Volume element h^d.
  double cell_volume() const;

  std::size_t index(const std::array<int, 3>& m) const {
    std::size_t idx = 0;
    for (int a = dim_ - 1; a >= 0; --a) idx = idx * n_ + static_cast<std::size_t>(m[a]);
    return idx;
  }
  std::array<int, 3> multi_index(std::size_t idx) const {
    std::array<int, 3> m{0, 0, 0};
    for (int a = 0; a < dim_; ++a) {
      m[a] = static_cast<int>(idx % n_);
      idx /= n_;
    }
    return m;
  }
  /// Periodic wrap of a lattice coordinate.
  int wrap(int m) const { return ((m % n_) + n_) % n_; }

  /// Number of complex coefficients in the real-to-complex half spectrum.
  std::size_t spectral_size() const;
  /// Centered integer wavevector of half-spectrum slot `idx`.
  std::array<int, 3> wave_index(std::size_t idx) const;

  bool operator==(const Grid& other) const;
  bool operator!=(const Grid& other) const { return !(*this == other); }

  std::string describe() const;

 private:
  int dim_;
  double side_;
  int n_;
  Topology topology_;
};

/// Wavevector k = m / L of a centered integer index.
inline std::array<double, 3> wavevector(const Grid& g, const std::array<int, 3>& m) {
  return {m[0] / g.side(), m[1] / g.side(), m[2] / g.side()};
}

}  // namespace anderson
