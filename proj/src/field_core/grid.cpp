#include "anderson/grid.hpp"

#include <cmath>
#include <sstream>

#include "anderson/error.hpp"

namespace anderson {

namespace {
bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }
}  // namespace

Grid::Grid(int dim, double side_length, int points_per_side, Topology topology)
    : dim_(dim), side_(side_length), n_(points_per_side), topology_(topology) {
  if (dim != 2 && dim != 3) throw ParameterError("grid dimension must be 2 or 3");
  if (!(side_length > 0.0) || !std::isfinite(side_length))
    throw ParameterError("grid side length must be positive");
  if (points_per_side < 8 || !is_power_of_two(points_per_side))
    throw ParameterError("points per side must be a power of two >= 8");
}

std::size_t Grid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
  return s;
}

double Grid::cell_volume() const { return std::pow(spacing(), dim_); }

std::size_t Grid::spectral_size() const {
  std::size_t s = static_cast<std::size_t>(n_ / 2 + 1);
  for (int a = 1; a < dim_; ++a) s *= static_cast<std::size_t>(n_);
  return s;
}

std::array<int, 3> Grid::wave_index(std::size_t idx) const {
  const std::size_t half = static_cast<std::size_t>(n_ / 2 + 1);
  std::array<int, 3> m{0, 0, 0};
  m[0] = static_cast<int>(idx % half);
  idx /= half;
  for (int a = 1; a < dim_; ++a) {
    const int i = static_cast<int>(idx % n_);
    idx /= n_;
    m[a] = i < n_ / 2 ? i : i - n_;
  }
  return m;
}

bool Grid::operator==(const Grid& other) const {
  return dim_ == other.dim_ && side_ == other.side_ && n_ == other.n_ &&
         topology_ == other.topology_;
}

std::string Grid::describe() const {
  std::ostringstream os;
  os << "d=" << dim_ << " n=" << n_ << " L=" << side_
     << (topology_ == Topology::torus ? " torus" : " box");
  return os.str();
}

}  // namespace anderson
