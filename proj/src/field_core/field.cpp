#include "anderson/field.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "anderson/error.hpp"

namespace anderson {

std::string to_string(NoiseKind kind) {
  switch (kind) {
    case NoiseKind::white: return "white";
    case NoiseKind::riesz: return "riesz";
    case NoiseKind::derived: return "derived";
  }
  return "derived";
}

NoiseKind noise_kind_from_string(const std::string& s) {
  if (s == "white") return NoiseKind::white;
  if (s == "riesz") return NoiseKind::riesz;
  if (s == "derived") return NoiseKind::derived;
  throw SchemaError("unknown noise kind '" + s + "'");
}

Field::Field(Grid grid, FieldMeta meta)
    : grid_(grid), values_(grid.size(), 0.0), meta_(meta) {}

Field::Field(Grid grid, std::vector<double> values, FieldMeta meta)
    : grid_(grid), values_(std::move(values)), meta_(meta) {
  if (values_.size() != grid_.size()) throw ParameterError("field size does not match grid");
}

Field Field::shifted(const std::array<int, 3>& shift) const {
  Field out(grid_, meta_);
  for (std::size_t i = 0; i < values_.size(); ++i) {
    auto m = grid_.multi_index(i);
    for (int a = 0; a < grid_.dim(); ++a) m[a] = grid_.wrap(m[a] + shift[a]);
    out.values_[i] = values_[grid_.index(m)];
  }
  return out;
}

Field& Field::operator+=(const Field& other) {
  if (other.grid_ != grid_) throw ParameterError("grid mismatch in field addition");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& other) {
  if (other.grid_ != grid_) throw ParameterError("grid mismatch in field subtraction");
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= other.values_[i];
  return *this;
}

Field& Field::operator*=(double a) {
  for (double& v : values_) v *= a;
  return *this;
}

double Field::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double Field::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         static_cast<double>(values_.size());
}

Field operator+(Field a, const Field& b) { return a += b; }
Field operator-(Field a, const Field& b) { return a -= b; }
Field operator*(double a, Field f) { return f *= a; }

Field hadamard(const Field& a, const Field& b) {
  if (a.grid() != b.grid()) throw ParameterError("grid mismatch in pointwise product");
  Field out(a.grid());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] * b[i];
  return out;
}

Field constant_field(const Grid& grid, double value) {
  return Field(grid, std::vector<double>(grid.size(), value));
}

FourierField::FourierField(Grid grid, FieldMeta meta)
    : grid_(grid), coeffs_(grid.spectral_size(), {0.0, 0.0}), meta_(meta) {}

double FourierField::energy() const {
  // Slots with 0 < m0 < n/2 stand for a conjugate pair.
  const int half = grid_.n() / 2;
  double e = 0.0;
  for (std::size_t i = 0; i < coeffs_.size(); ++i) {
    const int m0 = static_cast<int>(i % static_cast<std::size_t>(half + 1));
    const double w = (m0 == 0 || m0 == half) ? 1.0 : 2.0;
    e += w * std::norm(coeffs_[i]);
  }
  return e / std::pow(grid_.side(), grid_.dim());
}

double l2_energy(const Field& f) {
  double s = 0.0;
  for (double v : f.values()) s += v * v;
  return s * f.grid().cell_volume();
}

}  // namespace anderson
