#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "anderson/grid.hpp"

namespace anderson {

enum class NoiseKind { white, riesz, derived };

std::string to_string(NoiseKind kind);
NoiseKind noise_kind_from_string(const std::string& s);

/// Provenance carried alongside sampled and derived fields.
struct FieldMeta {
  NoiseKind kind = NoiseKind::derived;
  double alpha = 0.0;  // Riesz exponent, unused otherwise
  std::uint64_t seed = 0;
  double epsilon = 0.0;
};

/// Real scalar field in physical space on a grid.
class Field {
 public:
  explicit Field(Grid grid, FieldMeta meta = {});
  Field(Grid grid, std::vector<double> values, FieldMeta meta = {});

  const Grid& grid() const { return grid_; }
  const FieldMeta& meta() const { return meta_; }
  FieldMeta& meta() { return meta_; }

  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }
  std::size_t size() const { return values_.size(); }

  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }

  double at(const std::array<int, 3>& m) const { return values_[grid_.index(m)]; }

  /// Periodic lattice shift: result(x) = this(x + shift*h).
  Field shifted(const std::array<int, 3>& shift) const;

  Field& operator+=(const Field& other);
  Field& operator-=(const Field& other);
  Field& operator*=(double a);

  double max_abs() const;
  double mean() const;

 private:
  Grid grid_;
  std::vector<double> values_;
  FieldMeta meta_;
};

Field operator+(Field a, const Field& b);
Field operator-(Field a, const Field& b);
Field operator*(double a, Field f);
/// Pointwise product.
Field hadamard(const Field& a, const Field& b);
/// Constant field.
Field constant_field(const Grid& grid, double value);

/// Half spectrum of a real field with continuum normalization
/// f_hat(k) = h^d sum_x f(x) exp(-2 pi i k.x).
class FourierField {
 public:
  explicit FourierField(Grid grid, FieldMeta meta = {});

  const Grid& grid() const { return grid_; }
  const FieldMeta& meta() const { return meta_; }
  FieldMeta& meta() { return meta_; }
  std::span<const std::complex<double>> coefficients() const { return coeffs_; }
  std::span<std::complex<double>> coefficients() { return coeffs_; }
  std::size_t size() const { return coeffs_.size(); }

  /// (1/L^d) sum_k |f_hat(k)|^2 over the full spectrum, i.e. the L^2 energy.
  double energy() const;

 private:
  Grid grid_;
  std::vector<std::complex<double>> coeffs_;
  FieldMeta meta_;
};

/// h^d sum_x f(x)^2.
double l2_energy(const Field& f);

}  // namespace anderson
