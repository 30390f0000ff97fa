#pragma once

#include <stdexcept>
#include <string>

namespace anderson {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A parameter lies outside its admissible range.
class ParameterError : public Error {
 public:
  using Error::Error;
};

/// The grid cannot resolve the requested scale (e.g. epsilon < 2h).
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// Boxes, tilings or partitions are inconsistent with the sampled torus.
class GeometryError : public Error {
 public:
  using Error::Error;
};

/// An iterative method ran out of its budget.
class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double best_residual)
      : Error(what), best_residual_(best_residual) {}
  double best_residual() const { return best_residual_; }

 private:
  double best_residual_;
};

/// A fit had too few usable points, or all-zero data.
class FitError : public Error {
 public:
  using Error::Error;
};

/// Two independent routes to the same number disagree.
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

/// The cutoff window |W| <= 2 was violated while F was replaced by -exp(2x).
class GuardError : public Error {
 public:
  using Error::Error;
};

/// No cutoff level below Nyquist satisfies the Hoelder criterion.
class SaturationError : public Error {
 public:
  SaturationError(const std::string& what, double min_norm)
      : Error(what), min_norm_(min_norm) {}
  double min_norm() const { return min_norm_; }

 private:
  double min_norm_;
};

/// Malformed configuration or file schema.
class SchemaError : public Error {
 public:
  using Error::Error;
};

}  // namespace anderson
