#pragma once

#include <stdexcept>
#include <string>

namespace orbitduel {

// Base class for all library errors.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Incompatible matrix/vector dimensions.
struct ShapeError : Error {
  using Error::Error;
};

// Input not Hermitian within tolerance.
struct SymmetryError : Error {
  using Error::Error;
};

// Matrix not positive definite where the operation requires it.
struct SingularityError : Error {
  using Error::Error;
};

// Invalid numeric input: NaN/Inf entries, argument out of its stated range.
struct DomainError : Error {
  using Error::Error;
};

// Index outside the valid range (frame number, grid cell, ...).
struct RangeError : Error {
  using Error::Error;
};

// Infeasible scene geometry (satellite at or below the horizon, empty selection).
struct GeometryError : Error {
  using Error::Error;
};

// Invalid scenario or constellation configuration.
struct ConfigError : Error {
  using Error::Error;
};

// Malformed input file (CSV row, scenario line).
struct ParseError : Error {
  using Error::Error;
};

// Filesystem failure.
struct IoError : Error {
  using Error::Error;
};

}  // namespace orbitduel
