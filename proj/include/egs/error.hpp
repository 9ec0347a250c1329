#pragma once

#include <stdexcept>
#include <string>

namespace egs {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Invalid value in a spec/config structure; message names the field.
struct ValidationError : Error {
  using Error::Error;
};

// Malformed text input; message carries the line number where known.
struct ParseError : Error {
  using Error::Error;
};

// Structurally valid text whose counts/sections disagree.
struct FormatError : Error {
  using Error::Error;
};

struct ArgumentError : Error {
  using Error::Error;
};

// Tensor operands of incompatible shape; message lists both shapes.
struct ShapeError : Error {
  using Error::Error;
};

// NaN/Inf surfaced by a tensor op.
struct NumericError : Error {
  using Error::Error;
};

// Candidate pool too small to honor the minimum budget.
struct InfeasiblePoolError : Error {
  using Error::Error;
};

// Record set missing a key required by an aggregation.
struct AggregationError : Error {
  using Error::Error;
};

struct IoError : Error {
  using Error::Error;
};

}  // namespace egs
