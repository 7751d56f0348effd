#pragma once

#include <stdexcept>
#include <string>

namespace gom {

// Base of all library failures. The subclasses map one-to-one onto the CLI
// exit codes (input 2, identification 3, prediction 4).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or out-of-range input data, schemas, or arguments.
class InputError : public Error {
 public:
  using Error::Error;
};

// The latent support cannot be identified at the requested rank, or a
// required linear subsystem is singular.
class IdentificationError : public Error {
 public:
  using Error::Error;
};

// A conditional quantity was requested for a cell where the anchor
// preconditions do not hold.
class PredictionError : public Error {
 public:
  using Error::Error;
};

}  // namespace gom
