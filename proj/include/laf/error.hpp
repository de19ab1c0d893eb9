#pragma once

#include <stdexcept>
#include <string>

namespace laf {

/// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Bad arguments or configuration.
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed input files.
class FormatError : public Error {
public:
  using Error::Error;
};

/// Numerical failure during model training (non-finite loss etc).
class TrainingError : public Error {
public:
  using Error::Error;
};

} // namespace laf
