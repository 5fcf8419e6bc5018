#pragma once

#include <stdexcept>
#include <string>

namespace pom {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Homodyne on a quadrature with (numerically) zero variance.
class SingularMeasurement : public Error {
 public:
  using Error::Error;
};

class InvalidState : public Error {
 public:
  using Error::Error;
};

class RootNotFound : public Error {
 public:
  using Error::Error;
};

class SingularInversion : public Error {
 public:
  using Error::Error;
};

}  // namespace pom
