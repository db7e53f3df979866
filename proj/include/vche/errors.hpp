#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vche {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two objects that must share a grid, time grid or problem configuration do not.
class ConfigMismatch : public Error {
 public:
  using Error::Error;
};

/// Invalid user input (configuration values, constraint bounds, file contents).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// A time integration produced a non-finite coefficient.
class NonFinite : public Error {
 public:
  NonFinite(const std::string& what, std::size_t step)
      : Error(what + " (step " + std::to_string(step) + ")"), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

class LineSearchStalled : public Error {
 public:
  using Error::Error;
};

class NoCriticalDirections : public Error {
 public:
  using Error::Error;
};

class NominalNotCertified : public Error {
 public:
  using Error::Error;
};

}  // namespace vche
