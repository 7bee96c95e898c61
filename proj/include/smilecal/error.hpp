#pragma once

#include <stdexcept>
#include <string>

namespace smilecal {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (curve or smile files, parameter files).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A formula or query evaluated outside the region where it is defined.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration or argument violating a documented precondition.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Monte Carlo path produced a non-finite state.
class SimulationError : public Error {
 public:
  using Error::Error;
};

}  // namespace smilecal
