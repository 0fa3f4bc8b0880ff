#pragma once

#include <stdexcept>
#include <string>

namespace ctele {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Unknown, duplicate or otherwise inconsistent subsystem labels.
class LayoutError : public Error {
  public:
    using Error::Error;
};

/// Matrix or vector dimension does not match the subsystems it acts on.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// A state that must be normalized is not, or a projection has zero norm.
class NormError : public Error {
  public:
    using Error::Error;
};

class HermiticityError : public Error {
  public:
    using Error::Error;
};

/// Invalid physical parameters, schedules or command-line configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

/// A measurement outcome has no entry in the correction table in use.
class CorrectionTableError : public Error {
  public:
    using Error::Error;
};

/// No candidate correction recovers the teleported state for some branch.
class DerivationError : public Error {
  public:
    using Error::Error;
};

} // namespace ctele
