#pragma once

#include <stdexcept>
#include <string>

namespace sosim {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input errors: malformed files or structurally invalid networks.

class InputError : public Error {
 public:
  using Error::Error;
};

class ParseError : public InputError {
 public:
  ParseError(const std::string& what, int line)
      : InputError("line " + std::to_string(line) + ": " + what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

class SchemaError : public InputError {
 public:
  using InputError::InputError;
};

class ValidationError : public InputError {
 public:
  using InputError::InputError;
};

// Simulation errors: the model cannot be evaluated as configured.

class SimulationError : public Error {
 public:
  using Error::Error;
};

class NotProductive : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class NotProducible : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class NonConvergence : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class UnpricedDemand : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class UnresolvedTarget : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class Disconnected : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class UnknownScenario : public SimulationError {
 public:
  using SimulationError::SimulationError;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace sosim
