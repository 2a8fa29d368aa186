#pragma once

#include <stdexcept>
#include <string>

namespace magicsim {

// Bad user input: malformed circuits, invalid configs, bad flags.
class InputError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// QASM syntax or semantic error with a source location (1-based).
class ParseError : public InputError {
 public:
  ParseError(const std::string& message, int line, int column, const std::string& source = "")
      : InputError((source.empty() ? "" : source + ":") + "line " + std::to_string(line) +
                   ", column " + std::to_string(column) + ": " + message),
        message_(message),
        line_(line),
        column_(column) {}

  const std::string& message() const { return message_; }
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  std::string message_;
  int line_;
  int column_;
};

class ConfigError : public InputError {
 public:
  using InputError::InputError;
};

// Failure during a simulation run (deadlock guard, cycle cap).
class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A conservation or structural invariant did not hold at runtime.
class InvariantViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace magicsim
