#pragma once

#include <stdexcept>
#include <string>

namespace svrc {

// Raised when a component oracle produces NaN/Inf; carries the component index.
class NonFiniteOracleError : public std::runtime_error {
 public:
  NonFiniteOracleError(const std::string& what, int component)
      : std::runtime_error(what + " (component " + std::to_string(component) + ")"),
        component_(component) {}
  int component() const { return component_; }

 private:
  int component_ = -1;
};

class EmptyBatchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BatchTooLargeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class CenteringError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LinearAlgebraError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SolverStallError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidScheduleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DatasetFormatError : public std::runtime_error {
 public:
  DatasetFormatError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_ = 0;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace svrc
