#pragma once

#include <stdexcept>
#include <string>

namespace phaselab {

// Every error carries the process exit code the CLI reports for it.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int exit_code) : std::runtime_error(what), exit_code_(exit_code) {}
  int exit_code() const noexcept { return exit_code_; }

 private:
  int exit_code_;
};

// Malformed input: bad parameters, schema violations, mismatched grids.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(what, 1) {}
};

// Marginals that violate the compatibility conditions beyond tolerance.
class ConsistencyError : public Error {
 public:
  explicit ConsistencyError(const std::string& what) : Error(what, 2) {}
};

// Quadrature or eigensolver failure.
class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(what, 3) {}
};

}  // namespace phaselab
