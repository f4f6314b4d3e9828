#pragma once

#include <stdexcept>
#include <string>

namespace dipl {

// Base for everything this library throws on purpose.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Shape mismatches, out-of-range labels, invalid hyperparameters.
class InvalidInputError : public Error {
 public:
  explicit InvalidInputError(const std::string& msg) : Error(msg) {}
};

// Singular systems, non-convergence, non-finite results.
class NumericError : public Error {
 public:
  explicit NumericError(const std::string& msg) : Error(msg) {}
};

// Malformed files; message carries path and line where known.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& msg) : Error(msg) {}
};

}  // namespace dipl
