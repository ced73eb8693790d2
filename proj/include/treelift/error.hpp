#pragma once

#include <stdexcept>
#include <string>

namespace treelift {

// Raised for violated preconditions and malformed input. Every module reports
// errors this way; the CLI maps it to exit code 2.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a configured computational budget (depth, degree, subset
// enumeration) is exhausted before a result is found.
class BudgetError : public Error {
 public:
  explicit BudgetError(const std::string& what) : Error(what) {}
};

}  // namespace treelift
