#pragma once

#include <stdexcept>
#include <string>

namespace slopeforge {

enum class ErrorKind { parse, precondition, budget, convergence, verification };

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

struct ParseError : Error {
  explicit ParseError(const std::string& what) : Error(ErrorKind::parse, what) {}
};

struct PreconditionError : Error {
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

/// A node, point, or cell budget was exhausted.
struct BudgetExceeded : Error {
  explicit BudgetExceeded(const std::string& what) : Error(ErrorKind::budget, what) {}
};

struct ConvergenceError : Error {
  explicit ConvergenceError(const std::string& what) : Error(ErrorKind::convergence, what) {}
};

struct VerificationError : Error {
  explicit VerificationError(const std::string& what) : Error(ErrorKind::verification, what) {}
};

}  // namespace slopeforge
