#pragma once

#include <stdexcept>
#include <string>

namespace prcd {

/// Failure category, mapped onto CLI exit codes by the harness.
enum class ErrorCategory { Input = 2, Structural = 3, Internal = 4 };

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Bad argument, malformed file, out-of-range index.
class InputError : public Error {
 public:
  explicit InputError(const std::string& what) : Error(ErrorCategory::Input, what) {}
};

/// The problem is well-formed syntactically but violates a modelling assumption
/// (a component touching no block, a zero Lipschitz constant, ...).
class StructuralError : public Error {
 public:
  explicit StructuralError(const std::string& what)
      : Error(ErrorCategory::Structural, what) {}
};

/// Broken solver invariant, e.g. the residual cache drifted from the iterate.
class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorCategory::Internal, what) {}
};

}  // namespace prcd
