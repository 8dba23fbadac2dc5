#pragma once

#include <stdexcept>
#include <string>

namespace wavecs {

/// Broad failure class; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  usage,      // bad arguments or configuration
  data,       // missing, corrupt or inconsistent input
  numerical,  // solver or estimator produced non-finite results
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class UsageError : public Error {
 public:
  explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

class NumericalError : public Error {
 public:
  explicit NumericalError(const std::string& what) : Error(ErrorKind::numerical, what) {}
};

/// Process exit code for an error kind: 1 usage, 2 data, 3 numerical.
int exit_code(ErrorKind kind) noexcept;

}  // namespace wavecs
