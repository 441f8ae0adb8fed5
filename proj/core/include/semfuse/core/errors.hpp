#pragma once

#include <stdexcept>
#include <string>

namespace semfuse {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite or otherwise malformed numeric input.
class InvalidInput : public Error {
 public:
  using Error::Error;
};

/// A documented precondition of an operation was not met by the caller.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// Inconsistent configuration: mismatched label sets, class counts, voxel sizes.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Query outside a valid domain, e.g. a timestamp beyond a trajectory.
class OutOfRange : public Error {
 public:
  using Error::Error;
};

/// File could not be parsed. The message carries file and line context.
class ParseError : public Error {
 public:
  ParseError(const std::string& file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what), file_(file), line_(line) {}
  explicit ParseError(const std::string& what) : Error(what) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  std::string file_;
  std::size_t line_ = 0;
};

}  // namespace semfuse
