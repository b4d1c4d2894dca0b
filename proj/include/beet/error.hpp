#pragma once

#include <stdexcept>
#include <string>

namespace beet {

/// Base class for every error raised by the toolkit.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed input text (JSON, CSV, JSON lines).
class ParseError : public Error {
 public:
  using Error::Error;
};

/// Input parsed but violates a domain invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Filesystem or PNG codec failure.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Model backend failure; `stage()` names the pipeline stage that failed.
class BackendError : public Error {
 public:
  BackendError(std::string stage, const std::string& what)
      : Error(stage + ": " + what), stage_(std::move(stage)) {}
  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace beet
