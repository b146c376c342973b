#pragma once

#include <stdexcept>
#include <string>

namespace sofic {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed text input: group specs, element literals, rationals, files.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A group-level failure: unsupported family, axiom violation, bad element.
class GroupError : public Error {
 public:
  using Error::Error;
};

/// A coordinate function was evaluated outside its declared window.
class WindowError : public Error {
 public:
  using Error::Error;
};

/// Inconsistent approximation data (missing assignment, size mismatch, ...).
class ApproximationError : public Error {
 public:
  using Error::Error;
};

/// A construction would exceed its configured enumeration or dimension cap.
class CapExceeded : public Error {
 public:
  using Error::Error;
};

/// An error raised inside a multi-stage pipeline, tagged with its stage.
class StageError : public Error {
 public:
  StageError(std::string stage, const std::string& what)
      : Error("[" + stage + "] " + what), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

}  // namespace sofic
