#pragma once

#include <stdexcept>
#include <string>

namespace repread {

// Broad failure categories. The CLI maps these onto process exit codes.
enum class ErrorKind {
  invalid_parameter,
  validation,
  labeling,
  truncation,
  convergence,
  insufficient_statistics,
  insufficient_jumps,
  empty_region,
  io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string &what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class InvalidParameter : public Error {
 public:
  explicit InvalidParameter(const std::string &what)
      : Error(ErrorKind::invalid_parameter, what) {}
};

/// Schema or data validation failure. `key_path` names the offending
/// config key (e.g. "readout.gamma_bright_Hz") or input location.
class ValidationError : public Error {
 public:
  ValidationError(std::string key_path, const std::string &what)
      : Error(ErrorKind::validation, key_path + ": " + what),
        key_path_(std::move(key_path)) {}

  const std::string &key_path() const noexcept { return key_path_; }

 private:
  std::string key_path_;
};

class LabelingError : public Error {
 public:
  explicit LabelingError(const std::string &what)
      : Error(ErrorKind::labeling, what) {}
};

class TruncationError : public Error {
 public:
  explicit TruncationError(const std::string &what)
      : Error(ErrorKind::truncation, what) {}
};

class InsufficientStatistics : public Error {
 public:
  explicit InsufficientStatistics(const std::string &what)
      : Error(ErrorKind::insufficient_statistics, what) {}
};

class InsufficientJumps : public Error {
 public:
  explicit InsufficientJumps(const std::string &what)
      : Error(ErrorKind::insufficient_jumps, what) {}
};

class EmptyConclusiveRegion : public Error {
 public:
  explicit EmptyConclusiveRegion(const std::string &what)
      : Error(ErrorKind::empty_region, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string &what) : Error(ErrorKind::io, what) {}
};

}  // namespace repread
