#pragma once

#include <stdexcept>
#include <string>

namespace olrsim {

// Values double as process exit codes for the CLI.
enum class ErrorCategory : int {
  kConfig = 2,
  kDomain = 3,
  kUpdate = 4,
  kState = 5,
  kIo = 6,
  kUndefined = 7,
};

const char* to_string(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }
  int exit_code() const noexcept { return static_cast<int>(category_); }

 private:
  ErrorCategory category_;
};

/// Invalid configuration or construction parameters.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCategory::kConfig, what) {}
};

/// An argument lies outside the domain of the operation (e.g. an answer that
/// is not part of the prompt's answer space).
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCategory::kDomain, what) {}
};

/// A policy update produced a non-finite gradient.
class UpdateError : public Error {
 public:
  UpdateError(const std::string& what, int prompt_id)
      : Error(ErrorCategory::kUpdate, what), prompt_id_(prompt_id) {}

  int prompt_id() const noexcept { return prompt_id_; }

 private:
  int prompt_id_;
};

/// Stateful object used out of order (e.g. non-monotonic trajectory epochs).
class StateError : public Error {
 public:
  explicit StateError(const std::string& what)
      : Error(ErrorCategory::kState, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCategory::kIo, what) {}
};

/// A quantity is mathematically undefined for the given inputs.
class UndefinedError : public Error {
 public:
  explicit UndefinedError(const std::string& what)
      : Error(ErrorCategory::kUndefined, what) {}
};

}  // namespace olrsim
