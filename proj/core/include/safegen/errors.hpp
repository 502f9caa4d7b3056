#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace safegen {

/// Root of every error the library raises. Subclasses map one-to-one onto
/// the failure modes a caller is expected to distinguish.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// spec_model
class SyntaxError : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  SchemaError(std::string path, const std::string& what);
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

class InvariantError : public Error {
 public:
  using Error::Error;
};

// llm_handler
class ContextOverflow : public Error {
 public:
  ContextOverflow(std::size_t length, std::size_t budget);
  std::size_t length() const noexcept { return length_; }
  std::size_t budget() const noexcept { return budget_; }

 private:
  std::size_t length_;
  std::size_t budget_;
};

class TransportError : public Error {
 public:
  using Error::Error;
};

class BackendExhausted : public Error {
 public:
  using Error::Error;
};

class DeadlineExceeded : public Error {
 public:
  using Error::Error;
};

class NoCodeFound : public Error {
 public:
  using Error::Error;
};

// state_ledger
class IllegalTransition : public Error {
 public:
  using Error::Error;
};

class StorageError : public Error {
 public:
  using Error::Error;
};

// static_validation: infrastructure fault, never the candidate's.
class ToolError : public Error {
 public:
  using Error::Error;
};

// integration_sim
class ControllerCrashed : public Error {
 public:
  using Error::Error;
};

class ProtocolViolation : public Error {
 public:
  using Error::Error;
};

// orchestrator
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace safegen
