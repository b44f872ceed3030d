#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace causalrag {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed input file. `line()` is 1-based, 0 when not line-oriented.
class ParseError : public Error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

/// Well-formed input that violates a domain invariant (duplicate id, bad gold label, ...).
class ValidationError : public Error {
public:
  using Error::Error;
};

/// Invalid parameters or parameter combinations.
class ConfigError : public Error {
public:
  using Error::Error;
};

/// Embedding or generation backend failed (transport, HTTP status, bad response).
class ProviderError : public Error {
public:
  using Error::Error;
};

/// Failure to reach an HTTP endpoint at all (connect, timeout, TLS).
class TransportError : public ProviderError {
public:
  using ProviderError::ProviderError;
};

/// Generation failed for one QA item after retries.
class GenerationError : public ProviderError {
public:
  GenerationError(std::string item_id, const std::string& what)
      : ProviderError("item '" + item_id + "': " + what), item_id_(std::move(item_id)) {}

  const std::string& item_id() const noexcept { return item_id_; }

private:
  std::string item_id_;
};

/// The fixed prompt template plus question does not fit the token budget.
class BudgetError : public Error {
public:
  using Error::Error;
};

/// Persisted index is unreadable or has an unsupported format version.
class FormatError : public Error {
public:
  using Error::Error;
};

} // namespace causalrag
