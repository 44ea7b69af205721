#pragma once

#include <stdexcept>
#include <string>

namespace ivgan {

// Dimension or shape disagreement between operands.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Argument outside the mathematical domain of an operation (log of a
// non-positive value, all-zero densities, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Caller broke a precondition that is not about shapes or domains.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Malformed or truncated checkpoint file.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad configuration text or override. Carries the offending key and the
// 1-based line number (0 for command-line overrides).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, int line, const std::string& what)
      : std::runtime_error(what), key_(std::move(key)), line_(line) {}

  const std::string& key() const { return key_; }
  int line() const { return line_; }

 private:
  std::string key_;
  int line_;
};

}  // namespace ivgan
