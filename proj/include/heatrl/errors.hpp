#pragma once

#include <stdexcept>
#include <string>

namespace heatrl {

/// Raised when an input violates a physical or mathematical precondition
/// (non-finite temperature, power outside the actuator range, ...).
class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

/// Raised for malformed files and configuration values.
class ParseError : public std::runtime_error {
 public:
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

/// Raised for inconsistent configuration detected before a run starts.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace heatrl
