#pragma once

#include <stdexcept>
#include <string>

namespace cpdc {

// Typed failures so callers (and the CLI) can map causes to diagnostics
// without string matching. All carry a human-readable message.

struct RangeError : std::runtime_error {
  explicit RangeError(const std::string& m) : std::runtime_error(m) {}
};

struct DomainError : std::runtime_error {
  explicit DomainError(const std::string& m) : std::runtime_error(m) {}
};

struct InfeasibleDesignError : std::runtime_error {
  explicit InfeasibleDesignError(const std::string& m) : std::runtime_error(m) {}
};

struct UnitarityError : std::runtime_error {
  explicit UnitarityError(const std::string& m) : std::runtime_error(m) {}
};

struct UndefinedAngleError : std::runtime_error {
  explicit UndefinedAngleError(const std::string& m) : std::runtime_error(m) {}
};

struct StepUnderflowError : std::runtime_error {
  explicit StepUnderflowError(const std::string& m) : std::runtime_error(m) {}
};

struct ToleranceError : std::runtime_error {
  explicit ToleranceError(const std::string& m) : std::runtime_error(m) {}
};

struct QuadratureError : std::runtime_error {
  explicit QuadratureError(const std::string& m) : std::runtime_error(m) {}
};

struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace cpdc
