#pragma once

#include <stdexcept>
#include <string>

namespace htlab {

// Invalid domain objects or arguments (bad graph, bad design parameters, ...).
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Scenario/config file problems. CLI maps this to exit code 2.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exact enumeration refused because the support is too large. Exit code 3.
struct EnumerationBudgetError : std::runtime_error {
  EnumerationBudgetError(const std::string& msg, unsigned long long size)
      : std::runtime_error(msg), support_size(size) {}
  unsigned long long support_size;
};

// A propensity score of 0 or 1 where the estimator requires 0 < pi < 1.
// Exit code 4.
struct PositivityError : std::runtime_error {
  explicit PositivityError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace htlab
