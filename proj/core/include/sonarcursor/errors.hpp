#pragma once

#include <stdexcept>
#include <string>

namespace sonar {

// Invalid user-supplied configuration (bad scene file, overlapping targets, ...).
// The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Broken call contract (wrong frame length, non-increasing timestamps, ...).
// Indicates a programming error in the caller. The CLI maps this to exit code 3.
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

}  // namespace sonar
