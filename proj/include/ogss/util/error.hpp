#pragma once

#include <stdexcept>
#include <string>

namespace ogss {

// Base for all library errors. The message always starts with
// "<module>.<operation>: " so CLI diagnostics name where things failed.
class Error : public std::runtime_error {
 public:
  Error(std::string module, std::string operation, const std::string& message)
      : std::runtime_error(module + "." + operation + ": " + message),
        module_(std::move(module)),
        operation_(std::move(operation)) {}

  const std::string& module() const noexcept { return module_; }
  const std::string& operation() const noexcept { return operation_; }

 private:
  std::string module_;
  std::string operation_;
};

// Usage/configuration problems (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace ogss
