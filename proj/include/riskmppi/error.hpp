#pragma once

#include <stdexcept>
#include <string>

namespace riskmppi {

// Library errors carry a short machine-parsable code ("parse", "domain",
// "io", "config", "insufficient-data", "usage", "internal") that the CLI
// prints as `error: <code>: <message>`.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& message)
      : std::runtime_error(message), code_(std::move(code)) {}

  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

}  // namespace riskmppi
