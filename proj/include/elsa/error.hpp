#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace elsa {

/// Pipeline or data error (bad input contents, undefined numerics).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Configuration or file error: missing files, unparsable config or resources.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Collects non-fatal warnings. Operations take an optional pointer; passing
/// nullptr discards warnings.
struct Diagnostics {
  std::vector<std::string> warnings;

  void warn(std::string message) { warnings.push_back(std::move(message)); }
};

inline void warn(Diagnostics* diag, std::string message) {
  if (diag != nullptr) diag->warn(std::move(message));
}

}  // namespace elsa
