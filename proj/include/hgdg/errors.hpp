#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hgdg {

/// Raised for malformed arguments to any public operation.
class InvalidArgument : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A nodal Euler state with non-positive density or pressure (or NaN).
class InadmissibleState : public std::runtime_error {
 public:
  static constexpr std::size_t kNoElement = static_cast<std::size_t>(-1);

  explicit InadmissibleState(const std::string& what) : std::runtime_error(what), element_(kNoElement) {}
  InadmissibleState(std::size_t element, const std::string& what)
      : std::runtime_error(what + " (element " + std::to_string(element) + ")"),
        element_(element) {}

  std::size_t element() const noexcept { return element_; }

 private:
  std::size_t element_;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Pseudotime iteration exceeded its cap without reaching the tolerance.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace hgdg
