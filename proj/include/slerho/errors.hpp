#pragma once

#include <stdexcept>
#include <string>

namespace slerho {

/// Argument outside the mathematical domain of an operation (kappa <= 0, bad Kac labels, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Two points that must stay apart are closer than the configured floor.
class CoincidentPointError : public DomainError {
 public:
  using DomainError::DomainError;
};

/// A value left the closed upper half-plane or the closed strip.
class BranchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Adaptive quadrature failed to reach the requested tolerance, or the
/// parameters are outside the window where the integral converges.
class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation applied to a path that has already stopped.
class StateError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Run-configuration schema violation; the message starts with the field path.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& path, const std::string& what)
      : std::runtime_error(path + ": " + what), path_(path) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace slerho
