#pragma once

#include <stdexcept>
#include <string>

namespace qbeat {

/// Caller passed operands with incompatible shapes.
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data violates a documented invariant. `field` names the offending
/// input (a dotted path for scenario files, empty otherwise).
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what, std::string field = {})
      : std::runtime_error(field.empty() ? what : field + ": " + what),
        field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 protected:
  struct Preformatted {};
  ValidationError(Preformatted, const std::string& message, std::string field)
      : std::runtime_error(message), field_(std::move(field)) {}

 private:
  std::string field_;
};

/// Model parameters produced a non-finite right-hand side.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Time integration could not proceed (tolerance, step underflow, drift).
class IntegrationError : public std::runtime_error {
 public:
  explicit IntegrationError(const std::string& what, double last_time = 0.0)
      : std::runtime_error(what), last_time_(last_time) {}

  double last_time() const noexcept { return last_time_; }

 private:
  double last_time_;
};

}  // namespace qbeat
