#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace srde {

/// A structural hypothesis of the model (for example eta < 1) does not hold.
class AssumptionViolation : public std::domain_error {
 public:
  AssumptionViolation(const std::string& what, double value)
      : std::domain_error(what), value_(value) {}
  [[nodiscard]] double value() const noexcept { return value_; }

 private:
  double value_;
};

/// Caller broke a sequencing contract (e.g. time going backwards).
class ContractViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Malformed or unknown configuration entry.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& key, const std::string& message)
      : std::runtime_error("config key '" + key + "': " + message), key_(key) {}
  [[nodiscard]] const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

/// File-system failure while persisting results.
class IoError : public std::runtime_error {
 public:
  IoError(const std::string& what, std::string resume_token)
      : std::runtime_error(what), resume_token_(std::move(resume_token)) {}
  [[nodiscard]] const std::string& resume_token() const noexcept { return resume_token_; }

 private:
  std::string resume_token_;
};

}  // namespace srde
