#pragma once

#include <stdexcept>
#include <string>

namespace itol {

// Root of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Caller passed a value outside an operation's domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A computation could not be carried out (non-PSD covariance, rank
// deficiency, infeasible synthesis, unbounded support...).
class NumericalError : public Error {
 public:
  using Error::Error;
};

// Malformed or schema-violating configuration. `key()` names the offender.
class ConfigError : public Error {
 public:
  ConfigError(std::string key, const std::string& what)
      : Error(key.empty() ? what : key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace itol
