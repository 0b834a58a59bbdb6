#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace vservo {

/// Base of every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class AllPixelsAchromatic : public Error {
 public:
  using Error::Error;
};

class DescriptorLengthMismatch : public Error {
 public:
  using Error::Error;
};

class NonPositiveSigma : public Error {
 public:
  using Error::Error;
};

class DimensionMismatch : public Error {
 public:
  using Error::Error;
};

class SingularInnovation : public Error {
 public:
  using Error::Error;
};

class ZeroDisparity : public Error {
 public:
  using Error::Error;
};

class AllZeroWeights : public Error {
 public:
  using Error::Error;
};

class EmptyTrace : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Configuration problem. Carries the offending key and, when the value came
/// from a file, its 1-based line number (0 otherwise).
class ConfigError : public Error {
 public:
  ConfigError(std::string key, std::size_t line, const std::string& what)
      : Error(format(key, line, what)), key_(std::move(key)), line_(line) {}

  const std::string& key() const noexcept { return key_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& key, std::size_t line,
                            const std::string& what) {
    std::string msg = "config error";
    if (!key.empty()) msg += " at key '" + key + "'";
    if (line > 0) msg += " (line " + std::to_string(line) + ")";
    return msg + ": " + what;
  }

  std::string key_;
  std::size_t line_;
};

}  // namespace vservo
