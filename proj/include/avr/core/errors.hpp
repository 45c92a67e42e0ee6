#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace avr {

// Base for every error raised by the library. `code()` is the short
// machine-readable name used in CLI output and wire "error" messages.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}
  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class DimensionMismatch : public Error {
 public:
  DimensionMismatch(std::size_t expected, std::size_t got)
      : Error("DimensionMismatch", "expected " + std::to_string(expected) +
                                       " values, got " + std::to_string(got)),
        expected_(expected),
        got_(got) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t got() const noexcept { return got_; }

 private:
  std::size_t expected_;
  std::size_t got_;
};

class JointLimitViolation : public Error {
 public:
  JointLimitViolation(std::size_t index, double value, double lo, double hi)
      : Error("JointLimitViolation",
              "joint " + std::to_string(index) + " value " + std::to_string(value) +
                  " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]"),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

class SchemaError : public Error {
 public:
  explicit SchemaError(const std::string& what) : Error("SchemaError", what) {}
};

class ValidationError : public Error {
 public:
  explicit ValidationError(const std::string& what) : Error("ValidationError", what) {}
};

}  // namespace avr
