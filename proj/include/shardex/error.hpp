#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace shardex {

// Base for every error raised by the library. Callers that only want to
// report a failure can catch this; callers that need to react catch the
// concrete type.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DuplicateKeyError : public Error {
 public:
  explicit DuplicateKeyError(std::string key)
      : Error("duplicate docKey: " + key), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

class UnsupportedPredicateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  IoError(const std::string& path, const std::string& what)
      : Error(path + ": " + what), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class CorruptIndexError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

// Raised by ByteReader when input ends early. Module boundaries translate
// it into their own error type.
class DecodeError : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  ParseError(std::size_t position, const std::string& what)
      : Error("at position " + std::to_string(position) + ": " + what),
        position_(position) {}
  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

class ContractViolation : public Error {
 public:
  using Error::Error;
};

// A queue whose offered load reaches or exceeds its capacity.
class SaturationError : public Error {
 public:
  SaturationError(std::string component, double utilization)
      : Error("component " + component + " saturated (utilization " +
              std::to_string(utilization) + " >= 1)"),
        component_(std::move(component)),
        utilization_(utilization) {}
  const std::string& component() const { return component_; }
  double utilization() const { return utilization_; }

 private:
  std::string component_;
  double utilization_;
};

class MeasurementError : public Error {
 public:
  using Error::Error;
};

}  // namespace shardex
