#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace maploc {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A precondition on an argument was violated (non-unit quaternion, bad resolution, ...).
class InvalidArgument : public Error {
public:
  using Error::Error;
};

/// Malformed input data. `offset` is a byte offset for binary inputs and a
/// 1-based line number for text inputs.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at " + std::to_string(offset) + ")"), offset_(offset) {}

  std::size_t offset() const { return offset_; }

private:
  std::size_t offset_;
};

/// A configuration key is missing or holds an unusable value.
class ConfigError : public Error {
public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}

  const std::string& key() const { return key_; }

private:
  std::string key_;
};

}  // namespace maploc
