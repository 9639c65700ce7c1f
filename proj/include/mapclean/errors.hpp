#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace mapclean {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Malformed input. `location()` is a byte offset or a 1-based line number
/// depending on the format being parsed.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : Error(what), location_(location) {}
  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

class ConfigError : public Error {
 public:
  ConfigError(const std::string& field, const std::string& what)
      : Error("config field '" + field + "': " + what), field_(field) {}
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class InvalidPoseError : public Error {
 public:
  using Error::Error;
};

/// A NaN or infinite coordinate reached a pipeline stage.
class NonFiniteError : public Error {
 public:
  explicit NonFiniteError(std::size_t index)
      : Error("non-finite coordinate at point index " + std::to_string(index)),
        index_(index) {}
  std::size_t index() const noexcept { return index_; }

 private:
  std::size_t index_;
};

class DegenerateFitError : public Error {
 public:
  using Error::Error;
};

/// Two structures that must agree in shape or length do not.
class MismatchError : public Error {
 public:
  using Error::Error;
};

}  // namespace mapclean
