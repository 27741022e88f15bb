#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace quakealarm {

/// Invalid argument to a library call (bad threshold, negative radius, ...).
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed input text. `location()` is the 1-based line number for CSV
/// input and the 0-based record index for NDK input.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t location)
      : std::runtime_error(what), location_(location) {}

  std::size_t location() const noexcept { return location_; }

 private:
  std::size_t location_;
};

/// Input whose overall layout is wrong (e.g. an NDK file whose line count
/// is not a multiple of five).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace quakealarm
