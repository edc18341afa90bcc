#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace patchaudit {

/// Caller passed a value outside an operation's domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A file could not be decoded; carries the offending path.
class DecodeError : public std::runtime_error {
 public:
  DecodeError(std::string path, const std::string& reason)
      : std::runtime_error(path + ": " + reason), path_(std::move(path)) {}
  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

/// A text file (manifest, feature CSV, model, spec) is malformed at a given line.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& source, std::size_t line, const std::string& reason)
      : std::runtime_error(source + ":" + std::to_string(line) + ": " + reason), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace patchaudit
