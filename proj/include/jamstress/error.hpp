#pragma once

#include <stdexcept>
#include <string>

namespace jamstress {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Invalid mesh topology or geometry.
class MeshError : public Error {
public:
  using Error::Error;
};

/// Malformed input text; carries the 1-based line number when known.
class ParseError : public Error {
public:
  ParseError(const std::string& what, int line)
      : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  int line() const noexcept { return line_; }

private:
  int line_;
};

/// A numerical procedure failed to produce a trustworthy answer.
class NumericalError : public Error {
public:
  using Error::Error;
};

} // namespace jamstress
