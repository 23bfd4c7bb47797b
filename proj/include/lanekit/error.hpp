#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lanekit {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller violated a documented precondition (bad shape, bad parameter).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file. Carries the offending source and 1-based line.
class ParseError : public Error {
 public:
  ParseError(std::string source, std::size_t line, const std::string& what);

  const std::string& source() const { return source_; }
  std::size_t line() const { return line_; }

 private:
  std::string source_;
  std::size_t line_;
};

/// Gradient descent produced a non-finite loss.
class DivergedError : public Error {
 public:
  using Error::Error;
};

}  // namespace lanekit
