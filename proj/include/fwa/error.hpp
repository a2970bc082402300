#pragma once

#include <stdexcept>
#include <string>

namespace fwa {

// Base for every error raised by the library. Callers that only care about
// "something in fwa failed" catch this; the CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Input does not satisfy a documented invariant (scenario, trace, config).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed text input. `line` is 1-based; 0 when not tied to a line.
class ParseError : public ValidationError {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : ValidationError(format(file, line, what)), file_(std::move(file)), line_(line) {}

  const std::string& file() const noexcept { return file_; }
  std::size_t line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& file, std::size_t line, const std::string& what) {
    std::string out = file.empty() ? std::string("<input>") : file;
    if (line != 0) out += ":" + std::to_string(line);
    return out + ": " + what;
  }

  std::string file_;
  std::size_t line_;
};

class LookupError : public Error {
 public:
  using Error::Error;
};

class NoFeasibleMcs : public Error {
 public:
  using Error::Error;
};

class DivergentPowerControl : public Error {
 public:
  using Error::Error;
};

class LoadUndefined : public Error {
 public:
  using Error::Error;
};

}  // namespace fwa
