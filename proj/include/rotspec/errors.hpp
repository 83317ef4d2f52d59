#ifndef ROTSPEC_ERRORS_HPP
#define ROTSPEC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace rotspec {

// Error classes double as process exit codes so batch drivers can
// distinguish failure modes without parsing messages.
enum class ErrorClass {
  usage = 2,        // bad command line / unknown template / bad request
  parse = 3,        // malformed input file or config
  validation = 4,   // inputs violate a documented precondition
  convergence = 5,  // iterative solver failed to converge
  truncation = 6,   // basis truncation unstable
  io = 7,           // missing file, failed write
};

inline const char* error_class_name(ErrorClass c) {
  switch (c) {
    case ErrorClass::usage: return "usage";
    case ErrorClass::parse: return "parse";
    case ErrorClass::validation: return "validation";
    case ErrorClass::convergence: return "convergence";
    case ErrorClass::truncation: return "truncation";
    case ErrorClass::io: return "io";
  }
  return "error";
}

class Error : public std::runtime_error {
public:
  Error(ErrorClass cls, const std::string& msg)
      : std::runtime_error(msg), cls_(cls) {}
  ErrorClass error_class() const { return cls_; }
  int exit_code() const { return static_cast<int>(cls_); }

private:
  ErrorClass cls_;
};

class UsageError : public Error {
public:
  explicit UsageError(const std::string& msg) : Error(ErrorClass::usage, msg) {}
};

class ParseError : public Error {
public:
  ParseError(const std::string& where, int line, const std::string& msg)
      : Error(ErrorClass::parse, where + ":" + std::to_string(line) + ": " + msg) {}
  explicit ParseError(const std::string& msg) : Error(ErrorClass::parse, msg) {}
};

class ValidationError : public Error {
public:
  explicit ValidationError(const std::string& msg) : Error(ErrorClass::validation, msg) {}
};

class ConvergenceError : public Error {
public:
  explicit ConvergenceError(const std::string& msg) : Error(ErrorClass::convergence, msg) {}
};

class TruncationError : public Error {
public:
  explicit TruncationError(const std::string& msg) : Error(ErrorClass::truncation, msg) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& msg) : Error(ErrorClass::io, msg) {}
};

}  // namespace rotspec

#endif
