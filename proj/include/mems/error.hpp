#ifndef MEMS_ERROR_HPP
#define MEMS_ERROR_HPP

#include <stdexcept>
#include <string>

namespace mems {

/// Error categories surfaced by the numerical modules and the CLI.
enum class ErrorKind {
  domain,          // deflection not admissible (1 + v <= 0) or sample outside the gap
  solver,          // linear solver breakdown
  nonconvergence,  // Newton / eigen iteration did not converge
  precondition,    // invalid arguments (grid sizes, tolerances, boundary data)
  parse,           // configuration text
  internal         // an analytically impossible state was observed
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::domain: return "domain";
    case ErrorKind::solver: return "solver";
    case ErrorKind::nonconvergence: return "nonconvergence";
    case ErrorKind::precondition: return "precondition";
    case ErrorKind::parse: return "parse";
    case ErrorKind::internal: return "internal";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what) : Error(ErrorKind::domain, what) {}
};

class SolverError : public Error {
 public:
  explicit SolverError(const std::string& what) : Error(ErrorKind::solver, what) {}
};

class NonConvergenceError : public Error {
 public:
  explicit NonConvergenceError(const std::string& what) : Error(ErrorKind::nonconvergence, what) {}
};

class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what) : Error(ErrorKind::precondition, what) {}
};

class ParseError : public Error {
 public:
  ParseError(int line, const std::string& key, const std::string& what)
      : Error(ErrorKind::parse, "line " + std::to_string(line) + (key.empty() ? "" : ", key '" + key + "'") +
                                    ": " + what),
        line_(line),
        key_(key) {}
  int line() const noexcept { return line_; }
  const std::string& key() const noexcept { return key_; }

 private:
  int line_;
  std::string key_;
};

class InternalError : public Error {
 public:
  explicit InternalError(const std::string& what) : Error(ErrorKind::internal, what) {}
};

}  // namespace mems

#endif  // MEMS_ERROR_HPP
