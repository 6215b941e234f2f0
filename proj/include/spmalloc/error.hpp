#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace spmalloc {

/// Broad failure category; the CLI maps each one to a distinct exit code.
enum class ErrorKind {
  Config,      // malformed or invalid input documents
  Solver,      // the allocator violated its own contract
  Simulation,  // trace generation / routing failures
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class ConfigError : public Error {
public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Syntax error inside an access or affine expression. `position` is the
/// zero-based character offset into the parsed text.
class ParseError : public ConfigError {
public:
  ParseError(const std::string& what, std::size_t position)
      : ConfigError(what + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const noexcept { return position_; }

private:
  std::size_t position_;
};

/// Raised for subscripts such as `i*j` that are neither affine nor a
/// recognizable indirect access.
class NonAffineError : public ParseError {
public:
  using ParseError::ParseError;
};

class SolverDefect : public Error {
public:
  explicit SolverDefect(const std::string& what) : Error(ErrorKind::Solver, what) {}
};

class SimulationError : public Error {
public:
  explicit SimulationError(const std::string& what)
      : Error(ErrorKind::Simulation, what) {}
};

inline int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Config: return 2;
    case ErrorKind::Solver: return 3;
    case ErrorKind::Simulation: return 4;
  }
  return 1;
}

}  // namespace spmalloc
