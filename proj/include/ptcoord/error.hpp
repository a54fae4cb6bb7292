#pragma once

#include <stdexcept>
#include <string>

namespace ptcoord {

enum class ErrorKind {
  Validation,   // malformed input, dangling references, bad options
  Infeasible,   // a stage has no feasible point
  SolverLimit,  // node/iteration limit without a usable answer
  Io,
  Domain,       // function evaluated outside its domain
  Numerical,    // factorization breakdown and similar
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

}  // namespace ptcoord
