#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <utility>

namespace uaf {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

/// Failure categories reported by the library. Callers that need to react to a
/// particular failure (the CLI maps them to exit codes, the engine treats a
/// bracketing failure on a stationary point as convergence) switch on these.
enum class Errc {
  invalid_argument,
  dimension_mismatch,
  evaluation_failure,
  unsupported_order,
  wrong_regime,
  capability,
  scalar_solve,
  inner_solver_failure,
  bracketing,
  invalid_config,
  parse,
  integration_blowup,
  step_size,
  fit,
};

const char* to_string(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const { return code_; }

 private:
  Errc code_;
};

/// Parse failure with the 1-based line it occurred on.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& what)
      : Error(Errc::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Inner solver ran out of iterations; carries the best iterate seen.
class InnerSolverError : public Error {
 public:
  InnerSolverError(const std::string& what, Vec best)
      : Error(Errc::inner_solver_failure, what), best_(std::move(best)) {}

  const Vec& best_iterate() const { return best_; }

 private:
  Vec best_;
};

inline void require(bool condition, Errc code, const std::string& what) {
  if (!condition) throw Error(code, what);
}

}  // namespace uaf
