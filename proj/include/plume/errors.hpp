#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace plume {

// Unknown or dead entity handle.
class HandleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Degenerate or otherwise unusable geometry.
class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// An operation was invoked in a state that violates its contract.
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Refinement hit its safety bound without reaching a fixpoint.
class NonTerminationError : public std::runtime_error {
 public:
  NonTerminationError(const std::string& msg, std::string diagnostic)
      : std::runtime_error(msg), diagnostic_(std::move(diagnostic)) {}

  const std::string& diagnostic() const { return diagnostic_; }

 private:
  std::string diagnostic_;
};

// Malformed input file (heightmap, mesh, config).
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Config constraint violation; carries the offending field name.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& msg)
      : std::runtime_error(field + ": " + msg), field_(std::move(field)) {}

  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

// Iterative solver failed; carries the best iterate and residual history.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& msg, std::vector<double> best_iterate,
                   std::vector<double> residual_history)
      : std::runtime_error(msg),
        best_iterate_(std::move(best_iterate)),
        residual_history_(std::move(residual_history)) {}

  const std::vector<double>& best_iterate() const { return best_iterate_; }
  const std::vector<double>& residual_history() const { return residual_history_; }

 private:
  std::vector<double> best_iterate_;
  std::vector<double> residual_history_;
};

}  // namespace plume
