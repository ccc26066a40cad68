#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

namespace plume {

enum class Preconditioner { None, Diagonal };

struct SolverConfig {
  int gmres_restart = 30;
  double rel_tol = 1e-8;
  int max_iter = 1000;
  Preconditioner preconditioner = Preconditioner::Diagonal;

  void check() const;
};

struct GmresResult {
  Eigen::VectorXd x;
  int iterations = 0;
  double rel_residual = 0.0;
  std::vector<double> residual_history;
};

using LinearOperator = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

// Restarted GMRES (Arnoldi with Givens rotations, right preconditioning).
// Stops when the true relative residual drops below cfg.rel_tol; throws
// ConvergenceError carrying the best iterate and the residual history when
// max_iter is exhausted. diag supplies the operator diagonal for the
// Diagonal preconditioner and may be empty otherwise.
GmresResult gmres_solve(const LinearOperator& op, const Eigen::VectorXd& rhs,
                        const SolverConfig& cfg,
                        const Eigen::VectorXd& diag = Eigen::VectorXd());

}  // namespace plume
