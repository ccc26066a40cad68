#include "plume/gmres.hpp"

#include <cmath>
#include <cstdio>

#include "plume/errors.hpp"

namespace plume {

void SolverConfig::check() const {
  if (gmres_restart <= 0) throw ConfigError("solver.restart", "must be positive");
  if (!(rel_tol > 0.0 && rel_tol < 1.0)) throw ConfigError("solver.rel_tol", "must lie in (0,1)");
  if (max_iter <= 0) throw ConfigError("solver.max_iter", "must be positive");
}

GmresResult gmres_solve(const LinearOperator& op, const Eigen::VectorXd& rhs,
                        const SolverConfig& cfg, const Eigen::VectorXd& diag) {
  using Eigen::MatrixXd;
  using Eigen::VectorXd;

  cfg.check();
  const Eigen::Index n = rhs.size();
  if (!rhs.allFinite()) {
    throw ConvergenceError("gmres: right-hand side is not finite", {}, {});
  }

  bool use_diag = cfg.preconditioner == Preconditioner::Diagonal && diag.size() == n;
  VectorXd inv_diag;
  if (use_diag) {
    inv_diag = diag.unaryExpr([](double d) { return d != 0.0 ? 1.0 / d : 1.0; });
  }
  auto precondition = [&](const VectorXd& v) -> VectorXd {
    return use_diag ? VectorXd(inv_diag.cwiseProduct(v)) : v;
  };

  GmresResult result;
  result.x = VectorXd::Zero(n);

  double rhs_norm = rhs.norm();
  if (rhs_norm == 0.0) {
    result.rel_residual = 0.0;
    return result;
  }

  const int m = cfg.gmres_restart;
  MatrixXd basis(n, m + 1);
  MatrixXd hess = MatrixXd::Zero(m + 1, m);
  VectorXd cs(m), sn(m), g(m + 1);

  VectorXd residual = rhs - op(result.x);
  double res_norm = residual.norm();
  result.residual_history.push_back(res_norm / rhs_norm);

  while (result.iterations < cfg.max_iter) {
    if (res_norm / rhs_norm <= cfg.rel_tol) {
      result.rel_residual = res_norm / rhs_norm;
      return result;
    }

    basis.col(0) = residual / res_norm;
    g.setZero();
    g(0) = res_norm;

    int k = 0;
    for (; k < m && result.iterations < cfg.max_iter; ++k) {
      ++result.iterations;
      VectorXd w = op(precondition(basis.col(k)));
      // Modified Gram-Schmidt.
      for (int i = 0; i <= k; ++i) {
        hess(i, k) = w.dot(basis.col(i));
        w -= hess(i, k) * basis.col(i);
      }
      hess(k + 1, k) = w.norm();
      if (hess(k + 1, k) > 0.0) {
        basis.col(k + 1) = w / hess(k + 1, k);
      }

      // Apply accumulated Givens rotations, then form a new one.
      for (int i = 0; i < k; ++i) {
        double t = cs(i) * hess(i, k) + sn(i) * hess(i + 1, k);
        hess(i + 1, k) = -sn(i) * hess(i, k) + cs(i) * hess(i + 1, k);
        hess(i, k) = t;
      }
      double denom = std::hypot(hess(k, k), hess(k + 1, k));
      if (denom == 0.0) {
        cs(k) = 1.0;
        sn(k) = 0.0;
      } else {
        cs(k) = hess(k, k) / denom;
        sn(k) = hess(k + 1, k) / denom;
      }
      hess(k, k) = cs(k) * hess(k, k) + sn(k) * hess(k + 1, k);
      hess(k + 1, k) = 0.0;
      g(k + 1) = -sn(k) * g(k);
      g(k) = cs(k) * g(k);

      result.residual_history.push_back(std::abs(g(k + 1)) / rhs_norm);
      if (std::abs(g(k + 1)) / rhs_norm <= cfg.rel_tol) {
        ++k;
        break;
      }
    }

    // Solve the small triangular system and update the iterate.
    VectorXd y(k);
    for (int i = k - 1; i >= 0; --i) {
      double s = g(i);
      for (int j = i + 1; j < k; ++j) s -= hess(i, j) * y(j);
      y(i) = s / hess(i, i);
    }
    VectorXd update = basis.leftCols(k) * y;
    result.x += precondition(update);

    residual = rhs - op(result.x);
    res_norm = residual.norm();
    result.residual_history.back() = res_norm / rhs_norm;
  }

  result.rel_residual = res_norm / rhs_norm;
  if (result.rel_residual <= cfg.rel_tol) {
    return result;
  }
  char detail[128];
  std::snprintf(detail, sizeof detail,
                "gmres: no convergence after %d iterations (relative residual %.3e, target %.3e)",
                result.iterations, result.rel_residual, cfg.rel_tol);
  std::vector<double> best(result.x.data(), result.x.data() + result.x.size());
  throw ConvergenceError(detail, std::move(best), result.residual_history);
}

}  // namespace plume
