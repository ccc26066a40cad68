#include <doctest.h>

#include <random>

#include <Eigen/Dense>

#include "plume/errors.hpp"
#include "plume/gmres.hpp"

using namespace plume;
using Eigen::MatrixXd;
using Eigen::VectorXd;

TEST_CASE("gmres: identity operator converges in one iteration") {
  SolverConfig cfg;
  cfg.preconditioner = Preconditioner::None;
  VectorXd rhs(4);
  rhs << 1, -2, 3, 0.5;
  auto result = gmres_solve([](const VectorXd& x) { return x; }, rhs, cfg);
  CHECK(result.iterations == 1);
  CHECK((result.x - rhs).norm() <= 1e-12);
}

TEST_CASE("gmres: diagonal system") {
  SolverConfig cfg;
  cfg.preconditioner = Preconditioner::None;
  VectorXd d(3);
  d << 1, 2, 4;
  VectorXd rhs(3);
  rhs << 1, 2, 4;
  auto result = gmres_solve([&](const VectorXd& x) { return VectorXd(d.cwiseProduct(x)); },
                            rhs, cfg);
  CHECK((result.x - VectorXd::Ones(3)).norm() <= 1e-10);
}

TEST_CASE("gmres: random SPD system matches dense LU") {
  std::mt19937 rng(99);
  std::normal_distribution<double> dist(0.0, 1.0);
  const int n = 20;
  MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = dist(rng);
  }
  MatrixXd a = m * m.transpose() + static_cast<double>(n) * MatrixXd::Identity(n, n);
  VectorXd rhs(n);
  for (int i = 0; i < n; ++i) rhs(i) = dist(rng);

  VectorXd expected = a.fullPivLu().solve(rhs);

  SolverConfig cfg;
  cfg.rel_tol = 1e-12;
  cfg.preconditioner = Preconditioner::Diagonal;
  auto result = gmres_solve([&](const VectorXd& x) { return VectorXd(a * x); }, rhs, cfg,
                            a.diagonal());
  CHECK((result.x - expected).norm() / expected.norm() <= 1e-8);
  CHECK(result.rel_residual <= cfg.rel_tol);
}

TEST_CASE("gmres: restart cycles still converge") {
  const int n = 40;
  MatrixXd a = MatrixXd::Identity(n, n);
  for (int i = 0; i + 1 < n; ++i) a(i, i + 1) = 0.5;  // nonsymmetric
  VectorXd rhs = VectorXd::Ones(n);

  SolverConfig cfg;
  cfg.gmres_restart = 5;  // force several restarts
  cfg.rel_tol = 1e-10;
  cfg.preconditioner = Preconditioner::None;
  auto result = gmres_solve([&](const VectorXd& x) { return VectorXd(a * x); }, rhs, cfg);
  CHECK((a * result.x - rhs).norm() / rhs.norm() <= 1e-10);
}

TEST_CASE("gmres: zero right-hand side short-circuits") {
  SolverConfig cfg;
  auto result = gmres_solve([](const VectorXd& x) { return x; }, VectorXd::Zero(5), cfg);
  CHECK(result.iterations == 0);
  CHECK(result.x.norm() == 0.0);
}

TEST_CASE("gmres: iteration cap raises a convergence error with history") {
  // Rotation-like system that a single iteration cannot solve.
  MatrixXd a(2, 2);
  a << 0, -1, 1, 0;
  VectorXd rhs(2);
  rhs << 1, 1;
  SolverConfig cfg;
  cfg.max_iter = 1;
  cfg.gmres_restart = 1;
  cfg.preconditioner = Preconditioner::None;
  try {
    gmres_solve([&](const VectorXd& x) { return VectorXd(a * x); }, rhs, cfg);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.best_iterate().size() == 2);
    CHECK(e.residual_history().size() >= 1);
  }
}

TEST_CASE("solver config constraints") {
  SolverConfig cfg;
  cfg.rel_tol = 1.5;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
  cfg.rel_tol = 1e-8;
  cfg.max_iter = 0;
  CHECK_THROWS_AS(cfg.check(), ConfigError);
}
