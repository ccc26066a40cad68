#pragma once

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "plume/gmres.hpp"
#include "plume/mesh.hpp"

namespace plume {

// Boundary treatment. Zero-flux makes every boundary integral vanish (the
// default); Dirichlet pins boundary node values to the given function.
struct BoundaryCondition {
  enum class Kind { ZeroFlux, Dirichlet };
  Kind kind = Kind::ZeroFlux;
  std::function<double(const Vec3&, double)> value;  // used by Dirichlet
};

// Transient advection-diffusion-reaction problem
//   du/dt + beta . grad u - div(eps grad u) + c u = f
// discretized with linear tets, streamline stabilization and Crank-Nicolson
// stepping. Wind and source may vary in space and time; eps and c are scalar.
struct TransportProblem {
  std::function<Vec3(const Vec3&, double)> beta;      // wind velocity, m/s
  double eps = 1e-3;                                  // diffusion, m^2/s
  double c = 0.0;                                     // reaction, 1/s
  std::function<double(const Vec3&, double)> source;  // emission density
  double dt = 1.0;                                    // time step, s
  double t_end = 1.0;                                 // horizon, s
  int p = 1;                                          // polynomial order
  BoundaryCondition boundary;
  bool stabilize = true;  // false forces tau = 0 (diagnostic comparisons)

  void check() const;
};

// Nodal concentration values at one time level.
struct ScalarField {
  const MeshGraph* mesh = nullptr;
  Eigen::VectorXd values;
  double time = 0.0;

  static ScalarField zero(const MeshGraph& mesh, double time = 0.0);
};

struct ElementSystem {
  TetId tet;
  Eigen::MatrixXd matrix;  // M^K + (dt/2) B^K
  Eigen::VectorXd rhs;     // (M^K - (dt/2) B^K) u_old|K + dt l^K
  std::vector<PointId> dof_map;
};

// Stabilization time scale:
//   tau = 1 / ( |beta . (1/hx, 1/hy, 1/hz)| + 3 p^2 eps / (hx^2 + hy^2 + hz^2) )
// where h holds the three element dimensions (bounding-box extents).
double supg_tau(const Vec3& h, const Vec3& beta_local, double eps, int p);

// Local Crank-Nicolson system for one element. Coefficients are evaluated at
// time + dt/2; beta at the element centroid. For p = 1 the Laplacian part of
// the residual vanishes elementwise.
ElementSystem element_system(const MeshGraph& mesh, TetId t, const TransportProblem& prob,
                             const ScalarField& u_old, double time);

// y = (M + (dt/2) B) x, accumulated element by element; no global matrix is
// ever stored. Dirichlet rows act as identity.
Eigen::VectorXd apply_global_operator(const MeshGraph& mesh, const TransportProblem& prob,
                                      const Eigen::VectorXd& x, double time);

// Diagonal of the same operator, for preconditioning.
Eigen::VectorXd operator_diagonal(const MeshGraph& mesh, const TransportProblem& prob,
                                  double time);

// One Crank-Nicolson step: assembles the right-hand side elementwise and
// solves with matrix-free GMRES.
ScalarField step(const MeshGraph& mesh, const TransportProblem& prob, const ScalarField& u_old,
                 const SolverConfig& cfg);

struct StepStats {
  int step = 0;
  double time = 0.0;
  int gmres_iterations = 0;
  double rel_residual = 0.0;
};

struct SimulationResult {
  std::vector<ScalarField> snapshots;  // initial state first, final state last
  std::vector<StepStats> stats;        // one entry per step
};

// Runs step() from u0.time to u0.time + t_end, emitting a snapshot every
// snapshot_every steps (plus the initial and final states).
SimulationResult simulate(const MeshGraph& mesh, const TransportProblem& prob,
                          const ScalarField& u0, const SolverConfig& cfg,
                          int snapshot_every = 1);

}  // namespace plume
