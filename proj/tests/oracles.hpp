#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "plume/fem.hpp"
#include "plume/mesh.hpp"

// Independent reference implementations used to pin expected values. None of
// them touch the rewriting engine or the matrix-free path they check.
namespace plume::oracles {

// Plain tet-list longest-edge bisector: no attributed graph, no productions.
// Splits every marked or nonconforming tet across its longest edge (ties
// resolved like edge_less: exact length descending, then lexicographic on the
// sorted endpoint coordinates) until a fixpoint is reached.
struct NaiveBisector {
  std::vector<Vec3> points;
  std::vector<std::array<std::uint32_t, 4>> tets;

  static NaiveBisector from_mesh(const MeshGraph& mesh);

  // Runs marked bisection plus conformity closure to the fixpoint.
  void run(const std::vector<std::uint32_t>& marked_tets, std::size_t max_rounds = 10000);

  // Lexicographically sorted copy of the point coordinates.
  std::vector<Vec3> sorted_points() const;
};

// True when both coordinate sets match pairwise within tol after sorting.
bool same_point_set(const std::vector<Vec3>& a, const std::vector<Vec3>& b, double tol);

std::vector<Vec3> mesh_point_set(const MeshGraph& mesh);

// Explicitly assembled global Crank-Nicolson matrix, built from the local
// element systems; only tests ever construct it.
Eigen::MatrixXd assemble_dense(const MeshGraph& mesh, const TransportProblem& prob, double time);

// Integral of a nodal field over the mesh (exact for linear elements).
double field_integral(const MeshGraph& mesh, const Eigen::VectorXd& values);

// L2 norm of (u_h - u_exact) via the 4-point degree-2 rule.
double l2_error(const MeshGraph& mesh, const Eigen::VectorXd& values,
                const std::function<double(const Vec3&)>& u_exact);

double total_volume(const MeshGraph& mesh);

double min_dihedral_over_mesh(const MeshGraph& mesh);

}  // namespace plume::oracles
