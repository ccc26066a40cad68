#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "plume/mesh.hpp"

namespace plume {

// The four rewrite rules share one right-hand side (bisection of the tet
// across edge1); they differ in how much of the neighborhood is already
// broken: P1 = nothing broken, P2 = broken edge(s) but neither face adjacent
// to edge1 broken, P3 = exactly one adjacent face broken, P4 = both broken.
enum class ProductionKind : int { P1 = 0, P2 = 1, P3 = 2, P4 = 3 };

struct Match {
  TetId tet;
  EdgeId edge;  // the edge playing the edge1 role
  ProductionKind kind;
};

struct RefinePlan {
  std::vector<TetId> marked;
  // Safety bound on worklist generations; 0 means the default
  // 10 * (initial live tet count + |marked|).
  std::size_t max_passes = 0;
};

struct RefineSummary {
  std::size_t passes = 0;
  std::array<std::size_t, 4> applied{};  // indexed by ProductionKind
  std::size_t final_tet_count = 0;
  std::size_t final_point_count = 0;

  std::size_t total_applied() const {
    return applied[0] + applied[1] + applied[2] + applied[3];
  }
};

// Applicability predicates for the four productions. Each combines the
// configuration the production covers with its attribute formula. The le
// flags on t's edges must be current (longest_edges(t) refreshes them); the
// engine takes care of that before evaluating.
//
// In the formulas LESS(E1, Ej) reads "Ej precedes E1", so the NOT ANY(...)
// components demand that e1 is the LESS-minimal member of the relevant set
// of equally long candidates.
bool predicate_p1(const MeshGraph& mesh, TetId t, EdgeId e1);
bool predicate_p2(const MeshGraph& mesh, TetId t, EdgeId e1);
bool predicate_p3(const MeshGraph& mesh, TetId t, EdgeId e1);
bool predicate_p4(const MeshGraph& mesh, TetId t, EdgeId e1);

// First production applicable to t, scanning candidate edges in LESS order.
// Refreshes the le flags of t's edges as a side effect.
std::optional<Match> find_match(MeshGraph& mesh, TetId t);

// Bisects m.tet across m.edge: inserts (or reuses) the midpoint, splits the
// two faces adjacent to the edge, and replaces the tet by its two children.
// Children are unmarked; their edges get fresh le flags on demand.
std::pair<TetId, TetId> apply_production(MeshGraph& mesh, const Match& m);

// Marks plan.marked and applies productions until no predicate holds
// anywhere. On return the mesh is quiescent, conforming and compacted, and
// every marked tet has been bisected at least once. Deterministic: tets are
// scanned in ascending id order, candidate edges in LESS order.
RefineSummary refine(MeshGraph& mesh, const RefinePlan& plan);

}  // namespace plume
