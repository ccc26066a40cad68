#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

#include "plume/ids.hpp"

namespace plume {

using Vec3 = Eigen::Vector3d;

// Boundary classification of an edge: 1 = on the domain boundary, 2 = interior.
enum class EdgeLocation : std::uint8_t { Boundary = 1, Interior = 2 };

struct Point {
  Vec3 coords = Vec3::Zero();
};

struct EdgeRecord {
  PointId ip;  // initial endpoint
  PointId fp;  // final endpoint
  bool le = false;  // flagged as one of the longest edges of the tet under examination
  bool br = false;  // broken: a midpoint has been inserted
  EdgeLocation ae = EdgeLocation::Interior;
  PointId midpoint_point;  // set iff br
  bool alive = true;
};

struct FaceRecord {
  std::array<EdgeId, 3> edges{};
  std::array<PointId, 3> points{};
  bool brf = false;      // split by a rewrite
  bool boundary = false;  // lies on the domain boundary
  bool bottom = false;    // lies on the terrain-facing boundary surface
  bool alive = true;
};

struct TetRecord {
  std::array<PointId, 4> points{};
  std::array<EdgeId, 6> edges{};
  std::array<FaceId, 4> faces{};
  bool r = false;  // marked for refinement
  bool alive = true;
};

struct ValidationReport {
  std::vector<std::string> violations;

  bool ok() const { return violations.empty(); }
};

// Relative tolerance under which two edge lengths count as equally longest.
inline constexpr double k_length_tie_rel_tol = 1e-12;

// A tet is degenerate when |signed volume| <= this factor times (longest edge)^3.
inline constexpr double k_degeneracy_rel_tol = 1e-14;

// Attributed tri-partite graph of a conforming tetrahedral mesh: tetrahedron-,
// face- and edge-records plus reverse adjacency. Owns geometry, topology and
// attributes; all rewriting lives in refine.*. Single-writer: mutation happens
// on one thread, concurrent reads are safe once the mesh is quiescent.
class MeshGraph {
 public:
  MeshGraph() = default;

  // Builds a mesh from a point list and tet connectivity. Tets are reoriented
  // to positive volume when possible; malformed cells are kept so that
  // validate() can report them. Boundary flags are derived from face incidence.
  static MeshGraph from_cells(const std::vector<Vec3>& points,
                              const std::vector<std::array<std::uint32_t, 4>>& cells);

  // --- construction primitives -------------------------------------------

  PointId add_point(const Vec3& coords);
  EdgeId get_or_create_edge(PointId a, PointId b);
  FaceId get_or_create_face(PointId a, PointId b, PointId c);
  TetId add_tet(const std::array<PointId, 4>& pts);

  // Recomputes boundary flags of faces (incidence count 1) and the AE flag of
  // edges (boundary iff on a boundary face). Call once after from-scratch
  // construction; refinement keeps the flags up to date incrementally.
  void assign_boundary_flags();

  // --- capacity and liveness ----------------------------------------------

  std::size_t point_count() const { return points_.size(); }
  std::size_t edge_slot_count() const { return edges_.size(); }
  std::size_t face_slot_count() const { return faces_.size(); }
  std::size_t tet_slot_count() const { return tets_.size(); }

  std::size_t live_edge_count() const;
  std::size_t live_face_count() const;
  std::size_t live_tet_count() const;

  bool is_live(EdgeId e) const { return e.value < edges_.size() && edges_[e.value].alive; }
  bool is_live(FaceId f) const { return f.value < faces_.size() && faces_[f.value].alive; }
  bool is_live(TetId t) const { return t.value < tets_.size() && tets_[t.value].alive; }
  bool has_point(PointId p) const { return p.value < points_.size(); }

  std::vector<TetId> live_tets() const;

  // --- access --------------------------------------------------------------

  const Point& point(PointId p) const;
  const EdgeRecord& edge(EdgeId e) const;
  const FaceRecord& face(FaceId f) const;
  const TetRecord& tet(TetId t) const;

  EdgeRecord& edge_mut(EdgeId e);
  FaceRecord& face_mut(FaceId f);
  TetRecord& tet_mut(TetId t);
  Point& point_mut(PointId p);

  const std::vector<TetId>& tets_of_edge(EdgeId e) const;
  const std::vector<TetId>& tets_of_face(FaceId f) const;

  std::optional<EdgeId> find_edge(PointId a, PointId b) const;
  std::optional<FaceId> find_face(PointId a, PointId b, PointId c) const;

  // --- queries ---------------------------------------------------------

  double edge_length(EdgeId e) const;

  // Signed volume of the tet (positive for the stored orientation).
  double tet_volume(TetId t) const;

  // All edges of t within relative tie tolerance of the maximum length,
  // sorted by the LESS total order. Updates the le flags on t's six edges.
  std::vector<EdgeId> longest_edges(TetId t);

  // Smallest interior dihedral angle of t, in radians.
  double min_dihedral_angle(TetId t) const;

  // The two faces of t containing edge e.
  std::array<FaceId, 2> faces_adjacent_to_edge(TetId t, EdgeId e) const;

  bool tet_has_edge(TetId t, EdgeId e) const;
  bool tet_has_broken_edge(TetId t) const;

  // Quiescent: no live edge carries the broken flag.
  bool quiescent() const;

  std::size_t broken_edge_count() const;
  std::size_t broken_face_count() const;

  // Points incident to at least one live boundary face.
  std::vector<PointId> boundary_points() const;

  // Points incident to at least one live bottom-surface face.
  std::vector<PointId> bottom_surface_points() const;

  // --- integrity --------------------------------------------------------

  // Checks every structural invariant; on a quiescent mesh additionally checks
  // conformity (face sharing, hanging nodes) and that no broken flags remain.
  // Violations are returned as data, never thrown.
  ValidationReport validate() const;

  // --- rewriting support (used by refine) --------------------------------

  void detach_tet(TetId t);
  void attach_tet(TetId t);

  // Drops tombstoned edges/faces/tets and renumbers them densely. Points are
  // kept untouched. Invalidates all edge/face/tet handles held by callers.
  void compact();

 private:
  friend class MeshChecker;

  static std::uint64_t edge_key(PointId a, PointId b);
  static std::array<std::uint32_t, 3> face_key(PointId a, PointId b, PointId c);

  struct FaceKeyHash {
    std::size_t operator()(const std::array<std::uint32_t, 3>& k) const noexcept;
  };

  std::vector<Point> points_;
  std::vector<EdgeRecord> edges_;
  std::vector<FaceRecord> faces_;
  std::vector<TetRecord> tets_;

  std::vector<std::vector<TetId>> edge_to_tets_;
  std::vector<std::vector<TetId>> face_to_tets_;

  std::unordered_map<std::uint64_t, EdgeId> edge_lookup_;
  std::unordered_map<std::array<std::uint32_t, 3>, FaceId, FaceKeyHash> face_lookup_;
};

// True when a precedes b in the LESS total order used to break ties among
// equally long candidate edges: longer first, then lexicographic on the
// sorted endpoint coordinate pair, then the edge id.
bool edge_less(const MeshGraph& mesh, EdgeId a, EdgeId b);

}  // namespace plume
