#include "plume/refine.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include <Eigen/Geometry>

#include "plume/errors.hpp"

namespace plume {

namespace {

struct TetEnv {
  std::array<EdgeId, 6> edges;
  std::array<FaceId, 2> adjacent_faces;  // the two faces of t containing e1
  bool any_other_broken = false;         // ANY(BRj) over the other five edges
};

TetEnv environment(const MeshGraph& mesh, TetId t, EdgeId e1) {
  if (!mesh.tet_has_edge(t, e1)) {
    throw HandleError("edge " + std::to_string(e1.value) + " is not an edge of tet " +
                      std::to_string(t.value));
  }
  TetEnv env;
  env.edges = mesh.tet(t).edges;
  env.adjacent_faces = mesh.faces_adjacent_to_edge(t, e1);
  for (EdgeId e : env.edges) {
    if (e != e1 && mesh.edge(e).br) env.any_other_broken = true;
  }
  return env;
}

// NOT ANY(BRj AND LEj AND LESS(E1, Ej)): no broken tied-longest edge may
// precede e1.
bool no_broken_longest_precedes(const MeshGraph& mesh, const TetEnv& env, EdgeId e1) {
  for (EdgeId e : env.edges) {
    if (e == e1) continue;
    const EdgeRecord& rec = mesh.edge(e);
    if (rec.br && rec.le && edge_less(mesh, e, e1)) return false;
  }
  return true;
}

int broken_adjacent_faces(const MeshGraph& mesh, const TetEnv& env) {
  int n = 0;
  for (FaceId f : env.adjacent_faces) {
    if (mesh.face(f).brf) ++n;
  }
  return n;
}

}  // namespace

bool predicate_p1(const MeshGraph& mesh, TetId t, EdgeId e1) {
  TetEnv env = environment(mesh, t, e1);
  const EdgeRecord& r1 = mesh.edge(e1);

  // Configuration: the tet has no broken edges at all.
  if (r1.br || env.any_other_broken) return false;

  // (NOT BR1 AND LE1)
  if (!r1.le) return false;
  // (R1 OR ANY(BRj))
  if (!(mesh.tet(t).r || env.any_other_broken)) return false;
  // NOT (BRF1 OR BRF2)
  if (broken_adjacent_faces(mesh, env) != 0) return false;
  // NOT ANY(BRj AND LEj)
  for (EdgeId e : env.edges) {
    if (e == e1) continue;
    const EdgeRecord& rec = mesh.edge(e);
    if (rec.br && rec.le) return false;
  }
  // NOT ANY(NOT BRj AND LEj AND LESS(E1, Ej))
  for (EdgeId e : env.edges) {
    if (e == e1) continue;
    const EdgeRecord& rec = mesh.edge(e);
    if (!rec.br && rec.le && edge_less(mesh, e, e1)) return false;
  }
  return true;
}

bool predicate_p2(const MeshGraph& mesh, TetId t, EdgeId e1) {
  TetEnv env = environment(mesh, t, e1);
  const EdgeRecord& r1 = mesh.edge(e1);

  // Configuration: broken edge(s) present, neither adjacent face broken.
  if (!(r1.br || env.any_other_broken)) return false;
  if (broken_adjacent_faces(mesh, env) != 0) return false;

  if (!r1.le) return false;  // (LE1)
  return no_broken_longest_precedes(mesh, env, e1);
}

bool predicate_p3(const MeshGraph& mesh, TetId t, EdgeId e1) {
  TetEnv env = environment(mesh, t, e1);
  const EdgeRecord& r1 = mesh.edge(e1);

  // Configuration: broken edge(s) present, exactly one adjacent face broken.
  // Face labels are symmetric: (BRF1 AND NOT BRF2) matches either labeling.
  if (!(r1.br || env.any_other_broken)) return false;
  if (broken_adjacent_faces(mesh, env) != 1) return false;

  if (!r1.le) return false;  // (LE1)
  return no_broken_longest_precedes(mesh, env, e1);
}

bool predicate_p4(const MeshGraph& mesh, TetId t, EdgeId e1) {
  TetEnv env = environment(mesh, t, e1);
  const EdgeRecord& r1 = mesh.edge(e1);

  // Configuration: broken edge(s) present, both adjacent faces broken.
  if (!(r1.br || env.any_other_broken)) return false;
  if (broken_adjacent_faces(mesh, env) != 2) return false;

  if (!r1.le) return false;  // (LE1)
  return no_broken_longest_precedes(mesh, env, e1);
}

std::optional<Match> find_match(MeshGraph& mesh, TetId t) {
  if (!mesh.is_live(t)) return std::nullopt;

  mesh.longest_edges(t);  // refresh le flags relative to t

  std::array<EdgeId, 6> candidates = mesh.tet(t).edges;
  std::sort(candidates.begin(), candidates.end(),
            [&mesh](EdgeId a, EdgeId b) { return edge_less(mesh, a, b); });

  bool has_broken = mesh.tet_has_broken_edge(t);
  for (EdgeId e1 : candidates) {
    if (!has_broken) {
      if (predicate_p1(mesh, t, e1)) return Match{t, e1, ProductionKind::P1};
      continue;
    }
    TetEnv env = environment(mesh, t, e1);
    switch (broken_adjacent_faces(mesh, env)) {
      case 0:
        if (predicate_p2(mesh, t, e1)) return Match{t, e1, ProductionKind::P2};
        break;
      case 1:
        if (predicate_p3(mesh, t, e1)) return Match{t, e1, ProductionKind::P3};
        break;
      default:
        if (predicate_p4(mesh, t, e1)) return Match{t, e1, ProductionKind::P4};
        break;
    }
  }
  return std::nullopt;
}

namespace {

// Ensures e1 carries a midpoint and its two half edges. Children inherit the
// parent's boundary classification. Record references go stale across
// get_or_create calls (the backing vectors grow), so plain values are copied
// out first.
PointId split_edge(MeshGraph& mesh, EdgeId e1) {
  if (mesh.edge(e1).br) return mesh.edge(e1).midpoint_point;

  PointId ip = mesh.edge(e1).ip;
  PointId fp = mesh.edge(e1).fp;
  EdgeLocation ae = mesh.edge(e1).ae;

  Vec3 mid = (mesh.point(ip).coords + mesh.point(fp).coords) * 0.5;
  PointId p = mesh.add_point(mid);
  mesh.edge_mut(e1).br = true;
  mesh.edge_mut(e1).midpoint_point = p;

  EdgeId h1 = mesh.get_or_create_edge(ip, p);
  EdgeId h2 = mesh.get_or_create_edge(p, fp);
  mesh.edge_mut(h1).ae = ae;
  mesh.edge_mut(h2).ae = ae;
  return p;
}

// Splits face f across its edge e1 at midpoint p: creates the cross edge from
// p to the opposite corner and the two child faces. Re-entrant: when a
// neighboring tet already split f the existing records are reused.
void split_face(MeshGraph& mesh, FaceId f, EdgeId e1, PointId p) {
  PointId ip = mesh.edge(e1).ip;
  PointId fp = mesh.edge(e1).fp;
  bool boundary = mesh.face(f).boundary;
  bool bottom = mesh.face(f).bottom;
  PointId opposite;
  for (PointId q : mesh.face(f).points) {
    if (q != ip && q != fp) opposite = q;
  }

  EdgeId cross = mesh.get_or_create_edge(p, opposite);
  mesh.edge_mut(cross).ae = boundary ? EdgeLocation::Boundary : EdgeLocation::Interior;

  FaceId c1 = mesh.get_or_create_face(ip, p, opposite);
  FaceId c2 = mesh.get_or_create_face(p, fp, opposite);
  for (FaceId c : {c1, c2}) {
    FaceRecord& cr = mesh.face_mut(c);
    cr.boundary = boundary;
    cr.bottom = bottom;
  }
  mesh.face_mut(f).brf = true;
}

}  // namespace

std::pair<TetId, TetId> apply_production(MeshGraph& mesh, const Match& m) {
  bool holds = false;
  switch (m.kind) {
    case ProductionKind::P1: holds = predicate_p1(mesh, m.tet, m.edge); break;
    case ProductionKind::P2: holds = predicate_p2(mesh, m.tet, m.edge); break;
    case ProductionKind::P3: holds = predicate_p3(mesh, m.tet, m.edge); break;
    case ProductionKind::P4: holds = predicate_p4(mesh, m.tet, m.edge); break;
  }
  if (!holds) {
    throw PreconditionError("production predicate does not hold for tet " +
                            std::to_string(m.tet.value) + ", edge " +
                            std::to_string(m.edge.value));
  }

  PointId pk = mesh.edge(m.edge).ip;
  PointId pm = mesh.edge(m.edge).fp;

  // Check the children before mutating anything.
  const std::array<PointId, 4> parent_pts = mesh.tet(m.tet).points;
  Vec3 mid = (mesh.point(pk).coords + mesh.point(pm).coords) * 0.5;
  {
    double max_len = 0.0;
    for (EdgeId e : mesh.tet(m.tet).edges) max_len = std::max(max_len, mesh.edge_length(e));
    auto coords_of = [&](PointId q, bool replace_k, bool replace_m) -> Vec3 {
      if ((replace_k && q == pk) || (replace_m && q == pm)) return mid;
      return mesh.point(q).coords;
    };
    for (bool replace_k : {true, false}) {
      Vec3 a = coords_of(parent_pts[0], replace_k, !replace_k);
      Vec3 b = coords_of(parent_pts[1], replace_k, !replace_k);
      Vec3 c = coords_of(parent_pts[2], replace_k, !replace_k);
      Vec3 d = coords_of(parent_pts[3], replace_k, !replace_k);
      double vol = std::abs((b - a).cross(c - a).dot(d - a)) / 6.0;
      if (vol <= k_degeneracy_rel_tol * max_len * max_len * max_len) {
        throw GeometryError("bisection of tet " + std::to_string(m.tet.value) +
                            " would create a degenerate child");
      }
    }
  }

  PointId p = split_edge(mesh, m.edge);
  auto adjacent = mesh.faces_adjacent_to_edge(m.tet, m.edge);
  split_face(mesh, adjacent[0], m.edge, p);
  split_face(mesh, adjacent[1], m.edge, p);

  std::array<PointId, 4> q1_pts = parent_pts;
  std::array<PointId, 4> q2_pts = parent_pts;
  for (int i = 0; i < 4; ++i) {
    if (q1_pts[i] == pk) q1_pts[i] = p;
    if (q2_pts[i] == pm) q2_pts[i] = p;
  }

  mesh.detach_tet(m.tet);
  TetId q1 = mesh.add_tet(q1_pts);
  TetId q2 = mesh.add_tet(q2_pts);
  mesh.tet_mut(q1).r = false;
  mesh.tet_mut(q2).r = false;
  return {q1, q2};
}

RefineSummary refine(MeshGraph& mesh, const RefinePlan& plan) {
  if (!mesh.quiescent()) {
    throw PreconditionError("refine requires a quiescent mesh");
  }
  for (TetId t : plan.marked) {
    if (!mesh.is_live(t)) {
      throw HandleError("marked tet " + std::to_string(t.value) + " is not live");
    }
  }

  std::size_t max_passes = plan.max_passes;
  if (max_passes == 0) {
    max_passes = 10 * (mesh.live_tet_count() + plan.marked.size());
  }

  RefineSummary summary;
  std::set<TetId> worklist;
  for (TetId t : plan.marked) {
    mesh.tet_mut(t).r = true;
    worklist.insert(t);
  }

  while (!worklist.empty()) {
    if (++summary.passes > max_passes) {
      std::ostringstream diag;
      diag << "broken edges: " << mesh.broken_edge_count()
           << ", broken faces: " << mesh.broken_face_count()
           << ", worklist: " << worklist.size();
      throw NonTerminationError("refine exceeded its pass bound (" +
                                    std::to_string(max_passes) + ")",
                                diag.str());
    }

    std::vector<TetId> generation(worklist.begin(), worklist.end());
    worklist.clear();
    for (TetId t : generation) {
      if (!mesh.is_live(t)) continue;
      auto m = find_match(mesh, t);
      if (!m) continue;

      // Tets incident to the bisected edge and to the split faces become
      // candidates, as do the children themselves.
      std::set<TetId> affected;
      for (TetId n : mesh.tets_of_edge(m->edge)) affected.insert(n);
      for (FaceId f : mesh.faces_adjacent_to_edge(m->tet, m->edge)) {
        for (TetId n : mesh.tets_of_face(f)) affected.insert(n);
      }
      affected.erase(m->tet);

      auto [c1, c2] = apply_production(mesh, *m);
      summary.applied[static_cast<int>(m->kind)]++;
      affected.insert(c1);
      affected.insert(c2);
      worklist.insert(affected.begin(), affected.end());
    }
  }

  mesh.compact();
  summary.final_tet_count = mesh.live_tet_count();
  summary.final_point_count = mesh.point_count();
  return summary;
}

}  // namespace plume
