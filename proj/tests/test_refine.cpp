#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "plume/errors.hpp"
#include "plume/refine.hpp"
#include "support.hpp"

using namespace plume;
namespace pt = plume::testing;

namespace {

EdgeId longest_of(MeshGraph& mesh, TetId t) { return mesh.longest_edges(t)[0]; }

int predicates_holding(const MeshGraph& mesh, TetId t, EdgeId e) {
  int n = 0;
  if (predicate_p1(mesh, t, e)) ++n;
  if (predicate_p2(mesh, t, e)) ++n;
  if (predicate_p3(mesh, t, e)) ++n;
  if (predicate_p4(mesh, t, e)) ++n;
  return n;
}

}  // namespace

TEST_CASE("predicate_p1 on a fresh marked tet") {
  MeshGraph mesh = pt::single_tet({0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1});
  TetId t(0);
  EdgeId e1 = longest_of(mesh, t);

  SUBCASE("marked, unique longest, nothing broken: applicable") {
    mesh.tet_mut(t).r = true;
    CHECK(predicate_p1(mesh, t, e1));
  }
  SUBCASE("unmarked and nothing broken: second component fails") {
    CHECK_FALSE(predicate_p1(mesh, t, e1));
  }
  SUBCASE("adjacent face flagged broken blocks the production") {
    mesh.tet_mut(t).r = true;
    auto faces = mesh.faces_adjacent_to_edge(t, e1);
    mesh.face_mut(faces[0]).brf = true;
    CHECK_FALSE(predicate_p1(mesh, t, e1));
  }
  SUBCASE("wrong edge role: not the longest") {
    mesh.tet_mut(t).r = true;
    auto e_short = mesh.find_edge(PointId(0), PointId(2));
    REQUIRE(e_short.has_value());
    CHECK_FALSE(predicate_p1(mesh, t, *e_short));
  }
  SUBCASE("foreign edge raises a handle error") {
    MeshGraph other = pt::single_tet({5, 5, 5}, {6, 5, 5}, {5, 6, 5}, {5, 5, 6});
    CHECK_THROWS_AS(predicate_p1(mesh, t, EdgeId(777)), HandleError);
  }
}

TEST_CASE("predicate_p2 configurations") {
  MeshGraph mesh = pt::single_tet({0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1});
  TetId t(0);
  EdgeId e1 = longest_of(mesh, t);

  SUBCASE("zero broken edges is P1 territory") {
    CHECK_FALSE(predicate_p2(mesh, t, e1));
  }
  SUBCASE("one broken non-longest edge, no broken faces: applicable") {
    auto eb = mesh.find_edge(PointId(0), PointId(2));
    mesh.edge_mut(*eb).br = true;
    mesh.edge_mut(*eb).midpoint_point = mesh.add_point({0, 0.5, 0});
    mesh.longest_edges(t);
    CHECK(predicate_p2(mesh, t, e1));
  }
  SUBCASE("broken tied-longest edge that precedes e1 blocks it") {
    // Regular tet: all edges tied. Break an edge that LESS-precedes another.
    MeshGraph reg = pt::regular_tet();
    TetId rt(0);
    auto order = reg.longest_edges(rt);
    REQUIRE(order.size() == 6);
    EdgeId first = order[0];
    EdgeId second = order[1];
    Vec3 mid = (reg.point(reg.edge(first).ip).coords + reg.point(reg.edge(first).fp).coords) * 0.5;
    reg.edge_mut(first).br = true;
    reg.edge_mut(first).midpoint_point = reg.add_point(mid);
    reg.longest_edges(rt);
    CHECK_FALSE(predicate_p2(reg, rt, second));
    CHECK(predicate_p2(reg, rt, first));
  }
}

TEST_CASE("predicate_p3 and p4 face configurations") {
  MeshGraph mesh = pt::single_tet({0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1});
  TetId t(0);
  EdgeId e1 = longest_of(mesh, t);
  auto eb = mesh.find_edge(PointId(0), PointId(2));
  mesh.edge_mut(*eb).br = true;
  mesh.edge_mut(*eb).midpoint_point = mesh.add_point({0, 0.5, 0});
  mesh.longest_edges(t);
  auto faces = mesh.faces_adjacent_to_edge(t, e1);

  SUBCASE("neither adjacent face broken: P2, not P3/P4") {
    CHECK(predicate_p2(mesh, t, e1));
    CHECK_FALSE(predicate_p3(mesh, t, e1));
    CHECK_FALSE(predicate_p4(mesh, t, e1));
  }
  SUBCASE("exactly one adjacent face broken: P3 only") {
    mesh.face_mut(faces[0]).brf = true;
    CHECK_FALSE(predicate_p2(mesh, t, e1));
    CHECK(predicate_p3(mesh, t, e1));
    CHECK_FALSE(predicate_p4(mesh, t, e1));
  }
  SUBCASE("both adjacent faces broken: P4 only") {
    mesh.face_mut(faces[0]).brf = true;
    mesh.face_mut(faces[1]).brf = true;
    CHECK_FALSE(predicate_p2(mesh, t, e1));
    CHECK_FALSE(predicate_p3(mesh, t, e1));
    CHECK(predicate_p4(mesh, t, e1));
  }
  SUBCASE("e1 not flagged longest fails every production") {
    mesh.face_mut(faces[0]).brf = true;
    mesh.face_mut(faces[1]).brf = true;
    CHECK_FALSE(predicate_p4(mesh, t, *eb));
  }
}

TEST_CASE("production exclusivity over random attribute states") {
  // At any instant, at most one predicate holds per (tet, edge).
  std::mt19937 rng(20240811);
  MeshGraph base = pt::unit_cube_box6();
  for (int trial = 0; trial < 200; ++trial) {
    MeshGraph mesh = base;
    std::uniform_int_distribution<int> coin(0, 1);
    for (std::size_t i = 0; i < mesh.edge_slot_count(); ++i) {
      EdgeId e(static_cast<std::uint32_t>(i));
      if (!mesh.is_live(e)) continue;
      if (coin(rng)) {
        EdgeRecord& rec = mesh.edge_mut(e);
        rec.br = true;
        rec.midpoint_point =
            mesh.add_point((mesh.point(rec.ip).coords + mesh.point(rec.fp).coords) * 0.5);
      }
    }
    for (std::size_t i = 0; i < mesh.face_slot_count(); ++i) {
      FaceId f(static_cast<std::uint32_t>(i));
      if (!mesh.is_live(f)) continue;
      if (coin(rng)) mesh.face_mut(f).brf = true;
    }
    for (TetId t : mesh.live_tets()) {
      mesh.tet_mut(t).r = coin(rng) == 1;
      mesh.longest_edges(t);
      for (EdgeId e : mesh.tet(t).edges) {
        CHECK(predicates_holding(mesh, t, e) <= 1);
      }
    }
  }
}

TEST_CASE("apply_production bisects across the marked edge") {
  // Unique longest edge (0,0,0)-(2,0,0); its midpoint seeds both children.
  MeshGraph mesh = pt::single_tet({0, 0, 0}, {2, 0, 0}, {1, 1, 0}, {1, 0, 1});
  TetId t(0);
  mesh.tet_mut(t).r = true;
  auto m = find_match(mesh, t);
  REQUIRE(m.has_value());
  CHECK(m->kind == ProductionKind::P1);

  double parent_volume = mesh.tet_volume(t);
  auto [c1, c2] = apply_production(mesh, *m);

  CHECK(mesh.live_tet_count() == 2);
  CHECK(mesh.point_count() == 5);
  const Vec3& mid = mesh.point(PointId(4)).coords;
  CHECK((mid - Vec3(1, 0, 0)).norm() == 0.0);

  // Children split the parent volume exactly.
  CHECK(mesh.tet_volume(c1) + mesh.tet_volume(c2) ==
        doctest::Approx(parent_volume).epsilon(1e-15));

  // Child vertex sets are {0,4,2,3} and {4,1,2,3} as coordinate sets.
  auto vertex_coords = [&](TetId id) {
    std::vector<Vec3> out;
    for (PointId p : mesh.tet(id).points) out.push_back(mesh.point(p).coords);
    return out;
  };
  std::vector<Vec3> expect1 = {{0, 0, 0}, {1, 0, 0}, {1, 1, 0}, {1, 0, 1}};
  std::vector<Vec3> expect2 = {{1, 0, 0}, {2, 0, 0}, {1, 1, 0}, {1, 0, 1}};
  bool first_matches =
      oracles::same_point_set(vertex_coords(c1), expect1, 0.0) ||
      oracles::same_point_set(vertex_coords(c1), expect2, 0.0);
  bool second_matches =
      oracles::same_point_set(vertex_coords(c2), expect1, 0.0) ||
      oracles::same_point_set(vertex_coords(c2), expect2, 0.0);
  CHECK(first_matches);
  CHECK(second_matches);

  // The halves of the bisected edge are live; the parent edge keeps its
  // record until compaction but no tet references it anymore.
  CHECK(mesh.find_edge(PointId(0), PointId(4)).has_value());
  CHECK(mesh.find_edge(PointId(4), PointId(1)).has_value());
  auto parent_edge = mesh.find_edge(PointId(0), PointId(1));
  REQUIRE(parent_edge.has_value());
  CHECK(mesh.tets_of_edge(*parent_edge).empty());
  mesh.compact();
  CHECK_FALSE(mesh.find_edge(PointId(0), PointId(1)).has_value());
}

TEST_CASE("apply_production refuses to create degenerate children") {
  // Volume sits just above the degeneracy threshold; halving it crosses it.
  double h = 3e-13;
  MeshGraph mesh = pt::single_tet({0, 0, 0}, {1, 0, 0}, {0, 1, 0}, {0, 0, h});
  TetId t(0);
  mesh.tet_mut(t).r = true;
  auto m = find_match(mesh, t);
  REQUIRE(m.has_value());
  CHECK_THROWS_AS(apply_production(mesh, *m), GeometryError);
}

TEST_CASE("edge_less is a strict total order") {
  MeshGraph mesh = pt::unit_cube_box6();
  refine(mesh, RefinePlan{mesh.live_tets()});
  std::vector<EdgeId> edges;
  for (std::size_t i = 0; i < mesh.edge_slot_count(); ++i) {
    EdgeId e(static_cast<std::uint32_t>(i));
    if (mesh.is_live(e)) edges.push_back(e);
  }
  for (EdgeId a : edges) {
    CHECK_FALSE(edge_less(mesh, a, a));  // irreflexive
    for (EdgeId b : edges) {
      if (a == b) continue;
      // asymmetric and total
      CHECK(edge_less(mesh, a, b) != edge_less(mesh, b, a));
      for (EdgeId c : edges) {
        if (edge_less(mesh, a, b) && edge_less(mesh, b, c)) {
          CHECK(edge_less(mesh, a, c));  // transitive
        }
      }
    }
  }
}

TEST_CASE("apply_production rejects a stale match") {
  MeshGraph mesh = pt::single_tet();
  TetId t(0);
  mesh.longest_edges(t);
  EdgeId e1 = mesh.tet(t).edges[0];
  Match bogus{t, e1, ProductionKind::P4};
  CHECK_THROWS_AS(apply_production(mesh, bogus), PreconditionError);
}

TEST_CASE("refine with empty marking changes nothing") {
  MeshGraph mesh = pt::unit_cube_box6();
  RefineSummary summary = refine(mesh, RefinePlan{});
  CHECK(summary.total_applied() == 0);
  CHECK(mesh.live_tet_count() == 6);
  CHECK(mesh.point_count() == 8);
  CHECK(mesh.validate().ok());
}

TEST_CASE("refine of an isolated tet applies exactly one production") {
  MeshGraph mesh = pt::single_tet({0, 0, 0}, {2, 0, 0}, {0, 1, 0}, {0, 0, 1});
  RefineSummary summary = refine(mesh, RefinePlan{{TetId(0)}});
  CHECK(summary.total_applied() == 1);
  CHECK(summary.applied[0] == 1);  // P1
  CHECK(mesh.live_tet_count() == 2);
  CHECK(mesh.point_count() == 5);
  CHECK(mesh.quiescent());
  CHECK(mesh.broken_face_count() == 0);
  CHECK(mesh.validate().ok());
}

TEST_CASE("refine rejects non-quiescent meshes and dead marks") {
  MeshGraph mesh = pt::unit_cube_box6();
  CHECK_THROWS_AS(refine(mesh, RefinePlan{{TetId(77)}}), HandleError);

  auto e = mesh.find_edge(PointId(0), PointId(7));
  mesh.edge_mut(*e).br = true;
  mesh.edge_mut(*e).midpoint_point = mesh.add_point({0.5, 0.5, 0.5});
  CHECK_THROWS_AS(refine(mesh, RefinePlan{{TetId(0)}}), PreconditionError);
}

TEST_CASE("refine marked cube reaches a conforming fixpoint") {
  MeshGraph mesh = pt::unit_cube_box6();
  std::vector<TetId> all = mesh.live_tets();
  RefineSummary summary = refine(mesh, RefinePlan{all});
  CHECK(summary.total_applied() > 0);
  CHECK(mesh.live_tet_count() > 6);
  CHECK(mesh.quiescent());
  auto report = mesh.validate();
  CHECK(report.ok());
  CHECK(oracles::total_volume(mesh) == doctest::Approx(1.0).epsilon(1e-12));

  // All pre-refinement points survive with identical coordinates.
  for (int i = 0; i < 8; ++i) {
    Vec3 expect((i & 1) ? 1.0 : 0.0, (i & 2) ? 1.0 : 0.0, (i & 4) ? 1.0 : 0.0);
    CHECK((mesh.point(PointId(i)).coords - expect).norm() == 0.0);
  }
}

TEST_CASE("refine matches the naive recursive bisector on the cube") {
  MeshGraph mesh = pt::unit_cube_box6();
  auto oracle = oracles::NaiveBisector::from_mesh(mesh);

  std::vector<TetId> all = mesh.live_tets();
  std::vector<std::uint32_t> marked;
  for (TetId t : all) marked.push_back(t.value);

  refine(mesh, RefinePlan{all});
  oracle.run(marked);

  CHECK(oracles::same_point_set(oracles::mesh_point_set(mesh), oracle.points, 1e-12));
}

TEST_CASE("refine matches the oracle under partial markings") {
  std::mt19937 rng(7);
  for (int trial = 0; trial < 5; ++trial) {
    MeshGraph mesh = pt::unit_cube_box6();
    // Pre-refine uniformly once to diversify, then mark a random subset.
    refine(mesh, RefinePlan{mesh.live_tets()});

    std::vector<TetId> live = mesh.live_tets();
    std::vector<TetId> marks;
    std::vector<std::uint32_t> oracle_marks;
    std::uniform_int_distribution<std::size_t> pick(0, live.size() - 1);
    for (int k = 0; k < 3; ++k) {
      TetId t = live[pick(rng)];
      if (std::find(marks.begin(), marks.end(), t) == marks.end()) {
        marks.push_back(t);
        oracle_marks.push_back(t.value);
      }
    }

    auto oracle = oracles::NaiveBisector::from_mesh(mesh);
    refine(mesh, RefinePlan{marks});
    oracle.run(oracle_marks);

    CHECK(oracles::same_point_set(oracles::mesh_point_set(mesh), oracle.points, 1e-12));
    CHECK(mesh.validate().ok());
  }
}

TEST_CASE("refine is deterministic") {
  auto run = []() {
    MeshGraph mesh = pt::unit_cube_box6();
    refine(mesh, RefinePlan{mesh.live_tets()});
    refine(mesh, RefinePlan{{TetId(0), TetId(3)}});
    std::vector<Vec3> pts = oracles::mesh_point_set(mesh);
    std::vector<std::array<std::uint32_t, 4>> cells;
    for (TetId t : mesh.live_tets()) {
      const auto& p = mesh.tet(t).points;
      cells.push_back({p[0].value, p[1].value, p[2].value, p[3].value});
    }
    return std::make_pair(pts, cells);
  };
  auto [pts1, cells1] = run();
  auto [pts2, cells2] = run();
  REQUIRE(pts1.size() == pts2.size());
  for (std::size_t i = 0; i < pts1.size(); ++i) {
    CHECK((pts1[i] - pts2[i]).norm() == 0.0);
  }
  CHECK(cells1 == cells2);
}

TEST_CASE("marked tets are bisected even when conformity arrives first") {
  MeshGraph mesh = pt::unit_cube_box6();
  // Mark one tet; its neighbors refine only through conformity.
  RefineSummary summary = refine(mesh, RefinePlan{{TetId(2)}});
  CHECK(summary.total_applied() >= 1);
  CHECK(mesh.quiescent());
  CHECK(mesh.validate().ok());
  // P2/P3/P4 were needed to resolve the cascade.
  CHECK(summary.total_applied() > summary.applied[0]);
}

TEST_CASE("refine reports non-termination when the pass bound is hit") {
  MeshGraph mesh = pt::unit_cube_box6();
  RefinePlan plan;
  plan.marked = mesh.live_tets();
  plan.max_passes = 1;  // the conformity cascade needs more than one generation
  CHECK_THROWS_AS(refine(mesh, plan), NonTerminationError);
  try {
    MeshGraph mesh2 = pt::unit_cube_box6();
    refine(mesh2, plan);
  } catch (const NonTerminationError& e) {
    CHECK(e.diagnostic().find("broken edges") != std::string::npos);
  }
}

TEST_CASE("boundary classification survives refinement") {
  MeshGraph mesh = pt::unit_cube_box6();
  for (int k = 0; k < 3; ++k) refine(mesh, RefinePlan{mesh.live_tets()});

  // An edge lies on the cube surface iff both endpoints share a face plane.
  auto on_surface = [&](const EdgeRecord& e) {
    const Vec3& a = mesh.point(e.ip).coords;
    const Vec3& b = mesh.point(e.fp).coords;
    for (int axis = 0; axis < 3; ++axis) {
      for (double plane : {0.0, 1.0}) {
        if (a[axis] == plane && b[axis] == plane) return true;
      }
    }
    return false;
  };
  for (std::size_t i = 0; i < mesh.edge_slot_count(); ++i) {
    EdgeId id(static_cast<std::uint32_t>(i));
    if (!mesh.is_live(id)) continue;
    const EdgeRecord& e = mesh.edge(id);
    CHECK((e.ae == EdgeLocation::Boundary) == on_surface(e));
  }

  // Bottom-surface faces keep their tag through splits.
  std::size_t bottom_faces = 0;
  for (std::size_t i = 0; i < mesh.face_slot_count(); ++i) {
    FaceId f(static_cast<std::uint32_t>(i));
    if (!mesh.is_live(f) || !mesh.face(f).boundary) continue;
    bool on_floor = true;
    for (PointId p : mesh.face(f).points) {
      on_floor = on_floor && mesh.point(p).coords.z() == 0.0;
    }
    CHECK(mesh.face(f).bottom == false);  // plain cube carries no bottom tags
    if (on_floor) ++bottom_faces;
  }
  CHECK(bottom_faces > 2);
}

TEST_CASE("ten uniform rounds keep dihedral angles bounded") {
  MeshGraph mesh = pt::regular_tet();
  double initial = oracles::min_dihedral_over_mesh(mesh);
  for (int round = 0; round < 10; ++round) {
    refine(mesh, RefinePlan{mesh.live_tets()});
  }
  double final_angle = oracles::min_dihedral_over_mesh(mesh);
  CHECK(final_angle >= 0.2 * initial);
  CHECK(mesh.validate().ok());
}
