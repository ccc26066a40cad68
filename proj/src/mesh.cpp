#include "plume/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include <Eigen/Geometry>

#include "plume/errors.hpp"

namespace plume {

namespace {

std::string id_str(const char* kind, std::uint32_t v) {
  std::ostringstream ss;
  ss << kind << " " << v;
  return ss.str();
}

}  // namespace

std::uint64_t MeshGraph::edge_key(PointId a, PointId b) {
  std::uint32_t lo = std::min(a.value, b.value);
  std::uint32_t hi = std::max(a.value, b.value);
  return (static_cast<std::uint64_t>(lo) << 32) | hi;
}

std::array<std::uint32_t, 3> MeshGraph::face_key(PointId a, PointId b, PointId c) {
  std::array<std::uint32_t, 3> k{a.value, b.value, c.value};
  std::sort(k.begin(), k.end());
  return k;
}

std::size_t MeshGraph::FaceKeyHash::operator()(const std::array<std::uint32_t, 3>& k) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (std::uint32_t v : k) {
    h ^= v;
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

MeshGraph MeshGraph::from_cells(const std::vector<Vec3>& points,
                                const std::vector<std::array<std::uint32_t, 4>>& cells) {
  MeshGraph mesh;
  mesh.points_.reserve(points.size());
  for (const Vec3& p : points) {
    mesh.add_point(p);
  }
  for (const auto& cell : cells) {
    std::array<PointId, 4> pts;
    for (int i = 0; i < 4; ++i) {
      if (cell[i] >= points.size()) {
        throw FormatError("cell references point " + std::to_string(cell[i]) +
                          " but only " + std::to_string(points.size()) + " points exist");
      }
      pts[i] = PointId(cell[i]);
    }
    mesh.add_tet(pts);
  }
  mesh.assign_boundary_flags();
  return mesh;
}

PointId MeshGraph::add_point(const Vec3& coords) {
  points_.push_back(Point{coords});
  return PointId(static_cast<std::uint32_t>(points_.size() - 1));
}

EdgeId MeshGraph::get_or_create_edge(PointId a, PointId b) {
  auto it = edge_lookup_.find(edge_key(a, b));
  if (it != edge_lookup_.end()) {
    if (!edges_[it->second.value].alive) {
      throw PreconditionError("edge lookup hit a tombstoned record");
    }
    return it->second;
  }
  EdgeRecord rec;
  rec.ip = a;
  rec.fp = b;
  EdgeId id(static_cast<std::uint32_t>(edges_.size()));
  edges_.push_back(rec);
  edge_to_tets_.emplace_back();
  edge_lookup_.emplace(edge_key(a, b), id);
  return id;
}

FaceId MeshGraph::get_or_create_face(PointId a, PointId b, PointId c) {
  auto it = face_lookup_.find(face_key(a, b, c));
  if (it != face_lookup_.end()) {
    if (!faces_[it->second.value].alive) {
      throw PreconditionError("face lookup hit a tombstoned record");
    }
    return it->second;
  }
  FaceRecord rec;
  rec.points = {a, b, c};
  rec.edges = {get_or_create_edge(a, b), get_or_create_edge(b, c), get_or_create_edge(a, c)};
  FaceId id(static_cast<std::uint32_t>(faces_.size()));
  faces_.push_back(rec);
  face_to_tets_.emplace_back();
  face_lookup_.emplace(face_key(a, b, c), id);
  return id;
}

TetId MeshGraph::add_tet(const std::array<PointId, 4>& pts_in) {
  std::array<PointId, 4> pts = pts_in;
  // Normalize to positive orientation; degenerate cells are kept as given so
  // validate() can report them.
  const Vec3& p0 = points_[pts[0].value].coords;
  const Vec3& p1 = points_[pts[1].value].coords;
  const Vec3& p2 = points_[pts[2].value].coords;
  const Vec3& p3 = points_[pts[3].value].coords;
  double vol6 = (p1 - p0).cross(p2 - p0).dot(p3 - p0);
  if (vol6 < 0.0) {
    std::swap(pts[2], pts[3]);
  }

  TetRecord rec;
  rec.points = pts;
  int k = 0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      rec.edges[k++] = get_or_create_edge(pts[i], pts[j]);
    }
  }
  rec.faces[0] = get_or_create_face(pts[1], pts[2], pts[3]);
  rec.faces[1] = get_or_create_face(pts[0], pts[2], pts[3]);
  rec.faces[2] = get_or_create_face(pts[0], pts[1], pts[3]);
  rec.faces[3] = get_or_create_face(pts[0], pts[1], pts[2]);

  TetId id(static_cast<std::uint32_t>(tets_.size()));
  tets_.push_back(rec);
  attach_tet(id);
  return id;
}

void MeshGraph::assign_boundary_flags() {
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    if (faces_[i].alive) {
      faces_[i].boundary = face_to_tets_[i].size() == 1;
    }
  }
  for (auto& e : edges_) {
    if (e.alive) {
      e.ae = EdgeLocation::Interior;
    }
  }
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    if (!faces_[i].alive || !faces_[i].boundary) continue;
    for (EdgeId e : faces_[i].edges) {
      edges_[e.value].ae = EdgeLocation::Boundary;
    }
  }
}

std::size_t MeshGraph::live_edge_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges_.begin(), edges_.end(), [](const EdgeRecord& e) { return e.alive; }));
}

std::size_t MeshGraph::live_face_count() const {
  return static_cast<std::size_t>(
      std::count_if(faces_.begin(), faces_.end(), [](const FaceRecord& f) { return f.alive; }));
}

std::size_t MeshGraph::live_tet_count() const {
  return static_cast<std::size_t>(
      std::count_if(tets_.begin(), tets_.end(), [](const TetRecord& t) { return t.alive; }));
}

std::vector<TetId> MeshGraph::live_tets() const {
  std::vector<TetId> out;
  out.reserve(tets_.size());
  for (std::size_t i = 0; i < tets_.size(); ++i) {
    if (tets_[i].alive) out.push_back(TetId(static_cast<std::uint32_t>(i)));
  }
  return out;
}

const Point& MeshGraph::point(PointId p) const {
  if (!has_point(p)) throw HandleError("unknown " + id_str("point", p.value));
  return points_[p.value];
}

const EdgeRecord& MeshGraph::edge(EdgeId e) const {
  if (e.value >= edges_.size()) throw HandleError("unknown " + id_str("edge", e.value));
  return edges_[e.value];
}

const FaceRecord& MeshGraph::face(FaceId f) const {
  if (f.value >= faces_.size()) throw HandleError("unknown " + id_str("face", f.value));
  return faces_[f.value];
}

const TetRecord& MeshGraph::tet(TetId t) const {
  if (t.value >= tets_.size()) throw HandleError("unknown " + id_str("tet", t.value));
  return tets_[t.value];
}

EdgeRecord& MeshGraph::edge_mut(EdgeId e) {
  return const_cast<EdgeRecord&>(static_cast<const MeshGraph*>(this)->edge(e));
}

FaceRecord& MeshGraph::face_mut(FaceId f) {
  return const_cast<FaceRecord&>(static_cast<const MeshGraph*>(this)->face(f));
}

TetRecord& MeshGraph::tet_mut(TetId t) {
  return const_cast<TetRecord&>(static_cast<const MeshGraph*>(this)->tet(t));
}

Point& MeshGraph::point_mut(PointId p) {
  return const_cast<Point&>(static_cast<const MeshGraph*>(this)->point(p));
}

const std::vector<TetId>& MeshGraph::tets_of_edge(EdgeId e) const {
  if (e.value >= edges_.size()) throw HandleError("unknown " + id_str("edge", e.value));
  return edge_to_tets_[e.value];
}

const std::vector<TetId>& MeshGraph::tets_of_face(FaceId f) const {
  if (f.value >= faces_.size()) throw HandleError("unknown " + id_str("face", f.value));
  return face_to_tets_[f.value];
}

std::optional<EdgeId> MeshGraph::find_edge(PointId a, PointId b) const {
  auto it = edge_lookup_.find(edge_key(a, b));
  if (it == edge_lookup_.end() || !edges_[it->second.value].alive) return std::nullopt;
  return it->second;
}

std::optional<FaceId> MeshGraph::find_face(PointId a, PointId b, PointId c) const {
  auto it = face_lookup_.find(face_key(a, b, c));
  if (it == face_lookup_.end() || !faces_[it->second.value].alive) return std::nullopt;
  return it->second;
}

double MeshGraph::edge_length(EdgeId e) const {
  const EdgeRecord& rec = edge(e);
  return (points_[rec.ip.value].coords - points_[rec.fp.value].coords).norm();
}

double MeshGraph::tet_volume(TetId t) const {
  const TetRecord& rec = tet(t);
  const Vec3& p0 = points_[rec.points[0].value].coords;
  const Vec3& p1 = points_[rec.points[1].value].coords;
  const Vec3& p2 = points_[rec.points[2].value].coords;
  const Vec3& p3 = points_[rec.points[3].value].coords;
  return (p1 - p0).cross(p2 - p0).dot(p3 - p0) / 6.0;
}

std::vector<EdgeId> MeshGraph::longest_edges(TetId t) {
  const TetRecord& rec = tet(t);
  if (!rec.alive) throw HandleError("dead " + id_str("tet", t.value));

  std::array<double, 6> len;
  double max_len = 0.0;
  for (int i = 0; i < 6; ++i) {
    len[i] = edge_length(rec.edges[i]);
    max_len = std::max(max_len, len[i]);
  }
  if (std::abs(tet_volume(t)) <= k_degeneracy_rel_tol * max_len * max_len * max_len) {
    throw GeometryError("degenerate " + id_str("tet", t.value));
  }

  std::vector<EdgeId> longest;
  for (int i = 0; i < 6; ++i) {
    bool tied = max_len - len[i] <= k_length_tie_rel_tol * max_len;
    edges_[rec.edges[i].value].le = tied;
    if (tied) longest.push_back(rec.edges[i]);
  }
  std::sort(longest.begin(), longest.end(),
            [this](EdgeId a, EdgeId b) { return edge_less(*this, a, b); });
  return longest;
}

double MeshGraph::min_dihedral_angle(TetId t) const {
  const TetRecord& rec = tet(t);
  double min_angle = std::numeric_limits<double>::infinity();
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      const Vec3& a = points_[rec.points[i].value].coords;
      const Vec3& b = points_[rec.points[j].value].coords;
      std::array<Vec3, 2> others;
      int k = 0;
      for (int m = 0; m < 4; ++m) {
        if (m != i && m != j) others[k++] = points_[rec.points[m].value].coords;
      }
      Vec3 axis = (b - a).normalized();
      Vec3 u = (others[0] - a) - ((others[0] - a).dot(axis)) * axis;
      Vec3 w = (others[1] - a) - ((others[1] - a).dot(axis)) * axis;
      double angle = std::atan2(u.cross(w).norm(), u.dot(w));
      min_angle = std::min(min_angle, angle);
    }
  }
  return min_angle;
}

std::array<FaceId, 2> MeshGraph::faces_adjacent_to_edge(TetId t, EdgeId e) const {
  const TetRecord& rec = tet(t);
  const EdgeRecord& er = edge(e);
  std::array<FaceId, 2> out{};
  int n = 0;
  for (FaceId f : rec.faces) {
    const FaceRecord& fr = faces_[f.value];
    bool has_ip = false, has_fp = false;
    for (PointId p : fr.points) {
      has_ip = has_ip || p == er.ip;
      has_fp = has_fp || p == er.fp;
    }
    if (has_ip && has_fp) {
      if (n < 2) out[n] = f;
      ++n;
    }
  }
  if (n != 2) {
    throw HandleError(id_str("edge", e.value) + " is not an edge of " + id_str("tet", t.value));
  }
  return out;
}

bool MeshGraph::tet_has_edge(TetId t, EdgeId e) const {
  const TetRecord& rec = tet(t);
  return std::find(rec.edges.begin(), rec.edges.end(), e) != rec.edges.end();
}

bool MeshGraph::tet_has_broken_edge(TetId t) const {
  const TetRecord& rec = tet(t);
  return std::any_of(rec.edges.begin(), rec.edges.end(),
                     [this](EdgeId e) { return edges_[e.value].br; });
}

bool MeshGraph::quiescent() const {
  return std::none_of(edges_.begin(), edges_.end(),
                      [](const EdgeRecord& e) { return e.alive && e.br; });
}

std::size_t MeshGraph::broken_edge_count() const {
  return static_cast<std::size_t>(std::count_if(
      edges_.begin(), edges_.end(), [](const EdgeRecord& e) { return e.alive && e.br; }));
}

std::size_t MeshGraph::broken_face_count() const {
  return static_cast<std::size_t>(std::count_if(
      faces_.begin(), faces_.end(), [](const FaceRecord& f) { return f.alive && f.brf; }));
}

std::vector<PointId> MeshGraph::boundary_points() const {
  std::vector<bool> on_boundary(points_.size(), false);
  for (const FaceRecord& f : faces_) {
    if (!f.alive || !f.boundary) continue;
    for (PointId p : f.points) on_boundary[p.value] = true;
  }
  std::vector<PointId> out;
  for (std::size_t i = 0; i < on_boundary.size(); ++i) {
    if (on_boundary[i]) out.push_back(PointId(static_cast<std::uint32_t>(i)));
  }
  return out;
}

std::vector<PointId> MeshGraph::bottom_surface_points() const {
  std::vector<bool> on_bottom(points_.size(), false);
  for (const FaceRecord& f : faces_) {
    if (!f.alive || !f.bottom) continue;
    for (PointId p : f.points) on_bottom[p.value] = true;
  }
  std::vector<PointId> out;
  for (std::size_t i = 0; i < on_bottom.size(); ++i) {
    if (on_bottom[i]) out.push_back(PointId(static_cast<std::uint32_t>(i)));
  }
  return out;
}

void MeshGraph::detach_tet(TetId t) {
  TetRecord& rec = tets_[t.value];
  auto remove_from = [t](std::vector<TetId>& v) {
    v.erase(std::remove(v.begin(), v.end(), t), v.end());
  };
  // Unreferenced edges and faces stay alive until compact(): a rewrite on the
  // other side of a shared interface may still need the record and its
  // attributes (split flags, midpoints, child keys).
  for (EdgeId e : rec.edges) remove_from(edge_to_tets_[e.value]);
  for (FaceId f : rec.faces) remove_from(face_to_tets_[f.value]);
  rec.alive = false;
}

void MeshGraph::attach_tet(TetId t) {
  const TetRecord& rec = tets_[t.value];
  for (EdgeId e : rec.edges) edge_to_tets_[e.value].push_back(t);
  for (FaceId f : rec.faces) face_to_tets_[f.value].push_back(t);
}

void MeshGraph::compact() {
  std::vector<std::uint32_t> edge_map(edges_.size(), EdgeId::invalid_value);
  std::vector<std::uint32_t> face_map(faces_.size(), FaceId::invalid_value);

  // Drop tombstoned records and interface leftovers no live tet references.
  std::vector<EdgeRecord> new_edges;
  new_edges.reserve(edges_.size());
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    if (!edges_[i].alive || edge_to_tets_[i].empty()) continue;
    edge_map[i] = static_cast<std::uint32_t>(new_edges.size());
    new_edges.push_back(edges_[i]);
  }

  std::vector<FaceRecord> new_faces;
  new_faces.reserve(faces_.size());
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    if (!faces_[i].alive || face_to_tets_[i].empty()) continue;
    face_map[i] = static_cast<std::uint32_t>(new_faces.size());
    FaceRecord f = faces_[i];
    for (EdgeId& e : f.edges) e = EdgeId(edge_map[e.value]);
    new_faces.push_back(f);
  }

  std::vector<TetRecord> new_tets;
  new_tets.reserve(tets_.size());
  for (const TetRecord& t : tets_) {
    if (!t.alive) continue;
    TetRecord rec = t;
    for (EdgeId& e : rec.edges) e = EdgeId(edge_map[e.value]);
    for (FaceId& f : rec.faces) f = FaceId(face_map[f.value]);
    new_tets.push_back(rec);
  }

  edges_ = std::move(new_edges);
  faces_ = std::move(new_faces);
  tets_ = std::move(new_tets);

  edge_lookup_.clear();
  for (std::size_t i = 0; i < edges_.size(); ++i) {
    edge_lookup_.emplace(edge_key(edges_[i].ip, edges_[i].fp), EdgeId(static_cast<std::uint32_t>(i)));
  }
  face_lookup_.clear();
  for (std::size_t i = 0; i < faces_.size(); ++i) {
    const auto& p = faces_[i].points;
    face_lookup_.emplace(face_key(p[0], p[1], p[2]), FaceId(static_cast<std::uint32_t>(i)));
  }

  edge_to_tets_.assign(edges_.size(), {});
  face_to_tets_.assign(faces_.size(), {});
  for (std::size_t i = 0; i < tets_.size(); ++i) {
    attach_tet(TetId(static_cast<std::uint32_t>(i)));
  }
}

bool edge_less(const MeshGraph& mesh, EdgeId a, EdgeId b) {
  if (a == b) return false;
  double la = mesh.edge_length(a);
  double lb = mesh.edge_length(b);
  if (la != lb) return la > lb;

  const EdgeRecord& ra = mesh.edge(a);
  const EdgeRecord& rb = mesh.edge(b);
  auto sorted_pair = [&mesh](const EdgeRecord& r) {
    Vec3 p = mesh.point(r.ip).coords;
    Vec3 q = mesh.point(r.fp).coords;
    for (int i = 0; i < 3; ++i) {
      if (p[i] < q[i]) return std::make_pair(p, q);
      if (p[i] > q[i]) return std::make_pair(q, p);
    }
    return std::make_pair(p, q);
  };
  auto [amin, amax] = sorted_pair(ra);
  auto [bmin, bmax] = sorted_pair(rb);
  for (int i = 0; i < 3; ++i) {
    if (amin[i] != bmin[i]) return amin[i] < bmin[i];
  }
  for (int i = 0; i < 3; ++i) {
    if (amax[i] != bmax[i]) return amax[i] < bmax[i];
  }
  return a.value < b.value;
}

}  // namespace plume
