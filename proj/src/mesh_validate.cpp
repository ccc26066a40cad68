#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <sstream>
#include <unordered_map>

#include <Eigen/Geometry>

#include "plume/mesh.hpp"

namespace plume {

namespace {

constexpr double k_hanging_rel_tol = 1e-9;

// Uniform hash grid over live points, used to keep the hanging-node scan
// close to linear.
class PointGrid {
 public:
  PointGrid(const std::vector<Vec3>& coords, const std::vector<bool>& live, double cell) {
    cell_ = std::max(cell, 1e-300);
    for (std::size_t i = 0; i < coords.size(); ++i) {
      if (!live[i]) continue;
      cells_[key_of(coords[i])].push_back(static_cast<std::uint32_t>(i));
    }
  }

  template <class Fn>
  void for_each_in_box(const Vec3& lo, const Vec3& hi, Fn&& fn) const {
    std::int64_t ix0 = idx(lo.x()), ix1 = idx(hi.x());
    std::int64_t iy0 = idx(lo.y()), iy1 = idx(hi.y());
    std::int64_t iz0 = idx(lo.z()), iz1 = idx(hi.z());
    for (std::int64_t ix = ix0; ix <= ix1; ++ix) {
      for (std::int64_t iy = iy0; iy <= iy1; ++iy) {
        for (std::int64_t iz = iz0; iz <= iz1; ++iz) {
          auto it = cells_.find(pack(ix, iy, iz));
          if (it == cells_.end()) continue;
          for (std::uint32_t p : it->second) fn(p);
        }
      }
    }
  }

 private:
  std::int64_t idx(double x) const { return static_cast<std::int64_t>(std::floor(x / cell_)); }

  static std::uint64_t pack(std::int64_t x, std::int64_t y, std::int64_t z) {
    auto fold = [](std::int64_t v) { return static_cast<std::uint64_t>(v) & 0x1fffffull; };
    return (fold(x) << 42) | (fold(y) << 21) | fold(z);
  }

  std::uint64_t key_of(const Vec3& p) const { return pack(idx(p.x()), idx(p.y()), idx(p.z())); }

  double cell_;
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> cells_;
};

bool point_inside_segment(const Vec3& p, const Vec3& a, const Vec3& b) {
  Vec3 ab = b - a;
  double len2 = ab.squaredNorm();
  if (len2 == 0.0) return false;
  double t = (p - a).dot(ab) / len2;
  if (t <= k_hanging_rel_tol || t >= 1.0 - k_hanging_rel_tol) return false;
  Vec3 closest = a + t * ab;
  return (p - closest).norm() <= k_hanging_rel_tol * std::sqrt(len2);
}

bool point_inside_triangle(const Vec3& p, const Vec3& a, const Vec3& b, const Vec3& c) {
  Vec3 n = (b - a).cross(c - a);
  double n_norm = n.norm();
  if (n_norm == 0.0) return false;
  double diam = std::max({(b - a).norm(), (c - a).norm(), (c - b).norm()});
  if (std::abs((p - a).dot(n)) > k_hanging_rel_tol * diam * n_norm) return false;

  // Barycentric coordinates; strict interior only (edge and vertex hits are
  // reported by the segment scan).
  Vec3 v0 = b - a, v1 = c - a, v2 = p - a;
  double d00 = v0.dot(v0), d01 = v0.dot(v1), d11 = v1.dot(v1);
  double d20 = v2.dot(v0), d21 = v2.dot(v1);
  double denom = d00 * d11 - d01 * d01;
  if (denom == 0.0) return false;
  double v = (d11 * d20 - d01 * d21) / denom;
  double w = (d00 * d21 - d01 * d20) / denom;
  double u = 1.0 - v - w;
  double eps = k_hanging_rel_tol;
  return u > eps && v > eps && w > eps;
}

}  // namespace

// Runs all integrity checks; declared as friend of MeshGraph.
class MeshChecker {
 public:
  explicit MeshChecker(const MeshGraph& mesh) : m_(mesh) {}

  ValidationReport run() {
    check_points();
    check_edges();
    check_faces();
    check_tets();
    check_reverse_adjacency();
    if (m_.quiescent()) {
      check_quiescent_state();
      check_conformity();
      check_hanging_nodes();
    }
    return std::move(report_);
  }

 private:
  void add(const std::string& msg) { report_.violations.push_back(msg); }

  void check_points() {
    for (std::size_t i = 0; i < m_.points_.size(); ++i) {
      if (!m_.points_[i].coords.allFinite()) {
        add("point " + std::to_string(i) + ": non-finite coordinates");
      }
    }
  }

  void check_edges() {
    for (std::size_t i = 0; i < m_.edges_.size(); ++i) {
      const EdgeRecord& e = m_.edges_[i];
      if (!e.alive) continue;
      std::string name = "edge " + std::to_string(i);
      if (e.ip.value >= m_.points_.size() || e.fp.value >= m_.points_.size()) {
        add(name + ": endpoint out of range");
        continue;
      }
      if (e.ip == e.fp) add(name + ": identical endpoints");
      if (e.br) {
        if (!e.midpoint_point.valid() || e.midpoint_point.value >= m_.points_.size()) {
          add(name + ": broken but midpoint point missing");
        } else {
          Vec3 expected = (m_.points_[e.ip.value].coords + m_.points_[e.fp.value].coords) * 0.5;
          Vec3 actual = m_.points_[e.midpoint_point.value].coords;
          double scale = std::max(1.0, (m_.points_[e.ip.value].coords - m_.points_[e.fp.value].coords).norm());
          if ((expected - actual).norm() > 1e-12 * scale) {
            add(name + ": midpoint differs from endpoint average");
          }
        }
      } else if (e.midpoint_point.valid()) {
        add(name + ": not broken but carries a midpoint point");
      }
    }
  }

  void check_faces() {
    for (std::size_t i = 0; i < m_.faces_.size(); ++i) {
      const FaceRecord& f = m_.faces_[i];
      if (!f.alive) continue;
      std::string name = "face " + std::to_string(i);
      std::set<std::uint32_t> pts(
          {f.points[0].value, f.points[1].value, f.points[2].value});
      if (pts.size() != 3) {
        add(name + ": repeated points");
        continue;
      }
      bool edges_ok = true;
      std::set<std::uint32_t> endpoint_union;
      for (EdgeId e : f.edges) {
        if (e.value >= m_.edges_.size() || !m_.edges_[e.value].alive) {
          add(name + ": references dead or unknown edge");
          edges_ok = false;
          break;
        }
        endpoint_union.insert(m_.edges_[e.value].ip.value);
        endpoint_union.insert(m_.edges_[e.value].fp.value);
      }
      if (!edges_ok) continue;
      if (endpoint_union != pts) {
        add(name + ": edges do not bound the face's points");
      }
      for (int a = 0; a < 3; ++a) {
        for (int b = a + 1; b < 3; ++b) {
          const EdgeRecord& ea = m_.edges_[f.edges[a].value];
          const EdgeRecord& eb = m_.edges_[f.edges[b].value];
          std::set<std::uint32_t> shared;
          for (std::uint32_t u : {ea.ip.value, ea.fp.value}) {
            if (u == eb.ip.value || u == eb.fp.value) shared.insert(u);
          }
          if (shared.size() != 1) {
            add(name + ": bounding edges do not pairwise share one endpoint");
          }
        }
      }
      if (f.brf) {
        bool any_broken = std::any_of(f.edges.begin(), f.edges.end(), [this](EdgeId e) {
          return m_.edges_[e.value].br;
        });
        if (!any_broken) add(name + ": brf set but no bounding edge is broken");
      }
    }
  }

  void check_tets() {
    for (std::size_t i = 0; i < m_.tets_.size(); ++i) {
      const TetRecord& t = m_.tets_[i];
      if (!t.alive) continue;
      std::string name = "tet " + std::to_string(i);
      std::set<std::uint32_t> pts;
      bool pts_ok = true;
      for (PointId p : t.points) {
        if (p.value >= m_.points_.size()) {
          add(name + ": point out of range");
          pts_ok = false;
          break;
        }
        pts.insert(p.value);
      }
      if (!pts_ok) continue;
      if (pts.size() != 4) {
        add(name + ": repeated points");
        continue;
      }

      double max_len = 0.0;
      for (EdgeId e : t.edges) {
        if (e.value >= m_.edges_.size() || !m_.edges_[e.value].alive) {
          add(name + ": references dead or unknown edge");
        } else {
          max_len = std::max(max_len, m_.edge_length(e));
        }
      }
      double vol = m_.tet_volume(TetId(static_cast<std::uint32_t>(i)));
      if (std::abs(vol) <= k_degeneracy_rel_tol * max_len * max_len * max_len) {
        add(name + ": degenerate (volume below tolerance)");
      }

      // The 6 edges must be exactly the 6 point pairs, the 4 faces exactly the
      // 4 point triples; each face's edges are then a subset automatically,
      // but check the stored face edges anyway.
      std::set<std::uint64_t> want_edges;
      for (int a = 0; a < 4; ++a) {
        for (int b = a + 1; b < 4; ++b) {
          want_edges.insert(MeshGraph::edge_key(t.points[a], t.points[b]));
        }
      }
      std::set<std::uint64_t> have_edges;
      for (EdgeId e : t.edges) {
        if (e.value < m_.edges_.size()) {
          have_edges.insert(MeshGraph::edge_key(m_.edges_[e.value].ip, m_.edges_[e.value].fp));
        }
      }
      if (want_edges != have_edges) add(name + ": edge set does not match point pairs");

      for (FaceId fid : t.faces) {
        if (fid.value >= m_.faces_.size() || !m_.faces_[fid.value].alive) {
          add(name + ": references dead or unknown face");
          continue;
        }
        const FaceRecord& f = m_.faces_[fid.value];
        for (PointId p : f.points) {
          if (pts.find(p.value) == pts.end()) {
            add(name + ": face " + std::to_string(fid.value) + " uses a foreign point");
          }
        }
        for (EdgeId e : f.edges) {
          if (std::find(t.edges.begin(), t.edges.end(), e) == t.edges.end()) {
            add(name + ": face " + std::to_string(fid.value) + " edge not among tet edges");
          }
        }
      }
    }
  }

  void check_reverse_adjacency() {
    std::vector<std::vector<TetId>> edge_inc(m_.edges_.size());
    std::vector<std::vector<TetId>> face_inc(m_.faces_.size());
    for (std::size_t i = 0; i < m_.tets_.size(); ++i) {
      if (!m_.tets_[i].alive) continue;
      TetId t(static_cast<std::uint32_t>(i));
      for (EdgeId e : m_.tets_[i].edges) {
        if (e.value < m_.edges_.size()) edge_inc[e.value].push_back(t);
      }
      for (FaceId f : m_.tets_[i].faces) {
        if (f.value < m_.faces_.size()) face_inc[f.value].push_back(t);
      }
    }
    auto same_set = [](std::vector<TetId> a, std::vector<TetId> b) {
      std::sort(a.begin(), a.end());
      std::sort(b.begin(), b.end());
      return a == b;
    };
    for (std::size_t i = 0; i < m_.edges_.size(); ++i) {
      if (!same_set(edge_inc[i], m_.edge_to_tets_[i])) {
        add("edge " + std::to_string(i) + ": reverse adjacency inconsistent");
      }
    }
    for (std::size_t i = 0; i < m_.faces_.size(); ++i) {
      if (!same_set(face_inc[i], m_.face_to_tets_[i])) {
        add("face " + std::to_string(i) + ": reverse adjacency inconsistent");
      }
    }
  }

  void check_quiescent_state() {
    for (std::size_t i = 0; i < m_.faces_.size(); ++i) {
      if (m_.faces_[i].alive && m_.faces_[i].brf) {
        add("face " + std::to_string(i) + ": broken face on a quiescent mesh");
      }
    }
  }

  void check_conformity() {
    for (std::size_t i = 0; i < m_.faces_.size(); ++i) {
      if (!m_.faces_[i].alive) continue;
      std::size_t n = m_.face_to_tets_[i].size();
      if (n == 0 || n > 2) {
        add("face " + std::to_string(i) + ": shared by " + std::to_string(n) + " tets");
      } else if (n == 1 && !m_.faces_[i].boundary) {
        add("face " + std::to_string(i) + ": interior face bounded by a single tet");
      } else if (n == 2 && m_.faces_[i].boundary) {
        add("face " + std::to_string(i) + ": boundary face shared by two tets");
      }
    }
    for (std::size_t i = 0; i < m_.edges_.size(); ++i) {
      if (!m_.edges_[i].alive) continue;
      std::size_t n = m_.edge_to_tets_[i].size();
      if (m_.edges_[i].ae == EdgeLocation::Interior && n < 3) {
        add("edge " + std::to_string(i) + ": interior edge in fewer than 3 tets");
      }
      if (n == 0) {
        add("edge " + std::to_string(i) + ": live edge without incident tets");
      }
    }
  }

  void check_hanging_nodes() {
    std::vector<bool> live_pt(m_.points_.size(), false);
    double avg_edge = 0.0;
    std::size_t n_edges = 0;
    for (const TetRecord& t : m_.tets_) {
      if (!t.alive) continue;
      for (PointId p : t.points) live_pt[p.value] = true;
    }
    for (std::size_t i = 0; i < m_.edges_.size(); ++i) {
      if (!m_.edges_[i].alive) continue;
      avg_edge += m_.edge_length(EdgeId(static_cast<std::uint32_t>(i)));
      ++n_edges;
    }
    if (n_edges == 0) return;
    avg_edge /= static_cast<double>(n_edges);

    std::vector<Vec3> coords(m_.points_.size());
    for (std::size_t i = 0; i < m_.points_.size(); ++i) coords[i] = m_.points_[i].coords;
    PointGrid grid(coords, live_pt, avg_edge);

    for (std::size_t i = 0; i < m_.edges_.size(); ++i) {
      const EdgeRecord& e = m_.edges_[i];
      if (!e.alive) continue;
      Vec3 a = coords[e.ip.value];
      Vec3 b = coords[e.fp.value];
      Vec3 lo = a.cwiseMin(b), hi = a.cwiseMax(b);
      grid.for_each_in_box(lo, hi, [&](std::uint32_t p) {
        if (p == e.ip.value || p == e.fp.value) return;
        if (point_inside_segment(coords[p], a, b)) {
          add("point " + std::to_string(p) + ": hanging node inside edge " + std::to_string(i));
        }
      });
    }
    for (std::size_t i = 0; i < m_.faces_.size(); ++i) {
      const FaceRecord& f = m_.faces_[i];
      if (!f.alive) continue;
      Vec3 a = coords[f.points[0].value];
      Vec3 b = coords[f.points[1].value];
      Vec3 c = coords[f.points[2].value];
      Vec3 lo = a.cwiseMin(b).cwiseMin(c), hi = a.cwiseMax(b).cwiseMax(c);
      grid.for_each_in_box(lo, hi, [&](std::uint32_t p) {
        if (p == f.points[0].value || p == f.points[1].value || p == f.points[2].value) return;
        if (point_inside_triangle(coords[p], a, b, c)) {
          add("point " + std::to_string(p) + ": hanging node inside face " + std::to_string(i));
        }
      });
    }
  }

  const MeshGraph& m_;
  ValidationReport report_;
};

ValidationReport MeshGraph::validate() const { return MeshChecker(*this).run(); }

}  // namespace plume
