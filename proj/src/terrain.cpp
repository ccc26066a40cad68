#include "plume/terrain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "plume/errors.hpp"

namespace plume {

void TerrainConfig::check() const {
  if (vertical_extent <= 0.0) throw ConfigError("terrain.vertical_extent", "must be positive");
  if (error_tolerance <= 0.0) throw ConfigError("terrain.error_tolerance", "must be positive");
  if (max_nodes == 0) throw ConfigError("terrain.max_nodes", "must be positive");
}

MeshGraph build_initial_mesh(const Heightmap& hm, const TerrainConfig& cfg, MeshMode mode) {
  hm.check();
  cfg.check();

  double x0 = hm.origin.x();
  double y0 = hm.origin.y();
  double x1 = x0 + hm.x_extent();
  double y1 = y0 + hm.y_extent();
  double z0 = hm.min_elevation();
  double z1 = hm.max_elevation() + cfg.vertical_extent;
  if (!(x1 > x0) || !(y1 > y0)) {
    throw FormatError("heightmap footprint is degenerate (need at least 2x2 samples)");
  }

  MeshGraph mesh;
  if (mode == MeshMode::SingleTet) {
    PointId a = mesh.add_point({x0, y0, z0});
    PointId b = mesh.add_point({x1, y0, z0});
    PointId c = mesh.add_point({x0, y1, z0});
    PointId d = mesh.add_point({x0, y0, z1});
    mesh.add_tet({a, b, c, d});
  } else {
    // Kuhn split: six tets around the main diagonal, one per axis permutation.
    std::array<PointId, 8> corner;
    for (int i = 0; i < 8; ++i) {
      corner[i] = mesh.add_point({(i & 1) ? x1 : x0, (i & 2) ? y1 : y0, (i & 4) ? z1 : z0});
    }
    constexpr int axis_bit[3] = {1, 2, 4};
    constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2},
                                 {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
    for (const auto& perm : perms) {
      int v0 = 0;
      int v1 = v0 | axis_bit[perm[0]];
      int v2 = v1 | axis_bit[perm[1]];
      int v3 = v2 | axis_bit[perm[2]];
      mesh.add_tet({corner[v0], corner[v1], corner[v2], corner[v3]});
    }
  }
  mesh.assign_boundary_flags();

  // Bottom band: boundary faces whose corners all sit on the floor plane.
  double z_eps = 1e-9 * std::max(1.0, std::abs(z1 - z0));
  for (std::size_t i = 0; i < mesh.face_slot_count(); ++i) {
    FaceId f(static_cast<std::uint32_t>(i));
    if (!mesh.is_live(f) || !mesh.face(f).boundary) continue;
    bool on_floor = true;
    for (PointId p : mesh.face(f).points) {
      on_floor = on_floor && std::abs(mesh.point(p).coords.z() - z0) <= z_eps;
    }
    mesh.face_mut(f).bottom = on_floor;
  }
  return mesh;
}

namespace {

// 2D point-in-triangle test on the footprint, boundary inclusive.
bool footprint_contains(const Eigen::Vector2d& p, const Eigen::Vector2d& a,
                        const Eigen::Vector2d& b, const Eigen::Vector2d& c) {
  auto cross = [](const Eigen::Vector2d& u, const Eigen::Vector2d& v) {
    return u.x() * v.y() - u.y() * v.x();
  };
  double d1 = cross(b - a, p - a);
  double d2 = cross(c - b, p - b);
  double d3 = cross(a - c, p - c);
  bool has_neg = (d1 < 0) || (d2 < 0) || (d3 < 0);
  bool has_pos = (d1 > 0) || (d2 > 0) || (d3 > 0);
  return !(has_neg && has_pos);
}

double face_surface_error(const MeshGraph& mesh, const Heightmap& hm, FaceId f) {
  const FaceRecord& fr = mesh.face(f);
  Vec3 a = mesh.point(fr.points[0]).coords;
  Vec3 b = mesh.point(fr.points[1]).coords;
  Vec3 c = mesh.point(fr.points[2]).coords;

  Eigen::Vector2d a2 = a.head<2>(), b2 = b.head<2>(), c2 = c.head<2>();
  double area2 = (b2 - a2).x() * (c2 - a2).y() - (b2 - a2).y() * (c2 - a2).x();
  double err = 0.0;

  // Bilinear deviation at the three footprint vertices keeps thin tets from
  // evaluating zero samples.
  for (const Vec3& v : {a, b, c}) {
    if (auto ground = hm.sample(v.x(), v.y())) {
      err = std::max(err, std::abs(v.z() - *ground));
    }
  }
  if (area2 == 0.0) return err;

  // Raster samples whose node position falls inside the footprint.
  double min_x = std::min({a2.x(), b2.x(), c2.x()});
  double max_x = std::max({a2.x(), b2.x(), c2.x()});
  double min_y = std::min({a2.y(), b2.y(), c2.y()});
  double max_y = std::max({a2.y(), b2.y(), c2.y()});
  auto col_lo = static_cast<std::ptrdiff_t>(std::ceil((min_x - hm.origin.x()) / hm.cellsize));
  auto col_hi = static_cast<std::ptrdiff_t>(std::floor((max_x - hm.origin.x()) / hm.cellsize));
  auto row_lo = static_cast<std::ptrdiff_t>(std::ceil((min_y - hm.origin.y()) / hm.cellsize));
  auto row_hi = static_cast<std::ptrdiff_t>(std::floor((max_y - hm.origin.y()) / hm.cellsize));
  col_lo = std::max<std::ptrdiff_t>(col_lo, 0);
  row_lo = std::max<std::ptrdiff_t>(row_lo, 0);
  col_hi = std::min<std::ptrdiff_t>(col_hi, static_cast<std::ptrdiff_t>(hm.ncols) - 1);
  row_hi = std::min<std::ptrdiff_t>(row_hi, static_cast<std::ptrdiff_t>(hm.nrows) - 1);

  for (std::ptrdiff_t row = row_lo; row <= row_hi; ++row) {
    for (std::ptrdiff_t col = col_lo; col <= col_hi; ++col) {
      double ground = hm.value(static_cast<std::size_t>(col), static_cast<std::size_t>(row));
      if (hm.is_nodata(ground)) continue;
      Eigen::Vector2d p(hm.x_of(static_cast<std::size_t>(col)),
                        hm.y_of(static_cast<std::size_t>(row)));
      if (!footprint_contains(p, a2, b2, c2)) continue;
      // Interpolate the face plane at p via barycentric coordinates.
      double w_a = ((b2 - p).x() * (c2 - p).y() - (b2 - p).y() * (c2 - p).x()) / area2;
      double w_b = ((c2 - p).x() * (a2 - p).y() - (c2 - p).y() * (a2 - p).x()) / area2;
      double w_c = 1.0 - w_a - w_b;
      double z = w_a * a.z() + w_b * b.z() + w_c * c.z();
      err = std::max(err, std::abs(z - ground));
    }
  }
  return err;
}

}  // namespace

double surface_error(const MeshGraph& mesh, const Heightmap& hm, TetId t) {
  const TetRecord& rec = mesh.tet(t);
  double err = 0.0;
  for (FaceId f : rec.faces) {
    if (mesh.face(f).bottom) {
      err = std::max(err, face_surface_error(mesh, hm, f));
    }
  }
  return err;
}

std::vector<TetId> mark_by_error(const MeshGraph& mesh, const Heightmap& hm,
                                 const TerrainConfig& cfg) {
  if (mesh.point_count() >= cfg.max_nodes) return {};
  std::vector<TetId> marks;
  for (TetId t : mesh.live_tets()) {
    if (surface_error(mesh, hm, t) > cfg.error_tolerance) {
      marks.push_back(t);
    }
  }
  return marks;
}

double fit_surface(MeshGraph& mesh, const Heightmap& hm) {
  std::vector<PointId> bottom = mesh.bottom_surface_points();
  if (bottom.empty()) return 1.0;

  std::vector<double> dz(bottom.size(), 0.0);
  std::vector<double> z0(bottom.size(), 0.0);
  for (std::size_t i = 0; i < bottom.size(); ++i) {
    const Vec3& c = mesh.point(bottom[i]).coords;
    z0[i] = c.z();
    if (auto ground = hm.sample(c.x(), c.y())) {
      dz[i] = *ground - c.z();
    }
  }

  // Tets incident to bottom points; the volume check is restricted to these.
  std::vector<TetId> affected;
  {
    std::vector<bool> moved(mesh.point_count(), false);
    for (PointId p : bottom) moved[p.value] = true;
    for (TetId t : mesh.live_tets()) {
      for (PointId p : mesh.tet(t).points) {
        if (moved[p.value]) {
          affected.push_back(t);
          break;
        }
      }
    }
  }

  double factor = 1.0;
  for (int attempt = 0; attempt < 8; ++attempt, factor *= 0.5) {
    for (std::size_t i = 0; i < bottom.size(); ++i) {
      mesh.point_mut(bottom[i]).coords.z() = z0[i] + factor * dz[i];
    }
    bool ok = true;
    for (TetId t : affected) {
      double max_len = 0.0;
      for (EdgeId e : mesh.tet(t).edges) max_len = std::max(max_len, mesh.edge_length(e));
      if (mesh.tet_volume(t) <= k_degeneracy_rel_tol * max_len * max_len * max_len) {
        ok = false;
        break;
      }
    }
    if (ok) return factor;
  }
  // Give up displacing this round; restore and let refinement shrink the tets.
  for (std::size_t i = 0; i < bottom.size(); ++i) {
    mesh.point_mut(bottom[i]).coords.z() = z0[i];
  }
  return 0.0;
}

TerrainResult generate_terrain_mesh(const Heightmap& hm, const TerrainConfig& cfg,
                                    MeshMode mode) {
  TerrainResult result;
  result.mesh = build_initial_mesh(hm, cfg, mode);
  fit_surface(result.mesh, hm);
  result.node_counts.push_back(result.mesh.point_count());

  for (;;) {
    if (result.mesh.point_count() >= cfg.max_nodes) {
      result.status = TerrainStatus::BudgetExhausted;
      break;
    }
    std::vector<TetId> marks = mark_by_error(result.mesh, hm, cfg);
    if (marks.empty()) {
      result.status = TerrainStatus::Converged;
      break;
    }
    refine(result.mesh, RefinePlan{marks});
    fit_surface(result.mesh, hm);
    result.node_counts.push_back(result.mesh.point_count());
    ++result.rounds;
  }

  result.max_surface_error = 0.0;
  for (TetId t : result.mesh.live_tets()) {
    result.max_surface_error = std::max(result.max_surface_error, surface_error(result.mesh, hm, t));
  }
  return result;
}

}  // namespace plume
