#pragma once

#include <cstddef>
#include <vector>

#include "plume/heightmap.hpp"
#include "plume/mesh.hpp"
#include "plume/refine.hpp"

namespace plume {

struct TerrainConfig {
  double vertical_extent = 1000.0;  // air column above the highest elevation, meters
  double error_tolerance = 10.0;    // max vertical deviation, meters
  std::size_t max_nodes = 100000;   // node budget

  void check() const;
};

enum class MeshMode {
  SingleTet,  // 4 nodes, 1 tet; the algorithmic starting configuration
  Box6,       // Kuhn split of the bounding box into 6 tets; simulation default
};

enum class TerrainStatus { Converged, BudgetExhausted };

struct TerrainResult {
  MeshGraph mesh;
  std::vector<std::size_t> node_counts;  // one entry per iteration, initial mesh first
  TerrainStatus status = TerrainStatus::Converged;
  double max_surface_error = 0.0;
  std::size_t rounds = 0;
};

// Coarse conforming tet mesh of the axis-aligned box spanning the heightmap
// footprint and [min elevation, max elevation + vertical_extent]. Bottom faces
// carry the bottom flag; AE flags are assigned from face incidence.
MeshGraph build_initial_mesh(const Heightmap& hm, const TerrainConfig& cfg,
                             MeshMode mode = MeshMode::Box6);

// Max vertical deviation between the tet's bottom face(s) and the heightmap
// samples inside their footprints; zero for tets without a bottom face.
// Nodata samples are skipped.
double surface_error(const MeshGraph& mesh, const Heightmap& hm, TetId t);

// All bottom-band tets whose surface error exceeds cfg.error_tolerance;
// empty once the node budget is exhausted.
std::vector<TetId> mark_by_error(const MeshGraph& mesh, const Heightmap& hm,
                                 const TerrainConfig& cfg);

// Vertically displaces bottom-surface points onto the heightmap. The step is
// damped globally whenever full displacement would collapse a tet; leftover
// deviation shows up as surface error and drives further refinement. Returns
// the applied fraction (1 = full fit).
double fit_surface(MeshGraph& mesh, const Heightmap& hm);

// Alternates error marking, refinement and surface fitting until every
// bottom tet is within tolerance or the node budget is reached.
TerrainResult generate_terrain_mesh(const Heightmap& hm, const TerrainConfig& cfg,
                                    MeshMode mode = MeshMode::Box6);

}  // namespace plume
