#pragma once

#include <cstdint>
#include <string>

#include "plume/fem.hpp"
#include "plume/gmres.hpp"
#include "plume/terrain.hpp"

namespace plume {

struct SourceConfig {
  double rate = 1.0;            // peak emission density, concentration/s
  Vec3 center = Vec3::Zero();   // source location, meters
  double sigma = 1.0;           // spatial spread, meters
};

// Full scenario description: terrain generation, transport physics, solver
// settings and output layout. Loaded from a key = value file; every field
// except the heightmap path has a documented default.
struct ScenarioConfig {
  std::string heightmap_path;
  std::string output_dir = "out";
  MeshMode mesh_mode = MeshMode::Box6;
  int snapshot_every = 1;
  std::uint64_t seed = 0;

  TerrainConfig terrain;

  double eps = 1.0;
  double c = 0.0;
  double dt = 1.0;
  double t_end = 10.0;
  Vec3 wind = Vec3::Zero();
  SourceConfig source;
  BoundaryCondition::Kind boundary = BoundaryCondition::Kind::ZeroFlux;

  SolverConfig solver;

  // Builds the runtime problem: constant wind, Gaussian point source.
  TransportProblem make_problem() const;

  void check() const;
};

// Parses and validates a scenario file. Throws ConfigError with the offending
// line or field named.
ScenarioConfig load_config(const std::string& path);

}  // namespace plume
