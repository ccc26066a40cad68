#pragma once

#include <iosfwd>
#include <string>

#include "plume/config.hpp"
#include "plume/manifest.hpp"

namespace plume {

// Terrain pipeline: heightmap -> refined mesh -> mesh.vtk + manifest.json.
RunManifest cmd_mesh(const ScenarioConfig& cfg, bool quiet = false);

// Full scenario: terrain pipeline, then transport simulation with snapshot
// series u_<step>.vtk and manifest.json.
RunManifest cmd_simulate(const ScenarioConfig& cfg, bool quiet = false);

// Loads a mesh export, validates it and prints the report. Returns the
// process exit code (0 when the mesh is valid).
int cmd_validate(const std::string& mesh_path, std::ostream& out);

}  // namespace plume
