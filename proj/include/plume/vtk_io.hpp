#pragma once

#include <optional>
#include <string>
#include <vector>

#include "plume/fem.hpp"
#include "plume/mesh.hpp"

namespace plume {

// Writes a legacy ASCII unstructured-grid file: points, tet cells (type 10)
// and, when a field is given, a point-data scalar array named
// "concentration". Output is byte-deterministic for identical inputs.
void export_vtk(const MeshGraph& mesh, const ScalarField* field, const std::string& path);

struct VtkMesh {
  std::vector<Vec3> points;
  std::vector<std::array<std::uint32_t, 4>> cells;
  std::optional<std::vector<double>> point_data;
};

// Minimal reader for the files export_vtk produces (used by the validate
// command and round-trip tests).
VtkMesh read_vtk(const std::string& path);

}  // namespace plume
