#pragma once

#include <string>
#include <vector>

#include "plume/heightmap.hpp"
#include "plume/mesh.hpp"

namespace plume::testing {

// A single tetrahedron with an axis-dominant longest edge.
MeshGraph single_tet(const Vec3& a = {0, 0, 0}, const Vec3& b = {2, 0, 0},
                     const Vec3& c = {0, 1, 0}, const Vec3& d = {0, 0, 1});

// Regular tetrahedron with edge length sqrt(8) centered at the origin.
MeshGraph regular_tet();

// Kuhn split of [0,1]^3 scaled by `scale`: 8 points, 6 tets.
MeshGraph unit_cube_box6(double scale = 1.0);

// Synthetic rasters. The Gaussian hill peaks in the middle of the footprint;
// the valley runs along the x axis with parabolic walls in y, optionally
// corrugated by a sinusoidal ripple.
Heightmap gaussian_hill(std::size_t n = 17, double extent = 1000.0, double base = 100.0,
                        double amplitude = 200.0);
Heightmap valley(std::size_t n = 33, double extent = 2000.0, double base = 100.0,
                 double wall_height = 300.0, double ripple_amp = 0.0,
                 double ripple_wavelength = 200.0);
Heightmap flat(std::size_t n = 5, double extent = 100.0, double elevation = 50.0);

// Writes an ESRI ASCII grid for CLI round trips.
void write_esri_ascii(const Heightmap& hm, const std::string& path);

// Fresh directory under the system temp root, unique per call.
std::string temp_dir(const std::string& tag);

}  // namespace plume::testing
