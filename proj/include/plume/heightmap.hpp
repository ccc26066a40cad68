#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace plume {

// Uniform raster of terrain elevations. Samples sit at node positions
// (origin + index * cellsize); row 0 is the southernmost row.
struct Heightmap {
  std::size_t ncols = 0;
  std::size_t nrows = 0;
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();  // x,y of the lower-left sample
  double cellsize = 1.0;
  double nodata = -9999.0;
  std::vector<double> values;  // row-major, values[row * ncols + col]
  std::size_t nodata_count = 0;

  double value(std::size_t col, std::size_t row) const { return values[row * ncols + col]; }
  bool is_nodata(double v) const { return v == nodata; }

  double x_of(std::size_t col) const { return origin.x() + static_cast<double>(col) * cellsize; }
  double y_of(std::size_t row) const { return origin.y() + static_cast<double>(row) * cellsize; }

  double x_extent() const { return static_cast<double>(ncols - 1) * cellsize; }
  double y_extent() const { return static_cast<double>(nrows - 1) * cellsize; }

  // Min/max over non-nodata samples.
  double min_elevation() const;
  double max_elevation() const;

  // Bilinear interpolation at (x, y), clamped to the raster extent. Returns
  // nothing when any participating sample is nodata.
  std::optional<double> sample(double x, double y) const;

  // Basic shape and finiteness checks; throws FormatError on violation.
  void check() const;
};

// ESRI ASCII grid (ncols/nrows/xllcorner/yllcorner/cellsize/NODATA_value
// header followed by whitespace separated rows, north first).
Heightmap load_esri_ascii(const std::string& path);

// CSV fallback: x,y,z triples on a uniform grid, pitch auto-detected.
Heightmap load_xyz_csv(const std::string& path);

// Dispatches on extension, falling back to content sniffing.
Heightmap load_heightmap(const std::string& path);

}  // namespace plume
