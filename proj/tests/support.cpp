#include "support.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>

namespace plume::testing {

MeshGraph single_tet(const Vec3& a, const Vec3& b, const Vec3& c, const Vec3& d) {
  return MeshGraph::from_cells({a, b, c, d}, {{0, 1, 2, 3}});
}

MeshGraph regular_tet() {
  return MeshGraph::from_cells(
      {{1, 1, 1}, {1, -1, -1}, {-1, 1, -1}, {-1, -1, 1}}, {{0, 1, 2, 3}});
}

MeshGraph unit_cube_box6(double scale) {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) {
    pts.push_back(Vec3((i & 1) ? scale : 0, (i & 2) ? scale : 0, (i & 4) ? scale : 0));
  }
  // One tet per permutation of the axis order, all sharing the main diagonal.
  constexpr int axis_bit[3] = {1, 2, 4};
  constexpr int perms[6][3] = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::vector<std::array<std::uint32_t, 4>> cells;
  for (const auto& perm : perms) {
    std::uint32_t v0 = 0;
    std::uint32_t v1 = v0 | axis_bit[perm[0]];
    std::uint32_t v2 = v1 | axis_bit[perm[1]];
    std::uint32_t v3 = v2 | axis_bit[perm[2]];
    cells.push_back({v0, v1, v2, v3});
  }
  return MeshGraph::from_cells(pts, cells);
}

namespace {

Heightmap make_grid(std::size_t n, double extent) {
  Heightmap hm;
  hm.ncols = n;
  hm.nrows = n;
  hm.origin = {0.0, 0.0};
  hm.cellsize = extent / static_cast<double>(n - 1);
  hm.values.assign(n * n, 0.0);
  return hm;
}

}  // namespace

Heightmap gaussian_hill(std::size_t n, double extent, double base, double amplitude) {
  Heightmap hm = make_grid(n, extent);
  double cx = extent / 2.0, cy = extent / 2.0;
  double sigma = extent / 6.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double dx = hm.x_of(c) - cx, dy = hm.y_of(r) - cy;
      hm.values[r * n + c] = base + amplitude * std::exp(-(dx * dx + dy * dy) / (2 * sigma * sigma));
    }
  }
  return hm;
}

Heightmap valley(std::size_t n, double extent, double base, double wall_height,
                 double ripple_amp, double ripple_wavelength) {
  Heightmap hm = make_grid(n, extent);
  double cy = extent / 2.0;
  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      double x = hm.x_of(c), y = hm.y_of(r);
      double dy = (y - cy) / (extent / 2.0);
      double ripple = ripple_amp * std::sin(2 * M_PI * x / ripple_wavelength) *
                      std::sin(2 * M_PI * y / ripple_wavelength);
      hm.values[r * n + c] = base + wall_height * dy * dy + ripple;
    }
  }
  return hm;
}

Heightmap flat(std::size_t n, double extent, double elevation) {
  Heightmap hm = make_grid(n, extent);
  for (double& v : hm.values) v = elevation;
  return hm;
}

void write_esri_ascii(const Heightmap& hm, const std::string& path) {
  std::ofstream out(path);
  out << "ncols " << hm.ncols << "\n";
  out << "nrows " << hm.nrows << "\n";
  out << "xllcorner " << hm.origin.x() << "\n";
  out << "yllcorner " << hm.origin.y() << "\n";
  out << "cellsize " << hm.cellsize << "\n";
  out << "NODATA_value " << hm.nodata << "\n";
  out.precision(17);
  for (std::size_t file_row = 0; file_row < hm.nrows; ++file_row) {
    std::size_t row = hm.nrows - 1 - file_row;  // north first
    for (std::size_t col = 0; col < hm.ncols; ++col) {
      out << hm.value(col, row) << (col + 1 == hm.ncols ? "\n" : " ");
    }
  }
}

std::string temp_dir(const std::string& tag) {
  static std::atomic<int> counter{0};
  auto dir = std::filesystem::temp_directory_path() /
             ("plume_test_" + tag + "_" + std::to_string(counter++));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace plume::testing
