#include "plume/heightmap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

#include "plume/errors.hpp"

namespace plume {

double Heightmap::min_elevation() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!is_nodata(v)) m = std::min(m, v);
  }
  return m;
}

double Heightmap::max_elevation() const {
  double m = -std::numeric_limits<double>::infinity();
  for (double v : values) {
    if (!is_nodata(v)) m = std::max(m, v);
  }
  return m;
}

std::optional<double> Heightmap::sample(double x, double y) const {
  double fx = (x - origin.x()) / cellsize;
  double fy = (y - origin.y()) / cellsize;
  fx = std::clamp(fx, 0.0, static_cast<double>(ncols - 1));
  fy = std::clamp(fy, 0.0, static_cast<double>(nrows - 1));
  std::size_t c0 = (ncols == 1) ? 0 : std::min(static_cast<std::size_t>(fx), ncols - 2);
  std::size_t r0 = (nrows == 1) ? 0 : std::min(static_cast<std::size_t>(fy), nrows - 2);
  std::size_t c1 = std::min(c0 + 1, ncols - 1);
  std::size_t r1 = std::min(r0 + 1, nrows - 1);
  double tx = fx - static_cast<double>(c0);
  double ty = fy - static_cast<double>(r0);

  double v00 = value(c0, r0), v10 = value(c1, r0), v01 = value(c0, r1), v11 = value(c1, r1);
  if (is_nodata(v00) || is_nodata(v10) || is_nodata(v01) || is_nodata(v11)) return std::nullopt;
  double lo = v00 * (1.0 - tx) + v10 * tx;
  double hi = v01 * (1.0 - tx) + v11 * tx;
  return lo * (1.0 - ty) + hi * ty;
}

void Heightmap::check() const {
  if (ncols == 0 || nrows == 0) throw FormatError("heightmap has zero extent");
  if (cellsize <= 0.0) throw FormatError("heightmap cellsize must be positive");
  if (values.size() != ncols * nrows) {
    throw FormatError("heightmap holds " + std::to_string(values.size()) + " values, expected " +
                      std::to_string(ncols * nrows));
  }
  for (double v : values) {
    if (!is_nodata(v) && !std::isfinite(v)) throw FormatError("heightmap contains non-finite value");
  }
  if (min_elevation() > max_elevation()) throw FormatError("heightmap contains only nodata cells");
}

Heightmap load_esri_ascii(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open heightmap: " + path);

  Heightmap hm;
  std::map<std::string, double> header;
  std::string token;
  // Six header lines: keyword value. NODATA_value is optional in the wild but
  // we require the first five.
  for (int i = 0; i < 6; ++i) {
    std::streampos pos = in.tellg();
    if (!(in >> token)) throw FormatError(path + ": truncated header");
    std::string key = token;
    std::transform(key.begin(), key.end(), key.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (std::isdigit(static_cast<unsigned char>(key[0])) || key[0] == '-' || key[0] == '+') {
      in.seekg(pos);  // data begins, optional header line absent
      break;
    }
    double v;
    if (!(in >> v)) throw FormatError(path + ": bad header value for " + token);
    header[key] = v;
  }
  auto require = [&](const std::string& key) {
    auto it = header.find(key);
    if (it == header.end()) throw FormatError(path + ": missing header field " + key);
    return it->second;
  };
  hm.ncols = static_cast<std::size_t>(require("ncols"));
  hm.nrows = static_cast<std::size_t>(require("nrows"));
  hm.origin.x() = require("xllcorner");
  hm.origin.y() = require("yllcorner");
  hm.cellsize = require("cellsize");
  hm.nodata = header.count("nodata_value") ? header["nodata_value"] : -9999.0;

  if (hm.ncols == 0 || hm.nrows == 0) throw FormatError(path + ": empty grid");
  hm.values.assign(hm.ncols * hm.nrows, hm.nodata);
  // File rows run north to south; store south-first.
  for (std::size_t file_row = 0; file_row < hm.nrows; ++file_row) {
    std::size_t row = hm.nrows - 1 - file_row;
    for (std::size_t col = 0; col < hm.ncols; ++col) {
      double v;
      if (!(in >> v)) {
        throw FormatError(path + ": truncated data at row " + std::to_string(file_row) +
                          ", col " + std::to_string(col));
      }
      hm.values[row * hm.ncols + col] = v;
      if (hm.is_nodata(v)) ++hm.nodata_count;
    }
  }
  hm.check();
  return hm;
}

Heightmap load_xyz_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open heightmap: " + path);

  struct Sample {
    double x, y, z;
  };
  std::vector<Sample> samples;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::replace(line.begin(), line.end(), ',', ' ');
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x)) continue;  // blank or header line
    if (!(ls >> y >> z)) {
      throw FormatError(path + ":" + std::to_string(lineno) + ": expected x,y,z triple");
    }
    samples.push_back({x, y, z});
  }
  if (samples.empty()) throw FormatError(path + ": no samples");

  auto axis_values = [&](auto get) {
    std::vector<double> vals;
    vals.reserve(samples.size());
    for (const Sample& s : samples) vals.push_back(get(s));
    std::sort(vals.begin(), vals.end());
    vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
    return vals;
  };
  std::vector<double> xs = axis_values([](const Sample& s) { return s.x; });
  std::vector<double> ys = axis_values([](const Sample& s) { return s.y; });

  auto pitch_of = [&](const std::vector<double>& vals, const char* axis) {
    if (vals.size() < 2) return 1.0;
    double pitch = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < vals.size(); ++i) pitch = std::min(pitch, vals[i] - vals[i - 1]);
    for (std::size_t i = 1; i < vals.size(); ++i) {
      double steps = (vals[i] - vals[i - 1]) / pitch;
      if (std::abs(steps - std::round(steps)) > 1e-6) {
        throw FormatError(std::string(path) + ": non-uniform " + axis + " grid");
      }
    }
    return pitch;
  };
  double px = pitch_of(xs, "x");
  double py = pitch_of(ys, "y");
  double pitch = (xs.size() < 2) ? py : ((ys.size() < 2) ? px : px);
  if (xs.size() >= 2 && ys.size() >= 2 && std::abs(px - py) > 1e-9 * std::max(px, py)) {
    throw FormatError(path + ": x and y pitches differ");
  }

  Heightmap hm;
  hm.cellsize = pitch;
  hm.origin = {xs.front(), ys.front()};
  hm.ncols = static_cast<std::size_t>(std::round((xs.back() - xs.front()) / pitch)) + 1;
  hm.nrows = static_cast<std::size_t>(std::round((ys.back() - ys.front()) / pitch)) + 1;
  hm.values.assign(hm.ncols * hm.nrows, hm.nodata);
  hm.nodata_count = hm.values.size();
  for (const Sample& s : samples) {
    auto col = static_cast<std::size_t>(std::round((s.x - hm.origin.x()) / pitch));
    auto row = static_cast<std::size_t>(std::round((s.y - hm.origin.y()) / pitch));
    double& cell = hm.values[row * hm.ncols + col];
    if (hm.is_nodata(cell)) --hm.nodata_count;
    cell = s.z;
  }
  hm.check();
  return hm;
}

Heightmap load_heightmap(const std::string& path) {
  auto ends_with = [&](const char* suffix) {
    std::string s(suffix);
    return path.size() >= s.size() &&
           std::equal(s.rbegin(), s.rend(), path.rbegin(), [](char a, char b) {
             return std::tolower(static_cast<unsigned char>(a)) ==
                    std::tolower(static_cast<unsigned char>(b));
           });
  };
  if (ends_with(".asc")) return load_esri_ascii(path);
  if (ends_with(".csv") || ends_with(".xyz")) return load_xyz_csv(path);

  std::ifstream in(path);
  if (!in) throw FormatError("cannot open heightmap: " + path);
  std::string first;
  in >> first;
  std::transform(first.begin(), first.end(), first.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (first == "ncols") return load_esri_ascii(path);
  return load_xyz_csv(path);
}

}  // namespace plume
