#include "plume/vtk_io.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "plume/errors.hpp"

namespace plume {

namespace {

// Shortest round-trip representation keeps files compact and byte-stable.
void append_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  double parsed = std::strtod(buf, nullptr);
  if (parsed == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[32];
      std::snprintf(shorter, sizeof shorter, "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) {
        out += shorter;
        return;
      }
    }
  }
  out += buf;
}

}  // namespace

void export_vtk(const MeshGraph& mesh, const ScalarField* field, const std::string& path) {
  if (!mesh.quiescent()) {
    throw PreconditionError("export_vtk requires a quiescent mesh");
  }
  if (field && field->values.size() != static_cast<Eigen::Index>(mesh.point_count())) {
    throw PreconditionError("export_vtk: field length does not match mesh point count");
  }

  std::string out;
  out.reserve(mesh.point_count() * 48);
  out += "# vtk DataFile Version 3.0\n";
  out += "plume unstructured tetrahedral mesh\n";
  out += "ASCII\n";
  out += "DATASET UNSTRUCTURED_GRID\n";

  out += "POINTS " + std::to_string(mesh.point_count()) + " double\n";
  for (std::size_t i = 0; i < mesh.point_count(); ++i) {
    const Vec3& p = mesh.point(PointId(static_cast<std::uint32_t>(i))).coords;
    append_double(out, p.x());
    out += ' ';
    append_double(out, p.y());
    out += ' ';
    append_double(out, p.z());
    out += '\n';
  }

  std::vector<TetId> tets = mesh.live_tets();
  out += "CELLS " + std::to_string(tets.size()) + " " + std::to_string(tets.size() * 5) + "\n";
  for (TetId t : tets) {
    const TetRecord& rec = mesh.tet(t);
    out += "4";
    for (PointId p : rec.points) {
      out += ' ';
      out += std::to_string(p.value);
    }
    out += '\n';
  }
  out += "CELL_TYPES " + std::to_string(tets.size()) + "\n";
  for (std::size_t i = 0; i < tets.size(); ++i) out += "10\n";

  if (field) {
    out += "POINT_DATA " + std::to_string(mesh.point_count()) + "\n";
    out += "SCALARS concentration double 1\n";
    out += "LOOKUP_TABLE default\n";
    for (Eigen::Index i = 0; i < field->values.size(); ++i) {
      append_double(out, field->values[i]);
      out += '\n';
    }
  }

  std::ofstream f(path, std::ios::binary);
  if (!f) throw FormatError("cannot open for writing: " + path);
  f << out;
  if (!f) throw FormatError("write failed: " + path);
}

VtkMesh read_vtk(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open mesh file: " + path);

  std::string line;
  std::getline(in, line);
  if (line.rfind("# vtk DataFile", 0) != 0) {
    throw FormatError(path + ": not a legacy VTK file");
  }
  std::getline(in, line);  // title
  std::getline(in, line);
  if (line != "ASCII") throw FormatError(path + ": only ASCII files are supported");
  std::getline(in, line);
  if (line.find("UNSTRUCTURED_GRID") == std::string::npos) {
    throw FormatError(path + ": expected DATASET UNSTRUCTURED_GRID");
  }

  VtkMesh out;
  std::string token;
  while (in >> token) {
    if (token == "POINTS") {
      std::size_t n;
      std::string type;
      in >> n >> type;
      out.points.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> out.points[i].x() >> out.points[i].y() >> out.points[i].z())) {
          throw FormatError(path + ": truncated POINTS section");
        }
      }
    } else if (token == "CELLS") {
      std::size_t n, total;
      in >> n >> total;
      out.cells.reserve(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::size_t count;
        if (!(in >> count)) throw FormatError(path + ": truncated CELLS section");
        if (count != 4) {
          throw FormatError(path + ": cell " + std::to_string(i) +
                            " has " + std::to_string(count) + " points, expected 4");
        }
        std::array<std::uint32_t, 4> cell{};
        for (auto& v : cell) {
          if (!(in >> v)) throw FormatError(path + ": truncated cell " + std::to_string(i));
        }
        out.cells.push_back(cell);
      }
    } else if (token == "CELL_TYPES") {
      std::size_t n;
      in >> n;
      for (std::size_t i = 0; i < n; ++i) {
        int type;
        if (!(in >> type)) throw FormatError(path + ": truncated CELL_TYPES section");
        if (type != 10) {
          throw FormatError(path + ": cell " + std::to_string(i) + " has type " +
                            std::to_string(type) + ", expected 10 (tetrahedron)");
        }
      }
    } else if (token == "POINT_DATA") {
      std::size_t n;
      in >> n;
      std::string scalars, name, type;
      int comps = 1;
      in >> scalars >> name >> type;
      if (in.peek() != '\n') in >> comps;
      std::string lookup, table;
      in >> lookup >> table;
      if (scalars != "SCALARS" || comps != 1) {
        throw FormatError(path + ": unsupported POINT_DATA layout");
      }
      std::vector<double> data(n);
      for (std::size_t i = 0; i < n; ++i) {
        if (!(in >> data[i])) throw FormatError(path + ": truncated POINT_DATA section");
      }
      out.point_data = std::move(data);
    }
  }
  if (out.points.empty() || out.cells.empty()) {
    throw FormatError(path + ": no points or cells found");
  }
  return out;
}

}  // namespace plume
