#include "plume/config.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "plume/errors.hpp"

namespace plume {

TransportProblem ScenarioConfig::make_problem() const {
  TransportProblem prob;
  Vec3 w = wind;
  prob.beta = [w](const Vec3&, double) { return w; };
  prob.eps = eps;
  prob.c = c;
  prob.dt = dt;
  prob.t_end = t_end;
  double q = source.rate;
  Vec3 x0 = source.center;
  double two_sigma2 = 2.0 * source.sigma * source.sigma;
  prob.source = [q, x0, two_sigma2](const Vec3& x, double) {
    return q * std::exp(-(x - x0).squaredNorm() / two_sigma2);
  };
  prob.boundary.kind = boundary;
  if (boundary == BoundaryCondition::Kind::Dirichlet) {
    prob.boundary.value = [](const Vec3&, double) { return 0.0; };
  }
  return prob;
}

void ScenarioConfig::check() const {
  terrain.check();
  solver.check();
  if (!(eps > 0.0)) throw ConfigError("transport.eps", "must be positive");
  if (!(dt > 0.0)) throw ConfigError("transport.dt", "must be positive");
  if (t_end < dt) throw ConfigError("transport.t_end", "must be at least one time step");
  if (c < 0.0) throw ConfigError("transport.c", "must be non-negative");
  if (!(source.sigma > 0.0)) throw ConfigError("transport.source.sigma", "must be positive");
  if (snapshot_every <= 0) throw ConfigError("snapshot_every", "must be positive");
}

namespace {

struct RawEntry {
  std::string value;
  std::size_t line = 0;
  bool used = false;
};

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return {};
  return s.substr(b, e - b + 1);
}

class RawConfig {
 public:
  RawConfig(const std::string& path) : path_(path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("config", "cannot open " + path);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      auto hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      line = trim(line);
      if (line.empty()) continue;
      auto eq = line.find('=');
      if (eq == std::string::npos) {
        throw ConfigError("config", path + ":" + std::to_string(lineno) +
                                        ": expected key = value");
      }
      std::string key = trim(line.substr(0, eq));
      std::string value = trim(line.substr(eq + 1));
      if (key.empty()) {
        throw ConfigError("config", path + ":" + std::to_string(lineno) + ": empty key");
      }
      if (entries_.count(key)) {
        throw ConfigError(key, "duplicated at line " + std::to_string(lineno));
      }
      entries_[key] = RawEntry{value, lineno, false};
    }
  }

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  std::string get_string(const std::string& key, const std::string& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    return it->second.value;
  }

  double get_double(const std::string& key, double fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    try {
      std::size_t consumed = 0;
      double v = std::stod(it->second.value, &consumed);
      if (consumed != it->second.value.size()) throw std::invalid_argument("trailing");
      return v;
    } catch (const std::exception&) {
      throw ConfigError(key, "not a number: '" + it->second.value + "' (line " +
                                 std::to_string(it->second.line) + ")");
    }
  }

  std::int64_t get_int(const std::string& key, std::int64_t fallback) {
    double v = get_double(key, static_cast<double>(fallback));
    if (v != std::floor(v)) throw ConfigError(key, "expected an integer");
    return static_cast<std::int64_t>(v);
  }

  Vec3 get_vec3(const std::string& key, const Vec3& fallback) {
    auto it = entries_.find(key);
    if (it == entries_.end()) return fallback;
    it->second.used = true;
    std::string value = it->second.value;
    std::replace(value.begin(), value.end(), ',', ' ');
    std::istringstream ss(value);
    Vec3 v;
    if (!(ss >> v.x() >> v.y() >> v.z())) {
      throw ConfigError(key, "expected three numbers (line " +
                                 std::to_string(it->second.line) + ")");
    }
    return v;
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : entries_) {
      if (!entry.used) {
        throw ConfigError(key, "unknown key (line " + std::to_string(entry.line) + ")");
      }
    }
  }

 private:
  std::string path_;
  std::map<std::string, RawEntry> entries_;
};

}  // namespace

ScenarioConfig load_config(const std::string& path) {
  RawConfig raw(path);
  ScenarioConfig cfg;

  cfg.heightmap_path = raw.get_string("heightmap", "");
  cfg.output_dir = raw.get_string("output_dir", cfg.output_dir);
  cfg.snapshot_every = static_cast<int>(raw.get_int("snapshot_every", cfg.snapshot_every));
  cfg.seed = static_cast<std::uint64_t>(raw.get_int("seed", 0));

  std::string mode = raw.get_string("mesh_mode", "box6");
  if (mode == "box6") {
    cfg.mesh_mode = MeshMode::Box6;
  } else if (mode == "single-tet") {
    cfg.mesh_mode = MeshMode::SingleTet;
  } else {
    throw ConfigError("mesh_mode", "expected 'box6' or 'single-tet', got '" + mode + "'");
  }

  cfg.terrain.vertical_extent =
      raw.get_double("terrain.vertical_extent", cfg.terrain.vertical_extent);
  cfg.terrain.error_tolerance =
      raw.get_double("terrain.error_tolerance", cfg.terrain.error_tolerance);
  cfg.terrain.max_nodes =
      static_cast<std::size_t>(raw.get_int("terrain.max_nodes",
                                           static_cast<std::int64_t>(cfg.terrain.max_nodes)));

  cfg.eps = raw.get_double("transport.eps", cfg.eps);
  cfg.c = raw.get_double("transport.c", cfg.c);
  cfg.dt = raw.get_double("transport.dt", cfg.dt);
  cfg.t_end = raw.get_double("transport.t_end", cfg.t_end);
  cfg.wind = raw.get_vec3("transport.wind", cfg.wind);
  cfg.source.rate = raw.get_double("transport.source.rate", cfg.source.rate);
  cfg.source.center = raw.get_vec3("transport.source.center", cfg.source.center);
  cfg.source.sigma = raw.get_double("transport.source.sigma", cfg.source.sigma);

  std::string bc = raw.get_string("transport.boundary", "zero-flux");
  if (bc == "zero-flux") {
    cfg.boundary = BoundaryCondition::Kind::ZeroFlux;
  } else if (bc == "dirichlet-zero") {
    cfg.boundary = BoundaryCondition::Kind::Dirichlet;
  } else {
    throw ConfigError("transport.boundary",
                      "expected 'zero-flux' or 'dirichlet-zero', got '" + bc + "'");
  }

  cfg.solver.gmres_restart =
      static_cast<int>(raw.get_int("solver.restart", cfg.solver.gmres_restart));
  cfg.solver.rel_tol = raw.get_double("solver.rel_tol", cfg.solver.rel_tol);
  cfg.solver.max_iter = static_cast<int>(raw.get_int("solver.max_iter", cfg.solver.max_iter));
  std::string precond = raw.get_string("solver.preconditioner", "diagonal");
  if (precond == "diagonal") {
    cfg.solver.preconditioner = Preconditioner::Diagonal;
  } else if (precond == "none") {
    cfg.solver.preconditioner = Preconditioner::None;
  } else {
    throw ConfigError("solver.preconditioner",
                      "expected 'diagonal' or 'none', got '" + precond + "'");
  }

  raw.reject_unknown();

  if (cfg.heightmap_path.empty()) {
    throw ConfigError("heightmap", "required");
  }
  if (!std::filesystem::exists(cfg.heightmap_path)) {
    throw ConfigError("heightmap", "file not found: " + cfg.heightmap_path);
  }
  cfg.check();
  return cfg;
}

}  // namespace plume
