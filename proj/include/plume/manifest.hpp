#pragma once

#include <string>

#include <json.hpp>

namespace plume {

// Structured run record written next to the artifacts: config echo, the
// per-iteration node-count table, per-step solver stats, timings and the
// produced file list. Self-describing via a format version; written
// atomically (temp file + rename).
struct RunManifest {
  nlohmann::json doc = nlohmann::json::object();

  RunManifest();

  void set_config_echo(const nlohmann::json& config);
  void set_node_counts(const std::vector<std::size_t>& counts);
  void add_solver_step(int step, double time, int iterations, double residual);
  void add_timing(const std::string& name, double seconds);
  void add_artifact(const std::string& relative_path);
  void set_status(const std::string& status);

  void save(const std::string& path) const;
};

}  // namespace plume
