#include "plume/manifest.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "plume/errors.hpp"

namespace plume {

RunManifest::RunManifest() {
  doc["format_version"] = 1;
  doc["tool"] = "plume";
  doc["units"] = "SI (meters, seconds)";
  doc["node_counts"] = nlohmann::json::array();
  doc["solver_steps"] = nlohmann::json::array();
  doc["timings_s"] = nlohmann::json::object();
  doc["artifacts"] = nlohmann::json::array();
  doc["status"] = "ok";
}

void RunManifest::set_config_echo(const nlohmann::json& config) { doc["config"] = config; }

void RunManifest::set_node_counts(const std::vector<std::size_t>& counts) {
  doc["node_counts"] = counts;
}

void RunManifest::add_solver_step(int step, double time, int iterations, double residual) {
  doc["solver_steps"].push_back({{"step", step},
                                 {"time", time},
                                 {"iterations", iterations},
                                 {"residual", residual}});
}

void RunManifest::add_timing(const std::string& name, double seconds) {
  doc["timings_s"][name] = seconds;
}

void RunManifest::add_artifact(const std::string& relative_path) {
  doc["artifacts"].push_back(relative_path);
}

void RunManifest::set_status(const std::string& status) { doc["status"] = status; }

void RunManifest::save(const std::string& path) const {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw FormatError("cannot open for writing: " + tmp);
    out << doc.dump(2) << "\n";
    if (!out) throw FormatError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw FormatError("cannot move " + tmp + " to " + path + ": " + ec.message());
}

}  // namespace plume
