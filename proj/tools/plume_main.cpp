#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "plume/commands.hpp"
#include "plume/errors.hpp"

namespace {

// Exit codes: 0 ok, 1 validation failure, 2 config error, 3 numeric or
// convergence error, 4 I/O error.
constexpr int k_exit_config = 2;
constexpr int k_exit_numeric = 3;
constexpr int k_exit_io = 4;

struct CommonArgs {
  std::string config_path;
  std::string output_dir;
  std::string mode;
  int snapshot_every = 0;
  bool quiet = false;
};

plume::ScenarioConfig load_with_overrides(const CommonArgs& args) {
  plume::ScenarioConfig cfg = plume::load_config(args.config_path);
  if (!args.output_dir.empty()) cfg.output_dir = args.output_dir;
  if (!args.mode.empty()) {
    if (args.mode == "box6") {
      cfg.mesh_mode = plume::MeshMode::Box6;
    } else if (args.mode == "single-tet") {
      cfg.mesh_mode = plume::MeshMode::SingleTet;
    } else {
      throw plume::ConfigError("--mode", "expected 'box6' or 'single-tet'");
    }
  }
  if (args.snapshot_every > 0) cfg.snapshot_every = args.snapshot_every;
  return cfg;
}

void add_common(CLI::App* cmd, CommonArgs& args) {
  cmd->add_option("--config", args.config_path, "Scenario config file")->required();
  cmd->add_option("--output", args.output_dir, "Output directory (overrides config)");
  cmd->add_option("--mode", args.mode, "Initial mesh mode: box6 or single-tet");
  cmd->add_option("--snapshot-every", args.snapshot_every, "Steps between snapshots");
  cmd->add_flag("--quiet", args.quiet, "Suppress progress output");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Adaptive tetrahedral meshing over terrain and SUPG pollutant transport"};
  app.require_subcommand(1);

  CommonArgs mesh_args, sim_args;
  std::string validate_path;
  bool validate_quiet = false;

  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Generate a terrain-adapted mesh");
  add_common(mesh_cmd, mesh_args);

  CLI::App* sim_cmd = app.add_subcommand("simulate", "Run the transport scenario");
  add_common(sim_cmd, sim_args);

  CLI::App* validate_cmd = app.add_subcommand("validate", "Validate a mesh export");
  validate_cmd->add_option("mesh", validate_path, "Mesh file (.vtk)")->required();
  validate_cmd->add_flag("--quiet", validate_quiet, "Suppress progress output");

  CLI11_PARSE(app, argc, argv);

  try {
    if (mesh_cmd->parsed()) {
      plume::cmd_mesh(load_with_overrides(mesh_args), mesh_args.quiet);
      return 0;
    }
    if (sim_cmd->parsed()) {
      plume::cmd_simulate(load_with_overrides(sim_args), sim_args.quiet);
      return 0;
    }
    if (validate_cmd->parsed()) {
      return plume::cmd_validate(validate_path, std::cout);
    }
  } catch (const plume::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return k_exit_config;
  } catch (const plume::ConvergenceError& e) {
    std::cerr << "solver error: " << e.what() << "\n";
    return k_exit_numeric;
  } catch (const plume::NonTerminationError& e) {
    std::cerr << "refinement error: " << e.what() << "\n  " << e.diagnostic() << "\n";
    return k_exit_numeric;
  } catch (const plume::GeometryError& e) {
    std::cerr << "geometry error: " << e.what() << "\n";
    return k_exit_numeric;
  } catch (const plume::FormatError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return k_exit_io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
