#include "plume/commands.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <ostream>

#include "plume/errors.hpp"
#include "plume/vtk_io.hpp"

namespace plume {

namespace {

namespace fs = std::filesystem;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

nlohmann::json config_echo(const ScenarioConfig& cfg) {
  nlohmann::json j;
  j["heightmap"] = cfg.heightmap_path;
  j["output_dir"] = cfg.output_dir;
  j["mesh_mode"] = cfg.mesh_mode == MeshMode::Box6 ? "box6" : "single-tet";
  j["snapshot_every"] = cfg.snapshot_every;
  j["seed"] = cfg.seed;
  j["terrain"]["vertical_extent"] = cfg.terrain.vertical_extent;
  j["terrain"]["error_tolerance"] = cfg.terrain.error_tolerance;
  j["terrain"]["max_nodes"] = cfg.terrain.max_nodes;
  j["transport"]["eps"] = cfg.eps;
  j["transport"]["c"] = cfg.c;
  j["transport"]["dt"] = cfg.dt;
  j["transport"]["t_end"] = cfg.t_end;
  j["transport"]["p"] = 1;
  j["transport"]["wind"] = {cfg.wind.x(), cfg.wind.y(), cfg.wind.z()};
  j["transport"]["source"]["rate"] = cfg.source.rate;
  j["transport"]["source"]["center"] = {cfg.source.center.x(), cfg.source.center.y(),
                                        cfg.source.center.z()};
  j["transport"]["source"]["sigma"] = cfg.source.sigma;
  j["transport"]["boundary"] =
      cfg.boundary == BoundaryCondition::Kind::ZeroFlux ? "zero-flux" : "dirichlet-zero";
  j["solver"]["restart"] = cfg.solver.gmres_restart;
  j["solver"]["rel_tol"] = cfg.solver.rel_tol;
  j["solver"]["max_iter"] = cfg.solver.max_iter;
  j["solver"]["preconditioner"] =
      cfg.solver.preconditioner == Preconditioner::Diagonal ? "diagonal" : "none";
  return j;
}

struct MeshStage {
  TerrainResult terrain;
  double heightmap_seconds = 0.0;
  double generation_seconds = 0.0;
};

MeshStage run_mesh_stage(const ScenarioConfig& cfg, bool quiet) {
  MeshStage stage;
  auto t0 = std::chrono::steady_clock::now();
  Heightmap hm = load_heightmap(cfg.heightmap_path);
  stage.heightmap_seconds = seconds_since(t0);
  if (!quiet) {
    std::cout << "heightmap: " << hm.ncols << "x" << hm.nrows << " cells, elevation ["
              << hm.min_elevation() << ", " << hm.max_elevation() << "] m";
    if (hm.nodata_count > 0) std::cout << ", " << hm.nodata_count << " nodata cells";
    std::cout << "\n";
  }

  auto t1 = std::chrono::steady_clock::now();
  stage.terrain = generate_terrain_mesh(hm, cfg.terrain, cfg.mesh_mode);
  stage.generation_seconds = seconds_since(t1);
  if (!quiet) {
    std::cout << "mesh: " << stage.terrain.mesh.point_count() << " nodes, "
              << stage.terrain.mesh.live_tet_count() << " tets after " << stage.terrain.rounds
              << " rounds (max surface error " << stage.terrain.max_surface_error << " m)\n";
  }
  return stage;
}

std::string snapshot_name(int step) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "u_%06d.vtk", step);
  return buf;
}

}  // namespace

RunManifest cmd_mesh(const ScenarioConfig& cfg, bool quiet) {
  fs::create_directories(cfg.output_dir);
  MeshStage stage = run_mesh_stage(cfg, quiet);

  RunManifest manifest;
  manifest.set_config_echo(config_echo(cfg));
  manifest.set_node_counts(stage.terrain.node_counts);
  manifest.add_timing("heightmap_load", stage.heightmap_seconds);
  manifest.add_timing("mesh_generation", stage.generation_seconds);
  manifest.set_status(stage.terrain.status == TerrainStatus::Converged ? "ok"
                                                                       : "budget-exhausted");

  std::string mesh_path = (fs::path(cfg.output_dir) / "mesh.vtk").string();
  export_vtk(stage.terrain.mesh, nullptr, mesh_path);
  manifest.add_artifact("mesh.vtk");
  manifest.save((fs::path(cfg.output_dir) / "manifest.json").string());
  return manifest;
}

RunManifest cmd_simulate(const ScenarioConfig& cfg, bool quiet) {
  fs::create_directories(cfg.output_dir);
  MeshStage stage = run_mesh_stage(cfg, quiet);
  const MeshGraph& mesh = stage.terrain.mesh;

  RunManifest manifest;
  manifest.set_config_echo(config_echo(cfg));
  manifest.set_node_counts(stage.terrain.node_counts);
  manifest.add_timing("heightmap_load", stage.heightmap_seconds);
  manifest.add_timing("mesh_generation", stage.generation_seconds);
  if (stage.terrain.status == TerrainStatus::BudgetExhausted) {
    manifest.set_status("budget-exhausted");
  }

  std::string mesh_path = (fs::path(cfg.output_dir) / "mesh.vtk").string();
  export_vtk(mesh, nullptr, mesh_path);
  manifest.add_artifact("mesh.vtk");

  TransportProblem prob = cfg.make_problem();
  ScalarField u0 = ScalarField::zero(mesh, 0.0);

  auto t0 = std::chrono::steady_clock::now();
  SimulationResult sim = simulate(mesh, prob, u0, cfg.solver, cfg.snapshot_every);
  manifest.add_timing("simulation", seconds_since(t0));

  for (const StepStats& s : sim.stats) {
    manifest.add_solver_step(s.step, s.time, s.gmres_iterations, s.rel_residual);
  }
  for (const ScalarField& snap : sim.snapshots) {
    int step = static_cast<int>(std::llround((snap.time - u0.time) / prob.dt));
    std::string name = snapshot_name(step);
    export_vtk(mesh, &snap, (fs::path(cfg.output_dir) / name).string());
    manifest.add_artifact(name);
  }
  if (!quiet) {
    std::cout << "simulation: " << sim.stats.size() << " steps, " << sim.snapshots.size()
              << " snapshots written to " << cfg.output_dir << "\n";
  }
  manifest.save((fs::path(cfg.output_dir) / "manifest.json").string());
  return manifest;
}

int cmd_validate(const std::string& mesh_path, std::ostream& out) {
  VtkMesh vtk = read_vtk(mesh_path);
  MeshGraph mesh = MeshGraph::from_cells(vtk.points, vtk.cells);
  ValidationReport report = mesh.validate();
  if (report.ok()) {
    out << mesh_path << ": valid (" << mesh.point_count() << " points, "
        << mesh.live_tet_count() << " tets)\n";
    return 0;
  }
  out << mesh_path << ": " << report.violations.size() << " violation(s)\n";
  for (const std::string& v : report.violations) {
    out << "  " << v << "\n";
  }
  return 1;
}

}  // namespace plume
