#include "plume/fem.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "plume/errors.hpp"

namespace plume {

void TransportProblem::check() const {
  if (!(eps > 0.0)) throw ConfigError("transport.eps", "must be positive");
  if (!(dt > 0.0)) throw ConfigError("transport.dt", "must be positive");
  if (t_end < dt) throw ConfigError("transport.t_end", "must be at least one time step");
  if (c < 0.0) throw ConfigError("transport.c", "must be non-negative");
  if (p != 1) throw ConfigError("transport.p", "only linear elements are implemented");
  if (boundary.kind == BoundaryCondition::Kind::Dirichlet && !boundary.value) {
    throw ConfigError("transport.boundary", "Dirichlet boundary needs a value function");
  }
}

ScalarField ScalarField::zero(const MeshGraph& mesh, double time) {
  ScalarField f;
  f.mesh = &mesh;
  f.values = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.point_count()));
  f.time = time;
  return f;
}

double supg_tau(const Vec3& h, const Vec3& beta_local, double eps, int p) {
  for (int i = 0; i < 3; ++i) {
    if (!(h[i] > 0.0)) throw GeometryError("supg_tau: element dimension must be positive");
  }
  if (!(eps > 0.0)) throw PreconditionError("supg_tau: eps must be positive");
  double advective = std::abs(beta_local.x() / h.x() + beta_local.y() / h.y() +
                              beta_local.z() / h.z());
  double diffusive = 3.0 * static_cast<double>(p * p) * eps /
                     (h.x() * h.x() + h.y() * h.y() + h.z() * h.z());
  return 1.0 / (advective + diffusive);
}

namespace {

// Degree-2 Gauss rule on the tetrahedron: 4 points, weight V/4 each.
constexpr double k_quad_a = 0.5854101966249685;  // (5 + 3 sqrt(5)) / 20
constexpr double k_quad_b = 0.1381966011250105;  // (5 - sqrt(5)) / 20
constexpr double k_quad_bary[4][4] = {
    {k_quad_a, k_quad_b, k_quad_b, k_quad_b},
    {k_quad_b, k_quad_a, k_quad_b, k_quad_b},
    {k_quad_b, k_quad_b, k_quad_a, k_quad_b},
    {k_quad_b, k_quad_b, k_quad_b, k_quad_a},
};

struct ElementGeometry {
  std::array<Eigen::Index, 4> dof;
  std::array<Vec3, 4> coords;
  std::array<Vec3, 4> grad;  // gradients of the linear shape functions
  double volume = 0.0;
  Vec3 centroid = Vec3::Zero();
  Vec3 h = Vec3::Zero();  // bounding-box extents
};

ElementGeometry element_geometry(const MeshGraph& mesh, TetId t) {
  const TetRecord& rec = mesh.tet(t);
  ElementGeometry geo;
  for (int i = 0; i < 4; ++i) {
    geo.dof[i] = rec.points[i].value;
    geo.coords[i] = mesh.point(rec.points[i]).coords;
  }
  Eigen::Matrix3d jac;
  for (int i = 0; i < 3; ++i) jac.col(i) = geo.coords[i + 1] - geo.coords[0];
  double det = jac.determinant();
  geo.volume = det / 6.0;

  double max_len = 0.0;
  for (int i = 0; i < 4; ++i) {
    for (int j = i + 1; j < 4; ++j) {
      max_len = std::max(max_len, (geo.coords[i] - geo.coords[j]).norm());
    }
  }
  if (std::abs(geo.volume) <= k_degeneracy_rel_tol * max_len * max_len * max_len) {
    throw GeometryError("element_system: degenerate tet " + std::to_string(t.value));
  }

  Eigen::Matrix3d inv = jac.inverse();
  for (int i = 0; i < 3; ++i) geo.grad[i + 1] = inv.row(i).transpose();
  geo.grad[0] = -(geo.grad[1] + geo.grad[2] + geo.grad[3]);

  geo.centroid = 0.25 * (geo.coords[0] + geo.coords[1] + geo.coords[2] + geo.coords[3]);
  Vec3 lo = geo.coords[0], hi = geo.coords[0];
  for (int i = 1; i < 4; ++i) {
    lo = lo.cwiseMin(geo.coords[i]);
    hi = hi.cwiseMax(geo.coords[i]);
  }
  geo.h = hi - lo;
  return geo;
}

double element_tau(const ElementGeometry& geo, const Vec3& beta_c,
                   const TransportProblem& prob) {
  if (!prob.stabilize) return 0.0;
  double advective = std::abs(beta_c.x() / geo.h.x() + beta_c.y() / geo.h.y() +
                              beta_c.z() / geo.h.z());
  double diffusive = 3.0 * static_cast<double>(prob.p * prob.p) * prob.eps /
                     geo.h.squaredNorm();
  double denom = advective + diffusive;
  return denom > 0.0 ? 1.0 / denom : 0.0;
}

// M^K and B^K for one element, coefficients evaluated at coeff_time.
void local_blocks(const ElementGeometry& geo, const TransportProblem& prob, double coeff_time,
                  Eigen::Matrix4d& mass, Eigen::Matrix4d& transport) {
  double v = geo.volume;
  Vec3 beta_c = prob.beta ? prob.beta(geo.centroid, coeff_time) : Vec3::Zero();
  double tau = element_tau(geo, beta_c, prob);

  std::array<double, 4> beta_dot_grad;
  for (int i = 0; i < 4; ++i) beta_dot_grad[i] = beta_c.dot(geo.grad[i]);

  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      mass(i, j) = (i == j) ? v / 10.0 : v / 20.0;
      double advection = beta_dot_grad[j] * v / 4.0;
      double diffusion = prob.eps * geo.grad[i].dot(geo.grad[j]) * v;
      double reaction = prob.c * mass(i, j);
      double streamline = tau * beta_dot_grad[j] * beta_dot_grad[i] * v;
      transport(i, j) = advection + diffusion + reaction + streamline;
    }
  }
}

// dt * l^K: source and stabilized source, 4-point quadrature.
Eigen::Vector4d local_load(const ElementGeometry& geo, const TransportProblem& prob,
                           double coeff_time) {
  Eigen::Vector4d load = Eigen::Vector4d::Zero();
  if (!prob.source) return load;
  Vec3 beta_c = prob.beta ? prob.beta(geo.centroid, coeff_time) : Vec3::Zero();
  double tau = element_tau(geo, beta_c, prob);
  double w = geo.volume / 4.0;
  for (int q = 0; q < 4; ++q) {
    Vec3 x = Vec3::Zero();
    for (int i = 0; i < 4; ++i) x += k_quad_bary[q][i] * geo.coords[i];
    double f = prob.source(x, coeff_time);
    for (int i = 0; i < 4; ++i) {
      load[i] += w * f * (k_quad_bary[q][i] + tau * beta_c.dot(geo.grad[i]));
    }
  }
  return load;
}

std::vector<Eigen::Index> dirichlet_dofs(const MeshGraph& mesh, const TransportProblem& prob) {
  std::vector<Eigen::Index> out;
  if (prob.boundary.kind != BoundaryCondition::Kind::Dirichlet) return out;
  for (PointId p : mesh.boundary_points()) out.push_back(p.value);
  return out;
}

}  // namespace

ElementSystem element_system(const MeshGraph& mesh, TetId t, const TransportProblem& prob,
                             const ScalarField& u_old, double time) {
  ElementGeometry geo = element_geometry(mesh, t);
  double coeff_time = time + prob.dt / 2.0;

  Eigen::Matrix4d mass, transport;
  local_blocks(geo, prob, coeff_time, mass, transport);

  ElementSystem sys;
  sys.tet = t;
  sys.dof_map.reserve(4);
  for (int i = 0; i < 4; ++i) sys.dof_map.push_back(PointId(static_cast<std::uint32_t>(geo.dof[i])));

  Eigen::Matrix4d half_b = (prob.dt / 2.0) * transport;
  sys.matrix = mass + half_b;

  Eigen::Vector4d u_local;
  for (int i = 0; i < 4; ++i) u_local[i] = u_old.values[geo.dof[i]];
  sys.rhs = (mass - half_b) * u_local + prob.dt * local_load(geo, prob, coeff_time);
  return sys;
}

Eigen::VectorXd apply_global_operator(const MeshGraph& mesh, const TransportProblem& prob,
                                      const Eigen::VectorXd& x, double time) {
  if (x.size() != static_cast<Eigen::Index>(mesh.point_count())) {
    throw PreconditionError("apply_global_operator: vector length mismatch");
  }
  double coeff_time = time + prob.dt / 2.0;
  Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
  Eigen::Matrix4d mass, transport;
  for (TetId t : mesh.live_tets()) {
    ElementGeometry geo = element_geometry(mesh, t);
    local_blocks(geo, prob, coeff_time, mass, transport);
    Eigen::Matrix4d a = mass + (prob.dt / 2.0) * transport;
    Eigen::Vector4d xl;
    for (int i = 0; i < 4; ++i) xl[i] = x[geo.dof[i]];
    Eigen::Vector4d yl = a * xl;
    for (int i = 0; i < 4; ++i) y[geo.dof[i]] += yl[i];
  }
  for (Eigen::Index i : dirichlet_dofs(mesh, prob)) y[i] = x[i];
  return y;
}

Eigen::VectorXd operator_diagonal(const MeshGraph& mesh, const TransportProblem& prob,
                                  double time) {
  double coeff_time = time + prob.dt / 2.0;
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(mesh.point_count()));
  Eigen::Matrix4d mass, transport;
  for (TetId t : mesh.live_tets()) {
    ElementGeometry geo = element_geometry(mesh, t);
    local_blocks(geo, prob, coeff_time, mass, transport);
    for (int i = 0; i < 4; ++i) {
      diag[geo.dof[i]] += mass(i, i) + (prob.dt / 2.0) * transport(i, i);
    }
  }
  for (Eigen::Index i : dirichlet_dofs(mesh, prob)) diag[i] = 1.0;
  return diag;
}

namespace {

struct StepOutcome {
  ScalarField field;
  int iterations = 0;
  double rel_residual = 0.0;
};

StepOutcome step_impl(const MeshGraph& mesh, const TransportProblem& prob,
                      const ScalarField& u_old, const SolverConfig& cfg) {
  prob.check();
  if (u_old.values.size() != static_cast<Eigen::Index>(mesh.point_count())) {
    throw PreconditionError("step: field length does not match mesh point count");
  }
  double time = u_old.time;
  double coeff_time = time + prob.dt / 2.0;

  // Precompute per-element matrices once per step; the operator is applied
  // many times inside GMRES, but no global matrix is ever formed.
  struct CachedElement {
    std::array<Eigen::Index, 4> dof;
    Eigen::Matrix4d a;  // M + (dt/2) B
  };
  std::vector<CachedElement> cache;
  cache.reserve(mesh.live_tet_count());

  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(u_old.values.size());
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(u_old.values.size());
  Eigen::Matrix4d mass, transport;
  for (TetId t : mesh.live_tets()) {
    ElementGeometry geo = element_geometry(mesh, t);
    local_blocks(geo, prob, coeff_time, mass, transport);
    Eigen::Matrix4d half_b = (prob.dt / 2.0) * transport;

    CachedElement ce;
    ce.dof = geo.dof;
    ce.a = mass + half_b;
    cache.push_back(ce);

    Eigen::Vector4d u_local;
    for (int i = 0; i < 4; ++i) u_local[i] = u_old.values[geo.dof[i]];
    Eigen::Vector4d r = (mass - half_b) * u_local + prob.dt * local_load(geo, prob, coeff_time);
    for (int i = 0; i < 4; ++i) {
      rhs[geo.dof[i]] += r[i];
      diag[geo.dof[i]] += ce.a(i, i);
    }
  }

  std::vector<Eigen::Index> pinned = dirichlet_dofs(mesh, prob);
  for (Eigen::Index i : pinned) {
    rhs[i] = prob.boundary.value(mesh.point(PointId(static_cast<std::uint32_t>(i))).coords,
                                 time + prob.dt);
    diag[i] = 1.0;
  }

  LinearOperator op = [&](const Eigen::VectorXd& x) {
    Eigen::VectorXd y = Eigen::VectorXd::Zero(x.size());
    for (const CachedElement& ce : cache) {
      Eigen::Vector4d xl;
      for (int i = 0; i < 4; ++i) xl[i] = x[ce.dof[i]];
      Eigen::Vector4d yl = ce.a * xl;
      for (int i = 0; i < 4; ++i) y[ce.dof[i]] += yl[i];
    }
    for (Eigen::Index i : pinned) y[i] = x[i];
    return y;
  };

  GmresResult sol = gmres_solve(op, rhs, cfg, diag);

  StepOutcome out;
  out.field.mesh = &mesh;
  out.field.values = std::move(sol.x);
  out.field.time = time + prob.dt;
  out.iterations = sol.iterations;
  out.rel_residual = sol.rel_residual;
  return out;
}

}  // namespace

ScalarField step(const MeshGraph& mesh, const TransportProblem& prob, const ScalarField& u_old,
                 const SolverConfig& cfg) {
  return step_impl(mesh, prob, u_old, cfg).field;
}

SimulationResult simulate(const MeshGraph& mesh, const TransportProblem& prob,
                          const ScalarField& u0, const SolverConfig& cfg, int snapshot_every) {
  prob.check();
  if (snapshot_every <= 0) snapshot_every = 1;

  auto n_steps = static_cast<int>(std::llround(prob.t_end / prob.dt));
  n_steps = std::max(n_steps, 1);

  SimulationResult result;
  result.snapshots.push_back(u0);

  ScalarField u = u0;
  for (int k = 1; k <= n_steps; ++k) {
    StepOutcome out = step_impl(mesh, prob, u, cfg);
    u = std::move(out.field);

    StepStats stats;
    stats.step = k;
    stats.time = u.time;
    stats.gmres_iterations = out.iterations;
    stats.rel_residual = out.rel_residual;
    result.stats.push_back(stats);

    if (k % snapshot_every == 0 || k == n_steps) {
      result.snapshots.push_back(u);
    }
  }
  return result;
}

}  // namespace plume
