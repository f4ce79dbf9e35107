#pragma once

// Interface forces from LP duals, and the audits that check them against the
// contact, friction and equilibrium conditions.
//
// Stationarity of the LP Lagrangian with the row conventions of FrictionLp gives, per
// internal edge, the force pair
//   f^n = -z(non-penetration),   f^t = z(slip+) - z(slip-)
// and the traction on an adjacent cell c
//   lambda(e, c) = (n_c . n_e) (f^n n_e + f^t t_e) / |e|.
// With body_force = -y every cell balances:
//   sum_internal |e| lambda(e, c) + sum_boundary |e| g_e + body_force = 0.

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include "jamstress/lp/solver.hpp"
#include "jamstress/primal.hpp"

namespace jamstress {

struct EdgeForce {
  double normal = 0.0;     // f^n, compressive when negative
  double tangential = 0.0; // f^t
};

struct InterfaceForces {
  /// Indexed like PolygonalMesh::internal_edges.
  std::vector<EdgeForce> edges;
  /// Uniform force per cell that closes every balance; zero for balanced loads.
  Vec2 body_force = Vec2::Zero();

  const EdgeForce& at(const PolygonalMesh& mesh, int edge_id) const {
    const int k = mesh.internal_index.at(edge_id);
    if (k < 0) throw Error("edge " + std::to_string(edge_id) + " is not internal");
    return edges[k];
  }
};

/// Traction exerted on cell `cell` across edge `e`.
struct EdgeTraction {
  int edge_id = -1;
  int cell_id = -1;
  Vec2 value = Vec2::Zero();
};

/// Force scale used to normalize audit tolerances: max(1, max_e s_T |e|).
inline double force_scale(const FrictionProblem& problem) {
  double s = 1.0;
  for (int eid : problem.mesh.internal_edges) s = std::max(s, problem.tresca * problem.mesh.edges[eid].length);
  return s;
}

inline InterfaceForces extract_forces(const LpSolution& sol, const FrictionLp& flp, const PolygonalMesh& mesh) {
  if (sol.status != LpStatus::Optimal) throw Error("forces can only be extracted from an optimal LP solution");
  if (sol.z.size() != 3 * flp.num_internal || sol.y.size() != 2 ||
      flp.num_internal != static_cast<int>(mesh.num_internal()))
    throw Error("dual vector does not match the friction LP layout");
  InterfaceForces f;
  f.edges.resize(flp.num_internal);
  for (int k = 0; k < flp.num_internal; ++k) {
    f.edges[k].normal = -sol.z[flp.row_index(k, RowKind::NonPenetration)];
    f.edges[k].tangential = sol.z[flp.row_index(k, RowKind::SlipPlus)] - sol.z[flp.row_index(k, RowKind::SlipMinus)];
  }
  f.body_force = -Vec2(sol.y[0], sol.y[1]);
  return f;
}

inline Vec2 edge_traction(const EdgeForce& f, const Edge& e, int cell) {
  if (!e.is_internal()) throw Error("edge traction requested on boundary edge " + std::to_string(e.id));
  const double orient = e.orientation_for(cell);
  return (orient / e.length) * (f.normal * e.normal + f.tangential * e.tangent);
}

/// Tractions on both sides of every internal edge. The plus side is the exact
/// negation of the minus side.
inline std::vector<std::pair<EdgeTraction, EdgeTraction>> edge_tractions(const InterfaceForces& forces,
                                                                         const PolygonalMesh& mesh) {
  std::vector<std::pair<EdgeTraction, EdgeTraction>> out;
  out.reserve(mesh.num_internal());
  for (std::size_t k = 0; k < mesh.num_internal(); ++k) {
    const Edge& e = mesh.edges[mesh.internal_edges[k]];
    const Vec2 minus = edge_traction(forces.edges[k], e, e.cell_minus);
    out.push_back({{e.id, e.cell_minus, minus}, {e.id, e.cell_plus, -minus}});
  }
  return out;
}

/// Uniform stress S seen through every internal edge: f^n = |e| n.S n, f^t = |e| t.S n.
inline InterfaceForces forces_from_stress(const Mat2& stress, const PolygonalMesh& mesh) {
  InterfaceForces f;
  f.edges.resize(mesh.num_internal());
  for (std::size_t k = 0; k < mesh.num_internal(); ++k) {
    const Edge& e = mesh.edges[mesh.internal_edges[k]];
    const Vec2 t = stress * e.normal;
    f.edges[k] = {e.length * e.normal.dot(t), e.length * e.tangent.dot(t)};
  }
  return f;
}

/// Inverse of the dual sign map: z(slip+/-) = (s_T |e| +/- f^t) / 2, which makes the
/// slip-variable rows of the dual residual vanish.
inline std::pair<Eigen::VectorXd, Eigen::VectorXd> lp_duals_from_forces(const InterfaceForces& forces,
                                                                        const FrictionLp& flp,
                                                                        const FrictionProblem& problem) {
  Eigen::VectorXd z = Eigen::VectorXd::Zero(3 * flp.num_internal);
  for (int k = 0; k < flp.num_internal; ++k) {
    const double cap = problem.tresca * problem.mesh.edges[problem.mesh.internal_edges[k]].length;
    const EdgeForce& f = forces.edges[k];
    z[flp.row_index(k, RowKind::NonPenetration)] = -f.normal;
    z[flp.row_index(k, RowKind::SlipPlus)] = 0.5 * (cap + f.tangential);
    z[flp.row_index(k, RowKind::SlipMinus)] = 0.5 * (cap - f.tangential);
  }
  Eigen::VectorXd y(2);
  y << -forces.body_force.x(), -forces.body_force.y();
  return {z, y};
}

struct CellBalance {
  std::vector<Vec2> residuals; // r_c per cell
  double max_residual = 0.0;   // max_c |r_c|
};

inline CellBalance check_cell_balance(const InterfaceForces& forces, const FrictionProblem& problem) {
  const PolygonalMesh& mesh = problem.mesh;
  CellBalance out;
  out.residuals.assign(mesh.num_cells(), forces.body_force);
  for (std::size_t k = 0; k < mesh.num_internal(); ++k) {
    const Edge& e = mesh.edges[mesh.internal_edges[k]];
    const Vec2 minus = e.length * edge_traction(forces.edges[k], e, e.cell_minus);
    out.residuals[e.cell_minus] += minus;
    out.residuals[e.cell_plus] -= minus;
  }
  for (int eid : mesh.boundary_edges) {
    const Edge& e = mesh.edges[eid];
    out.residuals[e.cell_minus] += e.length * problem.tractions[eid];
  }
  for (const Vec2& r : out.residuals) out.max_residual = std::max(out.max_residual, r.norm());
  return out;
}

/// True when the body force is not negligible against the mean boundary load.
inline bool body_force_significant(const InterfaceForces& forces, const FrictionProblem& problem) {
  double mean = 0.0;
  for (int eid : problem.mesh.boundary_edges) mean += problem.tractions[eid].norm();
  if (!problem.mesh.boundary_edges.empty()) mean /= static_cast<double>(problem.mesh.boundary_edges.size());
  return forces.body_force.norm() > 1e-6 * mean;
}

struct ContactAudit {
  double max_penetration = 0.0;     // max_e -([u].n)
  double max_tension = 0.0;         // max_e f^n
  double max_complementarity = 0.0; // max_e |f^n ([u].n)|
  bool passed = true;
};

inline ContactAudit check_contact_kkt(const Displacements& u, const InterfaceForces& forces, const PolygonalMesh& mesh,
                                      double tol, double scale = 1.0) {
  ContactAudit a;
  for (std::size_t k = 0; k < mesh.num_internal(); ++k) {
    const Edge& e = mesh.edges[mesh.internal_edges[k]];
    const double gap = jump(u, e).dot(e.normal);
    a.max_penetration = std::max(a.max_penetration, -gap);
    a.max_tension = std::max(a.max_tension, forces.edges[k].normal);
    a.max_complementarity = std::max(a.max_complementarity, std::abs(forces.edges[k].normal * gap));
  }
  a.passed = a.max_penetration <= tol && a.max_tension <= tol && a.max_complementarity <= tol * scale;
  return a;
}

struct TrescaAudit {
  double max_bound_excess = 0.0; // max_e |f^t| - s_T |e|
  /// max over slipping edges of s_T |e| |s| - f^t s, with s = [u].t. Zero when the
  /// friction force on the plus cell, -f^t / |e|, opposes the slip at full magnitude.
  double max_misalignment = 0.0;
  bool passed = true;
};

inline TrescaAudit check_tresca(const Displacements& u, const InterfaceForces& forces, double tresca,
                                const PolygonalMesh& mesh, double tol) {
  TrescaAudit a;
  a.max_bound_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < mesh.num_internal(); ++k) {
    const Edge& e = mesh.edges[mesh.internal_edges[k]];
    const double cap = tresca * e.length;
    const double ft = forces.edges[k].tangential;
    a.max_bound_excess = std::max(a.max_bound_excess, std::abs(ft) - cap);
    const double slip = jump(u, e).dot(e.tangent);
    if (std::abs(slip) > tol) a.max_misalignment = std::max(a.max_misalignment, cap * std::abs(slip) - ft * slip);
  }
  if (mesh.num_internal() == 0) a.max_bound_excess = 0.0;
  a.passed = a.max_bound_excess <= tol && a.max_misalignment <= tol;
  return a;
}

/// E(u) - E*(f) for a feasible displacement u and the duals implied by `forces`.
/// Throws if u violates the LP constraints.
inline double weak_duality_check(const Displacements& u, const InterfaceForces& forces, const FrictionLp& flp,
                                 const FrictionProblem& problem) {
  const Eigen::VectorXd x = flp.point(u, problem.mesh);
  double u_scale = 0.0;
  for (const Vec2& v : u) u_scale = std::max(u_scale, v.cwiseAbs().maxCoeff());
  if (primal_infeasibility(flp.lp, x) > 1e-12 * (1.0 + u_scale))
    throw Error("weak duality check requires a feasible displacement");
  const auto [z, y] = lp_duals_from_forces(forces, flp, problem);
  return primal_energy(u, problem) - dual_objective(flp.lp, z, y);
}

/// Random point of the feasible cone: Gaussian cell displacements plus the smallest
/// dilation u_c += alpha (x_c - xbar) that opens every contact ((x_c+ - x_c-).n_e > 0),
/// recentered so that sum u_c = 0 and scaled to unit max-norm.
inline Displacements random_feasible_displacement(const PolygonalMesh& mesh, std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  const std::size_t n = mesh.num_cells();
  Displacements u(n);
  for (Vec2& v : u) v = {normal(rng), normal(rng)};
  Vec2 mean_center = Vec2::Zero();
  for (const Cell& c : mesh.cells) mean_center += c.center;
  mean_center /= static_cast<double>(n);
  double alpha = 0.0;
  for (int eid : mesh.internal_edges) {
    const Edge& e = mesh.edges[eid];
    const double opening = (mesh.cells[e.cell_plus].center - mesh.cells[e.cell_minus].center).dot(e.normal);
    alpha = std::max(alpha, -jump(u, e).dot(e.normal) / opening);
  }
  alpha *= 1.0 + 1e-9;
  Vec2 mean = Vec2::Zero();
  for (std::size_t c = 0; c < n; ++c) {
    u[c] += alpha * (mesh.cells[c].center - mean_center);
    mean += u[c];
  }
  mean /= static_cast<double>(n);
  double umax = 0.0;
  for (Vec2& v : u) {
    v -= mean;
    umax = std::max(umax, v.cwiseAbs().maxCoeff());
  }
  if (umax > 0.0)
    for (Vec2& v : u) v /= umax;
  return u;
}

/// The LP dual residual split into its physical parts.
struct AdmissibilityResidual {
  double cell_balance = 0.0;  // max_c ||r_c||_inf
  double slip_capacity = 0.0; // max_e |s_T |e| - z(slip+) - z(slip-)|
  double combined() const { return std::max(cell_balance, slip_capacity); }
};

inline AdmissibilityResidual admissibility_residual(const LpSolution& sol, const FrictionLp& flp,
                                                    const FrictionProblem& problem) {
  AdmissibilityResidual r;
  const InterfaceForces f = extract_forces(sol, flp, problem.mesh);
  const CellBalance bal = check_cell_balance(f, problem);
  for (const Vec2& v : bal.residuals) r.cell_balance = std::max(r.cell_balance, v.cwiseAbs().maxCoeff());
  for (int k = 0; k < flp.num_internal; ++k) {
    const double cap = problem.tresca * problem.mesh.edges[problem.mesh.internal_edges[k]].length;
    r.slip_capacity = std::max(r.slip_capacity, std::abs(cap - sol.z[flp.row_index(k, RowKind::SlipPlus)] -
                                                         sol.z[flp.row_index(k, RowKind::SlipMinus)]));
  }
  return r;
}

} // namespace jamstress
