#pragma once

#include <cmath>
#include <map>
#include <vector>

#include "jamstress/geometry/mesh.hpp"
#include "jamstress/lp/standard_form.hpp"

namespace jamstress {

/// Rigid-cell displacement field, one vector per cell.
using Displacements = std::vector<Vec2>;

/// Rigid cells under Tresca friction loaded by boundary tractions.
struct FrictionProblem {
  PolygonalMesh mesh;
  double tresca = 0.0; // friction bound s_T, stress units
  /// Indexed by edge id; only boundary entries are meaningful (force per unit length).
  std::vector<Vec2> tractions;
  /// Sum of |e| g_e over the boundary.
  Vec2 resultant = Vec2::Zero();
  bool balanced = true;

  const Vec2& traction(int edge_id) const { return tractions[edge_id]; }
};

/// Validates the inputs and computes the load resultant. Every boundary edge needs a
/// traction entry (possibly zero); entries for internal edges are rejected.
inline FrictionProblem make_problem(PolygonalMesh mesh, double tresca, const std::map<int, Vec2>& tractions) {
  if (!(tresca > 0.0)) throw Error("Tresca coefficient must be positive");
  FrictionProblem p;
  p.tresca = tresca;
  p.tractions.assign(mesh.edges.size(), Vec2::Zero());
  for (const auto& [eid, g] : tractions) {
    if (eid < 0 || eid >= static_cast<int>(mesh.edges.size())) throw Error("traction for unknown edge " + std::to_string(eid));
    if (mesh.edges[eid].is_internal()) throw Error("traction given for internal edge " + std::to_string(eid));
    p.tractions[eid] = g;
  }
  double magnitude = 0.0;
  for (int eid : mesh.boundary_edges) {
    if (!tractions.contains(eid)) throw Error("missing traction entry for boundary edge " + std::to_string(eid));
    const double len = mesh.edges[eid].length;
    p.resultant += len * p.tractions[eid];
    magnitude += len * p.tractions[eid].norm();
  }
  p.balanced = p.resultant.norm() <= 1e-9 * magnitude;
  p.mesh = std::move(mesh);
  return p;
}

/// Same traction on every boundary edge as a function of its outward normal.
template <class Fn>
FrictionProblem make_problem_from_normals(PolygonalMesh mesh, double tresca, Fn&& traction_of_normal) {
  std::map<int, Vec2> g;
  for (int eid : mesh.boundary_edges) g[eid] = traction_of_normal(mesh.edges[eid].normal);
  return make_problem(std::move(mesh), tresca, g);
}

/// g_e = S n_e on every boundary edge.
inline FrictionProblem make_problem_from_stress(PolygonalMesh mesh, double tresca, const Mat2& stress) {
  return make_problem_from_normals(std::move(mesh), tresca, [&](const Vec2& n) -> Vec2 { return stress * n; });
}

/// [u]_e = u(cell_plus) - u(cell_minus).
inline Vec2 jump(const Displacements& u, const Edge& e) {
  if (!e.is_internal()) throw Error("jump requested on boundary edge " + std::to_string(e.id));
  return u[e.cell_plus] - u[e.cell_minus];
}

/// Work of the boundary loads; a boundary edge moves with its cell.
inline double external_work(const Displacements& u, const FrictionProblem& problem) {
  double w = 0.0;
  for (int eid : problem.mesh.boundary_edges) {
    const Edge& e = problem.mesh.edges[eid];
    w += e.length * problem.tractions[eid].dot(u[e.cell_minus]);
  }
  return w;
}

/// Friction dissipation minus external work.
inline double primal_energy(const Displacements& u, const FrictionProblem& problem) {
  double friction = 0.0;
  for (int eid : problem.mesh.internal_edges) {
    const Edge& e = problem.mesh.edges[eid];
    friction += problem.tresca * e.length * std::abs(jump(u, e).dot(e.tangent));
  }
  return friction - external_work(u, problem);
}

enum class VariableKind { Displacement, Slip };
enum class RowKind { NonPenetration = 0, SlipPlus = 1, SlipMinus = 2 };

struct VariableSlot {
  VariableKind kind;
  int index;     // cell id (Displacement) or edge id (Slip)
  int component; // 0/1 for Displacement, 0 for Slip
};

struct RowSlot {
  int edge_id;
  RowKind kind;
};

/// Friction LP together with the map between LP indices and mesh entities.
///
/// Variables: u(c) components at 2c, 2c+1; slip bound v_e of the k-th internal edge at
/// 2N + k. Inequality rows 3k, 3k+1, 3k+2 for the k-th internal edge:
///   -[u].n       <= 0   (non-penetration)
///    [u].t - v_e <= 0   (slip+)
///   -[u].t - v_e <= 0   (slip-)
/// Equality rows: sum_c u(c) = 0, one per component.
struct FrictionLp {
  LpStandardForm lp;
  std::vector<VariableSlot> variables;
  std::vector<RowSlot> rows;
  int num_cells = 0;
  int num_internal = 0;

  int displacement_index(int cell, int component) const { return 2 * cell + component; }
  int slip_index(int internal_k) const { return 2 * num_cells + internal_k; }
  int row_index(int internal_k, RowKind kind) const { return 3 * internal_k + static_cast<int>(kind); }

  Displacements displacements(const Eigen::VectorXd& x) const {
    Displacements u(num_cells);
    for (int c = 0; c < num_cells; ++c) u[c] = Vec2(x[2 * c], x[2 * c + 1]);
    return u;
  }

  /// LP point for u with the tightest feasible slip bounds v_e = |[u]_e . t_e|.
  Eigen::VectorXd point(const Displacements& u, const PolygonalMesh& mesh) const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(lp.num_vars());
    for (int c = 0; c < num_cells; ++c) {
      x[2 * c] = u[c].x();
      x[2 * c + 1] = u[c].y();
    }
    for (int k = 0; k < num_internal; ++k) {
      const Edge& e = mesh.edges[mesh.internal_edges[k]];
      x[slip_index(k)] = std::abs(jump(u, e).dot(e.tangent));
    }
    return x;
  }
};

inline FrictionLp assemble_lp(const FrictionProblem& problem) {
  const PolygonalMesh& mesh = problem.mesh;
  if (problem.tractions.size() != mesh.edges.size()) throw Error("missing traction entries");
  FrictionLp f;
  f.num_cells = static_cast<int>(mesh.num_cells());
  f.num_internal = static_cast<int>(mesh.num_internal());
  const int n = 2 * f.num_cells + f.num_internal;
  const int m = 3 * f.num_internal;

  f.variables.reserve(n);
  for (int c = 0; c < f.num_cells; ++c)
    for (int comp = 0; comp < 2; ++comp) f.variables.push_back({VariableKind::Displacement, c, comp});
  for (int k = 0; k < f.num_internal; ++k) f.variables.push_back({VariableKind::Slip, mesh.internal_edges[k], 0});

  f.lp.c = Eigen::VectorXd::Zero(n);
  for (int eid : mesh.boundary_edges) {
    const Edge& e = mesh.edges[eid];
    const Vec2 load = e.length * problem.tractions[eid];
    f.lp.c[2 * e.cell_minus] -= load.x();
    f.lp.c[2 * e.cell_minus + 1] -= load.y();
  }

  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(5 * m);
  f.rows.reserve(m);
  // Adds s * ([u]_e . d) to row r.
  const auto add_jump = [&](int r, const Edge& e, const Vec2& d, double s) {
    for (int comp = 0; comp < 2; ++comp) {
      if (d[comp] == 0.0) continue;
      trip.emplace_back(r, 2 * e.cell_plus + comp, s * d[comp]);
      trip.emplace_back(r, 2 * e.cell_minus + comp, -s * d[comp]);
    }
  };
  for (int k = 0; k < f.num_internal; ++k) {
    const Edge& e = mesh.edges[mesh.internal_edges[k]];
    const int r0 = f.row_index(k, RowKind::NonPenetration);
    add_jump(r0, e, e.normal, -1.0);
    add_jump(r0 + 1, e, e.tangent, 1.0);
    add_jump(r0 + 2, e, e.tangent, -1.0);
    trip.emplace_back(r0 + 1, f.slip_index(k), -1.0);
    trip.emplace_back(r0 + 2, f.slip_index(k), -1.0);
    f.rows.push_back({e.id, RowKind::NonPenetration});
    f.rows.push_back({e.id, RowKind::SlipPlus});
    f.rows.push_back({e.id, RowKind::SlipMinus});
    f.lp.c[f.slip_index(k)] = problem.tresca * e.length;
  }
  f.lp.G.resize(m, n);
  f.lp.G.setFromTriplets(trip.begin(), trip.end());
  f.lp.h = Eigen::VectorXd::Zero(m);

  trip.clear();
  for (int c = 0; c < f.num_cells; ++c) {
    trip.emplace_back(0, 2 * c, 1.0);
    trip.emplace_back(1, 2 * c + 1, 1.0);
  }
  f.lp.A.resize(2, n);
  f.lp.A.setFromTriplets(trip.begin(), trip.end());
  f.lp.b = Eigen::VectorXd::Zero(2);
  return f;
}

} // namespace jamstress
