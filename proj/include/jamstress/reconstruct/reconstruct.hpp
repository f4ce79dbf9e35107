#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <numbers>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "jamstress/friction_duals.hpp"
#include "jamstress/reconstruct/cell_system.hpp"

namespace jamstress {

/// Reconstructed stress in one cell: two RT0 rows on the fan triangulation plus the
/// per-triangle skew multiplier.
struct CellStressField {
  int cell_id = -1;
  CellTriangulation fan;
  std::vector<Rt0Triangle> elements;
  /// flux[row][local edge]: sides 0..k-1, then spokes.
  std::array<std::vector<double>, 2> flux;
  std::vector<double> multiplier;
  bool least_squares_fallback = false;
  double solve_residual = 0.0;

  std::array<double, 3> triangle_flux(int row, int t) const {
    const auto& te = fan.triangle_edges[t];
    return {flux[row][te[0]], flux[row][te[1]], flux[row][te[2]]};
  }

  Mat2 value_in(int t, const Vec2& x) const {
    Mat2 s;
    for (int r = 0; r < 2; ++r) s.row(r) = elements[t].value(triangle_flux(r, t), x).transpose();
    return s;
  }

  /// Value at the barycenter, equal to the triangle mean of the affine field.
  Mat2 barycenter_value(int t) const { return value_in(t, elements[t].barycenter); }

  Vec2 divergence(int t) const {
    return {elements[t].divergence(triangle_flux(0, t)), elements[t].divergence(triangle_flux(1, t))};
  }

  /// ||div sigma||_{L2(cell)}
  double divergence_norm() const {
    double acc = 0.0;
    for (int t = 0; t < fan.num_triangles(); ++t) acc += elements[t].area * divergence(t).squaredNorm();
    return std::sqrt(acc);
  }

  /// int_T (sigma_12 - sigma_21)
  double asymmetry_integral(int t) const {
    return elements[t].integral(triangle_flux(0, t)).y() - elements[t].integral(triangle_flux(1, t)).x();
  }

  /// Triangle containing x, located by polar angle around the apex.
  int locate(const Vec2& x) const {
    const int k = fan.num_sides();
    const Vec2& apex = fan.points[0];
    const double two_pi = 2.0 * std::numbers::pi;
    const auto angle = [&](const Vec2& p) { return std::atan2(p.y() - apex.y(), p.x() - apex.x()); };
    const double base = angle(fan.points[1]);
    const auto unwrap = [&](double a) {
      double d = std::fmod(a - base, two_pi);
      if (d < 0.0) d += two_pi;
      return d;
    };
    std::vector<double> starts(k);
    for (int i = 0; i < k; ++i) starts[i] = i == 0 ? 0.0 : unwrap(angle(fan.points[i + 1]));
    const double a = unwrap(angle(x));
    int t = static_cast<int>(std::upper_bound(starts.begin(), starts.end(), a) - starts.begin()) - 1;
    t = std::clamp(t, 0, k - 1);

    double diam = 0.0;
    for (const Vec2& p : fan.points) diam = std::max(diam, (p - apex).norm());
    const Rt0Triangle& el = elements[t];
    for (int i = 0; i < 3; ++i) {
      const Vec2& a0 = el.q[(i + 1) % 3];
      if ((x - a0).dot(el.outward_normal(i)) > 1e-12 * diam) throw Error("point outside cell " + std::to_string(cell_id));
    }
    return t;
  }

  Mat2 sample(const Vec2& x) const { return value_in(locate(x), x); }
};

/// Direct solve of the symmetrically equilibrated saddle system (sliver triangles make
/// the raw matrix badly scaled); falls back to minimum-norm least squares when the
/// scaled matrix is singular and flags the field.
inline CellStressField solve_cell(const SaddleSystem& sys) {
  const int k = sys.sides();
  Eigen::VectorXd d = sys.matrix.cwiseAbs().rowwise().maxCoeff();
  for (Eigen::Index i = 0; i < d.size(); ++i) d[i] = d[i] > 0.0 ? 1.0 / std::sqrt(d[i]) : 1.0;
  const Eigen::MatrixXd scaled = d.asDiagonal() * sys.matrix * d.asDiagonal();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(scaled);
  Eigen::VectorXd sol;
  CellStressField f;
  if (lu.isInvertible()) {
    sol = d.asDiagonal() * lu.solve(d.asDiagonal() * sys.rhs);
    sol += d.asDiagonal() * lu.solve(d.asDiagonal() * (sys.rhs - sys.matrix * sol));
  } else {
    sol = sys.matrix.completeOrthogonalDecomposition().solve(sys.rhs);
    f.least_squares_fallback = true;
  }
  const double rhs_norm = sys.rhs.size() > 0 ? sys.rhs.cwiseAbs().maxCoeff() : 0.0;
  f.solve_residual = (sys.matrix * sol - sys.rhs).cwiseAbs().maxCoeff();
  if (!sol.allFinite())
    throw NumericalError("cell " + std::to_string(sys.cell_id) + ": saddle solve failed (condition estimate " +
                         std::to_string(1.0 / lu.rcond()) + ")");
  if (!f.least_squares_fallback && f.solve_residual > 1e-10 * rhs_norm && f.solve_residual > 1e-300)
    throw NumericalError("cell " + std::to_string(sys.cell_id) + ": saddle residual " +
                         std::to_string(f.solve_residual) + " too large (condition estimate " +
                         std::to_string(1.0 / lu.rcond()) + ")");

  f.cell_id = sys.cell_id;
  f.fan = sys.fan;
  f.elements = sys.elements;
  for (int r = 0; r < 2; ++r) {
    f.flux[r].assign(2 * k, 0.0);
    for (int i = 0; i < k; ++i) f.flux[r][i] = sys.side_flux[r][i];
    for (int j = 0; j < k; ++j) f.flux[r][k + j] = sol[sys.free_index(r, j)];
  }
  f.multiplier.resize(k);
  for (int t = 0; t < k; ++t) f.multiplier[t] = sol[sys.multiplier_index(t)];
  return f;
}

/// sigma n_c on each side of a cell: lambda(e, c) on internal edges, g_e on the boundary.
inline std::vector<Vec2> cell_side_tractions(int cell, const InterfaceForces& forces, const FrictionProblem& problem) {
  const PolygonalMesh& mesh = problem.mesh;
  std::vector<Vec2> out;
  for (int eid : mesh.cells[cell].edge_ids) {
    const Edge& e = mesh.edges[eid];
    out.push_back(e.is_internal() ? edge_traction(forces.at(mesh, eid), e, cell) : problem.tractions[eid]);
  }
  return out;
}

struct ReconstructionReport {
  double max_divergence_norm = 0.0;
  /// max over triangles of |int_T (sigma_12 - sigma_21)| / ((1 + max|sigma|) |T|)
  double max_weak_asymmetry = 0.0;
  /// max over cell sides of |integral of sigma.n_c - |e| t| (re-integrated from the field)
  double max_boundary_flux_error = 0.0;
  double max_compatibility = 0.0;
  std::vector<int> fallback_cells;
  std::vector<std::pair<int, std::string>> failures;
};

struct Reconstruction {
  std::vector<std::optional<CellStressField>> fields; // by cell id
  ReconstructionReport report;
};

inline double max_abs_entry(const CellStressField& f) {
  double m = 0.0;
  for (int t = 0; t < f.fan.num_triangles(); ++t)
    for (const Vec2& p : f.elements[t].q) m = std::max(m, f.value_in(t, p).cwiseAbs().maxCoeff());
  return m;
}

/// Re-integrates sigma.n_c over every side from point values (exact for RT0: the
/// normal component is constant along an edge) and compares with |e| t.
inline double boundary_flux_error(const CellStressField& f, const std::vector<Vec2>& side_traction) {
  double err = 0.0;
  const int k = f.fan.num_sides();
  for (int i = 0; i < k; ++i) {
    const Vec2& a = f.fan.points[i + 1];
    const Vec2& b = f.fan.points[(i + 1) % k + 1];
    const Vec2 n = right_normal(a, b);
    const double len = (b - a).norm();
    const Vec2 flux = len * (f.value_in(f.fan.side_triangle(i), 0.5 * (a + b)) * n);
    err = std::max(err, (flux - len * side_traction[i]).cwiseAbs().maxCoeff());
  }
  return err;
}

/// Solves every cell independently on up to `threads` workers; results are stored by
/// cell id so the output does not depend on scheduling. Failures are collected, not thrown.
inline Reconstruction reconstruct_all(const InterfaceForces& forces, const FrictionProblem& problem, int threads = 1) {
  const PolygonalMesh& mesh = problem.mesh;
  const int n = static_cast<int>(mesh.num_cells());
  Reconstruction out;
  out.fields.resize(n);
  std::vector<std::string> errors(n);
  std::vector<double> compat(n, 0.0);
  std::atomic<int> next{0};
  const auto work = [&] {
    for (int c = next++; c < n; c = next++) {
      try {
        const std::vector<Vec2> traction = cell_side_tractions(c, forces, problem);
        const SaddleSystem sys = assemble_cell_system(fan_triangulate(mesh, c), traction);
        compat[c] = sys.compatibility;
        out.fields[c] = solve_cell(sys);
      } catch (const std::exception& e) {
        errors[c] = e.what();
      }
    }
  };
  const int workers = std::clamp(threads, 1, std::max(1, n));
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }

  ReconstructionReport& rep = out.report;
  for (int c = 0; c < n; ++c) {
    rep.max_compatibility = std::max(rep.max_compatibility, compat[c]);
    if (!out.fields[c]) {
      rep.failures.emplace_back(c, errors[c]);
      continue;
    }
    const CellStressField& f = *out.fields[c];
    if (f.least_squares_fallback) rep.fallback_cells.push_back(c);
    rep.max_divergence_norm = std::max(rep.max_divergence_norm, f.divergence_norm());
    const double smax = max_abs_entry(f);
    for (int t = 0; t < f.fan.num_triangles(); ++t)
      rep.max_weak_asymmetry =
          std::max(rep.max_weak_asymmetry, std::abs(f.asymmetry_integral(t)) / ((1.0 + smax) * f.elements[t].area));
    rep.max_boundary_flux_error =
        std::max(rep.max_boundary_flux_error, boundary_flux_error(f, cell_side_tractions(c, forces, problem)));
  }
  return out;
}

} // namespace jamstress
