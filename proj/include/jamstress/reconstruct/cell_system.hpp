#pragma once

// Per-cell mixed problem: find sigma (one RT0 field per tensor row on the fan
// triangulation) with prescribed boundary fluxes and a piecewise constant p with
//
//   a(sigma, tau) + b(tau, p) = 0   for tau with zero boundary flux
//   b(sigma, q)               = 0   for all piecewise constant q
//
// a(sigma, tau) = int div(sigma).div(tau),  b(sigma, q) = int (sigma_12 - sigma_21) q.
// Every integrand is constant or affine per triangle, so one-point barycenter
// quadrature is exact and is what the closed forms below amount to.

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "jamstress/geometry/fan.hpp"
#include "jamstress/reconstruct/rt0.hpp"

namespace jamstress {

struct SaddleSystem {
  int cell_id = -1;
  CellTriangulation fan;
  std::vector<Rt0Triangle> elements;
  /// Prescribed flux of each boundary side, per tensor row.
  std::array<Eigen::VectorXd, 2> side_flux;
  Eigen::MatrixXd A; // 2k x 2k over spoke fluxes (row-major in tensor row)
  Eigen::MatrixXd B; // k x 2k
  Eigen::MatrixXd matrix;
  Eigen::VectorXd rhs;
  /// max_row |sum of prescribed boundary fluxes|; zero for balanced cells.
  double compatibility = 0.0;

  int sides() const noexcept { return fan.num_sides(); }
  int free_index(int row, int spoke) const noexcept { return row * sides() + spoke; }
  int multiplier_index(int triangle) const noexcept { return 2 * sides() + triangle; }
};

/// Fixed orientation of a local fan edge: right normal of lower -> higher local point.
inline Vec2 fan_edge_normal(const CellTriangulation& fan, int edge) {
  return right_normal(fan.points[fan.edges[edge][0]], fan.points[fan.edges[edge][1]]);
}

inline std::vector<Rt0Triangle> fan_elements(const CellTriangulation& fan) {
  std::vector<Rt0Triangle> out;
  out.reserve(fan.num_triangles());
  for (int t = 0; t < fan.num_triangles(); ++t) {
    const auto& tri = fan.triangles[t];
    const std::array<Vec2, 3> q{fan.points[tri[0]], fan.points[tri[1]], fan.points[tri[2]]};
    std::array<Vec2, 3> normals;
    for (int i = 0; i < 3; ++i) normals[i] = fan_edge_normal(fan, fan.triangle_edges[t][i]);
    out.push_back(rt0_local(q, &normals));
  }
  return out;
}

/// `side_traction[i]` is sigma n_c on boundary side i (force per unit length).
inline SaddleSystem assemble_cell_system(const CellTriangulation& fan, const std::vector<Vec2>& side_traction) {
  const int k = fan.num_sides();
  if (static_cast<int>(side_traction.size()) != k)
    throw Error("cell " + std::to_string(fan.cell_id) + ": missing boundary traction");
  SaddleSystem sys;
  sys.cell_id = fan.cell_id;
  sys.fan = fan;
  sys.elements = fan_elements(fan);

  Vec2 total = Vec2::Zero();
  for (int r = 0; r < 2; ++r) sys.side_flux[r].resize(k);
  for (int i = 0; i < k; ++i) {
    const Vec2& a = fan.points[i + 1];
    const Vec2& b = fan.points[(i + 1) % k + 1];
    const double orient = fan_edge_normal(fan, i).dot(right_normal(a, b)) > 0.0 ? 1.0 : -1.0;
    const Vec2 flux = (b - a).norm() * side_traction[i];
    total += flux;
    for (int r = 0; r < 2; ++r) sys.side_flux[r][i] = orient * flux[r];
  }
  sys.compatibility = total.cwiseAbs().maxCoeff();

  sys.A = Eigen::MatrixXd::Zero(2 * k, 2 * k);
  sys.B = Eigen::MatrixXd::Zero(k, 2 * k);
  Eigen::VectorXd rhs_flux = Eigen::VectorXd::Zero(2 * k);
  Eigen::VectorXd rhs_mult = Eigen::VectorXd::Zero(k);
  for (int t = 0; t < k; ++t) {
    const Rt0Triangle& el = sys.elements[t];
    const auto& te = fan.triangle_edges[t];
    for (int r = 0; r < 2; ++r) {
      double fixed_div = 0.0;
      for (int j = 0; j < 3; ++j)
        if (te[j] < k) fixed_div += el.sign[j] * sys.side_flux[r][te[j]] / el.area;
      for (int i = 0; i < 3; ++i) {
        if (te[i] < k) continue;
        const int fi = sys.free_index(r, te[i] - k);
        const double wi = el.sign[i] / el.area;
        rhs_flux[fi] -= el.area * wi * fixed_div;
        for (int j = 0; j < 3; ++j) {
          if (te[j] < k) continue;
          sys.A(fi, sys.free_index(r, te[j] - k)) += el.area * wi * el.sign[j] / el.area;
        }
      }
    }
    // int_T (sigma_12 - sigma_21): y-part of row 0 minus x-part of row 1
    for (int j = 0; j < 3; ++j) {
      const Vec2 g = 0.5 * el.sign[j] * (el.barycenter - el.q[j]);
      if (te[j] < k) {
        rhs_mult[t] -= g.y() * sys.side_flux[0][te[j]] - g.x() * sys.side_flux[1][te[j]];
      } else {
        sys.B(t, sys.free_index(0, te[j] - k)) += g.y();
        sys.B(t, sys.free_index(1, te[j] - k)) -= g.x();
      }
    }
  }
  sys.matrix = Eigen::MatrixXd::Zero(3 * k, 3 * k);
  sys.matrix.topLeftCorner(2 * k, 2 * k) = sys.A;
  sys.matrix.topRightCorner(2 * k, k) = sys.B.transpose();
  sys.matrix.bottomLeftCorner(k, 2 * k) = sys.B;
  sys.rhs.resize(3 * k);
  sys.rhs << rhs_flux, rhs_mult;
  return sys;
}

} // namespace jamstress
