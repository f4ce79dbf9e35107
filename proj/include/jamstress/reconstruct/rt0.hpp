#pragma once

#include <array>
#include <cmath>

#include "jamstress/geometry/mesh.hpp"

namespace jamstress {

/// Lowest-order Raviart-Thomas element on one triangle.
///
/// Edge i is opposite vertex q_i. sign[i] is +1 when the edge's fixed global normal
/// points out of this triangle. The basis function of edge i has unit normal component
/// along the global normal on that edge:
///   psi_i(x) = sign_i |e_i| / (2|T|) (x - q_i),
/// so div psi_i = sign_i |e_i| / |T| and the integral over T is
/// sign_i |e_i| / 2 (barycenter - q_i). Degrees of freedom are edge fluxes
/// F_i = integral of sigma.n_global over e_i, i.e. coefficient F_i / |e_i| on psi_i.
struct Rt0Triangle {
  std::array<Vec2, 3> q;
  std::array<double, 3> length{};
  std::array<double, 3> sign{};
  double area = 0.0;
  Vec2 barycenter = Vec2::Zero();

  double basis_divergence(int i) const { return sign[i] * length[i] / area; }
  Vec2 basis_integral(int i) const { return sign[i] * 0.5 * length[i] * (barycenter - q[i]); }
  Vec2 basis_value(int i, const Vec2& x) const { return (sign[i] * length[i] / (2.0 * area)) * (x - q[i]); }

  /// Field with the given edge fluxes, evaluated at x.
  Vec2 value(const std::array<double, 3>& flux, const Vec2& x) const {
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < 3; ++i) v += (flux[i] * sign[i] / (2.0 * area)) * (x - q[i]);
    return v;
  }

  double divergence(const std::array<double, 3>& flux) const {
    return (sign[0] * flux[0] + sign[1] * flux[1] + sign[2] * flux[2]) / area;
  }

  Vec2 integral(const std::array<double, 3>& flux) const {
    Vec2 v = Vec2::Zero();
    for (int i = 0; i < 3; ++i) v += (0.5 * flux[i] * sign[i]) * (barycenter - q[i]);
    return v;
  }

  /// Outward unit normal of edge i.
  Vec2 outward_normal(int i) const {
    const Vec2& a = q[(i + 1) % 3];
    const Vec2& b = q[(i + 2) % 3];
    Vec2 n = right_normal(a, b);
    if (n.dot(0.5 * (a + b) - q[i]) < 0.0) n = -n;
    return n;
  }
};

/// Element for a positive-area triangle. `global_normals[i]` fixes the orientation of
/// edge i; pass the outward normals (or omit) for the local orientation.
inline Rt0Triangle rt0_local(const std::array<Vec2, 3>& q, const std::array<Vec2, 3>* global_normals = nullptr) {
  Rt0Triangle t;
  t.q = q;
  t.area = 0.5 * std::abs(cross(q[1] - q[0], q[2] - q[0]));
  const double diam = std::max({(q[1] - q[0]).norm(), (q[2] - q[1]).norm(), (q[0] - q[2]).norm()});
  if (!(t.area > 1e-14 * diam * diam)) throw MeshError("degenerate triangle in RT0 element");
  t.barycenter = (q[0] + q[1] + q[2]) / 3.0;
  for (int i = 0; i < 3; ++i) {
    const Vec2& a = q[(i + 1) % 3];
    const Vec2& b = q[(i + 2) % 3];
    t.length[i] = (b - a).norm();
    if (global_normals) {
      t.sign[i] = (*global_normals)[i].dot(0.5 * (a + b) - q[i]) > 0.0 ? 1.0 : -1.0;
    } else {
      t.sign[i] = 1.0;
    }
  }
  return t;
}

} // namespace jamstress
