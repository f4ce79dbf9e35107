#pragma once

#include <array>
#include <vector>

#include "jamstress/geometry/mesh.hpp"

namespace jamstress {

/// Fan triangulation of a convex cell around its center.
///
/// Local points: 0 is the apex (cell center), 1..k are the ring vertices in order.
/// Local edges: 0..k-1 are the boundary sides (side i joins points i+1 and i+2, the
/// last one wraps to point 1), k..2k-1 are the spokes (spoke j joins 0 and j+1).
/// Every local edge is oriented from its lower to its higher local point index.
/// Triangle i is (0, i+1, i+2 wrapped) and owns boundary side i.
struct CellTriangulation {
  int cell_id = -1;
  std::vector<Vec2> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<std::array<int, 2>> edges;
  /// Local edge opposite each triangle vertex.
  std::vector<std::array<int, 3>> triangle_edges;
  /// Mesh edge id of each boundary side.
  std::vector<int> side_edge_ids;

  int num_sides() const noexcept { return static_cast<int>(side_edge_ids.size()); }
  int num_triangles() const noexcept { return static_cast<int>(triangles.size()); }
  int side_triangle(int side) const noexcept { return side; }
  int spoke_edge(int j) const noexcept { return num_sides() + j; }

  double triangle_area(int t) const {
    const auto& tri = triangles[t];
    return 0.5 * cross(points[tri[1]] - points[tri[0]], points[tri[2]] - points[tri[0]]);
  }

  Vec2 barycenter(int t) const {
    const auto& tri = triangles[t];
    return (points[tri[0]] + points[tri[1]] + points[tri[2]]) / 3.0;
  }
};

inline CellTriangulation fan_triangulate(const PolygonalMesh& mesh, int cell_id) {
  const Cell& cell = mesh.cells.at(cell_id);
  const int k = static_cast<int>(cell.vertex_ids.size());
  CellTriangulation fan;
  fan.cell_id = cell_id;
  fan.points.reserve(k + 1);
  fan.points.push_back(cell.center);
  for (int v : cell.vertex_ids) fan.points.push_back(mesh.vertices[v]);
  fan.side_edge_ids = cell.edge_ids;

  for (int i = 0; i < k; ++i) {
    const int a = i + 1;
    const int b = (i + 1) % k + 1;
    fan.edges.push_back({std::min(a, b), std::max(a, b)});
  }
  for (int j = 0; j < k; ++j) fan.edges.push_back({0, j + 1});

  for (int i = 0; i < k; ++i) {
    const int a = i + 1;
    const int b = (i + 1) % k + 1;
    fan.triangles.push_back({0, a, b});
    fan.triangle_edges.push_back({i, k + (b - 1), k + (a - 1)});
    if (fan.triangle_area(i) <= 1e-12 * cell.area)
      throw MeshError("cell " + std::to_string(cell_id) + ": degenerate fan triangle " + std::to_string(i) +
                      " (apex on a side line)");
  }
  return fan;
}

} // namespace jamstress
