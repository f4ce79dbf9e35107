#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "jamstress/error.hpp"

namespace jamstress {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// z-component of the 2D cross product.
inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }

/// Rotation by +pi/2.
inline Vec2 rotate_quarter(const Vec2& v) { return {-v.y(), v.x()}; }

/// Unit normal on the right of the directed segment a -> b. For a CCW ring this is
/// the outward normal.
inline Vec2 right_normal(const Vec2& a, const Vec2& b) {
  const Vec2 d = b - a;
  return Vec2(d.y(), -d.x()) / d.norm();
}

/// Signed area of a closed ring (positive when CCW).
inline double signed_area(std::span<const Vec2> ring) {
  double twice = 0.0;
  for (std::size_t i = 0; i < ring.size(); ++i)
    twice += cross(ring[i], ring[(i + 1) % ring.size()]);
  return 0.5 * twice;
}

/// Area centroid of a simple polygon.
inline Vec2 polygon_centroid(std::span<const Vec2> ring) {
  double twice = 0.0;
  Vec2 acc = Vec2::Zero();
  for (std::size_t i = 0; i < ring.size(); ++i) {
    const Vec2& p = ring[i];
    const Vec2& q = ring[(i + 1) % ring.size()];
    const double w = cross(p, q);
    twice += w;
    acc += w * (p + q);
  }
  return acc / (3.0 * twice);
}

enum class EdgeKind { Internal, Boundary };

struct Cell {
  int id = -1;
  std::vector<int> vertex_ids; // CCW ring
  Vec2 center = Vec2::Zero();
  double area = 0.0;
  /// edge_ids[i] is the mesh edge between vertex_ids[i] and vertex_ids[i+1].
  std::vector<int> edge_ids;
};

struct Edge {
  int id = -1;
  int v0 = -1; // v0 < v1
  int v1 = -1;
  double length = 0.0;
  Vec2 midpoint = Vec2::Zero();
  /// Internal: points from cell_minus to cell_plus. Boundary: outward.
  Vec2 normal = Vec2::Zero();
  Vec2 tangent = Vec2::Zero();
  EdgeKind kind = EdgeKind::Boundary;
  int cell_minus = -1; // owner for boundary edges
  int cell_plus = -1;  // -1 for boundary edges

  bool is_internal() const noexcept { return kind == EdgeKind::Internal; }

  /// +1 if the outward normal of `cell` on this edge equals `normal`, -1 otherwise.
  double orientation_for(int cell) const {
    if (cell == cell_minus) return 1.0;
    if (cell == cell_plus) return -1.0;
    throw MeshError("cell " + std::to_string(cell) + " is not adjacent to edge " + std::to_string(id));
  }
};

/// Convex polygonal cells tiling a polygonal domain. Immutable once built.
struct PolygonalMesh {
  std::vector<Vec2> vertices;
  std::vector<Cell> cells;
  std::vector<Edge> edges;
  std::vector<int> internal_edges; // edge ids, ascending
  std::vector<int> boundary_edges; // edge ids, ascending
  /// Position of an edge in internal_edges, -1 for boundary edges.
  std::vector<int> internal_index;

  std::size_t num_cells() const noexcept { return cells.size(); }
  std::size_t num_internal() const noexcept { return internal_edges.size(); }

  std::vector<Vec2> ring(int cell) const {
    std::vector<Vec2> pts;
    pts.reserve(cells[cell].vertex_ids.size());
    for (int v : cells[cell].vertex_ids) pts.push_back(vertices[v]);
    return pts;
  }

  /// Bounding-box diagonal, the length scale for geometric tolerances.
  double diameter() const {
    if (vertices.empty()) return 0.0;
    Vec2 lo = vertices.front(), hi = vertices.front();
    for (const Vec2& p : vertices) {
      lo = lo.cwiseMin(p);
      hi = hi.cwiseMax(p);
    }
    return (hi - lo).norm();
  }

  /// Area enclosed by the boundary edges, each traversed as in its owning ring.
  double domain_area() const {
    double twice = 0.0;
    for (const Cell& c : cells)
      for (std::size_t i = 0; i < c.vertex_ids.size(); ++i) {
        if (edges[c.edge_ids[i]].is_internal()) continue;
        twice += cross(vertices[c.vertex_ids[i]], vertices[c.vertex_ids[(i + 1) % c.vertex_ids.size()]]);
      }
    return 0.5 * twice;
  }
};

namespace detail {

inline void check_cell_shape(const PolygonalMesh& mesh, const Cell& cell, double scale) {
  const auto& ring = cell.vertex_ids;
  const std::string name = "cell " + std::to_string(cell.id);
  if (ring.size() < 3) throw MeshError(name + ": open vertex ring (fewer than 3 vertices)");
  for (int v : ring)
    if (v < 0 || v >= static_cast<int>(mesh.vertices.size()))
      throw MeshError(name + ": vertex id " + std::to_string(v) + " out of range");
  for (std::size_t i = 0; i < ring.size(); ++i)
    for (std::size_t j = i + 1; j < ring.size(); ++j)
      if (ring[i] == ring[j]) throw MeshError(name + ": open vertex ring (repeated vertex)");

  const std::vector<Vec2> pts = mesh.ring(cell.id);
  const double area = signed_area(pts);
  if (area <= 0.0) throw MeshError(name + ": cell orientation is not counter-clockwise");
  const std::size_t k = pts.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 d0 = pts[(i + 1) % k] - pts[i];
    const Vec2 d1 = pts[(i + 2) % k] - pts[(i + 1) % k];
    if (d0.norm() <= 1e-12 * scale) throw MeshError(name + ": zero-length side");
    if (cross(d0, d1) < -1e-12 * scale * scale) throw MeshError(name + ": non-convex cell");
  }
  // center strictly inside: positive distance to every side line
  double diam = 0.0;
  for (std::size_t i = 0; i < k; ++i)
    for (std::size_t j = i + 1; j < k; ++j) diam = std::max(diam, (pts[i] - pts[j]).norm());
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2 n = right_normal(pts[i], pts[(i + 1) % k]);
    if (-(cell.center - pts[i]).dot(n) <= 1e-12 * diam)
      throw MeshError(name + ": center is not strictly inside the cell");
  }
}

inline void check_vertex_coincidence(const PolygonalMesh& mesh, double scale) {
  std::vector<int> order(mesh.vertices.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return mesh.vertices[a].x() < mesh.vertices[b].x(); });
  const double tol = 1e-12 * scale;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (std::size_t j = i + 1; j < order.size(); ++j) {
      const Vec2& p = mesh.vertices[order[i]];
      const Vec2& q = mesh.vertices[order[j]];
      if (q.x() - p.x() > tol) break;
      if ((p - q).norm() <= tol)
        throw MeshError("mismatched shared edge: vertices " + std::to_string(order[i]) + " and " +
                        std::to_string(order[j]) + " coincide");
    }
}

/// A vertex lying inside a boundary segment means a neighbor's edge was not split.
inline void check_hanging_nodes(const PolygonalMesh& mesh, double scale) {
  const double tol = 1e-12 * scale;
  for (int eid : mesh.boundary_edges) {
    const Edge& e = mesh.edges[eid];
    const Vec2& a = mesh.vertices[e.v0];
    const Vec2& b = mesh.vertices[e.v1];
    const Vec2 d = (b - a) / e.length;
    for (std::size_t v = 0; v < mesh.vertices.size(); ++v) {
      if (static_cast<int>(v) == e.v0 || static_cast<int>(v) == e.v1) continue;
      const Vec2 r = mesh.vertices[v] - a;
      const double s = r.dot(d);
      if (s <= tol || s >= e.length - tol) continue;
      if (std::abs(cross(d, r)) <= tol)
        throw MeshError("mismatched shared edge: vertex " + std::to_string(v) + " hangs on edge " +
                        std::to_string(eid));
    }
  }
}

} // namespace detail

/// Derives the edge set of a mesh whose cells are already set. Edge ids follow the
/// sorted (min vertex id, max vertex id) keys, so the result does not depend on the
/// order in which cells are listed. Throws MeshError on invalid input.
inline PolygonalMesh build_edges(PolygonalMesh mesh) {
  const double scale = mesh.diameter();
  for (std::size_t c = 0; c < mesh.cells.size(); ++c) {
    if (mesh.cells[c].id != static_cast<int>(c)) throw MeshError("cell ids must be dense and ordered");
    detail::check_cell_shape(mesh, mesh.cells[c], scale);
  }
  detail::check_vertex_coincidence(mesh, scale);

  struct Side {
    int cell;
    int pos;
    bool forward; // ring traverses low -> high vertex id
  };
  std::map<std::pair<int, int>, std::vector<Side>> sides;
  for (Cell& c : mesh.cells) {
    const std::size_t k = c.vertex_ids.size();
    for (std::size_t i = 0; i < k; ++i) {
      const int a = c.vertex_ids[i];
      const int b = c.vertex_ids[(i + 1) % k];
      sides[{std::min(a, b), std::max(a, b)}].push_back({c.id, static_cast<int>(i), a < b});
    }
    c.edge_ids.assign(k, -1);
    c.area = signed_area(mesh.ring(c.id));
  }

  mesh.edges.clear();
  mesh.internal_edges.clear();
  mesh.boundary_edges.clear();
  mesh.edges.reserve(sides.size());
  for (auto& [key, incident] : sides) {
    if (incident.size() > 2)
      throw MeshError("edge (" + std::to_string(key.first) + ", " + std::to_string(key.second) +
                      ") is shared by more than two cells");
    std::sort(incident.begin(), incident.end(), [](const Side& a, const Side& b) { return a.cell < b.cell; });
    Edge e;
    e.id = static_cast<int>(mesh.edges.size());
    e.v0 = key.first;
    e.v1 = key.second;
    const Vec2& p0 = mesh.vertices[e.v0];
    const Vec2& p1 = mesh.vertices[e.v1];
    e.length = (p1 - p0).norm();
    e.midpoint = 0.5 * (p0 + p1);
    const Side& owner = incident.front();
    e.normal = owner.forward ? right_normal(p0, p1) : right_normal(p1, p0);
    e.tangent = rotate_quarter(e.normal);
    e.cell_minus = owner.cell;
    if (incident.size() == 2) {
      if (incident[0].forward == incident[1].forward)
        throw MeshError("cells " + std::to_string(incident[0].cell) + " and " + std::to_string(incident[1].cell) +
                        " overlap along a shared edge");
      e.kind = EdgeKind::Internal;
      e.cell_plus = incident[1].cell;
      mesh.internal_edges.push_back(e.id);
    } else {
      e.kind = EdgeKind::Boundary;
      mesh.boundary_edges.push_back(e.id);
    }
    for (const Side& s : incident) mesh.cells[s.cell].edge_ids[s.pos] = e.id;
    mesh.edges.push_back(e);
  }
  mesh.internal_index.assign(mesh.edges.size(), -1);
  for (std::size_t k = 0; k < mesh.internal_edges.size(); ++k) mesh.internal_index[mesh.internal_edges[k]] = static_cast<int>(k);

  detail::check_hanging_nodes(mesh, scale);
  for (int eid : mesh.internal_edges) {
    const Edge& e = mesh.edges[eid];
    if (e.normal.dot(mesh.cells[e.cell_plus].center - mesh.cells[e.cell_minus].center) <= 0.0)
      throw MeshError("edge " + std::to_string(eid) + ": cell centers are not separated by the edge");
  }
  return mesh;
}

/// Builds a validated mesh from vertices and CCW cell rings with given centers.
/// Missing centers (std::nullopt) default to the polygon centroid.
inline PolygonalMesh make_mesh(std::vector<Vec2> vertices, const std::vector<std::vector<int>>& rings,
                               const std::vector<std::optional<Vec2>>& centers = {}) {
  PolygonalMesh mesh;
  mesh.vertices = std::move(vertices);
  mesh.cells.resize(rings.size());
  for (std::size_t c = 0; c < rings.size(); ++c) {
    Cell& cell = mesh.cells[c];
    cell.id = static_cast<int>(c);
    cell.vertex_ids = rings[c];
    if (c < centers.size() && centers[c]) {
      cell.center = *centers[c];
    } else {
      bool ok = rings[c].size() >= 3;
      for (int v : rings[c]) ok = ok && v >= 0 && v < static_cast<int>(mesh.vertices.size());
      if (!ok) throw MeshError("cell " + std::to_string(c) + ": open vertex ring");
      cell.center = polygon_centroid(mesh.ring(cell.id));
    }
  }
  return build_edges(std::move(mesh));
}

/// Throws MeshError unless the cell areas add up to the area enclosed by the
/// boundary (relative tolerance 1e-9) and every cell is valid.
inline void validate_tiling(const PolygonalMesh& mesh, double expected_area = -1.0) {
  double total = 0.0;
  for (const Cell& c : mesh.cells) total += c.area;
  const double domain = expected_area > 0.0 ? expected_area : mesh.domain_area();
  if (std::abs(total - domain) > 1e-9 * std::abs(domain))
    throw MeshError("cells do not tile the domain: cell area " + std::to_string(total) + " vs domain " +
                    std::to_string(domain));
}

} // namespace jamstress
