#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "jamstress/geometry/mesh.hpp"

namespace jamstress {

/// Axis-aligned rectangle [x0, x1] x [y0, y1].
struct Rect {
  double x0 = 0.0, y0 = 0.0, x1 = 1.0, y1 = 1.0;

  double width() const { return x1 - x0; }
  double height() const { return y1 - y0; }
  std::vector<Vec2> polygon() const { return {{x0, y0}, {x1, y0}, {x1, y1}, {x0, y1}}; }
};

/// nx-by-ny grid of rectangles; cell (i, j) has id j * nx + i.
inline PolygonalMesh generate_grid(int nx, int ny, const Rect& domain = {}) {
  if (nx < 1 || ny < 1) throw MeshError("grid counts must be at least 1");
  std::vector<Vec2> verts;
  verts.reserve(static_cast<std::size_t>((nx + 1) * (ny + 1)));
  for (int j = 0; j <= ny; ++j)
    for (int i = 0; i <= nx; ++i)
      verts.emplace_back(domain.x0 + domain.width() * i / nx, domain.y0 + domain.height() * j / ny);
  const auto id = [nx](int i, int j) { return j * (nx + 1) + i; };
  std::vector<std::vector<int>> rings;
  for (int j = 0; j < ny; ++j)
    for (int i = 0; i < nx; ++i) rings.push_back({id(i, j), id(i + 1, j), id(i + 1, j + 1), id(i, j + 1)});
  PolygonalMesh mesh = make_mesh(std::move(verts), rings);
  validate_tiling(mesh, domain.width() * domain.height());
  return mesh;
}

/// Running-bond brick wall: even rows (from the bottom) hold `cols` full bricks,
/// odd rows are shifted by half a brick with half bricks at both ends. Long brick
/// sides are split at the joints of the neighboring row, so rings may contain
/// collinear vertices.
inline PolygonalMesh generate_brick_wall(int rows, int cols, const Rect& domain = {}) {
  if (rows < 1 || cols < 1) throw MeshError("brick wall counts must be at least 1");
  // Horizontal positions are integers in units of half a brick: 0 .. 2*cols.
  const int half_units = 2 * cols;
  const auto joints = [&](int row) {
    std::vector<int> ks;
    if (row % 2 == 0) {
      for (int k = 0; k <= half_units; k += 2) ks.push_back(k);
    } else {
      ks.push_back(0);
      for (int k = 1; k < half_units; k += 2) ks.push_back(k);
      ks.push_back(half_units);
    }
    return ks;
  };
  // Points on each horizontal line: union of the joints of the rows below and above.
  std::vector<std::vector<int>> line_points(rows + 1);
  std::vector<std::vector<int>> line_ids(rows + 1);
  std::vector<Vec2> verts;
  for (int j = 0; j <= rows; ++j) {
    std::vector<bool> used(half_units + 1, false);
    if (j > 0)
      for (int k : joints(j - 1)) used[k] = true;
    if (j < rows)
      for (int k : joints(j)) used[k] = true;
    line_ids[j].assign(half_units + 1, -1);
    for (int k = 0; k <= half_units; ++k) {
      if (!used[k]) continue;
      line_points[j].push_back(k);
      line_ids[j][k] = static_cast<int>(verts.size());
      verts.emplace_back(domain.x0 + domain.width() * k / half_units, domain.y0 + domain.height() * j / rows);
    }
  }
  std::vector<std::vector<int>> rings;
  for (int r = 0; r < rows; ++r) {
    const std::vector<int> ks = joints(r);
    for (std::size_t b = 0; b + 1 < ks.size(); ++b) {
      const int left = ks[b], right = ks[b + 1];
      std::vector<int> ring;
      for (int k : line_points[r])
        if (k >= left && k <= right) ring.push_back(line_ids[r][k]);
      for (auto it = line_points[r + 1].rbegin(); it != line_points[r + 1].rend(); ++it)
        if (*it >= left && *it <= right) ring.push_back(line_ids[r + 1][*it]);
      rings.push_back(std::move(ring));
    }
  }
  PolygonalMesh mesh = make_mesh(std::move(verts), rings);
  validate_tiling(mesh, domain.width() * domain.height());
  return mesh;
}

namespace detail {

/// Keeps the part of a convex polygon where (x - point) . dir <= 0.
inline std::vector<Vec2> clip_half_plane(const std::vector<Vec2>& poly, const Vec2& point, const Vec2& dir) {
  std::vector<Vec2> out;
  out.reserve(poly.size() + 1);
  const std::size_t k = poly.size();
  for (std::size_t i = 0; i < k; ++i) {
    const Vec2& p = poly[i];
    const Vec2& q = poly[(i + 1) % k];
    const double sp = (p - point).dot(dir);
    const double sq = (q - point).dot(dir);
    if (sp <= 0.0) out.push_back(p);
    if ((sp < 0.0 && sq > 0.0) || (sp > 0.0 && sq < 0.0)) out.push_back(p + (sp / (sp - sq)) * (q - p));
  }
  return out;
}

/// Point in convex CCW polygon with a margin.
inline bool strictly_inside(const std::vector<Vec2>& poly, const Vec2& x, double margin) {
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const Vec2 n = right_normal(poly[i], poly[(i + 1) % poly.size()]);
    if ((x - poly[i]).dot(n) > -margin) return false;
  }
  return true;
}

} // namespace detail

/// Voronoi diagram of `seeds` clipped to a convex CCW `domain`, built by clipping
/// the domain against perpendicular bisectors (O(n^2)). Cell i has seed i as center.
inline PolygonalMesh generate_voronoi(const std::vector<Vec2>& seeds, const std::vector<Vec2>& domain) {
  if (seeds.empty()) throw MeshError("voronoi: at least one seed is required");
  if (domain.size() < 3 || signed_area(domain) <= 0.0) throw MeshError("voronoi: domain must be a CCW polygon");
  double diam = 0.0;
  for (std::size_t i = 0; i < domain.size(); ++i)
    for (std::size_t j = i + 1; j < domain.size(); ++j) diam = std::max(diam, (domain[i] - domain[j]).norm());
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    if (!detail::strictly_inside(domain, seeds[i], 1e-12 * diam))
      throw MeshError("voronoi: seed " + std::to_string(i) + " outside domain");
    for (std::size_t j = 0; j < i; ++j)
      if ((seeds[i] - seeds[j]).norm() <= 1e-9 * diam)
        throw MeshError("voronoi: duplicate seeds " + std::to_string(j) + " and " + std::to_string(i));
  }

  // Vertices computed by different cells agree only to roundoff.
  const double merge_tol = 1e-10 * diam;
  std::vector<Vec2> verts;
  const auto vertex_id = [&](const Vec2& p) {
    for (std::size_t v = 0; v < verts.size(); ++v)
      if ((verts[v] - p).norm() <= merge_tol) return static_cast<int>(v);
    verts.push_back(p);
    return static_cast<int>(verts.size() - 1);
  };

  std::vector<std::vector<int>> rings;
  std::vector<std::optional<Vec2>> centers;
  for (std::size_t i = 0; i < seeds.size(); ++i) {
    std::vector<Vec2> poly = domain;
    for (std::size_t j = 0; j < seeds.size() && !poly.empty(); ++j) {
      if (j == i) continue;
      poly = detail::clip_half_plane(poly, 0.5 * (seeds[i] + seeds[j]), seeds[j] - seeds[i]);
    }
    std::vector<int> ring;
    for (const Vec2& p : poly) {
      const int v = vertex_id(p);
      if (ring.empty() || ring.back() != v) ring.push_back(v);
    }
    while (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
    rings.push_back(std::move(ring));
    centers.emplace_back(seeds[i]);
  }
  PolygonalMesh mesh = make_mesh(std::move(verts), rings, centers);
  validate_tiling(mesh, signed_area(domain));
  return mesh;
}

/// Deterministic uniform double in [0, 1) from a 64-bit generator.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// `count` pseudo-random seeds inside a rectangle, reproducible from `seed` on any
/// platform. Seeds keep a small clearance from the boundary and from each other.
inline std::vector<Vec2> random_seeds(int count, std::uint64_t seed, const Rect& domain = {}) {
  if (count < 1) throw MeshError("seed count must be at least 1");
  std::mt19937_64 rng(seed);
  const double diam = std::hypot(domain.width(), domain.height());
  const double clearance = 1e-3 * diam;
  std::vector<Vec2> pts;
  while (static_cast<int>(pts.size()) < count) {
    const Vec2 p(domain.x0 + domain.width() * unit_uniform(rng), domain.y0 + domain.height() * unit_uniform(rng));
    if (!detail::strictly_inside(domain.polygon(), p, clearance)) continue;
    bool ok = true;
    for (const Vec2& q : pts) ok = ok && (p - q).norm() > clearance;
    if (ok) pts.push_back(p);
  }
  return pts;
}

} // namespace jamstress
