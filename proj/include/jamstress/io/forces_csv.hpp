#pragma once

#include <algorithm>
#include <charconv>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jamstress/friction_duals.hpp"
#include "jamstress/geometry/jmsh.hpp"

namespace jamstress {

inline constexpr std::string_view kForcesHeader = "edge_id,c_minus,c_plus,length,nx,ny,fn,ft,lam_minus_x,lam_minus_y";

/// One row per internal edge, sorted by edge id, 17 significant digits.
inline std::string write_forces_csv(const InterfaceForces& forces, const PolygonalMesh& mesh) {
  std::vector<int> order(mesh.internal_edges.begin(), mesh.internal_edges.end());
  std::sort(order.begin(), order.end());
  const auto fmt = detail::format_double;
  std::ostringstream out;
  out << kForcesHeader << '\n';
  for (int eid : order) {
    const Edge& e = mesh.edges[eid];
    const EdgeForce& f = forces.at(mesh, eid);
    const Vec2 lam = edge_traction(f, e, e.cell_minus);
    out << eid << ',' << e.cell_minus << ',' << e.cell_plus << ',' << fmt(e.length) << ',' << fmt(e.normal.x()) << ','
        << fmt(e.normal.y()) << ',' << fmt(f.normal) << ',' << fmt(f.tangential) << ',' << fmt(lam.x()) << ','
        << fmt(lam.y()) << '\n';
  }
  return out.str();
}

/// Reads fn/ft back onto the mesh's internal edges. The CSV carries no body force.
inline InterfaceForces parse_forces_csv(std::string_view text, const PolygonalMesh& mesh, Vec2 body_force = Vec2::Zero()) {
  InterfaceForces f;
  f.edges.resize(mesh.num_internal());
  f.body_force = body_force;
  std::vector<bool> seen(mesh.num_internal(), false);
  int line = 0;
  std::size_t pos = 0;
  const auto fail = [&](const std::string& what) -> void { throw ParseError(what, line); };
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view row = text.substr(pos, end - pos);
    pos = end + 1;
    ++line;
    if (!row.empty() && row.back() == '\r') row.remove_suffix(1);
    if (line == 1) {
      if (row != kForcesHeader) fail("unexpected forces.csv header");
      continue;
    }
    if (row.empty()) continue;
    std::vector<std::string_view> cols;
    for (std::size_t a = 0;;) {
      const std::size_t b = row.find(',', a);
      cols.push_back(row.substr(a, b == std::string_view::npos ? std::string_view::npos : b - a));
      if (b == std::string_view::npos) break;
      a = b + 1;
    }
    if (cols.size() != 10) fail("expected 10 columns");
    int eid = 0;
    double fn = 0.0, ft = 0.0;
    const auto num = [&](std::string_view s, auto& v) {
      const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
      if (r.ec != std::errc() || r.ptr != s.data() + s.size()) fail("malformed number '" + std::string(s) + "'");
    };
    num(cols[0], eid);
    num(cols[6], fn);
    num(cols[7], ft);
    if (eid < 0 || eid >= static_cast<int>(mesh.edges.size()) || !mesh.edges[eid].is_internal())
      fail("edge " + std::to_string(eid) + " is not an internal edge of the mesh");
    const int k = mesh.internal_index[eid];
    if (seen[k]) fail("duplicate edge " + std::to_string(eid));
    seen[k] = true;
    f.edges[k] = {fn, ft};
  }
  if (line == 0) fail("empty forces.csv");
  if (std::find(seen.begin(), seen.end(), false) != seen.end()) throw Error("forces.csv does not cover every internal edge");
  return f;
}

/// Collapse mode as `cell_id,ux,uy`.
inline std::string write_mechanism_csv(const Displacements& mode) {
  std::ostringstream out;
  out << "cell_id,ux,uy\n";
  for (std::size_t c = 0; c < mode.size(); ++c)
    out << c << ',' << detail::format_double(mode[c].x()) << ',' << detail::format_double(mode[c].y()) << '\n';
  return out.str();
}

} // namespace jamstress
