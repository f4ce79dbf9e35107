#pragma once

#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "jamstress/geometry/jmsh.hpp"
#include "jamstress/reconstruct/reconstruct.hpp"

namespace jamstress {

/// Legacy ASCII unstructured grid of every fan triangle, ordered by cell id then
/// triangle index, with the barycenter stress components and the owning cell id as
/// cell data. Cells without a field are skipped.
inline std::string write_stress_vtk(const std::vector<std::optional<CellStressField>>& fields) {
  std::size_t npoints = 0, ntri = 0;
  for (const auto& f : fields)
    if (f) {
      npoints += f->fan.points.size();
      ntri += f->fan.num_triangles();
    }
  const auto fmt = detail::format_double;
  std::ostringstream out;
  out << "# vtk DataFile Version 3.0\n";
  out << "jamstress reconstructed stress\n";
  out << "ASCII\n";
  out << "DATASET UNSTRUCTURED_GRID\n";
  out << "POINTS " << npoints << " double\n";
  for (const auto& f : fields)
    if (f)
      for (const Vec2& p : f->fan.points) out << fmt(p.x()) << ' ' << fmt(p.y()) << " 0\n";
  out << "CELLS " << ntri << ' ' << 4 * ntri << '\n';
  std::size_t base = 0;
  for (const auto& f : fields) {
    if (!f) continue;
    for (const auto& tri : f->fan.triangles)
      out << "3 " << base + tri[0] << ' ' << base + tri[1] << ' ' << base + tri[2] << '\n';
    base += f->fan.points.size();
  }
  out << "CELL_TYPES " << ntri << '\n';
  for (std::size_t i = 0; i < ntri; ++i) out << "5\n";
  out << "CELL_DATA " << ntri << '\n';
  const char* names[2][2] = {{"sigma_11", "sigma_12"}, {"sigma_21", "sigma_22"}};
  for (int r = 0; r < 2; ++r)
    for (int c = 0; c < 2; ++c) {
      out << "SCALARS " << names[r][c] << " double 1\nLOOKUP_TABLE default\n";
      for (const auto& f : fields)
        if (f)
          for (int t = 0; t < f->fan.num_triangles(); ++t) out << fmt(f->barycenter_value(t)(r, c)) << '\n';
    }
  out << "SCALARS cell_id int 1\nLOOKUP_TABLE default\n";
  for (const auto& f : fields)
    if (f)
      for (int t = 0; t < f->fan.num_triangles(); ++t) out << f->cell_id << '\n';
  return out.str();
}

} // namespace jamstress
