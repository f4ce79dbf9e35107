#pragma once

// Reader and writer for the ASCII .jmsh mesh format:
//
//   JMSH 1
//   VERTICES n
//   id x y                      (n lines)
//   CELLS m
//   id cx cy k v0 v1 ... v(k-1) (m lines, CCW rings)
//   END
//
// '#' starts a comment, tokens are whitespace separated, ids are 0-based and dense.

#include <charconv>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "jamstress/geometry/mesh.hpp"

namespace jamstress {

namespace detail {

class JmshLines {
public:
  explicit JmshLines(std::string_view text) : text_(text) {}

  /// Next non-empty line split into tokens; empty when the input is exhausted.
  std::vector<std::string_view> next() {
    while (pos_ < text_.size()) {
      std::size_t end = text_.find('\n', pos_);
      if (end == std::string_view::npos) end = text_.size();
      std::string_view line = text_.substr(pos_, end - pos_);
      pos_ = end + 1;
      ++line_no_;
      if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
      std::vector<std::string_view> tokens;
      std::size_t i = 0;
      while (i < line.size()) {
        while (i < line.size() && is_space(line[i])) ++i;
        std::size_t j = i;
        while (j < line.size() && !is_space(line[j])) ++j;
        if (j > i) tokens.push_back(line.substr(i, j - i));
        i = j;
      }
      if (!tokens.empty()) return tokens;
    }
    return {};
  }

  int line() const noexcept { return line_no_; }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(what, line_no_); }

  long to_int(std::string_view tok) const {
    long v = 0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("expected integer, got '" + std::string(tok) + "'");
    return v;
  }

  double to_double(std::string_view tok) const {
    double v = 0.0;
    auto [p, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || p != tok.data() + tok.size()) fail("expected number, got '" + std::string(tok) + "'");
    return v;
  }

private:
  static bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\v' || c == '\f'; }

  std::string_view text_;
  std::size_t pos_ = 0;
  int line_no_ = 0;
};

/// %.17g with signed zero printed as 0.
inline std::string format_double(double v) {
  if (v == 0.0) v = 0.0;
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

} // namespace detail

/// Parses .jmsh text into a validated mesh with derived edges.
inline PolygonalMesh load_mesh(std::string_view text) {
  detail::JmshLines in(text);
  auto toks = in.next();
  if (toks.size() != 2 || toks[0] != "JMSH" || toks[1] != "1") in.fail("expected header 'JMSH 1'");

  toks = in.next();
  if (toks.size() != 2 || toks[0] != "VERTICES") in.fail("expected 'VERTICES n'");
  const long nv = in.to_int(toks[1]);
  if (nv < 0) in.fail("negative vertex count");
  std::vector<std::optional<Vec2>> verts(static_cast<std::size_t>(nv));
  for (long i = 0; i < nv; ++i) {
    toks = in.next();
    if (toks.size() != 3) in.fail("expected 'id x y'");
    const long id = in.to_int(toks[0]);
    if (id < 0 || id >= nv) in.fail("vertex id out of range");
    if (verts[id]) in.fail("duplicate vertex id " + std::to_string(id));
    verts[id] = Vec2(in.to_double(toks[1]), in.to_double(toks[2]));
  }

  toks = in.next();
  if (toks.size() != 2 || toks[0] != "CELLS") in.fail("expected 'CELLS m'");
  const long nc = in.to_int(toks[1]);
  if (nc < 0) in.fail("negative cell count");
  std::vector<std::vector<int>> rings(static_cast<std::size_t>(nc));
  std::vector<std::optional<Vec2>> centers(static_cast<std::size_t>(nc));
  std::vector<bool> seen(static_cast<std::size_t>(nc), false);
  for (long i = 0; i < nc; ++i) {
    toks = in.next();
    if (toks.size() < 4) in.fail("expected 'id cx cy k v0 ... v(k-1)'");
    const long id = in.to_int(toks[0]);
    if (id < 0 || id >= nc) in.fail("cell id out of range");
    if (seen[id]) in.fail("duplicate cell id " + std::to_string(id));
    seen[id] = true;
    centers[id] = Vec2(in.to_double(toks[1]), in.to_double(toks[2]));
    const long k = in.to_int(toks[3]);
    if (k < 3) in.fail("open vertex ring: a cell needs at least 3 vertices");
    if (static_cast<long>(toks.size()) != 4 + k) in.fail("vertex ring length does not match k");
    for (long j = 0; j < k; ++j) {
      const long v = in.to_int(toks[4 + j]);
      if (v < 0 || v >= nv) in.fail("vertex id " + std::to_string(v) + " out of range");
      rings[id].push_back(static_cast<int>(v));
    }
  }
  toks = in.next();
  if (toks.size() != 1 || toks[0] != "END") in.fail("expected 'END'");
  if (!in.next().empty()) in.fail("unexpected content after END");

  std::vector<Vec2> points;
  points.reserve(verts.size());
  for (const auto& v : verts) points.push_back(*v);
  PolygonalMesh mesh = make_mesh(std::move(points), rings, centers);
  validate_tiling(mesh);
  return mesh;
}

/// Serializes a mesh to .jmsh with 17 significant digits (exact round trip).
inline std::string write_mesh(const PolygonalMesh& mesh) {
  std::ostringstream out;
  out << "JMSH 1\n";
  out << "VERTICES " << mesh.vertices.size() << '\n';
  for (std::size_t v = 0; v < mesh.vertices.size(); ++v)
    out << v << ' ' << detail::format_double(mesh.vertices[v].x()) << ' ' << detail::format_double(mesh.vertices[v].y())
        << '\n';
  out << "CELLS " << mesh.cells.size() << '\n';
  for (const Cell& c : mesh.cells) {
    out << c.id << ' ' << detail::format_double(c.center.x()) << ' ' << detail::format_double(c.center.y()) << ' '
        << c.vertex_ids.size();
    for (int v : c.vertex_ids) out << ' ' << v;
    out << '\n';
  }
  out << "END\n";
  return out.str();
}

} // namespace jamstress
