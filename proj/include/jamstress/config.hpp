#pragma once

// Run configuration (TOML).
//
//   name = "verif1"                    # optional label copied into report.json
//
//   [mesh]                             # exactly one of `file` or [mesh.generator]
//   file = "cells.jmsh"                # relative to the config file
//   [mesh.generator]
//   kind = "voronoi"                   # voronoi | grid | brick
//   nx = 4                             # grid: nx, ny
//   ny = 4
//   rows = 8                           # brick: rows, cols
//   cols = 4
//   n_seeds = 20                       # voronoi: n_seeds, seed
//   seed = 2
//   domain = [0.0, 0.0, 1.0, 1.0]      # x0, y0, x1, y1
//
//   [problem]
//   tresca = 10.0
//
//   [traction]                         # mode = matrix | per-side | per-edge
//   mode = "matrix"
//   S = [[-1.0, -1.0], [-1.0, -1.0]]   # g_e = S n_e
//   # per-side: left/right/bottom/top = [gx, gy]; sides not listed carry no load
//   # per-edge: edges = [[edge_id, gx, gy], ...] covering every boundary edge
//
//   [solver]
//   tol = 1e-10
//   max_iter = 200
//
//   [output]
//   dir = "out"
//
//   [run]
//   threads = 1                        # JAMSTRESS_THREADS overrides

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

#include <toml.hpp>

#include "jamstress/geometry/generators.hpp"
#include "jamstress/geometry/jmsh.hpp"
#include "jamstress/io/files.hpp"
#include "jamstress/lp/solver.hpp"
#include "jamstress/primal.hpp"

namespace jamstress {

enum class GeneratorKind { Voronoi, Grid, Brick };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::Grid;
  int nx = 4;
  int ny = 4;
  int rows = 8;
  int cols = 4;
  int n_seeds = 20;
  std::uint64_t seed = 1;
  Rect domain;
};

enum class TractionMode { Matrix, PerSide, PerEdge };

struct TractionSpec {
  TractionMode mode = TractionMode::Matrix;
  Mat2 stress = Mat2::Zero();
  /// keyed by "left", "right", "bottom", "top"
  std::map<std::string, Vec2> sides;
  std::map<int, Vec2> edges;
};

struct RunConfig {
  std::string name;
  std::optional<std::filesystem::path> mesh_file;
  std::optional<GeneratorSpec> generator;
  double tresca = 10.0;
  TractionSpec traction;
  LpOptions solver{1e-10, 200};
  std::filesystem::path output_dir = "jamstress-out";
  int threads = 1;
};

namespace detail {

inline const std::map<std::string, Vec2>& side_normals() {
  static const std::map<std::string, Vec2> m{
      {"left", {-1.0, 0.0}}, {"right", {1.0, 0.0}}, {"bottom", {0.0, -1.0}}, {"top", {0.0, 1.0}}};
  return m;
}

[[noreturn]] inline void config_fail(const std::string& what, const toml::node* where = nullptr) {
  const int line = where ? static_cast<int>(where->source().begin.line) : 0;
  throw ParseError("config: " + what, line);
}

inline double number(const toml::node& n, const std::string& key) {
  if (auto v = n.value<double>()) return *v;
  config_fail(key + " must be a number", &n);
}

inline long long integer(const toml::node& n, const std::string& key) {
  if (auto v = n.as_integer()) return v->get();
  config_fail(key + " must be an integer", &n);
}

inline Vec2 vec2(const toml::node& n, const std::string& key) {
  const toml::array* a = n.as_array();
  if (!a || a->size() != 2) config_fail(key + " must be a 2-element array", &n);
  return {number(*a->get(0), key), number(*a->get(1), key)};
}

inline void reject_unknown(const toml::table& t, std::initializer_list<std::string_view> known, const std::string& where) {
  for (const auto& [k, v] : t) {
    bool ok = false;
    for (std::string_view s : known) ok = ok || k.str() == s;
    if (!ok) config_fail("unknown key '" + std::string(k.str()) + "' in " + where, &v);
  }
}

inline const toml::table& table_at(const toml::table& t, std::string_view key) {
  const toml::node* n = t.get(key);
  if (!n) config_fail("missing [" + std::string(key) + "]");
  if (!n->is_table()) config_fail(std::string(key) + " must be a table", n);
  return *n->as_table();
}

inline GeneratorSpec parse_generator(const toml::table& g) {
  reject_unknown(g, {"kind", "nx", "ny", "rows", "cols", "n_seeds", "seed", "domain"}, "[mesh.generator]");
  GeneratorSpec s;
  const toml::node* kind = g.get("kind");
  if (!kind || !kind->is_string()) config_fail("[mesh.generator] needs kind = \"voronoi\" | \"grid\" | \"brick\"", kind);
  const std::string k = kind->as_string()->get();
  if (k == "voronoi") s.kind = GeneratorKind::Voronoi;
  else if (k == "grid") s.kind = GeneratorKind::Grid;
  else if (k == "brick") s.kind = GeneratorKind::Brick;
  else config_fail("unknown generator kind '" + k + "'", kind);
  const auto positive = [&](const char* key, int& out) {
    if (const toml::node* n = g.get(key)) {
      const long long v = integer(*n, key);
      if (v < 1 || v > 1000000) config_fail(std::string(key) + " must be a positive integer", n);
      out = static_cast<int>(v);
    }
  };
  positive("nx", s.nx);
  positive("ny", s.ny);
  positive("rows", s.rows);
  positive("cols", s.cols);
  positive("n_seeds", s.n_seeds);
  if (const toml::node* n = g.get("seed")) {
    const long long v = integer(*n, "seed");
    if (v < 0) config_fail("seed must be non-negative", n);
    s.seed = static_cast<std::uint64_t>(v);
  }
  if (const toml::node* n = g.get("domain")) {
    const toml::array* a = n->as_array();
    if (!a || a->size() != 4) config_fail("domain must be [x0, y0, x1, y1]", n);
    s.domain = {number(*a->get(0), "domain"), number(*a->get(1), "domain"), number(*a->get(2), "domain"),
                number(*a->get(3), "domain")};
    if (!(s.domain.x1 > s.domain.x0 && s.domain.y1 > s.domain.y0)) config_fail("domain must have positive extent", n);
  }
  return s;
}

inline TractionSpec parse_traction(const toml::table& t) {
  TractionSpec s;
  const toml::node* mode = t.get("mode");
  if (!mode || !mode->is_string()) config_fail("[traction] needs mode = \"matrix\" | \"per-side\" | \"per-edge\"", mode);
  const std::string m = mode->as_string()->get();
  if (m == "matrix") {
    reject_unknown(t, {"mode", "S"}, "[traction]");
    s.mode = TractionMode::Matrix;
    const toml::node* n = t.get("S");
    const toml::array* a = n ? n->as_array() : nullptr;
    if (!a || a->size() != 2) config_fail("matrix mode needs S = [[s11, s12], [s21, s22]]", n);
    for (int r = 0; r < 2; ++r) s.stress.row(r) = vec2(*a->get(r), "S").transpose();
  } else if (m == "per-side") {
    reject_unknown(t, {"mode", "left", "right", "bottom", "top"}, "[traction]");
    s.mode = TractionMode::PerSide;
    for (const auto& [name, normal] : side_normals())
      if (const toml::node* n = t.get(name)) s.sides[name] = vec2(*n, name);
  } else if (m == "per-edge") {
    reject_unknown(t, {"mode", "edges"}, "[traction]");
    s.mode = TractionMode::PerEdge;
    const toml::node* n = t.get("edges");
    const toml::array* a = n ? n->as_array() : nullptr;
    if (!a) config_fail("per-edge mode needs edges = [[edge_id, gx, gy], ...]", n);
    for (const toml::node& row : *a) {
      const toml::array* r = row.as_array();
      if (!r || r->size() != 3) config_fail("each edge entry must be [edge_id, gx, gy]", &row);
      const long long id = integer(*r->get(0), "edge_id");
      if (id < 0) config_fail("negative edge id", &row);
      if (!s.edges.emplace(static_cast<int>(id), Vec2(number(*r->get(1), "gx"), number(*r->get(2), "gy"))).second)
        config_fail("duplicate edge " + std::to_string(id), &row);
    }
  } else {
    config_fail("unknown traction mode '" + m + "'", mode);
  }
  return s;
}

} // namespace detail

/// Parses a TOML config. Relative mesh paths are resolved against `base_dir`.
inline RunConfig parse_config(std::string_view text, const std::filesystem::path& base_dir = {}) {
  toml::table root;
  try {
    root = toml::parse(text);
  } catch (const toml::parse_error& e) {
    throw ParseError("config: " + std::string(e.description()), static_cast<int>(e.source().begin.line));
  }
  detail::reject_unknown(root, {"name", "mesh", "problem", "traction", "solver", "output", "run"}, "config");
  RunConfig cfg;
  if (const toml::node* n = root.get("name")) {
    if (!n->is_string()) detail::config_fail("name must be a string", n);
    cfg.name = n->as_string()->get();
  }

  const toml::table& mesh = detail::table_at(root, "mesh");
  detail::reject_unknown(mesh, {"file", "generator"}, "[mesh]");
  const toml::node* file = mesh.get("file");
  const toml::node* gen = mesh.get("generator");
  if ((file != nullptr) == (gen != nullptr)) detail::config_fail("[mesh] needs exactly one of file or [mesh.generator]");
  if (file) {
    if (!file->is_string()) detail::config_fail("mesh.file must be a string", file);
    std::filesystem::path p = file->as_string()->get();
    cfg.mesh_file = p.is_relative() ? base_dir / p : p;
  } else {
    if (!gen->is_table()) detail::config_fail("mesh.generator must be a table", gen);
    cfg.generator = detail::parse_generator(*gen->as_table());
  }

  const toml::table& problem = detail::table_at(root, "problem");
  detail::reject_unknown(problem, {"tresca"}, "[problem]");
  if (const toml::node* n = problem.get("tresca")) cfg.tresca = detail::number(*n, "tresca");
  if (!(cfg.tresca > 0.0)) detail::config_fail("problem.tresca must be positive", problem.get("tresca"));

  cfg.traction = detail::parse_traction(detail::table_at(root, "traction"));

  if (const toml::node* n = root.get("solver")) {
    const toml::table* t = n->as_table();
    if (!t) detail::config_fail("solver must be a table", n);
    detail::reject_unknown(*t, {"tol", "max_iter"}, "[solver]");
    if (const toml::node* v = t->get("tol")) {
      cfg.solver.tol = detail::number(*v, "tol");
      if (!(cfg.solver.tol >= 1e-12 && cfg.solver.tol <= 1e-4)) detail::config_fail("solver.tol must lie in [1e-12, 1e-4]", v);
    }
    if (const toml::node* v = t->get("max_iter")) {
      const long long it = detail::integer(*v, "max_iter");
      if (it < 1 || it > 100000) detail::config_fail("solver.max_iter must be positive", v);
      cfg.solver.max_iter = static_cast<int>(it);
    }
  }
  if (const toml::node* n = root.get("output")) {
    const toml::table* t = n->as_table();
    if (!t) detail::config_fail("output must be a table", n);
    detail::reject_unknown(*t, {"dir"}, "[output]");
    if (const toml::node* v = t->get("dir")) {
      if (!v->is_string()) detail::config_fail("output.dir must be a string", v);
      cfg.output_dir = v->as_string()->get();
    }
  }
  if (const toml::node* n = root.get("run")) {
    const toml::table* t = n->as_table();
    if (!t) detail::config_fail("run must be a table", n);
    detail::reject_unknown(*t, {"threads"}, "[run]");
    if (const toml::node* v = t->get("threads")) {
      const long long th = detail::integer(*v, "threads");
      if (th < 1 || th > 1024) detail::config_fail("run.threads must lie in [1, 1024]", v);
      cfg.threads = static_cast<int>(th);
    }
  }
  return cfg;
}

inline RunConfig load_config(const std::filesystem::path& path) {
  return parse_config(read_text_file(path), path.parent_path());
}

/// Worker count: JAMSTRESS_THREADS when set to a positive integer, else the config value.
inline int effective_threads(const RunConfig& cfg) {
  if (const char* env = std::getenv("JAMSTRESS_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1 && v <= 1024) return static_cast<int>(v);
    throw Error("JAMSTRESS_THREADS must be an integer in [1, 1024]");
  }
  return cfg.threads;
}

inline PolygonalMesh build_mesh(const RunConfig& cfg) {
  if (cfg.mesh_file) return load_mesh(read_text_file(*cfg.mesh_file));
  if (!cfg.generator) throw Error("config has no mesh source");
  const GeneratorSpec& g = *cfg.generator;
  switch (g.kind) {
  case GeneratorKind::Grid: return generate_grid(g.nx, g.ny, g.domain);
  case GeneratorKind::Brick: return generate_brick_wall(g.rows, g.cols, g.domain);
  case GeneratorKind::Voronoi: return generate_voronoi(random_seeds(g.n_seeds, g.seed, g.domain), g.domain.polygon());
  }
  throw Error("unknown generator kind");
}

/// Boundary tractions per the traction mode. Per-side loads are keyed by the outward
/// normal; every loaded boundary edge must be axis-aligned.
inline FrictionProblem build_problem(const RunConfig& cfg, PolygonalMesh mesh) {
  const TractionSpec& t = cfg.traction;
  switch (t.mode) {
  case TractionMode::Matrix: return make_problem_from_stress(std::move(mesh), cfg.tresca, t.stress);
  case TractionMode::PerEdge: return make_problem(std::move(mesh), cfg.tresca, t.edges);
  case TractionMode::PerSide: {
    std::map<int, Vec2> g;
    for (int eid : mesh.boundary_edges) {
      const Vec2& n = mesh.edges[eid].normal;
      std::string side;
      for (const auto& [name, normal] : detail::side_normals())
        if ((n - normal).norm() <= 1e-9) side = name;
      if (side.empty()) throw Error("per-side tractions need axis-aligned boundary edges (edge " + std::to_string(eid) + ")");
      const auto it = t.sides.find(side);
      g[eid] = it == t.sides.end() ? Vec2::Zero() : it->second;
    }
    return make_problem(std::move(mesh), cfg.tresca, g);
  }
  }
  throw Error("unknown traction mode");
}

} // namespace jamstress
