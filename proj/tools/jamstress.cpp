// jamstress command-line tool: mesh generation, config runs and presets.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "jamstress/config.hpp"
#include "jamstress/geometry/generators.hpp"
#include "jamstress/geometry/jmsh.hpp"
#include "jamstress/io/files.hpp"
#include "jamstress/pipeline.hpp"
#include "jamstress_presets.hpp"

namespace {

using namespace jamstress;

void print_summary(const RunReport& r, const std::filesystem::path& dir) {
  std::cout << (r.name.empty() ? "run" : r.name) << ": " << r.cells << " cells, " << r.internal_edges
            << " internal edges\n";
  std::cout << "  LP " << r.lp_status << " after " << r.iterations << " iterations, objective " << r.primal_objective
            << ", dual objective " << r.dual_objective << "\n";
  if (r.stability) std::cout << "  stability: " << to_string(*r.stability) << "\n";
  if (r.ray)
    std::cout << "  collapse ray: max Gd " << r.ray->max_Gd << ", c.d " << r.ray->objective_slope << "\n";
  for (const Audit& a : r.audits)
    std::cout << "  " << (a.passed() ? "ok  " : "FAIL") << ' ' << a.name << " = " << a.value << " (limit " << a.limit
              << ")\n";
  if (!r.cell_reports.empty())
    std::cout << "  reconstruction: max div norm " << r.reconstruction.max_divergence_norm << ", "
              << r.reconstruction.fallback_cells.size() << " fallback cell(s)\n";
  for (const std::string& w : r.warnings) std::cout << "  warning: " << w << "\n";
  if (!dir.empty()) std::cout << "  output: " << dir.string() << "\n";
  std::cout << "  exit code " << r.exit_code << "\n";
}

int run_config(const RunConfig& cfg, const std::filesystem::path& dir) {
  const PipelineResult res = run_pipeline(cfg, dir);
  print_summary(res.report, dir);
  return res.report.exit_code;
}

const presets::Preset* find_preset(const std::string& name) {
  for (const presets::Preset& p : presets::kPresets)
    if (p.name == name) return &p;
  return nullptr;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interface forces and stress reconstruction in jammed packings of rigid polygonal cells"};
  app.require_subcommand(1);

  // mesh gen
  CLI::App* mesh_cmd = app.add_subcommand("mesh", "Mesh utilities");
  mesh_cmd->require_subcommand(1);
  CLI::App* gen = mesh_cmd->add_subcommand("gen", "Generate a mesh and write it as .jmsh");
  std::string kind;
  GeneratorSpec spec;
  std::vector<double> domain;
  std::string mesh_out;
  gen->add_option("--kind", kind, "voronoi | grid | brick")->required()->check(CLI::IsMember({"voronoi", "grid", "brick"}));
  gen->add_option("--nx", spec.nx, "grid columns")->check(CLI::PositiveNumber);
  gen->add_option("--ny", spec.ny, "grid rows")->check(CLI::PositiveNumber);
  gen->add_option("--rows", spec.rows, "brick rows")->check(CLI::PositiveNumber);
  gen->add_option("--cols", spec.cols, "bricks per full row")->check(CLI::PositiveNumber);
  gen->add_option("--n-seeds", spec.n_seeds, "Voronoi seed count")->check(CLI::PositiveNumber);
  gen->add_option("--seed", spec.seed, "PRNG seed for Voronoi seeds");
  gen->add_option("--domain", domain, "x0 y0 x1 y1")->expected(4);
  gen->add_option("-o,--output", mesh_out, "output .jmsh file")->required();

  // run
  CLI::App* run_cmd = app.add_subcommand("run", "Run the pipeline for a TOML config");
  std::string config_path;
  std::string run_out;
  run_cmd->add_option("-c,--config", config_path, "config file")->required()->check(CLI::ExistingFile);
  run_cmd->add_option("-o,--output", run_out, "output directory (overrides output.dir)");

  // preset
  CLI::App* preset_cmd = app.add_subcommand("preset", "Run a built-in experiment");
  std::string preset_name;
  std::string preset_out;
  bool list = false;
  preset_cmd->add_option("name", preset_name, "preset name");
  preset_cmd->add_option("-o,--output", preset_out, "output directory");
  preset_cmd->add_flag("--list", list, "list presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (gen->parsed()) {
      spec.kind = kind == "voronoi" ? GeneratorKind::Voronoi : kind == "grid" ? GeneratorKind::Grid : GeneratorKind::Brick;
      if (!domain.empty()) spec.domain = {domain[0], domain[1], domain[2], domain[3]};
      if (!(spec.domain.x1 > spec.domain.x0 && spec.domain.y1 > spec.domain.y0))
        throw Error("domain must have positive extent");
      RunConfig cfg;
      cfg.generator = spec;
      const PolygonalMesh mesh = build_mesh(cfg);
      write_text_file(mesh_out, write_mesh(mesh));
      std::cout << "wrote " << mesh_out << ": " << mesh.num_cells() << " cells, " << mesh.edges.size() << " edges\n";
      return 0;
    }
    if (run_cmd->parsed()) {
      const RunConfig cfg = load_config(config_path);
      return run_config(cfg, run_out.empty() ? cfg.output_dir : std::filesystem::path(run_out));
    }
    if (preset_cmd->parsed()) {
      if (list || preset_name.empty()) {
        for (const presets::Preset& p : presets::kPresets) std::cout << p.name << "\n";
        return list ? 0 : 1;
      }
      const presets::Preset* p = find_preset(preset_name);
      if (!p) {
        std::cerr << "error: unknown preset '" << preset_name << "' (see `jamstress preset --list`)\n";
        return 1;
      }
      if (preset_out.empty()) {
        std::cerr << "error: preset needs -o DIR\n";
        return 1;
      }
      const RunConfig cfg = parse_config(p->config);
      std::filesystem::create_directories(preset_out);
      write_text_file(std::filesystem::path(preset_out) / "config.toml", std::string(p->config));
      return run_config(cfg, preset_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
