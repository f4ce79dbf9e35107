#pragma once

// mesh -> LP -> duals -> audits -> reconstruction -> exports.
//
// Exit codes: 0 jammed and every audit passed, 1 audit failure (or any error raised
// before the solve), 2 collapse mechanism, 3 solver failure.

#include <chrono>
#include <filesystem>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "jamstress/config.hpp"
#include "jamstress/friction_duals.hpp"
#include "jamstress/io/files.hpp"
#include "jamstress/io/forces_csv.hpp"
#include "jamstress/io/vtk.hpp"
#include "jamstress/reconstruct/reconstruct.hpp"
#include "jamstress/stability.hpp"

namespace jamstress {

inline constexpr int kExitOk = 0;
inline constexpr int kExitAuditFailure = 1;
inline constexpr int kExitMechanism = 2;
inline constexpr int kExitSolverFailure = 3;

/// One audit: passes iff value <= limit.
struct Audit {
  std::string name;
  double value = 0.0;
  double limit = 0.0;
  bool passed() const { return value <= limit; }
};

struct CellReport {
  int cell_id = -1;
  double divergence_norm = 0.0;
  double weak_asymmetry = 0.0;
  bool least_squares_fallback = false;
  std::string failure;
};

struct RayCertificate {
  double max_Gd = 0.0;
  double max_abs_Ad = 0.0;
  double objective_slope = 0.0; // c.d
};

struct RunReport {
  std::string name;
  int exit_code = kExitAuditFailure;
  std::string lp_status;
  std::optional<StabilityKind> stability;

  int cells = 0;
  int internal_edges = 0;
  int boundary_edges = 0;
  double diameter = 0.0;
  double tresca = 0.0;
  Vec2 load_resultant = Vec2::Zero();

  int iterations = 0;
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double gap = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double complementarity = 0.0;

  double force_scale = 1.0;
  Vec2 body_force = Vec2::Zero();
  /// max_c |u_c| of the LP primal point (jammed runs)
  double max_displacement = 0.0;
  int weak_duality_samples = 0;
  double min_weak_duality_gap = 0.0;

  std::vector<Audit> audits;
  std::optional<RayCertificate> ray;
  Displacements mechanism;

  ReconstructionReport reconstruction;
  std::vector<CellReport> cell_reports;

  std::vector<std::string> warnings;
  std::vector<std::pair<std::string, double>> timings; // seconds per stage

  bool audits_passed() const {
    for (const Audit& a : audits)
      if (!a.passed()) return false;
    return true;
  }
  const Audit* audit(const std::string& name) const {
    for (const Audit& a : audits)
      if (a.name == name) return &a;
    return nullptr;
  }
};

struct PipelineResult {
  RunReport report;
  std::optional<FrictionProblem> problem;
  std::optional<FrictionLp> lp;
  LpSolution solution;
  std::optional<InterfaceForces> forces;
  std::optional<Reconstruction> reconstruction;
};

namespace detail {

class StageClock {
public:
  explicit StageClock(RunReport& r) : report_(r), start_(std::chrono::steady_clock::now()) {}
  void lap(const char* stage) {
    const auto now = std::chrono::steady_clock::now();
    report_.timings.emplace_back(stage, std::chrono::duration<double>(now - start_).count());
    start_ = now;
  }

private:
  RunReport& report_;
  std::chrono::steady_clock::time_point start_;
};

inline RayCertificate certify_ray(const LpStandardForm& lp, const Eigen::VectorXd& d) {
  RayCertificate c;
  if (lp.num_ineq() > 0) c.max_Gd = (lp.G * d).maxCoeff();
  if (lp.num_eq() > 0) c.max_abs_Ad = (lp.A * d).cwiseAbs().maxCoeff();
  c.objective_slope = lp.c.dot(d);
  return c;
}

/// Audits of a jammed solution. Force quantities are normalized by force_scale.
inline void audit_jammed(RunReport& r, const LpSolution& sol, const FrictionLp& flp, const FrictionProblem& problem,
                         const InterfaceForces& forces) {
  const PolygonalMesh& mesh = problem.mesh;
  const double scale = r.force_scale;
  const Displacements u = flp.displacements(sol.x);
  for (const Vec2& v : u) r.max_displacement = std::max(r.max_displacement, v.norm());

  r.audits.push_back({"strong_duality_gap", sol.gap / (1.0 + std::abs(sol.primal_objective)), 1e-7});
  r.audits.push_back({"lp_complementarity", sol.complementarity / scale, 1e-7});
  r.audits.push_back({"cell_balance", check_cell_balance(forces, problem).max_residual / scale, 1e-7});
  r.audits.push_back(
      {"admissibility_agreement", std::abs(sol.dual_residual - admissibility_residual(sol, flp, problem).combined()), 1e-8});
  const TrescaAudit tr = check_tresca(u, forces, problem.tresca, mesh, 1e-7);
  r.audits.push_back({"tresca_bound", tr.max_bound_excess / scale, 1e-7});
  r.audits.push_back({"tresca_alignment", tr.max_misalignment / scale, 1e-7});
  const ContactAudit ca = check_contact_kkt(u, forces, mesh, 1e-7, scale);
  r.audits.push_back({"contact_penetration", ca.max_penetration, 1e-7});
  r.audits.push_back({"contact_tension", ca.max_tension / scale, 1e-7});
  r.audits.push_back({"contact_complementarity", ca.max_complementarity / scale, 1e-7});

  std::mt19937_64 rng(0x6a616d73ULL);
  r.weak_duality_samples = 100;
  r.min_weak_duality_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < r.weak_duality_samples; ++i)
    r.min_weak_duality_gap =
        std::min(r.min_weak_duality_gap, weak_duality_check(random_feasible_displacement(mesh, rng), forces, flp, problem));
  if (r.weak_duality_samples == 0 || mesh.num_internal() == 0) r.min_weak_duality_gap = 0.0;
  r.audits.push_back({"weak_duality_violation", std::max(0.0, -r.min_weak_duality_gap) / scale, 1e-9});

  if (r.max_displacement > 1e-7 * r.diameter)
    r.warnings.push_back("optimal displacement is a nonzero zero-energy motion (max |u| = " +
                         std::to_string(r.max_displacement) + "); the load leaves free modes");
  if (body_force_significant(forces, problem))
    r.warnings.push_back("load is not globally balanced; forces are in equilibrium with a uniform body force");
}

inline void audit_reconstruction(RunReport& r, const Reconstruction& rec, const InterfaceForces& forces,
                                 const FrictionProblem& problem) {
  const ReconstructionReport& rep = rec.report;
  double flux_scale = 1.0;
  for (std::size_t c = 0; c < problem.mesh.num_cells(); ++c)
    for (const Vec2& t : cell_side_tractions(static_cast<int>(c), forces, problem)) flux_scale = std::max(flux_scale, t.norm());
  flux_scale *= problem.mesh.diameter();
  r.audits.push_back({"weak_symmetry", rep.max_weak_asymmetry, 1e-9});
  r.audits.push_back({"boundary_flux", rep.max_boundary_flux_error / flux_scale, 1e-12});
  r.audits.push_back({"reconstruction_failures", static_cast<double>(rep.failures.size()), 0.0});
  if (!rep.fallback_cells.empty())
    r.warnings.push_back(std::to_string(rep.fallback_cells.size()) + " cell(s) used the least-squares fallback");
  for (std::size_t c = 0; c < rec.fields.size(); ++c) {
    CellReport cr;
    cr.cell_id = static_cast<int>(c);
    if (const auto& f = rec.fields[c]) {
      cr.divergence_norm = f->divergence_norm();
      const double smax = max_abs_entry(*f);
      for (int t = 0; t < f->fan.num_triangles(); ++t)
        cr.weak_asymmetry =
            std::max(cr.weak_asymmetry, std::abs(f->asymmetry_integral(t)) / ((1.0 + smax) * f->elements[t].area));
      cr.least_squares_fallback = f->least_squares_fallback;
    }
    r.cell_reports.push_back(cr);
  }
  for (const auto& [c, msg] : rep.failures) r.cell_reports[c].failure = msg;
}

inline nlohmann::ordered_json vec_json(const Vec2& v) { return nlohmann::ordered_json::array({v.x(), v.y()}); }

} // namespace detail

inline nlohmann::ordered_json report_json(const RunReport& r) {
  using nlohmann::ordered_json;
  ordered_json j;
  j["name"] = r.name;
  j["exit_code"] = r.exit_code;
  j["lp_status"] = r.lp_status;
  j["stability"] = r.stability ? ordered_json(to_string(*r.stability)) : ordered_json(nullptr);
  j["mesh"] = {{"cells", r.cells},
               {"internal_edges", r.internal_edges},
               {"boundary_edges", r.boundary_edges},
               {"diameter", r.diameter}};
  j["load"] = {{"tresca", r.tresca}, {"resultant", detail::vec_json(r.load_resultant)}};
  j["lp"] = {{"iterations", r.iterations},
             {"primal_objective", r.primal_objective},
             {"dual_objective", r.dual_objective},
             {"gap", r.gap},
             {"primal_residual", r.primal_residual},
             {"dual_residual", r.dual_residual},
             {"complementarity", r.complementarity}};
  j["forces"] = {{"force_scale", r.force_scale},
                 {"body_force", detail::vec_json(r.body_force)},
                 {"max_displacement", r.max_displacement},
                 {"weak_duality_samples", r.weak_duality_samples},
                 {"min_weak_duality_gap", r.min_weak_duality_gap}};
  ordered_json audits = ordered_json::object();
  for (const Audit& a : r.audits) audits[a.name] = {{"value", a.value}, {"limit", a.limit}, {"passed", a.passed()}};
  j["audits"] = audits;
  j["audits_passed"] = r.audits_passed();
  if (r.ray) {
    j["mechanism"] = {{"max_Gd", r.ray->max_Gd},
                      {"max_abs_Ad", r.ray->max_abs_Ad},
                      {"objective_slope", r.ray->objective_slope},
                      {"cells", r.mechanism.size()}};
  }
  if (!r.cell_reports.empty()) {
    const ReconstructionReport& rec = r.reconstruction;
    j["reconstruction"] = {{"max_divergence_norm", rec.max_divergence_norm},
                           {"max_weak_asymmetry", rec.max_weak_asymmetry},
                           {"max_boundary_flux_error", rec.max_boundary_flux_error},
                           {"max_compatibility", rec.max_compatibility},
                           {"fallback_cells", rec.fallback_cells}};
    ordered_json cells = ordered_json::array();
    for (const CellReport& c : r.cell_reports) {
      ordered_json e = {{"cell_id", c.cell_id},
                        {"divergence_norm", c.divergence_norm},
                        {"weak_asymmetry", c.weak_asymmetry},
                        {"least_squares_fallback", c.least_squares_fallback}};
      if (!c.failure.empty()) e["failure"] = c.failure;
      cells.push_back(std::move(e));
    }
    j["cells"] = std::move(cells);
  }
  j["warnings"] = r.warnings;
  ordered_json t = ordered_json::object();
  for (const auto& [stage, sec] : r.timings) t[stage] = sec;
  j["timings_s"] = t;
  return j;
}

/// Runs every stage; writes forces.csv, stress.vtk (jammed), mechanism.csv
/// (collapse) and report.json into `output_dir` when it is non-empty. Errors in
/// config, mesh or load definition propagate as exceptions.
inline PipelineResult run_pipeline(const RunConfig& cfg, const std::filesystem::path& output_dir) {
  PipelineResult res;
  RunReport& r = res.report;
  r.name = cfg.name;
  detail::StageClock clock(r);

  PolygonalMesh mesh = build_mesh(cfg);
  res.problem = build_problem(cfg, std::move(mesh));
  const FrictionProblem& problem = *res.problem;
  r.cells = static_cast<int>(problem.mesh.num_cells());
  r.internal_edges = static_cast<int>(problem.mesh.num_internal());
  r.boundary_edges = static_cast<int>(problem.mesh.boundary_edges.size());
  r.diameter = problem.mesh.diameter();
  r.tresca = problem.tresca;
  r.load_resultant = problem.resultant;
  r.force_scale = force_scale(problem);
  clock.lap("mesh");

  res.lp = assemble_lp(problem);
  clock.lap("assemble");
  res.solution = solve_lp(res.lp->lp, cfg.solver);
  const LpSolution& sol = res.solution;
  r.lp_status = to_string(sol.status);
  r.iterations = sol.iterations;
  r.primal_objective = sol.primal_objective;
  r.dual_objective = sol.dual_objective;
  r.gap = sol.gap;
  r.primal_residual = sol.primal_residual;
  r.dual_residual = sol.dual_residual;
  r.complementarity = sol.complementarity;
  clock.lap("solve");

  const bool write = !output_dir.empty();
  if (write) std::filesystem::create_directories(output_dir);
  const auto finish = [&] {
    if (write) write_text_file(output_dir / "report.json", report_json(r).dump(2) + "\n");
    return res;
  };

  Stability st;
  try {
    st = classify_stability(sol, *res.lp);
  } catch (const NumericalError& e) {
    r.exit_code = kExitSolverFailure;
    r.warnings.push_back(e.what());
    return finish();
  }
  r.stability = st.kind;

  if (st.kind == StabilityKind::Mechanism) {
    r.ray = detail::certify_ray(res.lp->lp, sol.ray);
    r.mechanism = st.mode;
    r.exit_code = kExitMechanism;
    if (write) write_text_file(output_dir / "mechanism.csv", write_mechanism_csv(st.mode));
    clock.lap("export");
    return finish();
  }

  res.forces = extract_forces(sol, *res.lp, problem.mesh);
  r.body_force = res.forces->body_force;
  detail::audit_jammed(r, sol, *res.lp, problem, *res.forces);
  clock.lap("audit");

  res.reconstruction = reconstruct_all(*res.forces, problem, effective_threads(cfg));
  r.reconstruction = res.reconstruction->report;
  detail::audit_reconstruction(r, *res.reconstruction, *res.forces, problem);
  clock.lap("reconstruct");

  r.exit_code = r.audits_passed() ? kExitOk : kExitAuditFailure;
  if (write) {
    write_text_file(output_dir / "forces.csv", write_forces_csv(*res.forces, problem.mesh));
    write_text_file(output_dir / "stress.vtk", write_stress_vtk(res.reconstruction->fields));
  }
  clock.lap("export");
  return finish();
}

inline PipelineResult run_pipeline(const RunConfig& cfg) { return run_pipeline(cfg, cfg.output_dir); }

} // namespace jamstress
