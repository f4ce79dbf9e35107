#pragma once

#include <filesystem>
#include <string>

#include "jamstress/config.hpp"
#include "jamstress/geometry/generators.hpp"
#include "jamstress/primal.hpp"

namespace testing_support {

inline jamstress::PolygonalMesh two_cell_mesh() { return jamstress::generate_grid(2, 1, {0.0, 0.0, 2.0, 1.0}); }

/// (0,2)x(0,1) split at x = 1, g = sign * n, s_T = 10.
inline jamstress::FrictionProblem two_cell_problem(double sign = -1.0) {
  return jamstress::make_problem_from_stress(two_cell_mesh(), 10.0, sign * jamstress::Mat2::Identity());
}

inline std::filesystem::path preset_path(const std::string& name) {
  return std::filesystem::path(JAMSTRESS_PRESET_DIR) / (name + ".toml");
}

inline jamstress::RunConfig preset(const std::string& name) { return jamstress::load_config(preset_path(name)); }

} // namespace testing_support
