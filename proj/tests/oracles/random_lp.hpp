#pragma once

// Random dense LPs with at most 6 variables: a box |x_i| <= B keeps them bounded,
// extra random rows and 0-2 random equality rows may make them infeasible.

#include <Eigen/Dense>

#include <algorithm>
#include <random>

#include "jamstress/lp/standard_form.hpp"

namespace oracle {

inline jamstress::LpStandardForm random_lp(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const int n = 1 + static_cast<int>(rng() % 6);
  const int extra = static_cast<int>(rng() % 5);
  const int p = static_cast<int>(rng() % std::min(3, n));
  const double box = 1.0 + 2.0 * (u(rng) + 1.0);
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * n + extra, n);
  Eigen::VectorXd h(2 * n + extra);
  for (int i = 0; i < n; ++i) {
    G(2 * i, i) = 1.0;
    G(2 * i + 1, i) = -1.0;
    h[2 * i] = h[2 * i + 1] = box;
  }
  for (int r = 0; r < extra; ++r) {
    for (int j = 0; j < n; ++j) G(2 * n + r, j) = u(rng);
    h[2 * n + r] = 1.5 * u(rng);
  }
  Eigen::MatrixXd A(p, n);
  Eigen::VectorXd b(p);
  for (int r = 0; r < p; ++r) {
    for (int j = 0; j < n; ++j) A(r, j) = u(rng);
    b[r] = 0.5 * u(rng);
  }
  Eigen::VectorXd c(n);
  for (int j = 0; j < n; ++j) c[j] = u(rng);
  return jamstress::make_lp(c, G, h, A, b);
}

} // namespace oracle
