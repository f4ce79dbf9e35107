#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <string>

#include "jamstress/error.hpp"

namespace jamstress {

using SparseRows = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// min c.x  subject to  G x <= h,  A x = b,  x free.
struct LpStandardForm {
  Eigen::VectorXd c;
  SparseRows G;
  Eigen::VectorXd h;
  SparseRows A;
  Eigen::VectorXd b;

  Eigen::Index num_vars() const { return c.size(); }
  Eigen::Index num_ineq() const { return G.rows(); }
  Eigen::Index num_eq() const { return A.rows(); }

  void check_dimensions() const {
    const Eigen::Index n = c.size();
    if (G.cols() != n || A.cols() != n || h.size() != G.rows() || b.size() != A.rows())
      throw Error("LP dimensions are inconsistent");
  }
};

/// Dense convenience constructor, mostly for tests and small problems.
inline LpStandardForm make_lp(const Eigen::VectorXd& c, const Eigen::MatrixXd& G, const Eigen::VectorXd& h,
                              const Eigen::MatrixXd& A = {}, const Eigen::VectorXd& b = {}) {
  LpStandardForm lp;
  lp.c = c;
  lp.G = G.rows() > 0 ? SparseRows(G.sparseView()) : SparseRows(0, c.size());
  lp.h = h;
  lp.A = A.rows() > 0 ? SparseRows(A.sparseView()) : SparseRows(0, c.size());
  lp.b = b.size() > 0 ? b : Eigen::VectorXd(Eigen::VectorXd::Zero(lp.A.rows()));
  lp.check_dimensions();
  return lp;
}

} // namespace jamstress
