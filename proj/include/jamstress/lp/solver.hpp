#pragma once

// Primal-dual interior-point solver for
//
//   min c.x   s.t.  G x + s = h,  s >= 0,  A x = b,  x free
//
// with dual  max -h.z - b.y  s.t.  G^T z + A^T y + c = 0,  z >= 0.
//
// Mehrotra predictor-corrector on the reduced system [G^T D G, A^T; A, 0] with
// D = diag(z / s). When the iteration cannot converge, certificates are sought by
// solving box-normalized auxiliary LPs: an improving ray (G d <= 0, A d = 0,
// c.d < 0) or a Farkas vector (z >= 0, G^T z + A^T y = 0, h.z + b.y < 0).

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "jamstress/lp/standard_form.hpp"

namespace jamstress {

enum class LpStatus { Optimal, Unbounded, Infeasible, NumericalFailure };

inline const char* to_string(LpStatus s) {
  switch (s) {
  case LpStatus::Optimal: return "Optimal";
  case LpStatus::Unbounded: return "Unbounded";
  case LpStatus::Infeasible: return "Infeasible";
  case LpStatus::NumericalFailure: return "NumericalFailure";
  }
  return "?";
}

struct LpOptions {
  double tol = 1e-8;   // feasibility; the gap tolerance is 10 * tol
  int max_iter = 200;
};

struct LpSolution {
  LpStatus status = LpStatus::NumericalFailure;
  Eigen::VectorXd x;
  Eigen::VectorXd s; // inequality slacks
  Eigen::VectorXd z; // inequality duals
  Eigen::VectorXd y; // equality duals
  double primal_objective = 0.0;
  double dual_objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  double gap = 0.0;
  double complementarity = 0.0;
  int iterations = 0;
  /// Improving ray when Unbounded, normalized to unit max-norm.
  Eigen::VectorXd ray;
  /// Farkas certificate when Infeasible.
  Eigen::VectorXd farkas_z;
  Eigen::VectorXd farkas_y;
  std::string message;
};

/// max(||max(Gx - h, 0)||_inf, ||Ax - b||_inf)
inline double primal_infeasibility(const LpStandardForm& lp, const Eigen::VectorXd& x) {
  double r = 0.0;
  if (lp.num_ineq() > 0) r = std::max(r, (lp.G * x - lp.h).cwiseMax(0.0).maxCoeff());
  if (lp.num_eq() > 0) r = std::max(r, (lp.A * x - lp.b).cwiseAbs().maxCoeff());
  return r;
}

/// ||G^T z + A^T y + c||_inf
inline double dual_infeasibility(const LpStandardForm& lp, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  Eigen::VectorXd r = lp.c;
  if (lp.num_ineq() > 0) r += lp.G.transpose() * z;
  if (lp.num_eq() > 0) r += lp.A.transpose() * y;
  return r.size() > 0 ? r.cwiseAbs().maxCoeff() : 0.0;
}

/// -h.z - b.y. Rejects duals with a component below -1e-10.
inline double dual_objective(const LpStandardForm& lp, const Eigen::VectorXd& z, const Eigen::VectorXd& y) {
  if (z.size() != lp.num_ineq() || y.size() != lp.num_eq()) throw Error("dual vector sizes do not match the LP");
  if (z.size() > 0 && z.minCoeff() < -1e-10) throw Error("inequality duals must be non-negative");
  return 0.0 - lp.h.dot(z) - lp.b.dot(y);
}

/// max_i |z_i (h_i - (Gx)_i)|
inline double complementarity(const LpStandardForm& lp, const Eigen::VectorXd& x, const Eigen::VectorXd& z) {
  if (lp.num_ineq() == 0) return 0.0;
  return (z.array() * (lp.h - lp.G * x).array()).abs().maxCoeff();
}

namespace detail {

struct IpmIterate {
  Eigen::VectorXd x, s, z, y;
};

struct IpmOutcome {
  bool converged = false;
  IpmIterate it;
  int iterations = 0;
  std::string reason;
};

/// Largest step in (0, 1] keeping v + alpha dv >= 0.
inline double max_step(const Eigen::VectorXd& v, const Eigen::VectorXd& dv) {
  double a = 1.0;
  for (Eigen::Index i = 0; i < v.size(); ++i)
    if (dv[i] < 0.0) a = std::min(a, -v[i] / dv[i]);
  return a;
}

/// Indices of a maximal independent subset of the rows of A, and whether the
/// dropped rows are consistent with b.
inline std::vector<int> independent_rows(const LpStandardForm& lp, bool& consistent) {
  consistent = true;
  std::vector<int> keep;
  if (lp.num_eq() == 0) return keep;
  const Eigen::MatrixXd At = Eigen::MatrixXd(lp.A).transpose();
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
  qr.setThreshold(1e-12);
  const Eigen::Index rank = qr.rank();
  for (Eigen::Index i = 0; i < rank; ++i) keep.push_back(static_cast<int>(qr.colsPermutation().indices()[i]));
  std::sort(keep.begin(), keep.end());
  if (rank < lp.num_eq()) {
    // dropped rows must be implied by the kept ones
    Eigen::MatrixXd Ak(keep.size(), lp.num_vars());
    Eigen::VectorXd bk(keep.size());
    for (std::size_t r = 0; r < keep.size(); ++r) {
      Ak.row(r) = Eigen::MatrixXd(lp.A).row(keep[r]);
      bk[r] = lp.b[keep[r]];
    }
    const Eigen::VectorXd x0 = Ak.completeOrthogonalDecomposition().solve(bk);
    consistent = (Eigen::MatrixXd(lp.A) * x0 - lp.b).cwiseAbs().maxCoeff() <= 1e-9 * (1.0 + lp.b.cwiseAbs().maxCoeff());
  }
  return keep;
}

class NewtonSystem {
public:
  NewtonSystem(const LpStandardForm& lp, const Eigen::MatrixXd& A) : lp_(lp), A_(A) {}

  void factor(const Eigen::VectorXd& d) {
    const Eigen::Index n = lp_.num_vars();
    const Eigen::Index p = A_.rows();
    SparseRows DG = d.asDiagonal() * lp_.G;
    Eigen::MatrixXd H = Eigen::MatrixXd(lp_.G.transpose() * DG);
    K_.setZero(n + p, n + p);
    K_.topLeftCorner(n, n) = H;
    K_.topRightCorner(n, p) = A_.transpose();
    K_.bottomLeftCorner(p, n) = A_;
    lu_.compute(K_);
    fallback_ = false;
  }

  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) {
    Eigen::VectorXd sol;
    if (!fallback_) {
      sol = lu_.solve(rhs);
      sol += lu_.solve(rhs - K_ * sol); // one step of refinement
      const double scale = 1.0 + rhs.cwiseAbs().maxCoeff();
      if (sol.allFinite() && (K_ * sol - rhs).cwiseAbs().maxCoeff() <= 1e-6 * scale) return sol;
      fallback_ = true;
      cod_.compute(K_);
    }
    return cod_.solve(rhs);
  }

private:
  const LpStandardForm& lp_;
  const Eigen::MatrixXd& A_;
  Eigen::MatrixXd K_;
  Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod_;
  bool fallback_ = false;
};

/// Interior-point iterations only; no certificates. `A` holds independent equality rows.
inline IpmOutcome run_ipm(const LpStandardForm& lp, const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                          const LpOptions& opt) {
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = lp.num_ineq();
  const Eigen::Index p = A.rows();
  IpmOutcome out;
  IpmIterate& it = out.it;
  it.x = Eigen::VectorXd::Zero(n);
  it.y = Eigen::VectorXd::Zero(p);
  it.s = Eigen::VectorXd::Ones(m);
  it.z = Eigen::VectorXd::Ones(m);

  const double c_scale = 1.0 + (n > 0 ? lp.c.cwiseAbs().maxCoeff() : 0.0);
  const double diverge = 1e12;
  NewtonSystem newton(lp, A);

  for (int iter = 0; iter <= opt.max_iter; ++iter) {
    out.iterations = iter;
    const Eigen::VectorXd Gx = lp.G * it.x;
    const Eigen::VectorXd rd = lp.c + lp.G.transpose() * it.z + A.transpose() * it.y;
    const Eigen::VectorXd rp = A * it.x - b;
    const Eigen::VectorXd rg = Gx + it.s - lp.h;
    const double x_scale = 1.0 + (n > 0 ? it.x.cwiseAbs().maxCoeff() : 0.0);
    const double pobj = lp.c.dot(it.x);
    const double dobj = -lp.h.dot(it.z) - b.dot(it.y);
    const double gap_scale = 1.0 + std::abs(pobj);
    const double mu = m > 0 ? it.s.dot(it.z) / static_cast<double>(m) : 0.0;

    const double pres = std::max(p > 0 ? rp.cwiseAbs().maxCoeff() : 0.0, m > 0 ? rg.cwiseAbs().maxCoeff() : 0.0);
    const double dres = n > 0 ? rd.cwiseAbs().maxCoeff() : 0.0;
    const double compl_max = m > 0 ? (it.s.array() * it.z.array()).maxCoeff() : 0.0;
    if (pres <= opt.tol * x_scale && dres <= opt.tol * c_scale && std::abs(pobj - dobj) <= 10.0 * opt.tol * gap_scale &&
        compl_max <= 10.0 * opt.tol * gap_scale) {
      out.converged = true;
      return out;
    }
    if (iter == opt.max_iter) {
      out.reason = "iteration limit reached";
      return out;
    }
    if (!it.x.allFinite() || !it.z.allFinite() || x_scale > diverge ||
        (m > 0 && it.z.cwiseAbs().maxCoeff() > diverge)) {
      out.reason = "iterates diverged";
      return out;
    }

    newton.factor(it.z.cwiseQuotient(it.s));
    const auto direction = [&](const Eigen::VectorXd& rc, Eigen::VectorXd& dx, Eigen::VectorXd& dy,
                               Eigen::VectorXd& ds, Eigen::VectorXd& dz) {
      // Z ds + S dz = -rc,  ds = -rg - G dx
      const Eigen::VectorXd w = (-rc + it.z.cwiseProduct(rg)).cwiseQuotient(it.s);
      Eigen::VectorXd rhs(n + p);
      rhs.head(n) = -rd - lp.G.transpose() * w;
      rhs.tail(p) = -rp;
      const Eigen::VectorXd sol = newton.solve(rhs);
      dx = sol.head(n);
      dy = sol.tail(p);
      const Eigen::VectorXd Gdx = lp.G * dx;
      ds = -rg - Gdx;
      dz = w + it.z.cwiseQuotient(it.s).cwiseProduct(Gdx);
    };

    Eigen::VectorXd dx, dy, ds, dz;
    const Eigen::VectorXd sz = it.s.cwiseProduct(it.z);
    direction(sz, dx, dy, ds, dz);
    double sigma = 0.0;
    if (m > 0) {
      const double a_aff = std::min(max_step(it.s, ds), max_step(it.z, dz));
      const double mu_aff = (it.s + a_aff * ds).dot(it.z + a_aff * dz) / static_cast<double>(m);
      sigma = std::pow(std::clamp(mu_aff / mu, 0.0, 1.0), 3);
      const Eigen::VectorXd rc = sz + ds.cwiseProduct(dz) - Eigen::VectorXd::Constant(m, sigma * mu);
      direction(rc, dx, dy, ds, dz);
    }
    const double a_max = m > 0 ? std::min(max_step(it.s, ds), max_step(it.z, dz)) : 1.0;
    const double alpha = m > 0 ? std::min(1.0, 0.99 * a_max) : 1.0;
    if (alpha < 1e-12) {
      out.reason = "step length collapsed";
      return out;
    }
    it.x += alpha * dx;
    it.y += alpha * dy;
    it.s += alpha * ds;
    it.z += alpha * dz;
  }
  return out;
}

inline Eigen::MatrixXd dense_rows(const SparseRows& M, const std::vector<int>& rows) {
  Eigen::MatrixXd out(rows.size(), M.cols());
  const Eigen::MatrixXd dense(M);
  for (std::size_t r = 0; r < rows.size(); ++r) out.row(r) = dense.row(rows[r]);
  return out;
}

/// Solves a homogeneous-equality auxiliary LP; `ok` reports convergence.
inline IpmIterate solve_auxiliary(const LpStandardForm& aux, bool& ok) {
  LpOptions opt;
  opt.tol = 1e-10;
  opt.max_iter = 200;
  bool consistent = true;
  const std::vector<int> keep = independent_rows(aux, consistent);
  const Eigen::MatrixXd A = dense_rows(aux.A, keep);
  IpmOutcome r = run_ipm(aux, A, Eigen::VectorXd::Zero(A.rows()), opt);
  ok = r.converged;
  return r.it;
}

/// Removes the component of v along the row space of M (minimum-norm correction).
inline Eigen::VectorXd project_null(const Eigen::MatrixXd& M, const Eigen::VectorXd& v) {
  if (M.rows() == 0) return v;
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(M);
  return v - cod.solve(M * v);
}

inline bool find_ray(const LpStandardForm& lp, Eigen::VectorXd& ray) {
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = lp.num_ineq();
  Eigen::MatrixXd G(m + 2 * n, n);
  G.topRows(m) = Eigen::MatrixXd(lp.G);
  G.middleRows(m, n) = Eigen::MatrixXd::Identity(n, n);
  G.bottomRows(n) = -Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd h(m + 2 * n);
  h << Eigen::VectorXd::Zero(m), Eigen::VectorXd::Ones(2 * n);
  const LpStandardForm aux = make_lp(lp.c, G, h, Eigen::MatrixXd(lp.A), Eigen::VectorXd::Zero(lp.num_eq()));
  bool ok = false;
  const IpmIterate r = solve_auxiliary(aux, ok);
  const double c_scale = 1.0 + lp.c.cwiseAbs().maxCoeff();
  if (!ok || lp.c.dot(r.x) > -1e-8 * c_scale) return false;

  std::vector<int> active;
  for (Eigen::Index i = 0; i < m; ++i)
    if (r.z[i] > r.s[i]) active.push_back(static_cast<int>(i));
  Eigen::MatrixXd M(active.size() + lp.num_eq(), n);
  M.topRows(active.size()) = dense_rows(lp.G, active);
  M.bottomRows(lp.num_eq()) = Eigen::MatrixXd(lp.A);
  Eigen::VectorXd d = project_null(M, r.x);
  const double dmax = d.cwiseAbs().maxCoeff();
  if (!(dmax > 0.0)) return false;
  d /= dmax;
  const bool feasible = (m == 0 || (lp.G * d).maxCoeff() <= 1e-10) &&
                        (lp.num_eq() == 0 || (lp.A * d).cwiseAbs().maxCoeff() <= 1e-10);
  if (!feasible || lp.c.dot(d) > -1e-10) return false;
  ray = d;
  return true;
}

inline bool find_farkas(const LpStandardForm& lp, Eigen::VectorXd& fz, Eigen::VectorXd& fy) {
  const Eigen::Index n = lp.num_vars();
  const Eigen::Index m = lp.num_ineq();
  const Eigen::Index p = lp.num_eq();
  const Eigen::Index w = m + p;
  if (w == 0) return false;
  Eigen::VectorXd c(w);
  c << lp.h, lp.b;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(2 * w + m, w);
  G.topLeftCorner(m, m) = -Eigen::MatrixXd::Identity(m, m); // z >= 0
  G.middleRows(m, w) = Eigen::MatrixXd::Identity(w, w);     // (z, y) <= 1
  G.bottomRows(w) = -Eigen::MatrixXd::Identity(w, w);       // (z, y) >= -1
  Eigen::VectorXd h(2 * w + m);
  h << Eigen::VectorXd::Zero(m), Eigen::VectorXd::Ones(2 * w);
  Eigen::MatrixXd Aeq(n, w);
  Aeq.leftCols(m) = Eigen::MatrixXd(lp.G).transpose();
  Aeq.rightCols(p) = Eigen::MatrixXd(lp.A).transpose();
  LpStandardForm aux = make_lp(c, G, h, Aeq, Eigen::VectorXd::Zero(n));
  bool consistent = true;
  const std::vector<int> keep = independent_rows(aux, consistent);
  const Eigen::MatrixXd Ak = dense_rows(aux.A, keep);
  LpOptions opt;
  opt.tol = 1e-10;
  IpmOutcome r = run_ipm(aux, Ak, Eigen::VectorXd::Zero(Ak.rows()), opt);
  const double scale = 1.0 + c.cwiseAbs().maxCoeff();
  if (!r.converged || c.dot(r.it.x) > -1e-8 * scale) return false;

  std::vector<int> active; // z_i >= 0 bounds that hold with equality
  for (Eigen::Index i = 0; i < m; ++i)
    if (r.it.z[i] > r.it.s[i]) active.push_back(static_cast<int>(i));
  Eigen::MatrixXd M(active.size() + n, w);
  M.setZero();
  for (std::size_t k = 0; k < active.size(); ++k) M(k, active[k]) = 1.0;
  M.bottomRows(n) = Aeq;
  Eigen::VectorXd v = project_null(M, r.it.x);
  const double vmax = v.cwiseAbs().maxCoeff();
  if (!(vmax > 0.0)) return false;
  v /= vmax;
  fz = v.head(m).cwiseMax(0.0);
  fy = v.tail(p);
  Eigen::VectorXd rows = Eigen::VectorXd::Zero(n);
  if (m > 0) rows += lp.G.transpose() * fz;
  if (p > 0) rows += lp.A.transpose() * fy;
  return (n == 0 || rows.cwiseAbs().maxCoeff() <= 1e-10) && lp.h.dot(fz) + lp.b.dot(fy) < -1e-10;
}

} // namespace detail

/// Solves the LP to optimality or returns a certified Unbounded/Infeasible status.
/// Deterministic: fixed starting point (x = 0, s = z = 1, y = 0) and no randomization.
inline LpSolution solve_lp(const LpStandardForm& lp, const LpOptions& options = {}) {
  lp.check_dimensions();
  if (!(options.tol >= 1e-12 && options.tol <= 1e-4)) throw Error("LP tolerance must lie in [1e-12, 1e-4]");
  LpSolution sol;
  bool consistent = true;
  const std::vector<int> keep = detail::independent_rows(lp, consistent);
  const Eigen::MatrixXd A = detail::dense_rows(lp.A, keep);
  Eigen::VectorXd b(keep.size());
  for (std::size_t r = 0; r < keep.size(); ++r) b[r] = lp.b[keep[r]];

  detail::IpmOutcome run;
  if (consistent) run = detail::run_ipm(lp, A, b, options);
  sol.iterations = run.iterations;
  sol.x = run.it.x;
  sol.s = run.it.s;
  sol.z = run.it.z;
  sol.y = Eigen::VectorXd::Zero(lp.num_eq());
  for (std::size_t r = 0; r < keep.size() && run.it.y.size() > 0; ++r) sol.y[keep[r]] = run.it.y[r];

  if (consistent && run.converged) {
    sol.status = LpStatus::Optimal;
    sol.primal_objective = lp.c.dot(sol.x);
    sol.dual_objective = 0.0 - lp.h.dot(sol.z) - lp.b.dot(sol.y);
    sol.primal_residual = primal_infeasibility(lp, sol.x);
    sol.dual_residual = dual_infeasibility(lp, sol.z, sol.y);
    sol.gap = std::abs(sol.primal_objective - sol.dual_objective);
    sol.complementarity = complementarity(lp, sol.x, sol.z);
    return sol;
  }

  if (consistent && detail::find_ray(lp, sol.ray)) {
    sol.status = LpStatus::Unbounded;
    sol.message = "certified improving ray";
  } else if (detail::find_farkas(lp, sol.farkas_z, sol.farkas_y)) {
    sol.status = LpStatus::Infeasible;
    sol.message = "certified Farkas vector";
  } else {
    sol.status = LpStatus::NumericalFailure;
    sol.message = run.reason.empty() ? "no convergence and no certificate" : run.reason;
  }
  if (sol.x.size() == lp.num_vars() && sol.z.size() == lp.num_ineq()) {
    sol.primal_objective = lp.c.dot(sol.x);
    sol.dual_objective = 0.0 - lp.h.dot(sol.z) - lp.b.dot(sol.y);
    sol.primal_residual = primal_infeasibility(lp, sol.x);
    sol.dual_residual = dual_infeasibility(lp, sol.z, sol.y);
  }
  return sol;
}

} // namespace jamstress
