#pragma once

#include <string>

#include "jamstress/lp/solver.hpp"
#include "jamstress/primal.hpp"

namespace jamstress {

enum class StabilityKind { Jammed, Mechanism };

inline const char* to_string(StabilityKind k) { return k == StabilityKind::Jammed ? "Jammed" : "Mechanism"; }

struct Stability {
  StabilityKind kind = StabilityKind::Jammed;
  /// Collapse mode (u-part of the improving ray, max-norm 1); empty when jammed.
  Displacements mode;
};

/// Jammed iff the LP is optimal with objective >= -tol. A certified improving ray is a
/// collapse mechanism. Infeasible or failed solves are reported as errors.
inline Stability classify_stability(const LpSolution& sol, const FrictionLp& flp, double tol = 1e-7) {
  Stability st;
  switch (sol.status) {
  case LpStatus::Optimal:
    if (sol.primal_objective < -tol)
      throw NumericalError("optimal friction LP with negative objective " + std::to_string(sol.primal_objective));
    st.kind = StabilityKind::Jammed;
    return st;
  case LpStatus::Unbounded: {
    st.kind = StabilityKind::Mechanism;
    st.mode = flp.displacements(sol.ray);
    double umax = 0.0;
    for (const Vec2& v : st.mode) umax = std::max(umax, v.cwiseAbs().maxCoeff());
    if (!(umax > 0.0)) throw NumericalError("improving ray has no displacement component");
    for (Vec2& v : st.mode) v /= umax;
    return st;
  }
  case LpStatus::Infeasible: throw NumericalError("friction LP reported infeasible: " + sol.message);
  case LpStatus::NumericalFailure: break;
  }
  throw NumericalError("friction LP solve failed: " + sol.message);
}

} // namespace jamstress
