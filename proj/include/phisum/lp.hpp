#pragma once

#include "phisum/types.hpp"

#include <string_view>
#include <vector>

namespace phisum {

/// Dense LP in inequality form:  minimize <c,t>  s.t.  A t >= b,  t >= 0.
/// Variables flagged in `free_vars` are unrestricted in sign.
struct LpProblem {
  Vector objective;
  Matrix rows;
  Vector rhs;
  std::vector<bool> free_vars;  // empty means all nonnegative
};

/// `failed`: the pivot limit was reached or the final point does not satisfy
/// the rows to working accuracy.
enum class LpStatus { optimal, infeasible, unbounded, ill_conditioned, failed };

std::string_view to_string(LpStatus s);

struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  Vector t;
  double value = 0.0;
  /// Nonnegative multipliers of the rows at the optimum (LP dual solution).
  Vector duals;
  int pivots = 0;
  double condition = 1.0;
};

/// Two-phase dense simplex on a perturbed right-hand side, followed by a
/// dual-simplex repair on the exact data. The tableau is rebuilt from the
/// original rows whenever the basic solution drifts from them. Entering variables follow the most-negative
/// reduced cost; after a run of degenerate pivots Bland's rule takes over.
LpSolution solve_lp(const LpProblem& p);

}  // namespace phisum
