#pragma once

#include "phisum/lp.hpp"
#include "phisum/sphere_search.hpp"

#include <functional>
#include <limits>
#include <vector>

namespace phisum {

/// One semi-infinite constraint  sum_j nu_j g_j >= h  generated by a point.
struct ConstraintRow {
  Vector g;
  double h = 0.0;
};

struct MeasureMass {
  bool feasible = true;
  LpStatus status = LpStatus::optimal;
  /// Satisfies every row (rescaled after the solve if needed).
  Vector nu;
  double mass = 0.0;
  /// sum_k w_k h_k for the row weights below, a lower bound on the optimal mass.
  double lower_mass = 0.0;
  /// Multipliers with respect to the *unscaled* rows: sum_k w_k g_k <= 1.
  Vector row_weights;
};

/// Minimal total mass of a nonnegative measure nu over `support_size` points
/// satisfying every row. Rows are rescaled by max(h, 1e-6 max g) before
/// entering the LP. Infeasible exactly when some row has h > 0 and g = 0.
MeasureMass min_measure_mass(std::size_t support_size, const std::vector<ConstraintRow>& rows);

struct OracleResult {
  Blocks point;
  /// sup_x h(x) / sum_j nu_j g_j(x) found by the search (+inf when some x
  /// with h > 0 is not charged at all; 0 when h vanishes identically).
  double ratio = 0.0;
  /// Further violated points; each adds a constraint in the same round.
  std::vector<Blocks> extra;
};

/// A separation oracle: given current weights, returns the most violated
/// point found. A violation exists iff ratio > 1.
using SeparationOracle = std::function<OracleResult(const Vector& nu)>;

struct CuttingPlaneProblem {
  std::size_t support_size = 0;
  double exponent = 1.0;
  std::function<ConstraintRow(const Blocks&)> row;
  SeparationOracle oracle;
  /// Lower bound certified by the weighted family (points, weights) whose
  /// members are weight^{1/r} * point.
  std::function<double(const std::vector<Blocks>&, const Vector&)> family_bound;
};

struct CuttingPlaneConfig {
  int max_iter = 200;
  double tol_gap = 1e-6;
};

struct IterationRecord {
  double lower = 0.0;
  double upper = 0.0;
  double violation = 0.0;
};

struct CuttingPlaneReport {
  /// Certifying weights (already scaled), total mass = upper_bound^r.
  Vector weights;
  double upper_bound = kInfinity;
  double lower_bound = 0.0;
  int iterations = 0;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool gap_open = true;
  bool weak_duality_held = true;
  /// Constraint points generated so far and the family certifying lower_bound.
  std::vector<Blocks> points;
  std::vector<Blocks> lb_points;
  Vector lb_weights;

  static constexpr double kInfinity = std::numeric_limits<double>::infinity();
};

/// Alternates min_measure_mass with oracle calls until the oracle finds no
/// violation above tol_gap (relative) or max_iter is reached. Never throws on
/// non-convergence; the report carries gap_open instead.
CuttingPlaneReport cutting_plane(const CuttingPlaneProblem& problem, const std::vector<Blocks>& init,
                                 const CuttingPlaneConfig& cfg);

}  // namespace phisum
