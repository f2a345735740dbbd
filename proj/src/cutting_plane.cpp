#include "phisum/cutting_plane.hpp"

#include <cmath>
#include <limits>

namespace phisum {

MeasureMass min_measure_mass(std::size_t support_size, const std::vector<ConstraintRow>& rows) {
  MeasureMass out;
  const auto n = static_cast<Eigen::Index>(support_size);
  out.nu = Vector::Zero(n);
  out.row_weights = Vector::Zero(static_cast<Eigen::Index>(rows.size()));
  if (n == 0) throw Error(ErrorCode::invalid_argument, "min_measure_mass: empty support");

  std::vector<Eigen::Index> used;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    const auto& r = rows[k];
    require_dim(static_cast<std::size_t>(r.g.size()), support_size, "min_measure_mass row");
    if ((r.g.array() < 0).any()) throw Error(ErrorCode::invalid_argument, "min_measure_mass: negative coefficient");
    if (!(r.h > 0.0)) continue;  // trivially satisfied by nu >= 0
    if (r.g.maxCoeff() == 0.0) {
      out.feasible = false;
      out.status = LpStatus::infeasible;
      return out;
    }
    used.push_back(static_cast<Eigen::Index>(k));
  }
  if (used.empty()) return out;

  const auto m = static_cast<Eigen::Index>(used.size());
  Matrix G(m, n);
  Vector h(m);
  for (Eigen::Index q = 0; q < m; ++q) {
    const auto& r = rows[static_cast<std::size_t>(used[static_cast<std::size_t>(q)])];
    const double s = std::max(r.h, 1e-6 * r.g.maxCoeff());
    G.row(q) = r.g.transpose() / s;
    h(q) = r.h / s;
  }

  // Repairs roundoff so that nu is feasible and y dual feasible; returns the
  // repaired pair's mass and lower value.
  struct Candidate {
    Vector nu, y;
    double mass = std::numeric_limits<double>::infinity();
    double lower = 0.0;
    double repair = 1.0;
  };
  auto repair = [&](Vector nu, Vector y) {
    Candidate c;
    nu = nu.cwiseMax(0.0);
    y = y.cwiseMax(0.0);
    Vector gn = G * nu;
    for (Eigen::Index q = 0; q < m; ++q) {
      if (gn(q) > 0.0) continue;
      // Uncovered row; put mass on its best point.
      Eigen::Index j = 0;
      G.row(q).maxCoeff(&j);
      nu(j) += h(q) / G(q, j);
      gn = G * nu;
    }
    for (Eigen::Index q = 0; q < m; ++q) c.repair = std::max(c.repair, h(q) / gn(q));
    c.nu = nu * c.repair;
    c.y = y / std::max(1.0, (G.transpose() * y).maxCoeff());
    c.mass = c.nu.sum();
    c.lower = std::min(h.dot(c.y), c.mass);
    return c;
  };
  auto usable = [](const LpSolution& sol) {
    return sol.status == LpStatus::optimal || sol.status == LpStatus::ill_conditioned;
  };

  // The dual form max <h,y>, G^T y <= 1 has a support-sized basis and starts
  // feasible at y = 0; the primal form backs it up when its multipliers need
  // more than roundoff repair.
  Candidate best;
  const auto dual = solve_lp(LpProblem{-h, -G.transpose(), -Vector::Ones(n), {}});
  out.status = dual.status;
  if (usable(dual)) best = repair(dual.duals, dual.t);
  if (!usable(dual) || best.repair > 1.0 + 1e-9) {
    const auto primal = solve_lp(LpProblem{Vector::Ones(n), G, h, {}});
    if (usable(primal)) {
      auto c = repair(primal.t, primal.duals);
      const double lower = std::max(best.lower, c.lower);
      if (c.mass < best.mass) {
        best = std::move(c);
        out.status = primal.status;
      }
      best.lower = lower;
    }
  }
  if (!std::isfinite(best.mass)) {
    out.feasible = false;
    return out;
  }
  const Vector& nu = best.nu;
  const Vector& y = best.y;
  out.nu = nu;
  out.mass = best.mass;
  out.lower_mass = std::min(best.lower, best.mass);
  for (Eigen::Index q = 0; q < m; ++q) {
    const auto k = used[static_cast<std::size_t>(q)];
    const auto& r = rows[static_cast<std::size_t>(k)];
    out.row_weights(k) = y(q) / std::max(r.h, 1e-6 * r.g.maxCoeff());
  }
  return out;
}

CuttingPlaneReport cutting_plane(const CuttingPlaneProblem& problem, const std::vector<Blocks>& init,
                                 const CuttingPlaneConfig& cfg) {
  if (init.empty()) throw Error(ErrorCode::invalid_argument, "cutting_plane: empty initial constraint set");
  CuttingPlaneReport rep;
  rep.weights = Vector::Zero(static_cast<Eigen::Index>(problem.support_size));
  const double r = problem.exponent;

  std::vector<ConstraintRow> rows;
  for (const auto& x : init) {
    rep.points.push_back(x);
    rows.push_back(problem.row(x));
  }

  for (int it = 1; it <= cfg.max_iter; ++it) {
    rep.iterations = it;
    const auto mm = min_measure_mass(problem.support_size, rows);
    if (!mm.feasible) {
      rep.history.push_back({rep.lower_bound, rep.upper_bound, CuttingPlaneReport::kInfinity});
      break;
    }
    const auto orc = problem.oracle(mm.nu);
    const double rho = orc.ratio;

    double ub = CuttingPlaneReport::kInfinity;
    if (std::isfinite(rho)) ub = rho <= 0.0 ? 0.0 : std::pow(rho * mm.mass, 1.0 / r);
    if (ub < rep.upper_bound) {
      rep.upper_bound = ub;
      rep.weights = rho > 0.0 ? Vector(rho * mm.nu) : Vector(Vector::Zero(mm.nu.size()));
    }

    const double lb = problem.family_bound ? problem.family_bound(rep.points, mm.row_weights)
                                           : std::pow(mm.lower_mass, 1.0 / r);
    if (lb > rep.lower_bound) {
      rep.lower_bound = lb;
      rep.lb_points = rep.points;
      rep.lb_weights = mm.row_weights;
    }
    if (rep.lower_bound > rep.upper_bound + tol::duality * std::max(1.0, rep.upper_bound))
      rep.weak_duality_held = false;
    rep.history.push_back({rep.lower_bound, rep.upper_bound, rho - 1.0});

    if (rho <= 1.0 + cfg.tol_gap) {
      rep.converged = true;
      break;
    }
    rep.points.push_back(orc.point);
    rows.push_back(problem.row(orc.point));
    for (const auto& x : orc.extra) {
      rep.points.push_back(x);
      rows.push_back(problem.row(x));
    }
  }
  const double gap = rep.upper_bound - rep.lower_bound;
  rep.gap_open = !rep.converged || !(gap <= tol::duality * std::max(1.0, rep.upper_bound) + cfg.tol_gap * rep.upper_bound);
  return rep;
}

}  // namespace phisum
