#include "phisum/lp.hpp"

#include <cmath>
#include <limits>

namespace phisum {

std::string_view to_string(LpStatus s) {
  switch (s) {
    case LpStatus::optimal: return "optimal";
    case LpStatus::infeasible: return "infeasible";
    case LpStatus::unbounded: return "unbounded";
    case LpStatus::ill_conditioned: return "ill-conditioned";
    case LpStatus::failed: return "failed";
  }
  return "unknown";
}

namespace {

constexpr double kPivotEps = 1e-11;
constexpr double kCostEps = 1e-11;
constexpr double kFeasEps = 1e-9;
constexpr double kMaxCondition = 1e12;
constexpr double kPerturb = 1e-7;

enum class Outcome { optimal, unbounded, limit, infeasible };

// Tableau layout: rows 0..m-1 are constraints, row m holds reduced costs;
// the last column is the right-hand side. basis[i] is the column basic in
// row i.
struct Tableau {
  Matrix a;
  Matrix orig;  // initial constraint rows, kept for reinversion
  Vector cost;
  std::vector<int> basis;
  int m = 0;
  int ncols = 0;  // excluding rhs

  double& rhs(int i) { return a(i, ncols); }

  void pivot(int row, int col) {
    a.row(row) /= a(row, col);
    for (int i = 0; i <= m; ++i) {
      if (i == row) continue;
      const double f = a(i, col);
      if (f != 0.0) a.row(i) -= f * a.row(row);
    }
    basis[row] = col;
  }

  void price(const Vector& c) {
    cost = c;
    a.row(m).setZero();
    a.row(m).head(ncols) = cost.transpose();
    for (int i = 0; i < m; ++i) {
      const double cb = cost(basis[i]);
      if (cb != 0.0) a.row(m) -= cb * a.row(i);
    }
  }

  // Rebuilds the rows from the original data. False on a singular basis.
  bool reinvert() {
    Matrix B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = orig.col(basis[i]);
    const Eigen::PartialPivLU<Matrix> lu(B);
    if (!(lu.rcond() > 1e-14)) return false;
    a.topRows(m) = lu.solve(orig);
    for (int i = 0; i < m; ++i) a(i, basis[i]) = 1.0;
    price(cost);
    return true;
  }

  // Residual of the basic solution against the original rows.
  bool accurate() const {
    Vector r = orig.col(ncols);
    for (int i = 0; i < m; ++i) r -= a(i, ncols) * orig.col(basis[i]);
    return r.cwiseAbs().maxCoeff() <= 1e-10 * (1.0 + orig.col(ncols).cwiseAbs().maxCoeff() + a.col(ncols).head(m).cwiseAbs().maxCoeff());
  }

  // Replaces the right-hand side and recomputes the basic values.
  void reset_rhs(const Vector& b) {
    orig.col(ncols) = b;
    Matrix B(m, m);
    for (int i = 0; i < m; ++i) B.col(i) = orig.col(basis[i]);
    a.col(ncols).head(m) = Eigen::PartialPivLU<Matrix>(B).solve(b);
    price(cost);
  }

  int degenerate_streak = 0;
  int ray_col = -1;  // entering column of the last unbounded ratio test

  Outcome optimize(const std::vector<bool>& allowed, int& pivots, int max_pivots) {
    bool bland = false;
    int rechecked = -1;  // pivot count at the last unboundedness recheck
    while (true) {
      if (pivots >= max_pivots) return Outcome::limit;
      int enter = -1;
      double best = -kCostEps;
      for (int j = 0; j < ncols; ++j) {
        if (!allowed[j]) continue;
        const double rc = a(m, j);
        if (bland) {
          if (rc < -kCostEps) { enter = j; break; }
        } else if (rc < best) {
          best = rc;
          enter = j;
        }
      }
      if (enter < 0) return Outcome::optimal;
      double colmax = 0.0;
      for (int i = 0; i < m; ++i) colmax = std::max(colmax, a(i, enter));
      const double ptol = std::max(kPivotEps, 1e-9 * colmax);
      double ratio = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m; ++i)
        if (a(i, enter) > ptol) ratio = std::min(ratio, std::max(rhs(i), 0.0) / a(i, enter));
      if (!std::isfinite(ratio)) {
        // Confirm on a fresh tableau before reporting.
        ray_col = enter;
        if (rechecked == pivots || !reinvert()) return Outcome::unbounded;
        rechecked = pivots;
        continue;
      }
      // Ties: the largest pivot, or the lowest basic index once degenerate.
      const double slack = 1e-12 * (1.0 + ratio);
      int leave = -1;
      for (int i = 0; i < m; ++i) {
        const double aij = a(i, enter);
        if (aij <= ptol || std::max(rhs(i), 0.0) / aij > ratio + slack) continue;
        if (leave < 0 || (bland ? basis[i] < basis[leave] : aij > a(leave, enter))) leave = i;
      }
      degenerate_streak = ratio <= 1e-14 ? degenerate_streak + 1 : 0;
      if (degenerate_streak >= 8) bland = true;
      pivot(leave, enter);
      ++pivots;
      if (pivots % 50 == 0 && !accurate()) reinvert();
    }
  }

  // Dual simplex pivots restoring rhs >= 0 while keeping reduced costs
  // nonnegative.
  Outcome restore_feasibility(const std::vector<bool>& allowed, int& pivots, int max_pivots) {
    while (true) {
      int leave = -1;
      double worst = -kFeasEps;
      for (int i = 0; i < m; ++i)
        if (rhs(i) < worst) { worst = rhs(i); leave = i; }
      if (leave < 0) return Outcome::optimal;
      if (pivots >= max_pivots) return Outcome::limit;
      int enter = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int j = 0; j < ncols; ++j) {
        const double arj = a(leave, j);
        if (!allowed[j] || arj >= -kPivotEps) continue;
        const double q = std::max(a(m, j), 0.0) / -arj;
        if (q < best || (q == best && arj < a(leave, enter))) { best = q; enter = j; }
      }
      if (enter < 0) return Outcome::infeasible;
      pivot(leave, enter);
      ++pivots;
    }
  }

  // Alternates primal pivots with reinversion and dual repair until the
  // reinverted tableau is optimal.
  Outcome solve(const std::vector<bool>& allowed, int& pivots, int max_pivots) {
    for (int pass = 0; pass < 6; ++pass) {
      const Outcome o = optimize(allowed, pivots, max_pivots);
      if (o != Outcome::optimal) return o;
      if (!accurate() && !reinvert()) return Outcome::optimal;
      const Outcome f = restore_feasibility(allowed, pivots, max_pivots);
      if (f != Outcome::optimal) return f;
      bool done = true;
      for (int j = 0; j < ncols && done; ++j)
        if (allowed[j] && a(m, j) < -kCostEps) done = false;
      if (done) return Outcome::optimal;
    }
    return Outcome::limit;
  }
};

}  // namespace

LpSolution solve_lp(const LpProblem& p) {
  const int k = static_cast<int>(p.rows.rows());
  const int n0 = static_cast<int>(p.objective.size());
  if (n0 == 0) throw Error(ErrorCode::invalid_argument, "solve_lp: no variables");
  if (k > 0) require_dim(static_cast<std::size_t>(p.rows.cols()), static_cast<std::size_t>(n0), "solve_lp rows");
  require_dim(static_cast<std::size_t>(p.rhs.size()), static_cast<std::size_t>(k), "solve_lp rhs");
  if (!p.objective.allFinite() || !p.rows.allFinite() || !p.rhs.allFinite())
    throw Error(ErrorCode::invalid_argument, "solve_lp: non-finite data");

  // Split free variables t = t+ - t-.
  std::vector<int> minus_of(n0, -1);
  int n = n0;
  if (!p.free_vars.empty()) {
    require_dim(p.free_vars.size(), static_cast<std::size_t>(n0), "solve_lp free_vars");
    for (int j = 0; j < n0; ++j)
      if (p.free_vars[j]) minus_of[j] = n++;
  }
  Matrix A(k, n);
  Vector c(n);
  A.leftCols(n0) = p.rows;
  c.head(n0) = p.objective;
  for (int j = 0; j < n0; ++j) {
    if (minus_of[j] >= 0) {
      A.col(minus_of[j]) = -p.rows.col(j);
      c(minus_of[j]) = -p.objective(j);
    }
  }

  LpSolution sol;
  if (k == 0) {
    // Only bounds: optimum at zero unless some cost is negative.
    for (int j = 0; j < n; ++j) {
      if (c(j) < 0) { sol.status = LpStatus::unbounded; return sol; }
    }
    sol.status = LpStatus::optimal;
    sol.t = Vector::Zero(n0);
    sol.duals = Vector(0);
    return sol;
  }

  // Columns: structural [0,n), surplus [n,n+k), artificial [n+k, n+k+na).
  std::vector<int> art_row;
  std::vector<bool> negated(k, false);
  for (int i = 0; i < k; ++i) {
    if (p.rhs(i) <= 0.0) negated[i] = true;
    else art_row.push_back(i);
  }
  const int na = static_cast<int>(art_row.size());
  Tableau tab;
  tab.m = k;
  tab.ncols = n + k + na;
  tab.a = Matrix::Zero(k + 1, tab.ncols + 1);
  tab.basis.assign(k, -1);
  Vector exact(k);
  for (int i = 0; i < k; ++i) {
    const double s = negated[i] ? -1.0 : 1.0;
    tab.a.row(i).head(n) = s * A.row(i);
    tab.a(i, n + i) = -s;
    exact(i) = s * p.rhs(i);
    // A deterministic perturbation that only loosens rows breaks ties and
    // keeps the initial basis feasible; it is removed before the final pass.
    const double frac = std::fmod(0.6180339887498949 * (i + 1), 1.0);
    const double eps = kPerturb * (1.0 + frac);
    tab.a(i, tab.ncols) = negated[i] ? exact(i) + eps * (1.0 + std::abs(exact(i))) : exact(i) * (1.0 - eps);
    if (negated[i]) tab.basis[i] = n + i;
  }
  for (int q = 0; q < na; ++q) {
    const int i = art_row[q];
    tab.a(i, n + k + q) = 1.0;
    tab.basis[i] = n + k + q;
  }
  tab.orig = tab.a.topRows(k);

  const int max_pivots = 50 * (tab.ncols + k) + 1000;
  std::vector<bool> allowed(tab.ncols, true);
  const double scale = 1.0 + p.rhs.cwiseAbs().maxCoeff();
  auto artificial_mass = [&] {
    double s = 0.0;
    for (int i = 0; i < k; ++i)
      if (tab.basis[i] >= n + k) s += std::max(tab.rhs(i), 0.0);
    return s;
  };
  // An unbounded ray read off the tableau must hold on the original data.
  auto ray_holds = [&] {
    const int j = tab.ray_col;
    if (j < 0 || j >= n + k) return false;
    Vector d = Vector::Zero(n + k);
    d(j) = 1.0;
    for (int i = 0; i < k; ++i) {
      if (tab.basis[i] >= n + k) {
        if (std::abs(tab.a(i, j)) > 1e-9) return false;
        continue;
      }
      d(tab.basis[i]) = -tab.a(i, j);
    }
    const Vector Ad = A * d.head(n) - d.tail(k);
    const double dn = d.head(n).cwiseAbs().maxCoeff();
    return (d.array() >= -1e-9 * (1.0 + dn)).all() && Ad.cwiseAbs().maxCoeff() <= 1e-7 * (1.0 + A.cwiseAbs().maxCoeff() * dn) &&
           c.dot(d.head(n)) < 0.0;
  };
  auto fail = [&](Outcome o) {
    if (o == Outcome::unbounded && !ray_holds()) o = Outcome::limit;
    sol.status = o == Outcome::unbounded ? LpStatus::unbounded
               : o == Outcome::infeasible ? LpStatus::infeasible
                                          : LpStatus::failed;
    return sol;
  };

  if (na > 0) {
    Vector c1 = Vector::Zero(tab.ncols);
    c1.tail(na).setOnes();
    tab.price(c1);
    const Outcome o = tab.solve(allowed, sol.pivots, max_pivots);
    // Phase 1 is bounded below, so anything but optimal is numerical.
    if (o != Outcome::optimal) return fail(Outcome::limit);
    if (artificial_mass() > kFeasEps * scale) {
      sol.status = LpStatus::infeasible;
      return sol;
    }
    // Drive remaining artificials out of the basis.
    for (int i = 0; i < k; ++i) {
      if (tab.basis[i] < n + k) continue;
      int col = -1;
      double best = 1e-9;
      for (int j = 0; j < n + k; ++j) {
        if (std::abs(tab.a(i, j)) > best) { best = std::abs(tab.a(i, j)); col = j; }
      }
      if (col >= 0) {
        tab.pivot(i, col);
        ++sol.pivots;
      }
    }
    for (int q = 0; q < na; ++q) allowed[n + k + q] = false;
  }

  Vector c2 = Vector::Zero(tab.ncols);
  c2.head(n) = c;
  tab.price(c2);
  Outcome o = tab.solve(allowed, sol.pivots, max_pivots);
  if (o != Outcome::optimal) return fail(o);
  // Remove the perturbation and repair the basis for the exact data.
  tab.reset_rhs(exact);
  o = tab.restore_feasibility(allowed, sol.pivots, max_pivots);
  if (o == Outcome::optimal) o = tab.solve(allowed, sol.pivots, max_pivots);
  if (o != Outcome::optimal) return fail(o);
  if (artificial_mass() > kFeasEps * scale) {
    sol.status = LpStatus::infeasible;
    return sol;
  }

  Vector t = Vector::Zero(n);
  for (int i = 0; i < k; ++i)
    if (tab.basis[i] < n) t(tab.basis[i]) = std::max(0.0, tab.rhs(i));
  sol.t = t.head(n0);
  for (int j = 0; j < n0; ++j)
    if (minus_of[j] >= 0) sol.t(j) -= t(minus_of[j]);
  sol.value = p.objective.dot(sol.t);

  // A basis spoiled by roundoff can still look optimal; check the answer.
  const double tmax = sol.t.size() ? sol.t.cwiseAbs().maxCoeff() : 0.0;
  const double amax = p.rows.cwiseAbs().maxCoeff();
  const Vector resid = p.rhs - p.rows * sol.t;
  if (!sol.t.allFinite() || resid.maxCoeff() > 1e-7 * (scale + amax * tmax)) {
    sol.status = LpStatus::failed;
    return sol;
  }

  // The reduced cost of surplus column i is the multiplier of row i.
  sol.duals = Vector::Zero(k);
  for (int i = 0; i < k; ++i) sol.duals(i) = std::max(0.0, tab.a(k, n + i));

  // Condition of the final basis of the un-negated system [A | -I].
  std::vector<int> cols;
  for (int i = 0; i < k; ++i)
    if (tab.basis[i] < n + k) cols.push_back(tab.basis[i]);
  const int kb = static_cast<int>(cols.size());
  if (kb > 0) {
    Matrix B(k, kb);
    for (int q = 0; q < kb; ++q) {
      const int j = cols[q];
      if (j < n) {
        B.col(q) = A.col(j);
      } else {
        B.col(q) = Vector::Zero(k);
        B(j - n, q) = -1.0;
      }
    }
    if (kb == k) {
      const Eigen::PartialPivLU<Matrix> lu(B);
      const double rc = lu.rcond();
      sol.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
    } else {
      const Eigen::ColPivHouseholderQR<Matrix> qr(B.transpose());
      const auto diag = qr.matrixR().diagonal().cwiseAbs();
      const double lo = diag.head(qr.rank()).minCoeff();
      sol.condition = qr.rank() < kb || lo == 0.0 ? std::numeric_limits<double>::infinity() : diag.maxCoeff() / lo;
    }
  }
  sol.status = sol.condition > kMaxCondition ? LpStatus::ill_conditioned : LpStatus::optimal;
  return sol;
}

}  // namespace phisum
