#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace phisum::detail {

std::vector<std::vector<int>> subsets_up_to(int n, int k) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (!cur.empty()) out.push_back(cur);
    if (static_cast<int>(cur.size()) == k) return;
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

DiscreteMeasure normalized(const std::vector<Vector>& support, const Vector& w) {
  DiscreteMeasure mu;
  const double mass = w.sum();
  for (Eigen::Index j = 0; j < w.size(); ++j) {
    if (w(j) <= 1e-15 * mass) continue;
    mu.support.push_back(support[static_cast<std::size_t>(j)]);
    mu.weights.push_back(w(j) / mass);
  }
  if (mu.support.empty()) mu = DiscreteMeasure::delta(support.front());
  return mu;
}

std::vector<Vector> factor_starts(const FiniteSpace& X) {
  std::vector<Vector> out;
  const auto pts = X.polyhedral() ? X.primal_extreme_points() : primal_sphere_mesh(X, 4);
  for (const auto& v : representatives_mod_sign(pts)) out.push_back(v / v.norm());
  return out;
}

std::vector<Blocks> products(const std::vector<std::vector<Vector>>& lists, std::size_t cap) {
  std::vector<Blocks> out{Blocks{}};
  for (const auto& l : lists) {
    std::vector<Blocks> next;
    for (const auto& b : out)
      for (const auto& v : l) {
        if (next.size() >= cap) break;
        Blocks c = b;
        c.push_back(v);
        next.push_back(std::move(c));
      }
    out = std::move(next);
  }
  return out;
}

Matrix null_basis(const std::vector<Vector>& fs, int d, double rel) {
  if (fs.empty()) return Matrix::Identity(d, d);
  Matrix F(static_cast<Eigen::Index>(fs.size()), d);
  for (std::size_t i = 0; i < fs.size(); ++i) F.row(static_cast<Eigen::Index>(i)) = fs[i].transpose();
  Eigen::JacobiSVD<Matrix> svd(F, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s(0) : 0.0;
  Eigen::Index rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s(i) > rel * std::max(smax, 1e-300)) ++rank;
  return svd.matrixV().rightCols(d - rank);
}

std::vector<Vector> arrangement_rays(const std::vector<Vector>& fs, int d, std::size_t cap) {
  std::vector<Vector> out;
  const Matrix K = null_basis(fs, d);
  for (Eigen::Index c = 0; c < K.cols(); ++c) out.push_back(K.col(c));
  const int k = static_cast<int>(K.cols());
  const int target = d - k - 1;
  if (target < 0) return out;
  std::vector<Vector> kt;
  for (Eigen::Index c = 0; c < K.cols(); ++c) kt.push_back(K.col(c));
  if (target == 0) {
    const Matrix N = null_basis(kt, d);
    for (Eigen::Index c = 0; c < N.cols(); ++c) out.push_back(N.col(c));
    return out;
  }
  const int n = static_cast<int>(fs.size());
  if (n < target) return out;
  std::vector<int> comb(static_cast<std::size_t>(target));
  for (int i = 0; i < target; ++i) comb[static_cast<std::size_t>(i)] = i;
  std::size_t visited = 0;
  while (visited++ < cap) {
    std::vector<Vector> rows = kt;
    for (int i : comb) rows.push_back(fs[static_cast<std::size_t>(i)]);
    const Matrix N = null_basis(rows, d);
    if (N.cols() == 1) out.push_back(N.col(0));
    int pos = target - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] == n - target + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < target; ++i) comb[static_cast<std::size_t>(i)] = comb[static_cast<std::size_t>(i - 1)] + 1;
  }
  return out;
}

CuttingPlaneReport run_domination(const DominationProblem& p, const CuttingPlaneConfig& cp,
                                  const SphereSearchConfig& search, const SphereSearchConfig* confirm) {
  const double r = p.r;
  // Roundoff-level values count as exact zeros so that vanishing directions
  // are recognized as such.
  auto snapped = [](Vector g) {
    for (Eigen::Index i = 0; i < g.size(); ++i)
      if (g(i) < 1e-13) g(i) = 0.0;
    return g;
  };
  auto powered = [r](Vector g) {
    if (r == 2.0) return Vector(g.array().square());
    if (r != 1.0) g = g.array().pow(r);
    return g;
  };
  auto lhs = [&](const Blocks& x) {
    const double v = p.lhs(x);
    return v <= p.lhs_zero ? 0.0 : v;
  };
  CuttingPlaneProblem prob;
  prob.support_size = p.support_size;
  prob.exponent = r;
  prob.row = [&](const Blocks& x) {
    ConstraintRow row;
    row.g = powered(snapped(p.integrand(x)));
    row.h = std::pow(lhs(x), r);
    return row;
  };
  auto ratio = [&](const Blocks& x, const Vector& nu) {
    const double h = std::pow(lhs(x), r);
    const double den = nu.dot(powered(snapped(p.integrand(x))));
    if (!(h > 0.0)) return 0.0;
    if (!(den > 0.0)) return CuttingPlaneReport::kInfinity;
    return h / den;
  };
  std::vector<Blocks> seen = p.init;
  prob.oracle = [&](const Vector& nu) {
    std::vector<Blocks> cands = p.candidates;
    if (p.extra_candidates) {
      auto extra = p.extra_candidates(nu);
      cands.insert(cands.end(), extra.begin(), extra.end());
    }
    const std::size_t tail = std::min<std::size_t>(seen.size(), 64);
    cands.insert(cands.end(), seen.end() - static_cast<std::ptrdiff_t>(tail), seen.end());
    auto f = [&](const Blocks& x) { return ratio(x, nu); };
    auto res = maximize_on_spheres(f, p.dims, cands, search);
    if (confirm && !(res.value > 1.0 + cp.tol_gap)) res = maximize_on_spheres(f, p.dims, cands, *confirm);
    seen.push_back(res.argmax);
    OracleResult o;
    o.point = res.argmax;
    o.ratio = std::max(res.value, 0.0);
    // Other violated local maxima, skipping near-duplicates up to sign.
    auto close = [](const Blocks& a, const Blocks& b) {
      for (std::size_t j = 0; j < a.size(); ++j)
        if (std::min((a[j] - b[j]).norm(), (a[j] + b[j]).norm()) > 1e-6) return false;
      return true;
    };
    std::vector<Blocks> taken{res.argmax};
    for (std::size_t k = 0; k < res.locals.size() && o.extra.size() < 7; ++k) {
      if (!(res.local_values[k] > 1.0 + cp.tol_gap) || !std::isfinite(res.local_values[k])) continue;
      const auto& x = res.locals[k];
      if (std::any_of(taken.begin(), taken.end(), [&](const Blocks& t) { return close(t, x); })) continue;
      taken.push_back(x);
      o.extra.push_back(x);
    }
    return o;
  };
  prob.family_bound = p.family_bound;
  return cutting_plane(prob, p.init, cp);
}

}  // namespace phisum::detail
