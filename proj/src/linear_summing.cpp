#include "phisum/linear_summing.hpp"

#include "engine.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

namespace phisum {

namespace {

bool is_zero(const Matrix& m) { return m.size() == 0 || m.lpNorm<Eigen::Infinity>() == 0.0; }

std::vector<std::vector<int>> small_subsets(int n, int kmax) {
  std::vector<std::vector<int>> out;
  std::vector<int> cur;
  std::function<void(int)> rec = [&](int start) {
    if (!cur.empty()) out.push_back(cur);
    if (static_cast<int>(cur.size()) == kmax) return;
    for (int i = start; i < n; ++i) {
      cur.push_back(i);
      rec(i + 1);
      cur.pop_back();
    }
  };
  rec(0);
  return out;
}

}  // namespace

std::string to_string(PhiKind k) {
  switch (k) {
    case PhiKind::identity: return "identity";
    case PhiKind::sigma_interp: return "sigma_interp";
    case PhiKind::square_over_norm: return "square_over_norm";
    case PhiKind::anchored: return "anchored";
  }
  return "unknown";
}

PhiMap PhiMap::identity(const FiniteSpace& X) { return PhiMap{PhiKind::identity, X, 0.0, {}}; }

PhiMap PhiMap::sigma_interp(const FiniteSpace& X, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw Error(ErrorCode::invalid_argument, "sigma must lie in [0, 1)");
  return PhiMap{PhiKind::sigma_interp, X, sigma, {}};
}

PhiMap PhiMap::square_over_norm(const FiniteSpace& X) { return PhiMap{PhiKind::square_over_norm, X, 0.0, {}}; }

PhiMap PhiMap::anchored(const FiniteSpace& X, const Vector& x0) {
  require_dim(static_cast<std::size_t>(x0.size()), static_cast<std::size_t>(X.dim()), "anchored functional");
  const double n = dual_norm(X, x0);
  if (!(n > 0.0)) throw Error(ErrorCode::invalid_argument, "anchored functional must be nonzero");
  return PhiMap{PhiKind::anchored, X, 0.0, x0 / n};
}

bool PhiMap::convex_power(double r) const {
  constexpr double eps = 1e-12;
  switch (kind) {
    case PhiKind::identity: return r >= 1.0 - eps;
    case PhiKind::sigma_interp: return (1.0 - sigma) * r >= 1.0 - eps;
    case PhiKind::square_over_norm: return 2.0 * r >= 1.0 - eps;
    case PhiKind::anchored: return r >= 2.0 - eps;
  }
  return false;
}

std::string PhiMap::describe() const {
  std::ostringstream os;
  os << to_string(kind);
  if (kind == PhiKind::sigma_interp) os << "(" << sigma << ")";
  return os.str();
}

double phi_eval(const PhiMap& phi, const Vector& x, const Vector& xstar) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(phi.base.dim()), "phi_eval x");
  require_dim(static_cast<std::size_t>(xstar.size()), static_cast<std::size_t>(phi.base.dim()), "phi_eval x*");
  const double d = std::abs(x.dot(xstar));
  switch (phi.kind) {
    case PhiKind::identity: return d;
    case PhiKind::sigma_interp:
      if (phi.sigma == 0.0) return d;
      return std::pow(norm(phi.base, x), phi.sigma) * std::pow(d, 1.0 - phi.sigma);
    case PhiKind::square_over_norm: {
      const double n = norm(phi.base, x);
      return n > 0.0 ? d * d / n : 0.0;
    }
    case PhiKind::anchored: return std::sqrt(std::abs(x.dot(phi.anchor))) * std::sqrt(d);
  }
  return 0.0;
}

DiscreteMeasure DiscreteMeasure::delta(const Vector& point) { return DiscreteMeasure{{point}, {1.0}}; }

void DiscreteMeasure::validate(const FiniteSpace& X) const {
  if (support.size() != weights.size()) throw Error(ErrorCode::invalid_argument, "measure: support/weight count mismatch");
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw Error(ErrorCode::invalid_argument, "measure: negative weight");
    s += w;
  }
  if (std::abs(s - 1.0) > tol::measure) throw Error(ErrorCode::invalid_argument, "measure: weights do not sum to one");
  for (const auto& p : support)
    if (dual_norm(X, p) > 1.0 + tol::ball) throw Error(ErrorCode::invalid_argument, "measure: support point outside the dual ball");
}

WeakNorm weak_phi_norm(const PhiMap& phi, const std::vector<Vector>& family, double r) {
  WeakNorm out;
  if (family.empty()) return out;
  const FiniteSpace& X = phi.base;
  auto value = [&](const Vector& xs) {
    double s = 0.0;
    for (const auto& x : family) s += std::pow(phi_eval(phi, x, xs), r);
    return s;
  };
  if (X.polyhedral() && phi.convex_power(r)) {
    double best = 0.0;
    for (const auto& p : X.dual_extreme_points()) best = std::max(best, value(p));
    out.value = std::pow(best, 1.0 / r);
    return out;
  }
  const bool sigma0 = phi.kind == PhiKind::sigma_interp && phi.sigma == 0.0;
  if ((phi.kind == PhiKind::identity || sigma0) && X.kind() == NormKind::lq && X.q() == 2.0 && r == 2.0) {
    Matrix G = Matrix::Zero(X.dim(), X.dim());
    for (const auto& x : family) G += x * x.transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> es(G);
    out.value = std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
    return out;
  }
  // Search over the dual sphere; Phi is positively homogeneous in x*, so the
  // supremum sits on the sphere.
  out.exact = false;
  MeshConfig mc{false, 32};
  std::vector<Blocks> cands;
  for (const auto& p : representatives_mod_sign(dual_ball_points(X, mc).points)) cands.push_back({p});
  if (X.polyhedral())
    for (const auto& p : X.dual_extreme_points()) cands.push_back({p});
  auto f = [&](const Blocks& u) {
    const double n = dual_norm(X, u[0]);
    return n > 0.0 ? value(u[0] / n) : 0.0;
  };
  SphereSearchConfig sc;
  sc.restarts = 4;
  sc.keep_candidates = 4;
  const auto res = maximize_on_spheres(f, {X.dim()}, cands, sc);
  out.value = std::pow(std::max(res.value, 0.0), 1.0 / r);
  return out;
}

double weak_p_norm(const std::vector<Vector>& family, double p, const FiniteSpace& X) {
  return weak_phi_norm(PhiMap::identity(X), family, p).value;
}

double family_lower_bound(const LinearMap& T, const PhiMap& phi, double r, const std::vector<Vector>& family) {
  double num = 0.0;
  for (const auto& x : family) num += std::pow(norm(T.codomain, T.apply(x)), r);
  if (num == 0.0) return 0.0;
  const double den = weak_phi_norm(phi, family, r).value;
  if (!(den > 0.0)) return kInf;
  return std::pow(num, 1.0 / r) / den;
}

SummingReport summing_constant(const LinearMap& T, const PhiMap& phi, double r, const SummingConfig& cfg) {
  if (!(r >= 1.0)) throw Error(ErrorCode::invalid_argument, "summing exponent must be >= 1");
  require_dim(static_cast<std::size_t>(phi.base.dim()), static_cast<std::size_t>(T.domain.dim()), "Phi base space");
  const FiniteSpace& X = T.domain;
  const int d = X.dim();
  SummingReport rep;
  rep.r = r;

  std::vector<Vector> support;
  if (X.polyhedral() && phi.convex_power(r)) {
    support = representatives_mod_sign(X.dual_extreme_points());
  } else {
    rep.support_exact = false;
    support = dual_ball_points(X, {false, cfg.mesh_resolution}).points;
    if (X.polyhedral()) support.insert(support.end(), X.dual_extreme_points().begin(), X.dual_extreme_points().end());
    if (phi.kind == PhiKind::anchored) support.push_back(phi.anchor);
    support = representatives_mod_sign(support);
  }

  if (is_zero(T.matrix)) {
    rep.converged = true;
    rep.measure = DiscreteMeasure::delta(support.front());
    rep.iterations = 0;
    return rep;
  }

  std::vector<Blocks> init;
  if (X.polyhedral()) {
    for (const auto& v : representatives_mod_sign(X.primal_extreme_points())) init.push_back({v / v.norm()});
  } else {
    for (const auto& v : representatives_mod_sign(primal_sphere_mesh(X, 4))) init.push_back({v / v.norm()});
  }
  std::vector<Blocks> cands = init;
  for (const auto& v : representatives_mod_sign(primal_sphere_mesh(X, 8))) cands.push_back({v});

  detail::DominationProblem prob;
  prob.dims = {d};
  prob.support_size = support.size();
  prob.r = r;
  prob.lhs = [&](const Blocks& x) { return norm(T.codomain, T.matrix * x[0]); };
  prob.lhs_zero = 1e-10 * T.matrix.norm();
  prob.integrand = [&](const Blocks& x) {
    Vector g(static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j) g(static_cast<Eigen::Index>(j)) = phi_eval(phi, x[0], support[j]);
    return g;
  };
  prob.init = init;
  prob.candidates = cands;
  prob.extra_candidates = [&](const Vector& nu) {
    std::vector<Vector> active;
    for (std::size_t j = 0; j < support.size(); ++j)
      if (nu(static_cast<Eigen::Index>(j)) > 0.0) active.push_back(support[j]);
    if (phi.kind == PhiKind::anchored) active.push_back(phi.anchor);
    std::vector<Blocks> out;
    for (const auto& v : detail::arrangement_rays(active, d, 4000)) out.push_back({v});
    return out;
  };
  auto family_of = [&](const std::vector<Blocks>& pts, const Vector& w) {
    std::vector<Vector> fam;
    for (std::size_t k = 0; k < pts.size() && static_cast<Eigen::Index>(k) < w.size(); ++k) {
      const double wk = w(static_cast<Eigen::Index>(k));
      if (wk > 0.0) fam.push_back(std::pow(wk, 1.0 / r) * pts[k][0]);
    }
    return fam;
  };
  prob.family_bound = [&](const std::vector<Blocks>& pts, const Vector& w) {
    const auto fam = family_of(pts, w);
    return fam.empty() ? 0.0 : family_lower_bound(T, phi, r, fam);
  };

  CuttingPlaneConfig cp{cfg.max_iter, cfg.tol_gap};
  const auto res = detail::run_domination(prob, cp, cfg.search);

  rep.iterations = res.iterations;
  rep.history = res.history;
  rep.converged = res.converged;
  rep.weak_duality_held = res.weak_duality_held;
  rep.upper_bound = res.upper_bound;
  rep.lower_bound = res.lower_bound;
  rep.lb_family = family_of(res.lb_points, res.lb_weights);

  // Small exhaustive families of primal vertices.
  if (X.polyhedral() && rep.support_exact) {
    const auto verts = representatives_mod_sign(X.primal_extreme_points());
    if (verts.size() <= 8) {
      for (const auto& sub : small_subsets(static_cast<int>(verts.size()), 4)) {
        std::vector<Vector> fam;
        for (int i : sub) fam.push_back(verts[static_cast<std::size_t>(i)]);
        const double lb = family_lower_bound(T, phi, r, fam);
        if (lb > rep.lower_bound && lb <= rep.upper_bound + tol::duality * std::max(1.0, rep.upper_bound)) {
          rep.lower_bound = lb;
          rep.lb_family = fam;
        }
      }
    }
  }
  rep.lower_exact = rep.lb_family.empty() || weak_phi_norm(phi, rep.lb_family, r).exact;

  if (std::isfinite(rep.upper_bound)) {
    const double mass = res.weights.sum();
    for (Eigen::Index j = 0; j < res.weights.size(); ++j) {
      if (res.weights(j) <= 1e-15 * mass) continue;
      rep.measure.support.push_back(support[static_cast<std::size_t>(j)]);
      rep.measure.weights.push_back(res.weights(j) / mass);
    }
    if (rep.measure.support.empty()) rep.measure = DiscreteMeasure::delta(support.front());
  }
  rep.gap = rep.upper_bound - rep.lower_bound;
  rep.gap_open = !rep.converged || !std::isfinite(rep.upper_bound) ||
                 !(rep.gap <= tol::duality * std::max(1.0, rep.upper_bound) + cfg.tol_gap * rep.upper_bound);
  return rep;
}

ResidualReport check_domination(const LinearMap& T, const PhiMap& phi, double r, const DiscreteMeasure& mu, double C,
                                const std::vector<Vector>& samples, double tol) {
  ResidualReport out;
  out.max_residual = -kInf;
  for (const auto& x : samples) {
    const double lhs = norm(T.codomain, T.apply(x));
    const double integral = mu.integrate([&](const Vector& s) { return std::pow(phi_eval(phi, x, s), r); });
    out.max_residual = std::max(out.max_residual, lhs - C * std::pow(integral, 1.0 / r));
  }
  if (samples.empty()) out.max_residual = 0.0;
  out.pass = out.max_residual <= tol;
  return out;
}

MixingReport example3_mixing_check(const LinearMap& T, const Vector& x0, const DiscreteMeasure& eta, double C,
                                   const std::vector<Vector>& samples, double tol) {
  MixingReport out;
  out.mixed.support.push_back(x0);
  out.mixed.weights.push_back(0.5);
  for (std::size_t j = 0; j < eta.support.size(); ++j) {
    out.mixed.support.push_back(eta.support[j]);
    out.mixed.weights.push_back(0.5 * eta.weights[j]);
  }
  out.max_residual = samples.empty() ? 0.0 : -kInf;
  for (const auto& x : samples) {
    const double lhs = norm(T.codomain, T.apply(x));
    const double rhs = C * out.mixed.integrate([&](const Vector& s) { return std::abs(x.dot(s)); });
    out.max_residual = std::max(out.max_residual, lhs - rhs);
  }
  out.pass = out.max_residual <= tol;
  return out;
}

std::vector<Vector> random_samples(int d, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<Vector> out;
  for (int k = 0; k < count; ++k) {
    Vector x(d);
    for (int i = 0; i < d; ++i) x(i) = g(rng);
    out.push_back(x);
  }
  return out;
}

}  // namespace phisum
