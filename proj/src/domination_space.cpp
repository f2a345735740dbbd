#include "phisum/domination_space.hpp"

#include "engine.hpp"
#include "phisum/lp.hpp"

#include <algorithm>
#include <cmath>

namespace phisum {

GaugeResult hull_gauge(const std::function<double(const Vector&)>& cost, const Vector& x,
                       const std::vector<Vector>& seed_parts, const SeminormConfig& cfg) {
  GaugeResult out;
  const int d = static_cast<int>(x.size());
  const double xn = x.norm();
  if (xn == 0.0) return out;

  std::vector<Vector> dirs;
  auto add_dir = [&](const Vector& v) {
    const double n = v.norm();
    if (n > 0.0 && std::isfinite(n)) dirs.push_back(v / n);
  };
  for (const auto& s : seed_parts) add_dir(s);
  add_dir(x);
  for (int i = 0; i < d; ++i) add_dir(Vector::Unit(d, i));
  const auto euclid = FiniteSpace::lq(d, 2.0);
  for (const auto& u : representatives_mod_sign(primal_sphere_mesh(euclid, d == 2 ? cfg.mesh_resolution : 4))) add_dir(u);
  std::vector<double> costs;
  auto unit_cost = [&](const Vector& u) {
    const double c = cost(u);
    return c < 1e-14 ? 0.0 : c;
  };
  for (const auto& u : dirs) costs.push_back(unit_cost(u));

  // min sum_k c_k (w+_k + w-_k)  s.t.  sum_k (w+_k - w-_k) u_k = x, written as
  // two inequality blocks; lambda comes from their multipliers.
  Vector lambda = Vector::Zero(d);
  Vector w;
  for (int round = 0; round < cfg.max_rounds; ++round) {
    const auto n = static_cast<Eigen::Index>(dirs.size());
    Matrix U(d, 2 * n);
    Vector c(2 * n);
    for (Eigen::Index k = 0; k < n; ++k) {
      U.col(2 * k) = dirs[static_cast<std::size_t>(k)];
      U.col(2 * k + 1) = -dirs[static_cast<std::size_t>(k)];
      c(2 * k) = c(2 * k + 1) = costs[static_cast<std::size_t>(k)];
    }
    LpProblem lp;
    lp.objective = c;
    lp.rows.resize(2 * d, 2 * n);
    lp.rows << U, -U;
    lp.rhs.resize(2 * d);
    lp.rhs << x, -x;
    const auto sol = solve_lp(lp);
    if (sol.status != LpStatus::optimal && sol.status != LpStatus::ill_conditioned)
      throw Error(ErrorCode::internal, "seminorm LP failed: " + std::string(to_string(sol.status)));
    lambda = sol.duals.head(d) - sol.duals.tail(d);
    w = sol.t;

    auto f = [&](const Blocks& b) {
      const double num = std::abs(lambda.dot(b[0]));
      const double c = unit_cost(b[0]);
      if (num < 1e-14) return 0.0;
      if (c == 0.0) return kInf;
      return num / c;
    };
    std::vector<Blocks> cands;
    for (const auto& u : dirs) cands.push_back({u});
    const auto res = maximize_on_spheres(f, {d}, cands, cfg.search);
    const double rho = std::max(res.value, 0.0);
    const double value = x.dot(lambda);
    if (std::isfinite(rho)) out.lower = std::max(out.lower, rho > 1.0 ? value / rho : value);
    if (rho <= 1.0 + 1e-12) break;
    add_dir(res.argmax[0]);
    costs.push_back(unit_cost(dirs.back()));
  }

  Vector acc = Vector::Zero(d);
  for (std::size_t k = 0; k < static_cast<std::size_t>(w.size() / 2); ++k) {
    const double s = w(2 * static_cast<Eigen::Index>(k)) - w(2 * static_cast<Eigen::Index>(k) + 1);
    if (std::abs(s) <= 1e-15 * xn) continue;
    out.parts.push_back(s * dirs[k]);
    acc += out.parts.back();
  }
  const Vector res = x - acc;
  if (res.norm() > 0.0) {
    // Fold roundoff into the part it perturbs least.
    if (out.parts.empty()) out.parts.push_back(res);
    else out.parts.front() += res;
  }
  for (const auto& p : out.parts) out.value += cost(p);
  out.lower = std::min(out.lower, out.value);
  return out;
}

double DominationSpaceModel::single_cost(const Vector& x) const {
  const double s = measure.integrate([&](const Vector& e) { return std::pow(phi_eval(phi, x, e), r); });
  return std::pow(s, 1.0 / r);
}

namespace {

bool subadditive_cost(const PhiMap& phi) {
  return phi.kind == PhiKind::identity || (phi.kind == PhiKind::sigma_interp && phi.sigma == 0.0);
}

}  // namespace

GaugeResult seminorm(const Vector& x, const DominationSpaceModel& model, const std::vector<Vector>& seed_parts) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(model.base.dim()), "seminorm");
  if (model.subadditive) {
    GaugeResult out;
    out.value = out.lower = model.single_cost(x);
    if (x.norm() > 0.0) out.parts.push_back(x);
    return out;
  }
  std::vector<Vector> seeds = seed_parts;
  seeds.insert(seeds.end(), model.null_basis.begin(), model.null_basis.end());
  return hull_gauge([&](const Vector& v) { return model.single_cost(v); }, x, seeds, model.cfg);
}

DominationSpaceModel build_model(const FiniteSpace& X, const PhiMap& phi, const DiscreteMeasure& mu, double r,
                                 const SeminormConfig& cfg, int samples) {
  if (!(r >= 1.0)) throw Error(ErrorCode::invalid_argument, "domination exponent must be >= 1");
  require_dim(static_cast<std::size_t>(phi.base.dim()), static_cast<std::size_t>(X.dim()), "Phi base space");
  mu.validate(X);
  DominationSpaceModel m{X, phi, mu, r, cfg, {}, 0.0, subadditive_cost(phi)};
  const int d = X.dim();

  std::vector<Vector> active;
  for (std::size_t j = 0; j < mu.support.size(); ++j)
    if (mu.weights[j] > 0.0) active.push_back(mu.support[j]);
  Matrix N = detail::null_basis(active, d);
  if (phi.kind == PhiKind::anchored) {
    // Zero set of the cost is ker x0 together with the common kernel.
    const Matrix K0 = detail::null_basis({phi.anchor}, d);
    bool inside = true;
    for (Eigen::Index c = 0; c < N.cols(); ++c) inside = inside && std::abs(N.col(c).dot(phi.anchor)) <= 1e-12;
    N = inside ? K0 : Matrix(Matrix::Identity(d, d));
  }
  for (Eigen::Index c = 0; c < N.cols(); ++c) m.null_basis.push_back(N.col(c));

  for (const auto& x : random_samples(d, samples, 0xD0D0ULL)) {
    const double nx = norm(X, x);
    if (nx > 0.0) m.continuity = std::max(m.continuity, seminorm(x, m).value / nx);
  }
  return m;
}

Factorization build_factorization(const LinearMap& T, const PhiMap& phi, const SummingReport& report,
                                  const SeminormConfig& cfg) {
  if (!report.certified()) throw Error(ErrorCode::uncertified, "no certified measure");
  Factorization f{build_model(T.domain, phi, report.measure, report.r, cfg), T, report.upper_bound, {}, 0.0};
  const int d = T.domain.dim();
  f.projector = Matrix::Identity(d, d);
  for (const auto& n : f.model.null_basis) {
    f.projector -= n * n.transpose();
    f.well_defined_residual = std::max(f.well_defined_residual, norm(T.codomain, T.matrix * n));
  }
  return f;
}

DiagramReport verify_diagram(const Factorization& f, const std::vector<Vector>& samples, double tol) {
  DiagramReport out;
  for (const auto& x : samples) {
    const Vector tx = f.T.apply(x);
    const Vector hat = f.apply_hat(x);
    out.diagram_residual = std::max(out.diagram_residual, norm(f.T.codomain, tx - hat));
    const double sem = seminorm(x, f.model).lower;
    out.bound_residual = std::max(out.bound_residual, norm(f.T.codomain, hat) - f.norm_bound * sem);
  }
  out.pass = out.diagram_residual <= tol && out.bound_residual <= tol;
  return out;
}

double p_concavity_ratio(const DominationSpaceModel& model, double p, const std::vector<std::vector<Vector>>& families) {
  double best = 0.0;
  for (const auto& fam : families) {
    if (fam.empty()) continue;
    const double den = weak_p_norm(fam, p, model.base);
    if (!(den > 0.0)) continue;
    double num = 0.0;
    for (const auto& x : fam) num += std::pow(seminorm(x, model).value, p);
    best = std::max(best, std::pow(num, 1.0 / p) / den);
  }
  return best;
}

double inclusion_family_ratio(const DominationSpaceModel& model, const std::vector<Vector>& family) {
  double num = 0.0;
  for (const auto& x : family) num += std::pow(seminorm(x, model).value, model.r);
  if (num == 0.0) return 0.0;
  const double den = weak_phi_norm(model.phi, family, model.r).value;
  return den > 0.0 ? std::pow(num, 1.0 / model.r) / den : kInf;
}

}  // namespace phisum
