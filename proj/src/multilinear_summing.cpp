#include "phisum/multilinear_summing.hpp"

#include "engine.hpp"

#include <algorithm>
#include <cmath>

namespace phisum {

using detail::factor_starts;
using detail::normalized;
using detail::products;
using detail::subsets_up_to;

namespace {

bool is_zero(const Matrix& m) { return m.size() == 0 || m.cwiseAbs().maxCoeff() == 0.0; }

OpNormConfig norm_cfg(const TensorSpace& s) {
  OpNormConfig c;
  c.mode = s.polyhedral() ? OpNormMode::exact : OpNormMode::mesh;
  return c;
}

std::vector<Vector> factor_support(const FiniteSpace& X, const PhiMap& phi, double r, int mesh) {
  if (X.polyhedral() && phi.convex_power(r)) return representatives_mod_sign(X.dual_extreme_points());
  auto s = dual_ball_points(X, {false, mesh}).points;
  if (X.polyhedral()) s.insert(s.end(), X.dual_extreme_points().begin(), X.dual_extreme_points().end());
  if (phi.kind == PhiKind::anchored) s.push_back(phi.anchor);
  return representatives_mod_sign(s);
}

}  // namespace

TensorPhi TensorPhi::identity(const TensorSpace& space) { return {TensorPhiKind::identity, space, 0.0}; }

TensorPhi TensorPhi::factorable(const TensorSpace& space, double sigma) {
  if (!(sigma >= 0.0 && sigma < 1.0)) throw Error(ErrorCode::invalid_argument, "sigma must lie in [0,1)");
  return {TensorPhiKind::factorable, space, sigma};
}

double tensor_phi_eval(const TensorPhi& phi, const Vector& coords, const Vector& form, double fn) {
  require_dim(static_cast<std::size_t>(coords.size()), static_cast<std::size_t>(phi.space.dim()), "tensor Phi");
  const double v = std::abs(coords.dot(form));
  if (phi.kind == TensorPhiKind::identity || phi.sigma == 0.0) return v;
  if (fn < 0.0) fn = form_norm(phi.space, form, norm_cfg(phi.space));
  return fn > 0.0 ? v * std::pow(fn, -phi.sigma) : 0.0;
}

double tensor_phi_representation(const TensorPhi& phi, const std::vector<VmTerm>& terms, const Vector& form) {
  const double s = phi.kind == TensorPhiKind::identity ? 0.0 : phi.sigma;
  double total = 0.0;
  for (const auto& t : terms) {
    double prod = 1.0;
    for (std::size_t j = 0; j < t.factors.size(); ++j) prod *= norm(phi.space.factors[j], t.factors[j]);
    const double val = std::abs(outer(t.factors).dot(form));
    total += std::abs(t.lambda) * std::pow(val, 1.0 - s) * std::pow(prod, s);
  }
  return total;
}

void CoefficientFamily::validate() const {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "coefficient family needs at least one row");
  const auto dims = space.dims();
  for (const auto& row : rows)
    for (const auto& t : row) {
      require_dim(t.factors.size(), dims.size(), "coefficient family order");
      for (std::size_t j = 0; j < dims.size(); ++j)
        require_dim(static_cast<std::size_t>(t.factors[j].size()), static_cast<std::size_t>(dims[j]), "coefficient family factor");
    }
}

std::vector<VmElement> CoefficientFamily::elements() const {
  std::vector<VmElement> out;
  for (const auto& row : rows) out.push_back(embed_vm(space, row));
  return out;
}

std::vector<VmTerm> canonical_terms(const TensorSpace& space, const Vector& coords) {
  const auto dims = space.dims();
  std::vector<VmTerm> out;
  for (Eigen::Index t = 0; t < coords.size(); ++t) {
    if (coords(t) == 0.0) continue;
    VmTerm term;
    term.lambda = coords(t);
    Eigen::Index rest = t;
    term.factors.resize(dims.size());
    for (std::size_t j = dims.size(); j-- > 0;) {
      term.factors[j] = Vector::Unit(dims[j], rest % dims[j]);
      rest /= dims[j];
    }
    out.push_back(std::move(term));
  }
  return out;
}

FamilyBound strongly_family_lower_bound(const MultilinearMap& T, const TensorPhi& phi, double r,
                                        const CoefficientFamily& fam, const FormsBallModel& model) {
  fam.validate();
  FamilyBound out;
  out.approx_denominator = !model.exact;
  const auto elems = fam.elements();
  double num = 0.0;
  for (const auto& v : elems) num += std::pow(norm(T.codomain, T.coeffs * v.coords), r);
  if (num == 0.0) return out;
  double den = 0.0;
  for (const auto& f : model.forms) {
    double s = 0.0;
    for (const auto& v : elems) s += std::pow(tensor_phi_eval(phi, v.coords, f, 1.0), r);
    den = std::max(den, s);
  }
  out.value = den > 0.0 ? std::pow(num / den, 1.0 / r) : kInf;
  return out;
}

StronglyReport strongly_constant(const MultilinearMap& T, const TensorPhi& phi, double r, const StronglyConfig& cfg) {
  if (!(r >= 1.0)) throw Error(ErrorCode::invalid_argument, "summing exponent must be >= 1");
  require_dim(static_cast<std::size_t>(phi.space.dim()), static_cast<std::size_t>(T.domains.dim()), "tensor Phi space");
  const auto model = forms_ball_model(T.domains, cfg.forms);
  const int D = T.domains.dim();
  const auto& support = model.forms;
  StronglyReport out;
  out.lb_family.space = T.domains;
  out.approx_denominator = !model.exact;
  SummingReport& rep = out.summary;
  rep.r = r;
  rep.support_exact = model.exact;

  if (is_zero(T.coeffs)) {
    rep.converged = true;
    rep.measure = DiscreteMeasure::delta(support.front());
    return out;
  }

  std::vector<Vector> starts;
  if (T.domains.polyhedral()) {
    starts = extreme_elementary_tensors(T.domains);
  } else {
    std::vector<std::vector<Vector>> lists;
    for (const auto& X : T.domains.factors) lists.push_back(factor_starts(X));
    for (const auto& b : products(lists, 512)) starts.push_back(outer(b));
  }
  std::vector<Blocks> init;
  for (const auto& v : starts) init.push_back({v / v.norm()});
  std::vector<Blocks> cands = init;
  for (const auto& v : representatives_mod_sign(primal_sphere_mesh(FiniteSpace::lq(D, 2.0), D <= 4 ? 4 : 2)))
    cands.push_back({v});

  auto family_of = [&](const std::vector<Blocks>& pts, const Vector& w) {
    CoefficientFamily fam{T.domains, {}};
    for (std::size_t k = 0; k < pts.size() && static_cast<Eigen::Index>(k) < w.size(); ++k) {
      const double wk = w(static_cast<Eigen::Index>(k));
      if (wk > 0.0) fam.rows.push_back(canonical_terms(T.domains, std::pow(wk, 1.0 / r) * pts[k][0]));
    }
    return fam;
  };

  detail::DominationProblem prob;
  prob.dims = {D};
  prob.support_size = support.size();
  prob.r = r;
  prob.lhs = [&](const Blocks& x) { return norm(T.codomain, T.coeffs * x[0]); };
  prob.lhs_zero = 1e-10 * T.coeffs.norm();
  prob.integrand = [&](const Blocks& x) {
    Vector g(static_cast<Eigen::Index>(support.size()));
    for (std::size_t j = 0; j < support.size(); ++j)
      g(static_cast<Eigen::Index>(j)) = tensor_phi_eval(phi, x[0], support[j], 1.0);
    return g;
  };
  prob.init = init;
  prob.candidates = cands;
  prob.extra_candidates = [&](const Vector& nu) {
    std::vector<Vector> active;
    for (std::size_t j = 0; j < support.size(); ++j)
      if (nu(static_cast<Eigen::Index>(j)) > 0.0) active.push_back(support[j]);
    std::vector<Blocks> o;
    for (const auto& v : detail::arrangement_rays(active, D, 4000)) o.push_back({v});
    return o;
  };
  prob.family_bound = [&](const std::vector<Blocks>& pts, const Vector& w) {
    const auto fam = family_of(pts, w);
    return fam.rows.empty() ? 0.0 : strongly_family_lower_bound(T, phi, r, fam, model).value;
  };

  const auto res = detail::run_domination(prob, {cfg.summing.max_iter, cfg.summing.tol_gap}, cfg.summing.search);
  rep.iterations = res.iterations;
  rep.history = res.history;
  rep.converged = res.converged;
  rep.weak_duality_held = res.weak_duality_held;
  rep.upper_bound = res.upper_bound;
  rep.lower_bound = res.lower_bound;
  out.lb_family = family_of(res.lb_points, res.lb_weights);

  // Direct search over families of elementary vertex tensors.
  if (T.domains.polyhedral() && starts.size() <= 10) {
    for (const auto& sub : subsets_up_to(static_cast<int>(starts.size()), cfg.family_size)) {
      CoefficientFamily fam{T.domains, {}};
      for (int i : sub) fam.rows.push_back(canonical_terms(T.domains, starts[static_cast<std::size_t>(i)]));
      const double lb = strongly_family_lower_bound(T, phi, r, fam, model).value;
      out.family_check = std::max(out.family_check, lb);
      if (lb > rep.lower_bound && lb <= rep.upper_bound + tol::duality * std::max(1.0, rep.upper_bound)) {
        rep.lower_bound = lb;
        out.lb_family = fam;
      }
    }
  }
  out.family_check = std::max(out.family_check, rep.lower_bound);
  out.disagreement = out.family_check > rep.upper_bound + tol::duality * std::max(1.0, rep.upper_bound);
  rep.lower_exact = model.exact;
  if (std::isfinite(rep.upper_bound)) rep.measure = normalized(support, res.weights);
  rep.gap = rep.upper_bound - rep.lower_bound;
  rep.gap_open = !rep.converged || !std::isfinite(rep.upper_bound) ||
                 !(rep.gap <= tol::duality * std::max(1.0, rep.upper_bound) + cfg.summing.tol_gap * rep.upper_bound);
  return out;
}

LinearMap linearized_operator(const MultilinearMap& T, const FormsBallModel& model) {
  std::string label = "proj(";
  for (std::size_t j = 0; j < T.domains.factors.size(); ++j)
    label += (j ? "," : "") + T.domains.factors[j].describe();
  label += ")";
  return LinearMap(FiniteSpace::polytope(model.forms, label), T.codomain, linearize(T).matrix);
}

StronglyFactorization strongly_factorization(const MultilinearMap& T, const StronglyReport& report,
                                             const StronglyConfig& cfg) {
  if (!report.summary.certified()) throw Error(ErrorCode::uncertified, "no certified measure");
  auto model = forms_ball_model(T.domains, cfg.forms);
  const auto L = linearized_operator(T, model);
  auto lin = build_factorization(L, PhiMap::identity(L.domain), report.summary);
  return {T, std::move(model), std::move(lin)};
}

MultiDiagramReport verify_strongly_diagram(const StronglyFactorization& f, int samples, std::uint64_t seed, double tol) {
  MultiDiagramReport out;
  const auto dims = f.T.domains.dims();
  std::vector<std::vector<Vector>> per;
  for (std::size_t j = 0; j < dims.size(); ++j) per.push_back(random_samples(dims[j], samples, seed + j));
  for (int s = 0; s < samples; ++s) {
    std::vector<Vector> xs;
    for (std::size_t j = 0; j < dims.size(); ++j) xs.push_back(per[j][static_cast<std::size_t>(s)]);
    const Vector v = outer(xs);
    const Vector hat = f.linear.apply_hat(v);
    out.diagram_residual = std::max(out.diagram_residual, norm(f.T.codomain, f.T.apply(xs) - hat));
    const double sem = seminorm(v, f.linear.model).lower;
    out.bound_residual = std::max(out.bound_residual, norm(f.T.codomain, hat) - f.linear.norm_bound * sem);
  }
  out.pass = out.diagram_residual <= tol && out.bound_residual <= tol;
  return out;
}

double multi_ideal_exponent(const std::vector<double>& ps) {
  if (ps.empty()) throw Error(ErrorCode::invalid_argument, "need at least one exponent");
  double s = 0.0;
  for (double q : ps) {
    if (!(q >= 1.0)) throw Error(ErrorCode::invalid_argument, "exponents p_j must be >= 1");
    s += 1.0 / q;
  }
  return 1.0 / s;
}

void check_exponent_identity(double p, const std::vector<double>& ps) {
  const double q = multi_ideal_exponent(ps);
  if (!(p > 0.0) || std::abs(1.0 / p - 1.0 / q) > 1e-12) throw Error(ErrorCode::invalid_argument, "exponent identity violated");
}

double multi_ideal_lower_bound(const MultilinearMap& T, const std::vector<PhiMap>& phis, const std::vector<double>& ps,
                               const std::vector<std::vector<Vector>>& rows) {
  const std::size_t m = static_cast<std::size_t>(T.order());
  require_dim(phis.size(), m, "Phi list");
  require_dim(ps.size(), m, "exponent list");
  const double p = multi_ideal_exponent(ps);
  double num = 0.0;
  for (const auto& row : rows) num += std::pow(norm(T.codomain, T.apply(row)), p);
  if (num == 0.0) return 0.0;
  double den = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    std::vector<Vector> col;
    for (const auto& row : rows) col.push_back(row[j]);
    den *= weak_phi_norm(phis[j], col, ps[j]).value;
  }
  return den > 0.0 ? std::pow(num, 1.0 / p) / den : kInf;
}

MultiMeasureCertificate multi_ideal_upper_bound(const MultilinearMap& T, const std::vector<PhiMap>& phis,
                                                const std::vector<double>& ps, const MultiIdealConfig& cfg) {
  const std::size_t m = static_cast<std::size_t>(T.order());
  require_dim(phis.size(), m, "Phi list");
  require_dim(ps.size(), m, "exponent list");
  MultiMeasureCertificate out;
  out.p = multi_ideal_exponent(ps);
  const auto dims = T.domains.dims();

  std::vector<std::vector<Vector>> supports;
  for (std::size_t j = 0; j < m; ++j) {
    require_dim(static_cast<std::size_t>(phis[j].base.dim()), static_cast<std::size_t>(dims[j]), "Phi base space");
    supports.push_back(factor_support(T.domains.factors[j], phis[j], ps[j], cfg.summing.mesh_resolution));
    DiscreteMeasure mu;
    mu.support = supports[j];
    mu.weights.assign(supports[j].size(), 1.0 / static_cast<double>(supports[j].size()));
    out.measures.push_back(std::move(mu));
  }
  if (is_zero(T.coeffs)) {
    out.C = 0.0;
    out.converged = true;
    return out;
  }

  std::vector<std::vector<Vector>> starts;
  for (const auto& X : T.domains.factors) starts.push_back(factor_starts(X));
  const auto init = products(starts, 4096);

  auto integral = [&](std::size_t l, const Vector& x) {
    return out.measures[l].integrate([&](const Vector& s) { return std::pow(phi_eval(phis[l], x, s), ps[l]); });
  };
  const double tnorm = T.coeffs.norm();

  double best = kInf;
  std::vector<DiscreteMeasure> best_measures = out.measures;
  bool best_converged = false;
  double cycle_start = kInf;
  // A converged step fixes C only up to its own cutting-plane gap.
  const double step_tol = std::max(cfg.rel_change, cfg.summing.tol_gap);
  for (int cycle = 0; cycle < cfg.max_cycles; ++cycle) {
    out.cycles = cycle + 1;
    double last = kInf;
    for (std::size_t j = 0; j < m; ++j) {
      detail::DominationProblem prob;
      prob.dims = dims;
      prob.support_size = supports[j].size();
      prob.r = ps[j];
      prob.lhs = [&, j](const Blocks& x) {
        const double t = norm(T.codomain, T.apply(x));
        if (t <= 1e-13 * tnorm) return 0.0;
        double den = 1.0;
        for (std::size_t l = 0; l < m; ++l)
          if (l != j) den *= std::pow(integral(l, x[l]), 1.0 / ps[l]);
        return t / std::max(den, 1e-12);
      };
      prob.lhs_zero = 0.0;
      prob.integrand = [&, j](const Blocks& x) {
        Vector g(static_cast<Eigen::Index>(supports[j].size()));
        for (std::size_t s = 0; s < supports[j].size(); ++s)
          g(static_cast<Eigen::Index>(s)) = phi_eval(phis[j], x[j], supports[j][s]);
        return g;
      };
      prob.init = init;
      prob.candidates = init;
      prob.family_bound = [](const std::vector<Blocks>&, const Vector&) { return 0.0; };
      const auto res = detail::run_domination(prob, {cfg.summing.max_iter, cfg.summing.tol_gap}, cfg.summing.search);
      if (!res.converged || !std::isfinite(res.upper_bound)) {
        out.stalled = true;
        continue;
      }
      out.measures[j] = normalized(supports[j], res.weights);
      const double c = res.upper_bound;
      out.history.push_back(c);
      if (c > last * (1.0 + step_tol)) out.stalled = true;
      last = c;
      if (c <= best) {
        best = c;
        best_measures = out.measures;
        best_converged = true;
      }
    }
    if (std::isfinite(cycle_start) && std::abs(cycle_start - last) <= step_tol * std::max(last, 1e-300)) break;
    cycle_start = last;
  }
  out.C = best;
  out.measures = best_measures;
  out.converged = best_converged;

  // Families of vertex tuples for the lower bound.
  const auto tuples = products(starts, 64);
  if (tuples.size() <= 8) {
    for (const auto& sub : subsets_up_to(static_cast<int>(tuples.size()), 3)) {
      std::vector<std::vector<Vector>> rows;
      for (int i : sub) rows.push_back(tuples[static_cast<std::size_t>(i)]);
      out.lower_bound = std::max(out.lower_bound, multi_ideal_lower_bound(T, phis, ps, rows));
    }
  } else {
    for (const auto& t : tuples) out.lower_bound = std::max(out.lower_bound, multi_ideal_lower_bound(T, phis, ps, {t}));
  }
  return out;
}

MultiFactorization factor_multilinear(const MultilinearMap& T, const MultiMeasureCertificate& cert,
                                      const std::vector<PhiMap>& phis, const std::vector<double>& ps, int samples,
                                      double tol) {
  if (!cert.certified()) throw Error(ErrorCode::uncertified, "no certified measures");
  const std::size_t m = static_cast<std::size_t>(T.order());
  require_dim(phis.size(), m, "Phi list");
  require_dim(ps.size(), m, "exponent list");
  require_dim(cert.measures.size(), m, "measure list");
  MultiFactorization out;
  out.C = cert.C;
  const auto dims = T.domains.dims();
  std::vector<std::vector<Vector>> per;
  for (std::size_t j = 0; j < m; ++j) {
    out.models.push_back(build_model(T.domains.factors[j], phis[j], cert.measures[j], ps[j], {}, 20));
    Matrix P = Matrix::Identity(dims[j], dims[j]);
    for (const auto& n : out.models[j].null_basis) P -= n * n.transpose();
    out.projectors.push_back(P);
    per.push_back(random_samples(dims[j], samples, 0xFAC7ULL + j));
  }
  out.factor_norms.assign(m, 0.0);
  for (int s = 0; s < samples; ++s) {
    std::vector<Vector> xs, px;
    double prod_lower = 1.0;
    for (std::size_t j = 0; j < m; ++j) {
      const Vector& x = per[j][static_cast<std::size_t>(s)];
      xs.push_back(x);
      px.push_back(out.projectors[j] * x);
      const auto sem = seminorm(x, out.models[j]);
      prod_lower *= sem.lower;
      out.factor_bound_residual = std::max(out.factor_bound_residual, sem.value - out.models[j].single_cost(x));
      out.factor_norms[j] = std::max(out.factor_norms[j], sem.value / norm(T.domains.factors[j], x));
    }
    const Vector hat = T.apply(px);
    out.pointwise_residual = std::max(out.pointwise_residual, norm(T.codomain, T.apply(xs) - hat));
    out.hat_bound_residual = std::max(out.hat_bound_residual, norm(T.codomain, hat) - cert.C * prod_lower);
  }
  out.pass = out.pointwise_residual <= tol && out.factor_bound_residual <= tol && out.hat_bound_residual <= tol;
  return out;
}

}  // namespace phisum
