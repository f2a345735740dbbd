#include "phisum/dimant_sigma.hpp"

#include "engine.hpp"

#include <algorithm>
#include <cmath>

namespace phisum {

using detail::factor_starts;
using detail::normalized;
using detail::products;
using detail::subsets_up_to;

namespace {

double row_norm_product(const TensorSpace& S, const std::vector<Vector>& row) {
  double prod = 1.0;
  for (std::size_t j = 0; j < row.size(); ++j) prod *= norm(S.factors[j], row[j]);
  return prod;
}

void check_sigma(double p, double sigma) {
  if (!(p >= 1.0)) throw Error(ErrorCode::invalid_argument, "p must be >= 1");
  if (!(sigma >= 0.0 && sigma < 1.0)) throw Error(ErrorCode::invalid_argument, "sigma must lie in [0,1)");
}

SummingReport finish(SummingReport rep, const SummingConfig& cfg) {
  rep.gap = rep.upper_bound - rep.lower_bound;
  rep.gap_open = !rep.converged || !std::isfinite(rep.upper_bound) ||
                 !(rep.gap <= tol::duality * std::max(1.0, rep.upper_bound) + cfg.tol_gap * rep.upper_bound);
  return rep;
}

}  // namespace

void PlainFamily::validate() const {
  if (rows.empty()) throw Error(ErrorCode::invalid_argument, "family needs at least one row");
  const auto dims = space.dims();
  for (const auto& row : rows) {
    require_dim(row.size(), dims.size(), "family order");
    for (std::size_t j = 0; j < dims.size(); ++j)
      require_dim(static_cast<std::size_t>(row[j].size()), static_cast<std::size_t>(dims[j]), "family factor");
  }
}

CoefficientFamily as_coefficient_family(const PlainFamily& fam) {
  CoefficientFamily out{fam.space, {}};
  for (const auto& row : fam.rows) out.rows.push_back({VmTerm{1.0, row}});
  return out;
}

double sigma_exponent(double p, double sigma) {
  check_sigma(p, sigma);
  return p / (1.0 - sigma);
}

double strongly_denominator(const PlainFamily& fam, double r, const FormsBallModel& model) {
  fam.validate();
  std::vector<Vector> ts;
  for (const auto& row : fam.rows) ts.push_back(outer(row));
  double best = 0.0;
  for (const auto& f : model.forms) {
    double s = 0.0;
    for (const auto& t : ts) s += std::pow(std::abs(t.dot(f)), r);
    best = std::max(best, s);
  }
  return std::pow(best, 1.0 / r);
}

double delta_p_sigma(const PlainFamily& fam, double p, double sigma, const FormsBallModel& model) {
  const double r = sigma_exponent(p, sigma);
  fam.validate();
  std::vector<Vector> ts;
  std::vector<double> ns;
  for (const auto& row : fam.rows) {
    ts.push_back(outer(row));
    ns.push_back(std::pow(row_norm_product(fam.space, row), sigma));
  }
  double best = 0.0;
  for (const auto& f : model.forms) {
    double s = 0.0;
    for (std::size_t i = 0; i < ts.size(); ++i) s += std::pow(std::pow(std::abs(ts[i].dot(f)), 1.0 - sigma) * ns[i], r);
    best = std::max(best, s);
  }
  const double delta = std::pow(best, 1.0 / r);
  const double strongly = strongly_denominator(fam, r, model);
  if (strongly > delta * (1.0 + 1e-12) + 1e-300)
    throw Error(ErrorCode::internal, "strongly denominator exceeds delta_p_sigma");
  return delta;
}

double dimant_family_lower_bound(const MultilinearMap& T, const PlainFamily& fam, double p, double sigma,
                                 const FormsBallModel& model) {
  const double r = sigma_exponent(p, sigma);
  double num = 0.0;
  for (const auto& row : fam.rows) num += std::pow(norm(T.codomain, T.apply(row)), r);
  if (num == 0.0) return 0.0;
  const double den = delta_p_sigma(fam, p, sigma, model);
  return den > 0.0 ? std::pow(num, 1.0 / r) / den : kInf;
}

SigmaReport dimant_constant(const MultilinearMap& T, double p, double sigma, const SigmaConfig& cfg) {
  const double r = sigma_exponent(p, sigma);
  const auto model = forms_ball_model(T.domains, cfg.forms);
  const auto& support = model.forms;
  const TensorSpace& S = T.domains;
  SigmaReport out;
  out.kind = SigmaClass::dimant;
  out.p = p;
  out.sigma = sigma;
  out.plain_family.space = S;
  out.coefficient_family.space = S;
  SummingReport& rep = out.summary;
  rep.r = r;
  rep.support_exact = model.exact;

  if (T.coeffs.size() == 0 || T.coeffs.cwiseAbs().maxCoeff() == 0.0) {
    rep.converged = true;
    rep.measure = DiscreteMeasure::delta(support.front());
    rep = finish(rep, cfg.summing);
    return out;
  }

  std::vector<std::vector<Vector>> lists;
  for (const auto& X : S.factors) lists.push_back(factor_starts(X));
  const auto init = products(lists, cfg.max_vertex_products);

  detail::DominationProblem prob;
  prob.dims = S.dims();
  prob.support_size = support.size();
  prob.r = r;
  prob.lhs = [&](const Blocks& x) { return norm(T.codomain, T.apply(x)); };
  prob.lhs_zero = 1e-10 * T.coeffs.norm();
  Matrix F(static_cast<Eigen::Index>(support.size()), S.dim());
  for (std::size_t j = 0; j < support.size(); ++j) F.row(static_cast<Eigen::Index>(j)) = support[j].transpose();
  prob.integrand = [&](const Blocks& x) {
    Vector g = (F * outer(x)).cwiseAbs();
    if (sigma == 0.0) return g;
    const double ns = std::pow(row_norm_product(S, x), sigma);
    return Vector(g.array().pow(1.0 - sigma) * ns);
  };
  prob.init = init;
  prob.candidates = init;
  auto family_of = [&](const std::vector<Blocks>& pts, const Vector& w) {
    PlainFamily fam{S, {}};
    for (std::size_t k = 0; k < pts.size() && static_cast<Eigen::Index>(k) < w.size(); ++k) {
      const double wk = w(static_cast<Eigen::Index>(k));
      if (!(wk > 0.0)) continue;
      auto row = pts[k];
      row[0] *= std::pow(wk, 1.0 / r);
      fam.rows.push_back(std::move(row));
    }
    return fam;
  };
  prob.family_bound = [&](const std::vector<Blocks>& pts, const Vector& w) {
    const auto fam = family_of(pts, w);
    return fam.rows.empty() ? 0.0 : dimant_family_lower_bound(T, fam, p, sigma, model);
  };

  const auto res =
      detail::run_domination(prob, {cfg.summing.max_iter, cfg.summing.tol_gap}, cfg.product_search, &cfg.summing.search);
  rep.iterations = res.iterations;
  rep.history = res.history;
  rep.converged = res.converged;
  rep.weak_duality_held = res.weak_duality_held;
  rep.upper_bound = res.upper_bound;
  rep.lower_bound = res.lower_bound;
  out.plain_family = family_of(res.lb_points, res.lb_weights);

  if (S.polyhedral() && init.size() <= 10) {
    for (const auto& sub : subsets_up_to(static_cast<int>(init.size()), cfg.family_size)) {
      PlainFamily fam{S, {}};
      for (int i : sub) fam.rows.push_back(init[static_cast<std::size_t>(i)]);
      const double lb = dimant_family_lower_bound(T, fam, p, sigma, model);
      if (lb > rep.lower_bound && lb <= rep.upper_bound + tol::duality * std::max(1.0, rep.upper_bound)) {
        rep.lower_bound = lb;
        out.plain_family = fam;
      }
    }
  }
  rep.lower_exact = model.exact;
  if (std::isfinite(rep.upper_bound)) rep.measure = normalized(support, res.weights);
  rep = finish(rep, cfg.summing);
  return out;
}

SigmaReport factorable_constant(const MultilinearMap& T, double p, double sigma, const SigmaConfig& cfg) {
  const double r = sigma_exponent(p, sigma);
  StronglyConfig sc{cfg.summing, cfg.forms, cfg.family_size};
  auto s = strongly_constant(T, TensorPhi::factorable(T.domains, sigma), r, sc);
  SigmaReport out;
  out.kind = SigmaClass::factorable;
  out.p = p;
  out.sigma = sigma;
  out.summary = std::move(s.summary);
  out.plain_family.space = T.domains;
  out.coefficient_family = std::move(s.lb_family);
  return out;
}

MonotonicityReport sigma_monotonicity_check(const MultilinearMap& T, double p, double q, double sigma,
                                            const SigmaConfig& cfg, double tol) {
  if (!(p <= q)) throw Error(ErrorCode::invalid_argument, "monotonicity needs p <= q");
  const auto rp = dimant_constant(T, p, sigma, cfg);
  const auto rq = p == q ? rp : dimant_constant(T, q, sigma, cfg);
  MonotonicityReport out{rp.upper_bound(), rq.upper_bound(), rq.lower_bound(), true};
  out.pass = out.upper_q <= out.upper_p + tol && out.lower_q <= out.upper_p + tol;
  return out;
}

InclusionReport inclusion_check(const MultilinearMap& T, double p, double sigma, const SigmaConfig& cfg, double tol) {
  const double r = sigma_exponent(p, sigma);
  const auto d = dimant_constant(T, p, sigma, cfg);
  const auto s = strongly_constant(T, TensorPhi::identity(T.domains), r, {cfg.summing, cfg.forms, cfg.family_size});
  InclusionReport out{d.upper_bound(), s.summary.upper_bound, true};
  out.pass = out.dimant_upper <= out.strongly_upper + tol;
  return out;
}

FinalRecord final_factorization(const MultilinearMap& T, const SigmaReport& report, const SigmaConfig& cfg, int samples,
                                double tol) {
  if (report.kind != SigmaClass::factorable) throw Error(ErrorCode::invalid_argument, "final factorization needs a factorable report");
  if (!report.certified()) throw Error(ErrorCode::uncertified, "no certified measure");
  const double r = report.summary.r;
  const double C = report.upper_bound();
  const auto phi = TensorPhi::factorable(T.domains, report.sigma);
  const auto model = forms_ball_model(T.domains, cfg.forms);
  const auto& eta = report.summary.measure;
  const auto dims = T.domains.dims();
  FinalRecord out;
  out.gap = report.summary.gap;

  auto random_terms = [&](std::uint64_t seed, int count) {
    std::vector<std::vector<Vector>> per;
    for (std::size_t j = 0; j < dims.size(); ++j) per.push_back(random_samples(dims[j], count, seed + 31 * j));
    const auto lam = random_samples(1, count, seed + 7);
    std::vector<VmTerm> terms;
    for (int k = 0; k < count; ++k) {
      VmTerm t;
      t.lambda = lam[static_cast<std::size_t>(k)](0);
      for (std::size_t j = 0; j < dims.size(); ++j) t.factors.push_back(per[j][static_cast<std::size_t>(k)]);
      terms.push_back(std::move(t));
    }
    return terms;
  };

  // (1) the factorable inequality on coefficient families
  out.inequality_residual = -kInf;
  for (int s = 0; s < samples; ++s) {
    CoefficientFamily fam{T.domains, {}};
    for (int i = 0; i < 3; ++i) fam.rows.push_back(random_terms(0x1000ULL + 97 * s + 13 * i, 2));
    const auto elems = fam.elements();
    double num = 0.0;
    for (const auto& v : elems) num += std::pow(norm(T.codomain, T.coeffs * v.coords), r);
    double den = 0.0;
    for (const auto& f : model.forms) {
      double acc = 0.0;
      for (const auto& v : elems) acc += std::pow(tensor_phi_eval(phi, v.coords, f, 1.0), r);
      den = std::max(den, acc);
    }
    out.inequality_residual = std::max(out.inequality_residual, std::pow(num, 1.0 / r) - C * std::pow(den, 1.0 / r));
  }

  // (2) domination by eta
  out.domination_residual = -kInf;
  for (int s = 0; s < samples; ++s) {
    const auto v = embed_vm(T.domains, random_terms(0x2000ULL + 97 * s, 2));
    const double integral = eta.integrate([&](const Vector& f) { return std::pow(tensor_phi_eval(phi, v.coords, f, 1.0), r); });
    out.domination_residual =
        std::max(out.domination_residual, norm(T.codomain, T.coeffs * v.coords) - C * std::pow(integral, 1.0 / r));
  }
  if (samples == 0) out.inequality_residual = out.domination_residual = 0.0;

  // (3) the diagram through L_{p,sigma}(eta)
  StronglyReport sr;
  sr.summary = report.summary;
  const auto f = strongly_factorization(T, sr, {cfg.summing, cfg.forms, cfg.family_size});
  const auto d = verify_strongly_diagram(f, samples, 0x3000ULL, tol);
  out.diagram_residual = std::max(d.diagram_residual, d.bound_residual);

  out.pass = out.inequality_residual <= tol && out.domination_residual <= tol && out.diagram_residual <= tol;
  return out;
}

}  // namespace phisum
