#include "phisum/verify_suite.hpp"

#include "phisum/dimant_sigma.hpp"
#include "phisum/domination_space.hpp"
#include "phisum/multilinear_summing.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

namespace phisum {

namespace {

using Checks = std::vector<Check>;

const FiniteSpace& l1_2() {
  static const FiniteSpace s = FiniteSpace::lq(2, 1.0);
  return s;
}
const FiniteSpace& linf_2() {
  static const FiniteSpace s = FiniteSpace::lq(2, kInf);
  return s;
}

Vector uniform_vector(int d, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Vector v(d);
  for (int i = 0; i < d; ++i) v(i) = u(rng);
  return v;
}

Matrix uniform_matrix(int rows, int cols, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < m.size(); ++i) m(i) = u(rng);
  return m;
}

MultilinearMap random_bilinear(std::mt19937_64& rng) {
  return MultilinearMap({l1_2(), l1_2()}, linf_2(), uniform_matrix(2, 4, rng));
}

// The bilinear instances shared by criteria 11 and 12.
const std::vector<MultilinearMap>& bilinear_instances() {
  static const std::vector<MultilinearMap> maps = [] {
    std::mt19937_64 rng(1101);
    std::vector<MultilinearMap> out;
    for (int k = 0; k < 20; ++k) out.push_back(random_bilinear(rng));
    return out;
  }();
  return maps;
}

// Dimant upper bounds at (p, sigma) keyed by (instance, p, sigma).
std::map<std::tuple<int, double, double>, double>& dimant_cache() {
  static std::map<std::tuple<int, double, double>, double> cache;
  return cache;
}

double dimant_upper(int k, double p, double sigma) {
  auto& cache = dimant_cache();
  const auto key = std::make_tuple(k, p, sigma);
  if (auto it = cache.find(key); it != cache.end()) return it->second;
  const double v = dimant_constant(bilinear_instances()[static_cast<std::size_t>(k)], p, sigma).upper_bound();
  cache[key] = v;
  return v;
}

double pos(double x) { return std::max(x, 0.0); }

// 1. rank-one exactness
Checks rank_one() {
  const auto l1 = FiniteSpace::lq(3, 1.0);
  std::mt19937_64 rng(101);
  double err = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Vector a = uniform_vector(3, rng), y = uniform_vector(2, rng);
    const LinearMap T(l1, linf_2(), y * a.transpose());
    const double expect = a.lpNorm<Eigen::Infinity>() * y.lpNorm<Eigen::Infinity>();
    for (double r : {1.0, 2.0}) {
      const auto rep = summing_constant(T, PhiMap::identity(l1), r);
      err = std::max({err, std::abs(rep.upper_bound - expect), std::abs(rep.lower_bound - expect)});
    }
  }
  return {{"max |bound - |a*||y||", err, 1e-6}};
}

// 2. minimax closure
Checks minimax() {
  double gap = 0.0;
  int iters = 0;
  for (int n : {2, 3}) {
    const auto l1 = FiniteSpace::lq(n, 1.0);
    const auto rep = summing_constant(LinearMap(l1, l1, Matrix::Identity(n, n)), PhiMap::identity(l1), 1.0);
    gap = std::max(gap, rep.upper_bound - rep.lower_bound);
    iters = std::max(iters, rep.iterations);
  }
  const auto l1 = FiniteSpace::lq(3, 1.0);
  std::mt19937_64 rng(202);
  for (int k = 0; k < 10; ++k) {
    const auto Y = FiniteSpace::lq(3, k % 2 == 0 ? 1.0 : kInf);
    const auto rep = summing_constant(LinearMap(l1, Y, uniform_matrix(3, 3, rng)), PhiMap::identity(l1), 1.0);
    gap = std::max(gap, rep.upper_bound - rep.lower_bound);
    iters = std::max(iters, rep.iterations);
  }
  const auto id2 = summing_constant(LinearMap(l1_2(), l1_2(), Matrix::Identity(2, 2)), PhiMap::identity(l1_2()), 1.0);
  const double id_err = std::max(std::abs(id2.upper_bound - 2.0), std::abs(id2.lower_bound - 2.0));
  return {{"max gap", gap, 1e-4}, {"max iterations", static_cast<double>(iters), 200}, {"|id l1^2 - 2|", id_err, 1e-6}};
}

// 3. pi_2 of the Euclidean identity
Checks classical() {
  const auto l2 = FiniteSpace::lq(2, 2.0);
  const LinearMap id(l2, l2, Matrix::Identity(2, 2));
  const double s2 = std::sqrt(2.0);
  double miss = 0.0, growth = 0.0, width = 0.0, prev = kInf;
  for (int res : {16, 32, 64}) {
    SummingConfig cfg;
    cfg.mesh_resolution = res;
    const auto rep = summing_constant(id, PhiMap::identity(l2), 2.0, cfg);
    miss = std::max({miss, rep.lower_bound - s2, s2 - rep.upper_bound});
    width = rep.upper_bound - rep.lower_bound;
    growth = std::max(growth, width - prev);
    prev = width;
  }
  return {{"final width / sqrt 2", width / s2, 0.02}, {"bracket miss", pos(miss), 1e-9}, {"width increase", pos(growth), 1e-12}};
}

// 4. sigma = 0 collapse
Checks sigma_zero() {
  std::mt19937_64 rng(404);
  double diff = 0.0;
  for (int k = 0; k < 20; ++k) {
    const auto X = FiniteSpace::lq(3, k % 2 == 0 ? 1.0 : kInf);
    const auto Y = FiniteSpace::lq(3, k % 3 == 0 ? 2.0 : kInf);
    const LinearMap T(X, Y, uniform_matrix(3, 3, rng));
    const auto a = summing_constant(T, PhiMap::sigma_interp(X, 0.0), 1.0);
    const auto b = summing_constant(T, PhiMap::identity(X), 1.0);
    diff = std::max({diff, std::abs(a.upper_bound - b.upper_bound), std::abs(a.lower_bound - b.lower_bound)});
  }
  return {{"max |sigma 0 - identity|", diff, 1e-6}};
}

// 5. identity class inside the square-over-norm class
Checks containment() {
  std::mt19937_64 rng(505);
  double excess = -kInf;
  for (int k = 0; k < 20; ++k) {
    const LinearMap T(l1_2(), linf_2(), uniform_matrix(2, 2, rng));
    const auto id = summing_constant(T, PhiMap::identity(l1_2()), 1.0);
    const auto sq = summing_constant(T, PhiMap::square_over_norm(l1_2()), 1.0);
    excess = std::max(excess, id.upper_bound - sq.upper_bound);
  }
  return {{"max identity - square", excess, 1e-8}};
}

// 6. mixing an anchored measure
Checks mixing() {
  const auto X = FiniteSpace::lq(3, 1.0);
  std::mt19937_64 rng(606);
  double worst = -kInf;
  int uncertified = 0;
  for (int k = 0; k < 10; ++k) {
    const Vector y = uniform_vector(2, rng), x0 = uniform_vector(3, rng);
    const LinearMap T(X, linf_2(), y * x0.transpose());
    const auto phi = PhiMap::anchored(X, x0);
    const auto rep = summing_constant(T, phi, 2.0);
    if (!rep.certified()) ++uncertified;
    const auto m = example3_mixing_check(T, phi.anchor, rep.measure, rep.upper_bound, random_samples(3, 100, 60 + k));
    worst = std::max(worst, m.max_residual);
  }
  return {{"max residual", worst, 1e-8}, {"uncertified reports", static_cast<double>(uncertified), 0}};
}

// 7. linear factorization diagrams
Checks linear_diagrams() {
  std::mt19937_64 rng(707);
  std::vector<std::pair<LinearMap, std::pair<PhiMap, double>>> cases;
  cases.push_back({LinearMap(l1_2(), l1_2(), Matrix::Identity(2, 2)), {PhiMap::identity(l1_2()), 1.0}});
  for (int k = 0; k < 6; ++k) {
    const LinearMap T(l1_2(), linf_2(), uniform_matrix(2, 2, rng));
    cases.push_back({T, {PhiMap::identity(l1_2()), 1.0 + k % 2}});
    cases.push_back({T, {PhiMap::sigma_interp(l1_2(), 0.5), 2.0}});
  }
  double diagram = 0.0, bound = 0.0;
  int uncertified = 0;
  for (std::size_t k = 0; k < cases.size(); ++k) {
    const auto& [T, pr] = cases[k];
    const auto rep = summing_constant(T, pr.first, pr.second);
    if (!rep.certified()) {
      ++uncertified;
      continue;
    }
    const auto f = build_factorization(T, pr.first, rep);
    const auto d = verify_diagram(f, random_samples(2, 100, 700 + k));
    diagram = std::max(diagram, d.diagram_residual);
    bound = std::max(bound, d.bound_residual);
  }
  return {{"max diagram residual", diagram, 1e-8},
          {"max norm-bound residual", bound, 1e-8},
          {"uncertified reports", static_cast<double>(uncertified), 0}};
}

// 8. linearization equivalence
Checks linearization() {
  std::mt19937_64 rng(808);
  double diff = 0.0;
  const auto t0 = std::chrono::steady_clock::now();
  for (int k = 0; k < 5; ++k) {
    const auto T = random_bilinear(rng);
    const auto s = strongly_constant(T, TensorPhi::identity(T.domains), 1.0);
    const auto L = linearized_operator(T, forms_ball_model(T.domains));
    const auto l = summing_constant(L, PhiMap::identity(L.domain), 1.0);
    diff = std::max(diff, std::abs(s.summary.upper_bound - l.upper_bound));
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {{"max |strongly - linearized|", diff, 1e-3}, {"seconds", secs, 300, true}};
}

// 9. multi-ideal factorization
Checks multi_ideal() {
  const Vector a = (Vector(2) << 1.0, -0.5).finished(), b = (Vector(2) << 0.25, 0.75).finished();
  const Vector u = (Vector(2) << 2.0, 1.0).finished();
  Matrix prod(2, 4), diag = Matrix::Zero(2, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) prod.col(2 * i + j) = a(i) * b(j) * u;
  diag.col(0) = u;
  diag.col(3) = 0.5 * u;
  const std::vector<PhiMap> phis{PhiMap::identity(l1_2()), PhiMap::identity(l1_2())};
  const std::vector<std::pair<Matrix, std::vector<double>>> cases{
      {prod, {2.0, 2.0}}, {prod, {1.0, 1.0}}, {diag, {2.0, 2.0}}, {diag, {4.0, 4.0}}};
  double pointwise = 0.0, factor = 0.0, hat = 0.0;
  int uncertified = 0;
  for (const auto& [c, ps] : cases) {
    const MultilinearMap T({l1_2(), l1_2()}, linf_2(), c);
    const auto cert = multi_ideal_upper_bound(T, phis, ps);
    if (!cert.certified()) {
      ++uncertified;
      continue;
    }
    const auto f = factor_multilinear(T, cert, phis, ps);
    pointwise = std::max(pointwise, f.pointwise_residual);
    factor = std::max(factor, f.factor_bound_residual);
    hat = std::max(hat, f.hat_bound_residual);
  }
  return {{"max pointwise residual", pointwise, 1e-8},
          {"max factor-bound residual", factor, 1e-8},
          {"max hat-bound residual", hat, 1e-8},
          {"uncertified certificates", static_cast<double>(uncertified), 0}};
}

// 10. delta dominance and restriction ordering
Checks dominance() {
  const TensorSpace S{{l1_2(), l1_2()}};
  const auto model = forms_ball_model(S);
  std::mt19937_64 rng(1001);
  std::normal_distribution<double> g;
  double shortfall = 0.0;
  for (int k = 0; k < 200; ++k) {
    PlainFamily fam{S, {}};
    for (int i = 0; i < 1 + k % 4; ++i) {
      std::vector<Vector> row;
      for (int d : S.dims()) {
        Vector x(d);
        for (int t = 0; t < d; ++t) x(t) = g(rng);
        row.push_back(x);
      }
      fam.rows.push_back(row);
    }
    const double sigma = (k % 3) / 3.0, p = 1.0 + k % 2;
    const double den = strongly_denominator(fam, p / (1.0 - sigma), model);
    shortfall = std::max(shortfall, (den - delta_p_sigma(fam, p, sigma, model)) / std::max(1.0, den));
  }
  double order = -kInf;
  for (int k = 0; k < 10; ++k) {
    const auto T = random_bilinear(rng);
    const double sigma = 0.25 * (k % 3);
    const auto d = dimant_constant(T, 1.0, sigma);
    const auto f = factorable_constant(T, 1.0, sigma);
    order = std::max(order, d.lower_bound() - f.upper_bound());
  }
  return {{"max relative delta shortfall", pos(shortfall), 1e-12}, {"max dimant LB - factorable UB", order, 1e-6}};
}

// 11. monotonicity in p
Checks monotonicity() {
  double excess = -kInf;
  for (int k = 0; k < 20; ++k)
    for (double sigma : {0.0, 1.0 / 3.0}) {
      const double up = dimant_upper(k, 1.0, sigma);
      const auto q = dimant_constant(bilinear_instances()[static_cast<std::size_t>(k)], 2.0, sigma);
      excess = std::max({excess, q.upper_bound() - up, q.lower_bound() - up});
    }
  return {{"max q-bound - p upper", excess, 1e-6}};
}

// 12. inclusion into the strongly class
Checks inclusion() {
  double excess = -kInf;
  for (int k = 0; k < 20; ++k)
    for (double sigma : {0.0, 1.0 / 3.0}) {
      const auto& T = bilinear_instances()[static_cast<std::size_t>(k)];
      const auto s = strongly_constant(T, TensorPhi::identity(T.domains), 1.0 / (1.0 - sigma));
      excess = std::max(excess, dimant_upper(k, 1.0, sigma) - s.summary.upper_bound);
    }
  return {{"max dimant UB - strongly UB", excess, 1e-6}};
}

// min over x = a u(t1) + b u(t2) of |a| c(u(t1)) + |b| c(u(t2)): a full angular
// grid joined with the cusp angles, then zooms around the best pair.
double grid_gauge(const std::function<double(const Vector&)>& cost, const Vector& x, double step,
                  const std::vector<double>& special) {
  const double pi = std::numbers::pi;
  auto dir = [](double t) { return Vector((Vector(2) << std::cos(t), std::sin(t)).finished()); };
  auto split = [&](double t1, double t2, double c1, double c2) {
    const double det = std::sin(t2 - t1);
    if (std::abs(det) < 1e-12) return kInf;
    const double a = (x(0) * std::sin(t2) - x(1) * std::cos(t2)) / det;
    const double b = (x(1) * std::cos(t1) - x(0) * std::sin(t1)) / det;
    return std::abs(a) * c1 + std::abs(b) * c2;
  };
  std::vector<double> th;
  for (int i = 0; i * step < pi; ++i) th.push_back(i * step);
  for (double t : special) {
    const double s = std::remainder(t, pi);
    th.push_back(s < 0 ? s + pi : s);
  }
  std::sort(th.begin(), th.end());
  const auto n = th.size();
  std::vector<double> c(n), cs(n), sn(n);
  for (std::size_t i = 0; i < n; ++i) {
    c[i] = cost(dir(th[i]));
    cs[i] = std::cos(th[i]);
    sn[i] = std::sin(th[i]);
  }
  const double tx = std::atan2(x(1), x(0));
  double best = x.norm() * cost(dir(tx));
  double b1 = tx, b2 = tx + pi / 2;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double det = sn[j] * cs[i] - cs[j] * sn[i];
      if (std::abs(det) < 1e-12) continue;
      const double a = (x(0) * sn[j] - x(1) * cs[j]) / det;
      const double b = (x(1) * cs[i] - x(0) * sn[i]) / det;
      const double v = std::abs(a) * c[i] + std::abs(b) * c[j];
      if (v < best) best = v, b1 = th[i], b2 = th[j];
    }
  double h = step;
  for (int zoom = 0; zoom < 8; ++zoom) {
    const double c1 = b1, c2 = b2;
    for (int i = -10; i <= 10; ++i)
      for (int j = -10; j <= 10; ++j) {
        const double t1 = c1 + i * h / 5, t2 = c2 + j * h / 5;
        const double v = split(t1, t2, cost(dir(t1)), cost(dir(t2)));
        if (v < best) best = v, b1 = t1, b2 = t2;
      }
    h /= 5;
  }
  return best;
}

// 13. seminorm against a grid search
Checks seminorm_grid() {
  std::mt19937_64 rng(1313);
  std::uniform_real_distribution<double> w(0.1, 1.0);
  double err = 0.0;
  for (int inst = 0; inst < 6; ++inst) {
    DiscreteMeasure mu;
    double total = 0.0;
    for (int j = 0; j < 3; ++j) {
      mu.support.push_back(uniform_vector(2, rng));
      mu.weights.push_back(w(rng));
      total += mu.weights.back();
    }
    for (auto& x : mu.weights) x /= total;
    const double sigma = 0.25 * (1 + inst % 3);
    const auto m = build_model(l1_2(), PhiMap::sigma_interp(l1_2(), sigma), mu, 1.0 / (1.0 - sigma), {}, 10);
    std::vector<double> cusps{0.0, std::numbers::pi / 2};
    for (const auto& e : mu.support) cusps.push_back(std::atan2(e(0), -e(1)));
    for (const auto& x : random_samples(2, 2, 1300 + inst)) {
      const double ref = grid_gauge([&](const Vector& v) { return m.single_cost(v); }, x, 1e-3, cusps);
      err = std::max(err, std::abs(seminorm(x, m).value - ref));
    }
  }
  return {{"max |seminorm - grid|", err, 1e-6}};
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

CriterionResult timed(int id, const SuiteOptions& opt, const std::function<Checks()>& body) {
  CriterionResult r;
  r.id = id;
  r.title = criterion_title(id);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    r.checks = body();
  } catch (const std::exception& e) {
    r.error = e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (opt.tol_override)
    for (auto& c : r.checks) c.tol = *opt.tol_override;
  return r;
}

// Measured values as printed, timings excluded.
std::vector<std::string> printed_values(const std::vector<CriterionResult>& rs) {
  std::vector<std::string> out;
  for (const auto& r : rs) {
    out.push_back(std::to_string(r.id) + ":" + r.error);
    for (const auto& c : r.checks)
      if (!c.timing) out.push_back(fmt(c.value));
  }
  return out;
}

std::vector<int> default_determinism_set() { return {1, 6, 13}; }

CriterionResult determinism(const std::vector<CriterionResult>& first, const SuiteOptions& opt) {
  return timed(14, opt, [&] {
    std::vector<CriterionResult> a = first, b;
    if (a.empty()) {
      dimant_cache().clear();
      for (int id : default_determinism_set()) a.push_back(run_criterion(id, {}));
    }
    dimant_cache().clear();
    for (const auto& r : a) b.push_back(run_criterion(r.id, {}));
    const auto va = printed_values(a), vb = printed_values(b);
    double differing = va.size() == vb.size() ? 0.0 : 1.0;
    for (std::size_t i = 0; i < std::min(va.size(), vb.size()); ++i)
      if (va[i] != vb[i]) differing += 1.0;
    return Checks{{"differing printed values", differing, 0}};
  });
}

}  // namespace

bool CriterionResult::pass() const {
  if (!error.empty() || checks.empty()) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass(); });
}

std::vector<int> criterion_ids() { return {1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12, 13, 14}; }

std::string criterion_title(int id) {
  switch (id) {
    case 1: return "rank-one exactness";
    case 2: return "minimax closure";
    case 3: return "pi_2 of id on l_2^2 by mesh refinement";
    case 4: return "sigma = 0 collapse";
    case 5: return "identity class inside square-over-norm class";
    case 6: return "mixing of anchored measures";
    case 7: return "linear factorization residuals";
    case 8: return "linearization equivalence";
    case 9: return "multi-ideal factorization";
    case 10: return "delta dominance and restriction ordering";
    case 11: return "monotonicity in p";
    case 12: return "inclusion into the strongly class";
    case 13: return "seminorm against grid search";
    case 14: return "determinism";
  }
  return "unknown";
}

CriterionResult run_criterion(int id, const SuiteOptions& opt) {
  switch (id) {
    case 1: return timed(id, opt, rank_one);
    case 2: return timed(id, opt, minimax);
    case 3: return timed(id, opt, classical);
    case 4: return timed(id, opt, sigma_zero);
    case 5: return timed(id, opt, containment);
    case 6: return timed(id, opt, mixing);
    case 7: return timed(id, opt, linear_diagrams);
    case 8: return timed(id, opt, linearization);
    case 9: return timed(id, opt, multi_ideal);
    case 10: return timed(id, opt, dominance);
    case 11: return timed(id, opt, monotonicity);
    case 12: return timed(id, opt, inclusion);
    case 13: return timed(id, opt, seminorm_grid);
    case 14: return determinism({}, opt);
  }
  CriterionResult r;
  r.id = id;
  r.title = "unknown";
  r.error = "no criterion with id " + std::to_string(id);
  return r;
}

std::vector<CriterionResult> verify_suite(const SuiteOptions& opt,
                                          const std::function<void(const CriterionResult&)>& on_row) {
  std::vector<int> ids = opt.filter.empty() ? criterion_ids() : opt.filter;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  std::vector<CriterionResult> out;
  dimant_cache().clear();
  for (int id : ids) {
    if (id == 14) continue;
    out.push_back(run_criterion(id, opt));
    if (on_row) on_row(out.back());
  }
  if (std::find(ids.begin(), ids.end(), 14) != ids.end()) {
    out.push_back(determinism(out, opt));
    if (on_row) on_row(out.back());
  }
  return out;
}

std::string format_row(const CriterionResult& r) {
  std::ostringstream os;
  os << (r.id < 10 ? " " : "") << r.id << "  " << (r.pass() ? "PASS" : "FAIL") << "  ";
  if (!r.error.empty()) {
    os << "error: " << r.error << "  " << r.title;
    return os.str();
  }
  if (r.checks.empty()) {
    os << "no checks  " << r.title;
    return os.str();
  }
  const auto& h = r.checks.front();
  os << "value=" << fmt(h.value) << "  tol=" << fmt(h.tol) << "  " << r.title;
  for (std::size_t i = 1; i < r.checks.size(); ++i) {
    const auto& c = r.checks[i];
    if (c.timing) continue;
    os << "; " << c.label << "=" << fmt(c.value) << (c.pass() ? "" : " (fails tol " + fmt(c.tol) + ")");
  }
  return os.str();
}

std::string format_table(const std::vector<CriterionResult>& rows) {
  std::ostringstream os;
  os << "id  status  measured  criterion\n";
  int passed = 0;
  for (const auto& r : rows) {
    os << format_row(r) << "\n";
    passed += r.pass() ? 1 : 0;
  }
  os << passed << "/" << rows.size() << " criteria pass\n";
  return os.str();
}

}  // namespace phisum
