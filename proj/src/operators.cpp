#include "phisum/operators.hpp"

#include "phisum/lp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

namespace phisum {

namespace {

void check_finite(const Matrix& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::invalid_argument, std::string(what) + ": non-finite entries");
}

// Calls f on every tuple of the cartesian product of `sets`.
void for_each_product(const std::vector<std::vector<Vector>>& sets,
                      const std::function<void(const std::vector<Vector>&)>& f) {
  for (const auto& s : sets)
    if (s.empty()) return;
  std::vector<std::size_t> idx(sets.size(), 0);
  std::vector<Vector> cur(sets.size());
  while (true) {
    for (std::size_t j = 0; j < sets.size(); ++j) cur[j] = sets[j][idx[j]];
    f(cur);
    std::size_t j = sets.size();
    while (j > 0) {
      --j;
      if (++idx[j] < sets[j].size()) break;
      idx[j] = 0;
      if (j == 0) return;
    }
    if (sets.empty()) return;
  }
}

std::vector<std::vector<Vector>> primal_vertex_sets(const TensorSpace& S) {
  std::vector<std::vector<Vector>> sets;
  for (const auto& X : S.factors) {
    if (!X.polyhedral())
      throw Error(ErrorCode::not_polyhedral, "exact mode requires polyhedral domains (" + X.describe() + ")");
    sets.push_back(representatives_mod_sign(X.primal_extreme_points()));
  }
  return sets;
}

Vector unit(int d, int i) {
  Vector e = Vector::Zero(d);
  e(i) = 1.0;
  return e;
}

// Norm of a multilinear expression u -> ||F(u)|| over products of unit spheres.
double multilinear_sup(const TensorSpace& S, const std::function<double(const std::vector<Vector>&)>& value,
                       const OpNormConfig& cfg) {
  if (cfg.mode == OpNormMode::exact || S.polyhedral()) {
    double best = 0.0;
    for_each_product(primal_vertex_sets(S), [&](const std::vector<Vector>& xs) { best = std::max(best, value(xs)); });
    return best;
  }
  std::vector<int> dims = S.dims();
  std::vector<std::vector<Vector>> meshes;
  for (const auto& X : S.factors) meshes.push_back(representatives_mod_sign(primal_sphere_mesh(X, cfg.resolution)));
  std::vector<Blocks> cands;
  double best = 0.0;
  for_each_product(meshes, [&](const std::vector<Vector>& xs) {
    best = std::max(best, value(xs));
    if (cands.size() < 4096) cands.push_back(xs);
  });
  auto f = [&](const Blocks& b) {
    std::vector<Vector> xs(b.size());
    double denom = 1.0;
    for (std::size_t j = 0; j < b.size(); ++j) {
      xs[j] = b[j];
      denom *= norm(S.factors[j], b[j]);
    }
    return denom > 0.0 ? value(xs) / denom : 0.0;
  };
  const auto res = maximize_on_spheres(f, dims, cands, cfg.search);
  return std::max(best, res.value);
}

double term_cost(const TensorSpace& S, const VmTerm& t) {
  double c = std::abs(t.lambda);
  for (std::size_t j = 0; j < t.factors.size(); ++j) c *= norm(S.factors[j], t.factors[j]);
  return c;
}

double representation_cost(const TensorSpace& S, const std::vector<VmTerm>& terms) {
  double c = 0.0;
  for (const auto& t : terms) c += term_cost(S, t);
  return c;
}

Vector representation_coords(const TensorSpace& S, const std::vector<VmTerm>& terms) {
  Vector c = Vector::Zero(S.dim());
  for (const auto& t : terms) c += t.lambda * outer(t.factors);
  return c;
}

std::vector<int> unravel(long t, const std::vector<int>& dims) {
  std::vector<int> idx(dims.size());
  for (std::size_t j = dims.size(); j-- > 0;) {
    idx[j] = static_cast<int>(t % dims[j]);
    t /= dims[j];
  }
  return idx;
}

std::vector<VmTerm> canonical_representation(const TensorSpace& S, const Vector& v) {
  std::vector<VmTerm> out;
  const auto dims = S.dims();
  for (Eigen::Index t = 0; t < v.size(); ++t) {
    if (v(t) == 0.0) continue;
    const auto idx = unravel(static_cast<long>(t), dims);
    VmTerm term;
    term.lambda = v(t);
    for (std::size_t j = 0; j < dims.size(); ++j) term.factors.push_back(unit(dims[j], idx[j]));
    out.push_back(std::move(term));
  }
  return out;
}

// Mode-j matricization helper: coordinates of u^1 (x) .. (x) e_a (x) .. (x) u^m.
Matrix slot_matrix(const std::vector<Vector>& others, std::size_t j, int dj) {
  Matrix M(0, 0);
  std::vector<Vector> xs = others;
  for (int a = 0; a < dj; ++a) {
    xs[j] = unit(dj, a);
    const Vector c = outer(xs);
    if (M.size() == 0) M.resize(c.size(), dj);
    M.col(a) = c;
  }
  return M;
}

// Minimizes sum_i ||z_i||_X over z in z0 + range(N). Returns the improved z.
Vector minimize_norm_sum(const FiniteSpace& X, int blocks, const Vector& z0, const Matrix& N) {
  const int d = X.dim();
  if (N.cols() == 0) return z0;
  auto cost = [&](const Vector& z) {
    double c = 0.0;
    for (int i = 0; i < blocks; ++i) c += norm(X, z.segment(i * d, d));
    return c;
  };
  if (X.polyhedral()) {
    const auto P = representatives_mod_sign(X.dual_extreme_points());
    const Eigen::Index k = N.cols();
    const Eigen::Index nv = k + blocks;
    LpProblem lp;
    lp.objective = Vector::Zero(nv);
    lp.objective.tail(blocks).setOnes();
    lp.free_vars.assign(static_cast<std::size_t>(nv), false);
    for (Eigen::Index q = 0; q < k; ++q) lp.free_vars[static_cast<std::size_t>(q)] = true;
    const Eigen::Index nrows = 2 * static_cast<Eigen::Index>(P.size()) * blocks;
    lp.rows = Matrix::Zero(nrows, nv);
    lp.rhs = Vector::Zero(nrows);
    Eigen::Index row = 0;
    for (int i = 0; i < blocks; ++i) {
      const Matrix Ni = N.middleRows(i * d, d);
      const Vector zi = z0.segment(i * d, d);
      for (const auto& p : P) {
        const Vector a = Ni.transpose() * p;
        const double b = p.dot(zi);
        // s_i - <p, z_i> >= 0 and s_i + <p, z_i> >= 0
        lp.rows.row(row).head(k) = -a.transpose();
        lp.rows(row, k + i) = 1.0;
        lp.rhs(row) = b;
        ++row;
        lp.rows.row(row).head(k) = a.transpose();
        lp.rows(row, k + i) = 1.0;
        lp.rhs(row) = -b;
        ++row;
      }
    }
    const auto sol = solve_lp(lp);
    if (sol.status == LpStatus::optimal) {
      const Vector z = z0 + N * sol.t.head(k);
      if (cost(z) < cost(z0)) return z;
    }
    return z0;
  }
  // Smooth-ish convex case: gradient descent with backtracking in the affine chart.
  Vector y = Vector::Zero(N.cols());
  Vector z = z0;
  double fz = cost(z);
  double step = 1.0;
  for (int it = 0; it < 400; ++it) {
    Vector g = Vector::Zero(z.size());
    for (int i = 0; i < blocks; ++i) {
      const Vector zi = z.segment(i * d, d);
      if (norm(X, zi) > 1e-300) g.segment(i * d, d) = norming_functional(X, zi);
    }
    const Vector gy = N.transpose() * g;
    const double gn = gy.norm();
    if (gn < 1e-14) break;
    bool moved = false;
    for (int bt = 0; bt < 60; ++bt) {
      const Vector yn = y - step * gy;
      const Vector zn = z0 + N * yn;
      const double fn = cost(zn);
      if (fn < fz - 1e-4 * step * gn * gn) {
        y = yn;
        z = zn;
        fz = fn;
        moved = true;
        step *= 2.0;
        break;
      }
      step *= 0.5;
    }
    if (!moved) break;
  }
  return z;
}

// Alternating minimization over one factor at a time.
std::vector<VmTerm> alternate(const TensorSpace& S, std::vector<VmTerm> terms, int sweeps) {
  const int m = S.order();
  double prev = representation_cost(S, terms);
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    for (int j = 0; j < m; ++j) {
      std::vector<VmTerm> live;
      for (auto& t : terms) {
        bool zero = false;
        for (int l = 0; l < m; ++l) {
          if (l == j) continue;
          const double n = norm(S.factors[static_cast<std::size_t>(l)], t.factors[static_cast<std::size_t>(l)]);
          if (n == 0.0) { zero = true; break; }
          t.factors[static_cast<std::size_t>(l)] /= n;
          t.factors[static_cast<std::size_t>(j)] *= n;
        }
        t.factors[static_cast<std::size_t>(j)] *= t.lambda;
        t.lambda = 1.0;
        if (!zero && t.factors[static_cast<std::size_t>(j)].norm() > 0.0) live.push_back(std::move(t));
      }
      terms = std::move(live);
      if (terms.empty()) return terms;
      const int dj = S.factors[static_cast<std::size_t>(j)].dim();
      const int r = static_cast<int>(terms.size());
      Matrix M(S.dim(), r * dj);
      Vector z0(r * dj);
      for (int i = 0; i < r; ++i) {
        M.middleCols(i * dj, dj) = slot_matrix(terms[static_cast<std::size_t>(i)].factors, static_cast<std::size_t>(j), dj);
        z0.segment(i * dj, dj) = terms[static_cast<std::size_t>(i)].factors[static_cast<std::size_t>(j)];
      }
      Eigen::JacobiSVD<Matrix> svd(M, Eigen::ComputeFullV);
      const double smax = svd.singularValues().size() ? svd.singularValues()(0) : 0.0;
      Eigen::Index rank = 0;
      for (Eigen::Index q = 0; q < svd.singularValues().size(); ++q)
        if (svd.singularValues()(q) > 1e-12 * std::max(1.0, smax)) ++rank;
      const Matrix N = svd.matrixV().rightCols(M.cols() - rank);
      const Vector z = minimize_norm_sum(S.factors[static_cast<std::size_t>(j)], r, z0, N);
      for (int i = 0; i < r; ++i) terms[static_cast<std::size_t>(i)].factors[static_cast<std::size_t>(j)] = z.segment(i * dj, dj);
    }
    const double c = representation_cost(S, terms);
    if (prev - c <= 1e-13 * std::max(1.0, c)) break;
    prev = c;
  }
  return terms;
}

// Upper bound from a representation, with any coordinate residual charged at canonical cost.
double certified_cost(const TensorSpace& S, const Vector& v, std::vector<VmTerm>& terms) {
  const Vector res = v - representation_coords(S, terms);
  auto fix = canonical_representation(S, res);
  double c = representation_cost(S, terms);
  if (!fix.empty() && res.lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, v.lpNorm<Eigen::Infinity>()))
    return kInf;
  c += representation_cost(S, fix);
  for (auto& t : fix) terms.push_back(std::move(t));
  return c;
}

struct PolyLp {
  bool ok = false;
  double lower = 0.0;
  Vector form;
  std::vector<VmTerm> representation;
};

// max <v, phi> s.t. |<phi, t>| <= 1 over extreme elementary tensors; its dual
// multipliers give a representation of v.
PolyLp polyhedral_projective_lp(const TensorSpace& S, const Vector& v) {
  PolyLp out;
  std::vector<std::vector<Vector>> sets = primal_vertex_sets(S);
  std::vector<std::vector<Vector>> tuples;
  for_each_product(sets, [&](const std::vector<Vector>& xs) { tuples.push_back(xs); });
  if (tuples.size() > 20000) return out;
  const Eigen::Index D = S.dim();
  const auto T = static_cast<Eigen::Index>(tuples.size());
  LpProblem lp;
  lp.objective = -v;
  lp.free_vars.assign(static_cast<std::size_t>(D), true);
  lp.rows.resize(2 * T, D);
  lp.rhs = Vector::Constant(2 * T, -1.0);
  for (Eigen::Index k = 0; k < T; ++k) {
    const Vector t = outer(tuples[static_cast<std::size_t>(k)]);
    lp.rows.row(2 * k) = -t.transpose();
    lp.rows.row(2 * k + 1) = t.transpose();
  }
  const auto sol = solve_lp(lp);
  if (sol.status != LpStatus::optimal) return out;
  out.ok = true;
  out.form = sol.t;
  // Certified value: rescale by the exact form norm.
  double fn = 0.0;
  for (Eigen::Index k = 0; k < T; ++k) fn = std::max(fn, std::abs(outer(tuples[static_cast<std::size_t>(k)]).dot(sol.t)));
  out.lower = fn > 0.0 ? std::abs(v.dot(sol.t)) / fn : 0.0;
  if (fn > 0.0) out.form /= fn;
  for (Eigen::Index k = 0; k < T; ++k) {
    const double c = sol.duals(2 * k) - sol.duals(2 * k + 1);
    if (std::abs(c) <= 1e-15) continue;
    out.representation.push_back({c, tuples[static_cast<std::size_t>(k)]});
  }
  return out;
}

// Alternating rank-one ascent for max <v, y^1 (x) ... (x) y^m> over dual balls.
double rank_one_lower(const TensorSpace& S, const Vector& v, Vector& best_form, std::uint64_t seed, int restarts) {
  const int m = S.order();
  const auto dims = S.dims();
  std::vector<std::vector<Vector>> starts;
  std::vector<std::vector<Vector>> dual_sets;
  for (const auto& X : S.factors) {
    MeshConfig mc;
    mc.extreme_exact = X.polyhedral();
    mc.resolution = 8;
    dual_sets.push_back(representatives_mod_sign(dual_ball_points(X, mc).points));
  }
  for_each_product(dual_sets, [&](const std::vector<Vector>& ys) {
    if (starts.size() < 512) starts.push_back(ys);
  });
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (int r = 0; r < restarts; ++r) {
    std::vector<Vector> ys;
    for (int d : dims) {
      Vector y(d);
      for (int i = 0; i < d; ++i) y(i) = gauss(rng);
      ys.push_back(y);
    }
    starts.push_back(ys);
  }
  double best = 0.0;
  for (auto ys : starts) {
    for (int j = 0; j < m; ++j) {
      const double n = dual_norm(S.factors[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(j)]);
      if (n > 0.0) ys[static_cast<std::size_t>(j)] /= n;
    }
    double val = v.dot(outer(ys));
    for (int sweep = 0; sweep < 50; ++sweep) {
      const double before = std::abs(val);
      for (int j = 0; j < m; ++j) {
        const int dj = dims[static_cast<std::size_t>(j)];
        const Matrix M = slot_matrix(ys, static_cast<std::size_t>(j), dj);
        const Vector c = M.transpose() * v;
        if (norm(S.factors[static_cast<std::size_t>(j)], c) <= 0.0) continue;
        ys[static_cast<std::size_t>(j)] = norming_functional(S.factors[static_cast<std::size_t>(j)], c);
      }
      val = v.dot(outer(ys));
      if (std::abs(val) - before <= 1e-15 * std::max(1.0, std::abs(val))) break;
    }
    double denom = 1.0;
    for (int j = 0; j < m; ++j) denom *= dual_norm(S.factors[static_cast<std::size_t>(j)], ys[static_cast<std::size_t>(j)]);
    if (denom <= 0.0) continue;
    const double cand = std::abs(v.dot(outer(ys))) / denom;
    if (cand > best) {
      best = cand;
      best_form = outer(ys) / denom;
    }
  }
  return best;
}

}  // namespace

LinearMap::LinearMap(FiniteSpace dom, FiniteSpace cod, Matrix m)
    : domain(std::move(dom)), codomain(std::move(cod)), matrix(std::move(m)) {
  require_dim(static_cast<std::size_t>(matrix.rows()), static_cast<std::size_t>(codomain.dim()), "LinearMap rows");
  require_dim(static_cast<std::size_t>(matrix.cols()), static_cast<std::size_t>(domain.dim()), "LinearMap cols");
  check_finite(matrix, "LinearMap");
}

Vector LinearMap::apply(const Vector& x) const {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(domain.dim()), "LinearMap::apply");
  return matrix * x;
}

int TensorSpace::dim() const {
  int d = 1;
  for (const auto& X : factors) d *= X.dim();
  return d;
}

std::vector<int> TensorSpace::dims() const {
  std::vector<int> d;
  for (const auto& X : factors) d.push_back(X.dim());
  return d;
}

bool TensorSpace::polyhedral() const {
  return std::all_of(factors.begin(), factors.end(), [](const FiniteSpace& X) { return X.polyhedral(); });
}

Vector outer(const std::vector<Vector>& xs) {
  if (xs.empty()) return Vector::Ones(1);
  Vector out = xs[0];
  for (std::size_t j = 1; j < xs.size(); ++j) {
    const Eigen::Index dj = xs[j].size();
    Vector next(out.size() * dj);
    for (Eigen::Index i = 0; i < out.size(); ++i) next.segment(i * dj, dj) = out(i) * xs[j];
    out = std::move(next);
  }
  return out;
}

MultilinearMap::MultilinearMap(std::vector<FiniteSpace> doms, FiniteSpace cod, Matrix c)
    : domains{std::move(doms)}, codomain(std::move(cod)), coeffs(std::move(c)) {
  if (domains.factors.empty()) throw Error(ErrorCode::invalid_argument, "MultilinearMap: m >= 1 required");
  require_dim(static_cast<std::size_t>(coeffs.rows()), static_cast<std::size_t>(codomain.dim()), "MultilinearMap rows");
  require_dim(static_cast<std::size_t>(coeffs.cols()), static_cast<std::size_t>(domains.dim()), "MultilinearMap cols");
  check_finite(coeffs, "MultilinearMap");
}

MultilinearMap MultilinearMap::from_flat(std::vector<FiniteSpace> doms, FiniteSpace cod,
                                         const std::vector<double>& flat) {
  TensorSpace S{doms};
  const int dy = cod.dim();
  require_dim(flat.size(), static_cast<std::size_t>(S.dim()) * static_cast<std::size_t>(dy), "coefficient array");
  Matrix c(dy, S.dim());
  for (int t = 0; t < S.dim(); ++t)
    for (int k = 0; k < dy; ++k) c(k, t) = flat[static_cast<std::size_t>(t) * static_cast<std::size_t>(dy) + static_cast<std::size_t>(k)];
  return MultilinearMap(std::move(doms), std::move(cod), std::move(c));
}

std::vector<double> MultilinearMap::to_flat() const {
  std::vector<double> flat;
  flat.reserve(static_cast<std::size_t>(coeffs.size()));
  for (Eigen::Index t = 0; t < coeffs.cols(); ++t)
    for (Eigen::Index k = 0; k < coeffs.rows(); ++k) flat.push_back(coeffs(k, t));
  return flat;
}

Vector MultilinearMap::apply(const std::vector<Vector>& xs) const {
  require_dim(xs.size(), domains.factors.size(), "MultilinearMap::apply arity");
  for (std::size_t j = 0; j < xs.size(); ++j)
    require_dim(static_cast<std::size_t>(xs[j].size()), static_cast<std::size_t>(domains.factors[j].dim()), "MultilinearMap::apply");
  return coeffs * outer(xs);
}

double MultilinearMap::eval_form(const std::vector<Vector>& xs) const {
  if (codomain.dim() != 1) throw Error(ErrorCode::invalid_argument, "eval_form: codomain must be scalar");
  return apply(xs)(0);
}

LinearizedMap linearize(const MultilinearMap& T) { return {T.domains, T.codomain, T.coeffs}; }

bool VmElement::equivalent(const VmElement& other, double tol) const {
  if (coords.size() != other.coords.size()) return false;
  return (coords - other.coords).lpNorm<Eigen::Infinity>() <= tol;
}

VmElement embed_vm(const TensorSpace& space, std::vector<VmTerm> terms) {
  VmElement v;
  v.space = space;
  v.coords = Vector::Zero(space.dim());
  for (const auto& t : terms) {
    require_dim(t.factors.size(), space.factors.size(), "embed_vm arity");
    for (std::size_t j = 0; j < t.factors.size(); ++j)
      require_dim(static_cast<std::size_t>(t.factors[j].size()), static_cast<std::size_t>(space.factors[j].dim()), "embed_vm");
  }
  // Sum in a fixed order so the cached coordinates do not depend on term order.
  std::vector<Vector> parts;
  for (const auto& t : terms) parts.push_back(t.lambda * outer(t.factors));
  std::sort(parts.begin(), parts.end(), lex_less);
  for (const auto& p : parts) v.coords += p;
  v.terms = std::move(terms);
  return v;
}

double vm_eval(const VmElement& v, const MultilinearMap& phi) {
  if (phi.codomain.dim() != 1) throw Error(ErrorCode::invalid_argument, "vm_eval: form must be scalar valued");
  require_dim(static_cast<std::size_t>(phi.coeffs.cols()), static_cast<std::size_t>(v.coords.size()), "vm_eval domains");
  return phi.coeffs.row(0).dot(v.coords);
}

double op_norm(const LinearMap& T, const OpNormConfig& cfg) {
  TensorSpace S{{T.domain}};
  return multilinear_sup(S, [&](const std::vector<Vector>& xs) { return norm(T.codomain, T.matrix * xs[0]); }, cfg);
}

double op_norm(const MultilinearMap& T, const OpNormConfig& cfg) {
  return multilinear_sup(T.domains, [&](const std::vector<Vector>& xs) { return norm(T.codomain, T.coeffs * outer(xs)); }, cfg);
}

double form_norm(const TensorSpace& space, const Vector& form, const OpNormConfig& cfg) {
  require_dim(static_cast<std::size_t>(form.size()), static_cast<std::size_t>(space.dim()), "form_norm");
  return multilinear_sup(space, [&](const std::vector<Vector>& xs) { return std::abs(form.dot(outer(xs))); }, cfg);
}

std::vector<Vector> extreme_elementary_tensors(const TensorSpace& space) {
  std::vector<Vector> out;
  for_each_product(primal_vertex_sets(space), [&](const std::vector<Vector>& xs) { out.push_back(outer(xs)); });
  return out;
}

ProjectiveNorm projective_norm(const TensorElement& v, int r_max, const ProjectiveNormConfig& cfg,
                               const std::vector<std::vector<VmTerm>>& extra_seeds) {
  if (r_max < 1) throw Error(ErrorCode::invalid_argument, "projective_norm: r_max must be >= 1");
  const TensorSpace& S = v.space;
  require_dim(static_cast<std::size_t>(v.coords.size()), static_cast<std::size_t>(S.dim()), "projective_norm");
  ProjectiveNorm out;
  out.certificate = Vector::Zero(S.dim());
  if (v.coords.lpNorm<Eigen::Infinity>() == 0.0) return out;

  out.upper = kInf;
  auto consider = [&](std::vector<VmTerm> terms, bool polish) {
    if (polish) terms = alternate(S, std::move(terms), cfg.max_alternations);
    const double c = certified_cost(S, v.coords, terms);
    if (c < out.upper) {
      out.upper = c;
      out.representation = std::move(terms);
    }
  };

  consider(canonical_representation(S, v.coords), false);
  consider(canonical_representation(S, v.coords), true);
  for (const auto& s : extra_seeds) {
    consider(s, false);
    consider(s, true);
  }

  if (S.polyhedral()) {
    const auto lp = polyhedral_projective_lp(S, v.coords);
    if (lp.ok) {
      out.lower = lp.lower;
      out.certificate = lp.form;
      consider(lp.representation, false);
    }
  }

  const auto dims = S.dims();
  if (S.order() == 2) {
    Matrix V(dims[0], dims[1]);
    for (int i = 0; i < dims[0]; ++i)
      for (int k = 0; k < dims[1]; ++k) V(i, k) = v.coords(i * dims[1] + k);
    Eigen::JacobiSVD<Matrix> svd(V, Eigen::ComputeThinU | Eigen::ComputeThinV);
    std::vector<VmTerm> terms;
    for (Eigen::Index q = 0; q < svd.singularValues().size(); ++q) {
      if (svd.singularValues()(q) <= 1e-15 * svd.singularValues()(0)) continue;
      terms.push_back({svd.singularValues()(q), {svd.matrixU().col(q), svd.matrixV().col(q)}});
    }
    consider(terms, false);
    consider(terms, true);
  }

  const bool tight = out.upper - out.lower <= 1e-12 * std::max(1.0, out.upper);
  if (!tight) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const int m = S.order();
    for (int rs = 0; rs < cfg.restarts; ++rs) {
      std::vector<VmTerm> terms(static_cast<std::size_t>(r_max));
      for (auto& t : terms) {
        t.factors.resize(static_cast<std::size_t>(m));
        for (int j = 0; j < m; ++j) {
          Vector x(dims[static_cast<std::size_t>(j)]);
          for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = j == 0 ? 0.0 : gauss(rng);
          t.factors[static_cast<std::size_t>(j)] = x;
        }
      }
      // Fit the first factor by least squares; seeds that cannot reproduce v are dropped.
      Matrix M(S.dim(), r_max * dims[0]);
      for (int i = 0; i < r_max; ++i) M.middleCols(i * dims[0], dims[0]) = slot_matrix(terms[static_cast<std::size_t>(i)].factors, 0, dims[0]);
      const Vector z = M.completeOrthogonalDecomposition().solve(v.coords);
      if ((M * z - v.coords).lpNorm<Eigen::Infinity>() > 1e-9 * std::max(1.0, v.coords.lpNorm<Eigen::Infinity>())) continue;
      for (int i = 0; i < r_max; ++i) terms[static_cast<std::size_t>(i)].factors[0] = z.segment(i * dims[0], dims[0]);
      consider(std::move(terms), true);
    }
  }

  Vector form;
  const double lr = rank_one_lower(S, v.coords, form, cfg.seed ^ 0x9E3779B97F4A7C15ULL, tight ? 0 : 8);
  if (lr > out.lower) {
    out.lower = lr;
    out.certificate = form;
  }
  out.lower = std::min(out.lower, out.upper);
  out.possibly_loose = out.upper - out.lower > cfg.tol_gap;
  return out;
}

FormsBallModel forms_ball_model(const TensorSpace& space, const FormsBallConfig& cfg) {
  FormsBallModel model;
  model.space = space;
  if (space.polyhedral()) {
    try {
      auto verts = enumerate_symmetric_polytope_vertices(extreme_elementary_tensors(space), cfg.max_enumeration);
      std::sort(verts.begin(), verts.end(), lex_less);
      model.forms = representatives_mod_sign(verts);
      model.exact = true;
      return model;
    } catch (const Error&) {
      model.forms.clear();
    }
  }
  std::vector<std::vector<Vector>> dual_sets;
  for (const auto& X : space.factors) {
    MeshConfig mc;
    mc.extreme_exact = X.polyhedral();
    mc.resolution = cfg.mesh_resolution;
    dual_sets.push_back(representatives_mod_sign(dual_ball_points(X, mc).points));
  }
  for_each_product(dual_sets, [&](const std::vector<Vector>& ys) { model.forms.push_back(outer(ys)); });
  if (space.polyhedral()) {
    std::mt19937_64 rng(cfg.seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < cfg.dense_forms; ++k) {
      Vector f(space.dim());
      for (Eigen::Index i = 0; i < f.size(); ++i) f(i) = gauss(rng);
      const double n = form_norm(space, f);
      if (n > 0.0) model.forms.push_back(f / n);
    }
  }
  model.forms = representatives_mod_sign(model.forms);
  return model;
}

FiniteSpace projective_tensor_space(const TensorSpace& space, const FormsBallConfig& cfg) {
  const auto model = forms_ball_model(space, cfg);
  if (!model.exact)
    throw Error(ErrorCode::not_polyhedral, "projective tensor space requires polyhedral factors with enumerable forms ball");
  std::string label = "proj(";
  for (std::size_t j = 0; j < space.factors.size(); ++j) label += (j ? "," : "") + space.factors[j].describe();
  return FiniteSpace::polytope(model.forms, label + ")");
}

}  // namespace phisum
