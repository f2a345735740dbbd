#include "phisum/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

namespace phisum {

namespace {

std::vector<long long> rounded_key(const Vector& v, double grid = 1e-9) {
  std::vector<long long> key(static_cast<std::size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i)
    key[static_cast<std::size_t>(i)] = std::llround(v(i) / grid);
  return key;
}

std::vector<Vector> dedupe(const std::vector<Vector>& pts) {
  std::set<std::vector<long long>> seen;
  std::vector<Vector> out;
  for (const auto& p : pts)
    if (seen.insert(rounded_key(p)).second) out.push_back(p);
  return out;
}

std::vector<Vector> sign_vectors(int d) {
  std::vector<Vector> out;
  const int n = 1 << d;
  out.reserve(static_cast<std::size_t>(n));
  for (int mask = 0; mask < n; ++mask) {
    Vector s(d);
    for (int i = 0; i < d; ++i) s(i) = (mask >> (d - 1 - i)) & 1 ? -1.0 : 1.0;
    out.push_back(s);
  }
  return out;
}

std::vector<Vector> signed_basis(int d) {
  std::vector<Vector> out;
  for (int i = 0; i < d; ++i) {
    for (double s : {1.0, -1.0}) {
      Vector e = Vector::Zero(d);
      e(i) = s;
      out.push_back(e);
    }
  }
  return out;
}

double lq_norm(const Vector& x, double q) {
  if (x.size() == 0) return 0.0;
  if (std::isinf(q)) return x.cwiseAbs().maxCoeff();
  if (q == 1.0) return x.cwiseAbs().sum();
  if (q == 2.0) return x.norm();
  const double m = x.cwiseAbs().maxCoeff();
  if (m == 0.0) return 0.0;
  double s = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) s += std::pow(std::abs(x(i)) / m, q);
  return m * std::pow(s, 1.0 / q);
}

double conjugate(double q) {
  if (q == 1.0) return kInf;
  if (std::isinf(q)) return 1.0;
  return q / (q - 1.0);
}

// Deterministic direction mesh of R^d: angular in 2D, cube surface otherwise.
std::vector<Vector> direction_mesh(int d, int r) {
  std::vector<Vector> out;
  if (d == 1) {
    out.push_back(Vector::Constant(1, 1.0));
    out.push_back(Vector::Constant(1, -1.0));
    return out;
  }
  if (d == 2) {
    for (int k = 0; k < 2 * r; ++k) {
      const double a = std::numbers::pi * k / r;
      Vector u(2);
      u << std::cos(a), std::sin(a);
      for (Eigen::Index i = 0; i < 2; ++i)
        if (std::abs(u(i)) < 1e-15) u(i) = 0.0;
      out.push_back(u);
    }
    return out;
  }
  std::vector<int> idx(static_cast<std::size_t>(d), -r);
  while (true) {
    int mx = 0;
    for (int v : idx) mx = std::max(mx, std::abs(v));
    if (mx == r) {
      Vector u(d);
      for (int i = 0; i < d; ++i) u(i) = idx[static_cast<std::size_t>(i)];
      out.push_back(u / u.norm());
    }
    int pos = d - 1;
    while (pos >= 0 && idx[static_cast<std::size_t>(pos)] == r) {
      idx[static_cast<std::size_t>(pos)] = -r;
      --pos;
    }
    if (pos < 0) break;
    ++idx[static_cast<std::size_t>(pos)];
  }
  return out;
}

}  // namespace

bool lex_less(const Vector& a, const Vector& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(), b.data() + b.size());
}

std::vector<Vector> representatives_mod_sign(const std::vector<Vector>& points, double tol) {
  std::vector<Vector> out;
  for (const auto& p : points) {
    const Vector rep = lex_less(p, Vector(-p)) ? Vector(-p) : p;
    bool dup = false;
    for (const auto& o : out) {
      if ((o - rep).cwiseAbs().maxCoeff() <= tol) { dup = true; break; }
    }
    if (!dup) out.push_back(rep);
  }
  return out;
}

std::vector<Vector> enumerate_symmetric_polytope_vertices(const std::vector<Vector>& normals,
                                                          double max_systems) {
  const auto dirs = representatives_mod_sign(normals);
  if (dirs.empty()) throw Error(ErrorCode::invalid_argument, "vertex enumeration: no normals");
  const int d = static_cast<int>(dirs.front().size());
  const int f = static_cast<int>(dirs.size());
  if (f < d) throw Error(ErrorCode::invalid_argument, "vertex enumeration: normals do not span");
  double combos = 1.0;
  for (int i = 0; i < d; ++i) combos = combos * (f - i) / (i + 1);
  if (combos * std::ldexp(1.0, d) > max_systems)
    throw Error(ErrorCode::invalid_argument, "vertex enumeration too large");

  const auto signs = sign_vectors(d);
  std::vector<Vector> verts;
  std::vector<int> comb(static_cast<std::size_t>(d));
  for (int i = 0; i < d; ++i) comb[static_cast<std::size_t>(i)] = i;
  Matrix S(d, d);
  while (true) {
    for (int i = 0; i < d; ++i) S.row(i) = dirs[static_cast<std::size_t>(comb[static_cast<std::size_t>(i)])].transpose();
    Eigen::FullPivLU<Matrix> lu(S);
    if (lu.rank() == d) {
      for (const auto& s : signs) {
        Vector x = lu.solve(s);
        bool ok = true;
        for (const auto& a : dirs) {
          if (std::abs(a.dot(x)) > 1.0 + 1e-9) { ok = false; break; }
        }
        if (ok) {
          for (Eigen::Index i = 0; i < x.size(); ++i)
            if (std::abs(x(i)) < 1e-14) x(i) = 0.0;
          verts.push_back(x);
        }
      }
    }
    int pos = d - 1;
    while (pos >= 0 && comb[static_cast<std::size_t>(pos)] == f - d + pos) --pos;
    if (pos < 0) break;
    ++comb[static_cast<std::size_t>(pos)];
    for (int i = pos + 1; i < d; ++i) comb[static_cast<std::size_t>(i)] = comb[static_cast<std::size_t>(i - 1)] + 1;
  }
  verts = dedupe(verts);
  std::sort(verts.begin(), verts.end(), lex_less);
  return verts;
}

FiniteSpace FiniteSpace::lq(int dim, double q, std::string label) {
  if (dim < 1) throw Error(ErrorCode::invalid_argument, "space dimension must be positive");
  if (!(q >= 1.0)) throw Error(ErrorCode::invalid_argument, "l_q exponent must lie in [1, inf]");
  FiniteSpace X;
  X.dim_ = dim;
  X.kind_ = NormKind::lq;
  X.q_ = q;
  X.label_ = std::move(label);
  if (q == 1.0) {
    X.polyhedral_ = true;
    X.primal_ext_ = signed_basis(dim);
    X.dual_ext_ = sign_vectors(dim);
  } else if (std::isinf(q)) {
    X.polyhedral_ = true;
    X.primal_ext_ = sign_vectors(dim);
    X.dual_ext_ = signed_basis(dim);
  }
  return X;
}

FiniteSpace FiniteSpace::polytope(const std::vector<Vector>& facets, std::string label) {
  if (facets.empty()) throw Error(ErrorCode::invalid_argument, "polytope norm needs at least one facet");
  const int d = static_cast<int>(facets.front().size());
  if (d < 1) throw Error(ErrorCode::invalid_argument, "space dimension must be positive");
  std::vector<Vector> closed;
  for (const auto& f : facets) {
    require_dim(static_cast<std::size_t>(f.size()), static_cast<std::size_t>(d), "polytope facet");
    if (!f.allFinite()) throw Error(ErrorCode::invalid_argument, "polytope facet has non-finite entries");
    if (f.cwiseAbs().maxCoeff() == 0.0) continue;
    closed.push_back(f);
    closed.push_back(-f);
  }
  closed = dedupe(closed);
  Matrix F(d, static_cast<Eigen::Index>(closed.size()));
  for (std::size_t j = 0; j < closed.size(); ++j) F.col(static_cast<Eigen::Index>(j)) = closed[j];
  if (closed.empty() || Eigen::FullPivLU<Matrix>(F).rank() < d)
    throw Error(ErrorCode::invalid_argument, "polytope facets do not define a norm (they must span the dual space)");
  FiniteSpace X;
  X.dim_ = d;
  X.kind_ = NormKind::polytope;
  X.q_ = kInf;
  X.label_ = std::move(label);
  X.facets_ = std::move(closed);
  X.init_polyhedral();
  return X;
}

void FiniteSpace::init_polyhedral() {
  polyhedral_ = true;
  primal_ext_ = enumerate_symmetric_polytope_vertices(facets_);
  // A facet vector is a dual vertex iff the primal vertices it supports span R^d.
  for (const auto& f : facets_) {
    std::vector<Vector> touching;
    for (const auto& v : primal_ext_)
      if (std::abs(f.dot(v) - 1.0) <= 1e-9) touching.push_back(v);
    if (static_cast<int>(touching.size()) < dim_) continue;
    Matrix M(dim_, static_cast<Eigen::Index>(touching.size()));
    for (std::size_t k = 0; k < touching.size(); ++k) M.col(static_cast<Eigen::Index>(k)) = touching[k];
    if (Eigen::FullPivLU<Matrix>(M).rank() == dim_) dual_ext_.push_back(f);
  }
  std::sort(dual_ext_.begin(), dual_ext_.end(), lex_less);
}

std::string FiniteSpace::describe() const {
  std::ostringstream os;
  if (kind_ == NormKind::lq) {
    os << "l_";
    if (std::isinf(q_)) os << "inf";
    else os << q_;
    os << "^" << dim_;
  } else {
    os << "polytope^" << dim_ << "[" << facets_.size() << "]";
  }
  return os.str();
}

double norm(const FiniteSpace& X, const Vector& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(X.dim()), "norm");
  if (X.kind() == NormKind::lq) return lq_norm(x, X.q());
  double m = 0.0;
  for (const auto& f : X.facets()) m = std::max(m, std::abs(f.dot(x)));
  return m;
}

double dual_norm(const FiniteSpace& X, const Vector& xstar) {
  require_dim(static_cast<std::size_t>(xstar.size()), static_cast<std::size_t>(X.dim()), "dual_norm");
  if (X.kind() == NormKind::lq) return lq_norm(xstar, conjugate(X.q()));
  double m = 0.0;
  for (const auto& v : X.primal_extreme_points()) m = std::max(m, std::abs(v.dot(xstar)));
  return m;
}

Vector norming_functional(const FiniteSpace& X, const Vector& x) {
  require_dim(static_cast<std::size_t>(x.size()), static_cast<std::size_t>(X.dim()), "norming_functional");
  const double nx = norm(X, x);
  if (nx == 0.0) throw Error(ErrorCode::invalid_argument, "norming_functional: x must be nonzero");
  if (X.polyhedral()) {
    const Vector* best = nullptr;
    double top = -kInf;
    for (const auto& p : X.dual_extreme_points()) top = std::max(top, p.dot(x));
    for (const auto& p : X.dual_extreme_points()) {
      if (p.dot(x) >= top - 1e-12 * nx && (best == nullptr || lex_less(p, *best))) best = &p;
    }
    return *best;
  }
  const double q = X.q();
  Vector out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double s = x(i) > 0 ? 1.0 : (x(i) < 0 ? -1.0 : 0.0);
    out(i) = s * std::pow(std::abs(x(i)) / nx, q - 1.0);
  }
  return out;
}

DualBallModel dual_ball_points(const FiniteSpace& X, const MeshConfig& cfg) {
  DualBallModel model;
  if (cfg.extreme_exact) {
    if (!X.polyhedral())
      throw Error(ErrorCode::not_polyhedral, "extreme-exact dual ball requires polyhedral space");
    model.points = X.dual_extreme_points();
    model.exactness = DualBallModel::Exactness::extreme_exact;
    return model;
  }
  if (cfg.resolution < 1) throw Error(ErrorCode::invalid_argument, "mesh resolution must be >= 1");
  model.exactness = DualBallModel::Exactness::mesh;
  model.resolution = cfg.resolution;
  for (const auto& u : direction_mesh(X.dim(), cfg.resolution)) {
    const double dn = dual_norm(X, u);
    model.points.push_back(u / dn);
  }
  return model;
}

std::vector<Vector> primal_sphere_mesh(const FiniteSpace& X, int resolution) {
  if (resolution < 1) throw Error(ErrorCode::invalid_argument, "mesh resolution must be >= 1");
  std::vector<Vector> out;
  for (const auto& u : direction_mesh(X.dim(), resolution)) out.push_back(u / norm(X, u));
  return out;
}

}  // namespace phisum
