#include "doctest.h"

#include "phisum/cutting_plane.hpp"
#include "phisum/lp.hpp"
#include "phisum/operators.hpp"
#include "phisum/spaces.hpp"

#include <cmath>
#include <random>

using namespace phisum;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}
}  // namespace

TEST_CASE("lp small instances") {
  LpProblem p;
  p.objective = vec({1.0});
  p.rows = Matrix::Ones(1, 1);
  p.rhs = vec({3.0});
  auto s = solve_lp(p);
  CHECK(s.status == LpStatus::optimal);
  CHECK(s.t(0) == doctest::Approx(3.0));

  LpProblem q;
  q.objective = vec({1.0, 1.0});
  q.rows.resize(2, 2);
  q.rows << 1, 2, 2, 1;
  q.rhs = vec({2.0, 2.0});
  s = solve_lp(q);
  CHECK(s.status == LpStatus::optimal);
  CHECK(std::abs(s.value - 4.0 / 3.0) < 1e-12);
  CHECK(std::abs(s.t(0) - 2.0 / 3.0) < 1e-12);
  CHECK(std::abs(s.t(1) - 2.0 / 3.0) < 1e-12);

  LpProblem bad;
  bad.objective = vec({1.0});
  bad.rows = -Matrix::Ones(1, 1);
  bad.rhs = vec({1.0});
  CHECK(solve_lp(bad).status == LpStatus::infeasible);
}

TEST_CASE("lp matches vertex enumeration on random instances") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + trial % 3;
    const int m = n + 2 + trial % 4;
    LpProblem p;
    p.objective = Vector(n);
    for (int i = 0; i < n; ++i) p.objective(i) = 0.2 + std::abs(u(rng));
    p.rows.resize(m, n);
    p.rhs.resize(m);
    for (int r = 0; r < m; ++r) {
      for (int i = 0; i < n; ++i) p.rows(r, i) = u(rng);
      p.rhs(r) = u(rng);
    }
    const auto s = solve_lp(p);
    // Brute force over all n-subsets of the m + n constraints (rows and t >= 0).
    Matrix A(m + n, n);
    Vector b(m + n);
    A.topRows(m) = p.rows;
    b.head(m) = p.rhs;
    A.bottomRows(n) = Matrix::Identity(n, n);
    b.tail(n).setZero();
    double best = kInf;
    std::vector<int> pick(static_cast<std::size_t>(n));
    std::function<void(int, int)> rec = [&](int start, int depth) {
      if (depth == n) {
        Matrix B(n, n);
        Vector c(n);
        for (int k = 0; k < n; ++k) {
          B.row(k) = A.row(pick[static_cast<std::size_t>(k)]);
          c(k) = b(pick[static_cast<std::size_t>(k)]);
        }
        Eigen::FullPivLU<Matrix> lu(B);
        if (lu.rank() < n) return;
        const Vector x = lu.solve(c);
        if (((A * x - b).array() >= -1e-10).all()) best = std::min(best, p.objective.dot(x));
        return;
      }
      for (int k = start; k < m + n; ++k) {
        pick[static_cast<std::size_t>(depth)] = k;
        rec(k + 1, depth + 1);
      }
    };
    rec(0, 0);
    if (std::isinf(best)) {
      CHECK(s.status == LpStatus::infeasible);
    } else {
      REQUIRE(s.status == LpStatus::optimal);
      CHECK(std::abs(s.value - best) <= 1e-10);
    }
  }
}

TEST_CASE("norms and dual norms") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const auto linf = FiniteSpace::lq(2, kInf);
  CHECK(norm(l1, vec({3, -4})) == doctest::Approx(7.0));
  CHECK(norm(linf, vec({3, -4})) == doctest::Approx(4.0));
  const auto P = FiniteSpace::polytope({vec({1, 0}), vec({0, 1}), vec({1, 1})});
  CHECK(norm(P, vec({1, 1})) == doctest::Approx(2.0));
  CHECK(dual_norm(l1, vec({1, -1})) == doctest::Approx(1.0));
  CHECK(dual_norm(FiniteSpace::lq(3, 2.0), vec({1, 2, 2})) == doctest::Approx(3.0));
  const auto box = FiniteSpace::polytope({vec({1, 0}), vec({0, 1})});
  CHECK(dual_norm(box, vec({1, 1})) == doctest::Approx(2.0));
}

TEST_CASE("dual ball models") {
  const auto linf = FiniteSpace::lq(2, kInf);
  auto m = dual_ball_points(linf, {});
  CHECK(m.points.size() == 4);
  const auto l1 = FiniteSpace::lq(2, 1.0);
  m = dual_ball_points(l1, {});
  CHECK(m.points.size() == 4);
  for (const auto& p : m.points) CHECK(p.cwiseAbs().minCoeff() == 1.0);
  const auto l2 = FiniteSpace::lq(2, 2.0);
  CHECK_THROWS_WITH(dual_ball_points(l2, {true, 8}), doctest::Contains("requires polyhedral space"));
  m = dual_ball_points(l2, {false, 8});
  CHECK(m.points.size() == 16);
  // nested under doubling
  const auto fine = dual_ball_points(l2, {false, 16}).points;
  for (const auto& p : m.points) {
    bool found = false;
    for (const auto& q : fine) found = found || (p - q).norm() < 1e-12;
    CHECK(found);
  }
}

TEST_CASE("norming functionals") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  CHECK((norming_functional(l1, vec({2, -3})) - vec({1, -1})).norm() < 1e-15);
  CHECK((norming_functional(FiniteSpace::lq(2, 2.0), vec({3, 4})) - vec({0.6, 0.8})).norm() < 1e-15);
  CHECK((norming_functional(FiniteSpace::lq(2, kInf), vec({5, 2})) - vec({1, 0})).norm() < 1e-15);
  CHECK_THROWS(norming_functional(l1, vec({0, 0})));
}

TEST_CASE("op norms and linearization") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const auto scalar = FiniteSpace::lq(1, 1.0);
  MultilinearMap phi({l1, l1}, scalar, Matrix(vec({1, 0, 0, 0}).transpose()));
  CHECK(op_norm(phi) == doctest::Approx(1.0));
  CHECK(op_norm(LinearMap(l1, l1, Matrix::Identity(2, 2))) == doctest::Approx(1.0));
  CHECK(op_norm(LinearMap(l1, l1, Matrix::Zero(2, 2))) == 0.0);
  CHECK_THROWS(op_norm(LinearMap(FiniteSpace::lq(2, 2.0), l1, Matrix::Identity(2, 2))));

  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  std::vector<double> flat(2 * 3 * 2);
  for (auto& c : flat) c = g(rng);
  const auto T = MultilinearMap::from_flat({l1, FiniteSpace::lq(3, 2.0)}, FiniteSpace::lq(2, kInf), flat);
  CHECK(T.to_flat() == flat);
  const auto TL = linearize(T);
  for (int k = 0; k < 200; ++k) {
    Vector x(2), y(3);
    for (int i = 0; i < 2; ++i) x(i) = g(rng);
    for (int i = 0; i < 3; ++i) y(i) = g(rng);
    CHECK((T.apply({x, y}) - TL.apply(outer({x, y}))).norm() <= 1e-12);
  }
  // c[i,j,k] layout
  Vector direct(2);
  direct(0) = flat[(1 * 3 + 2) * 2 + 0];
  direct(1) = flat[(1 * 3 + 2) * 2 + 1];
  Vector e1 = Vector::Zero(2), e2 = Vector::Zero(3);
  e1(1) = 1;
  e2(2) = 1;
  CHECK((T.apply({e1, e2}) - direct).norm() == 0.0);
}

TEST_CASE("vm elements") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  TensorSpace S{{l1, l1}};
  const Vector e1 = vec({1, 0}), e2 = vec({0, 1});
  auto a = embed_vm(S, {{1.0, {e1, e1}}});
  CHECK((a.coords - vec({1, 0, 0, 0})).norm() == 0.0);
  auto z = embed_vm(S, {{1.0, {e1, e1}}, {-1.0, {e1, e1}}});
  CHECK(z.coords.norm() == 0.0);
  auto d = embed_vm(S, {{1.0, {e1, e1}}, {1.0, {e2, e2}}});
  auto d2 = embed_vm(S, {{1.0, {e2, e2}}, {1.0, {e1, e1}}});
  CHECK(d.coords == d2.coords);
  const auto scalar = FiniteSpace::lq(1, 1.0);
  MultilinearMap f11({l1, l1}, scalar, Matrix(vec({1, 0, 0, 0}).transpose()));
  MultilinearMap f12({l1, l1}, scalar, Matrix(vec({0, 1, 0, 0}).transpose()));
  CHECK(vm_eval(a, f11) == 1.0);
  CHECK(vm_eval(z, f11) == 0.0);
  CHECK(vm_eval(d, f12) == 0.0);
  // splitting a term and moving scalars between factors
  auto split = embed_vm(S, {{0.25, {e1, e1}}, {1.0, {0.75 * e1, e1}}, {0.5, {e2, 2.0 * e2}}});
  CHECK(split.equivalent(d));
  CHECK(std::abs(vm_eval(split, f11) - vm_eval(d, f11)) <= 1e-12);
}

TEST_CASE("projective norm") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  TensorSpace S{{l1, l1}};
  auto pn = projective_norm({S, vec({1, 0, 0, 1})}, 4);
  CHECK(pn.upper == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(pn.lower == doctest::Approx(2.0).epsilon(1e-12));
  CHECK_FALSE(pn.possibly_loose);
  pn = projective_norm({S, Vector::Zero(4)}, 2);
  CHECK(pn.upper == 0.0);
  CHECK(pn.lower == 0.0);

  std::mt19937_64 rng(11);
  std::normal_distribution<double> g;
  for (const auto& X : {FiniteSpace::lq(2, 2.0), FiniteSpace::lq(3, 1.5), FiniteSpace::lq(2, kInf)}) {
    for (int k = 0; k < 5; ++k) {
      Vector x(X.dim()), y(2);
      for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = g(rng);
      for (int i = 0; i < 2; ++i) y(i) = g(rng);
      TensorSpace T{{X, l1}};
      const auto r = projective_norm({T, outer({x, y})}, 3);
      const double expect = norm(X, x) * norm(l1, y);
      CHECK(r.lower <= r.upper);
      CHECK(r.upper - r.lower <= 1e-8 * std::max(1.0, expect));
      CHECK(std::abs(r.upper - expect) <= 1e-8 * std::max(1.0, expect));
    }
  }
  // subadditivity with the concatenated seed
  TensorSpace E{{FiniteSpace::lq(2, 2.0), FiniteSpace::lq(2, 3.0)}};
  for (int k = 0; k < 5; ++k) {
    Vector v(4), w(4);
    for (int i = 0; i < 4; ++i) { v(i) = g(rng); w(i) = g(rng); }
    const auto pv = projective_norm({E, v}, 3);
    const auto pw = projective_norm({E, w}, 3);
    auto seed = pv.representation;
    seed.insert(seed.end(), pw.representation.begin(), pw.representation.end());
    const auto ps = projective_norm({E, v + w}, 3, {}, {seed});
    CHECK(ps.upper <= pv.upper + pw.upper + 1e-9);
    CHECK(ps.lower <= ps.upper);
  }
}

TEST_CASE("forms ball model") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  TensorSpace S{{l1, l1}};
  const auto m = forms_ball_model(S);
  CHECK(m.exact);
  CHECK(m.forms.size() == 8);
  const auto P = projective_tensor_space(S);
  CHECK(norm(P, vec({1, 0, 0, 1})) == doctest::Approx(2.0));
  const auto linf = FiniteSpace::lq(2, kInf);
  TensorSpace Q{{linf, linf}};
  const Vector v = vec({1, 0, 0, 1});
  const auto pn = projective_norm({Q, v}, 4);
  CHECK(norm(projective_tensor_space(Q), v) == doctest::Approx(pn.lower));
  CHECK(pn.upper - pn.lower <= 1e-9);
}

TEST_CASE("cutting plane on a toy problem") {
  // Support {e1*, e2*} on l_1^2, constraint |x1| + |x2| <= nu1 |x1| + nu2 |x2|  -> nu = (1,1), mass 2.
  const auto X = FiniteSpace::lq(2, 1.0);
  CuttingPlaneProblem prob;
  prob.support_size = 2;
  prob.exponent = 1.0;
  prob.row = [](const Blocks& b) {
    ConstraintRow r;
    r.g = b[0].cwiseAbs();
    r.h = b[0].cwiseAbs().sum();
    return r;
  };
  prob.oracle = [](const Vector& nu) {
    OracleResult best;
    best.ratio = 0.0;
    for (int i = 0; i < 2; ++i) {
      Vector e = Vector::Zero(2);
      e(i) = 1.0;
      const double ratio = nu(i) > 0 ? 1.0 / nu(i) : kInf;
      if (ratio > best.ratio) best = {{e}, ratio};
    }
    return best;
  };
  const auto rep = cutting_plane(prob, {{vec({1, 0})}}, {});
  CHECK(rep.converged);
  CHECK(rep.upper_bound == doctest::Approx(2.0));
  CHECK(rep.lower_bound == doctest::Approx(2.0));
  for (std::size_t k = 1; k < rep.history.size(); ++k) {
    CHECK(rep.history[k].upper <= rep.history[k - 1].upper);
    CHECK(rep.history[k].lower >= rep.history[k - 1].lower);
  }
  CHECK(min_measure_mass(1, {}).mass == 0.0);
  const auto one = min_measure_mass(1, {{vec({1.0}), 1.0}});
  CHECK(one.mass == doctest::Approx(1.0));
  CHECK_FALSE(min_measure_mass(1, {{vec({0.0}), 1.0}}).feasible);
}
