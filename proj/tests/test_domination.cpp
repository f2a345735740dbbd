#include "doctest.h"

#include "oracles.hpp"
#include "phisum/domination_space.hpp"

#include <cmath>
#include <numbers>
#include <random>

using namespace phisum;

namespace {
Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

DiscreteMeasure random_measure(int d, int k, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.1, 1.0);
  DiscreteMeasure mu;
  double total = 0.0;
  for (int j = 0; j < k; ++j) {
    Vector e(d);
    for (int i = 0; i < d; ++i) e(i) = u(rng);
    mu.support.push_back(e);
    mu.weights.push_back(w(rng));
    total += mu.weights.back();
  }
  for (auto& x : mu.weights) x /= total;
  return mu;
}
}  // namespace

TEST_CASE("hull gauge of a norm is the norm") {
  const auto cost = [](const Vector& v) { return v.norm(); };
  const Vector x = vec({0.4, -1.3, 2.0});
  const auto g = hull_gauge(cost, x, {}, {});
  CHECK(g.value == doctest::Approx(x.norm()).epsilon(1e-10));
  CHECK(g.lower == doctest::Approx(x.norm()).epsilon(1e-8));
}

TEST_CASE("hull gauge convexifies a cross-shaped cost") {
  // cost 1 on the axes, 2 elsewhere on the l_1 sphere: gauge is the l_1 norm
  const auto cost = [](const Vector& v) {
    const double n = v.lpNorm<1>();
    const bool axis = std::abs(v(0)) <= 1e-12 * n || std::abs(v(1)) <= 1e-12 * n;
    return axis ? n : 2.0 * n;
  };
  const Vector x = vec({1.0, 2.0});
  const auto g = hull_gauge(cost, x, {}, {});
  CHECK(g.value == doctest::Approx(3.0).epsilon(1e-10));
  Vector sum = Vector::Zero(2);
  for (const auto& p : g.parts) sum += p;
  CHECK((sum - x).norm() <= 1e-12);
}

TEST_CASE("seminorm matches the two-part grid for sigma interpolation") {
  std::mt19937_64 rng(11);
  const auto l1 = FiniteSpace::lq(2, 1.0);
  for (int inst = 0; inst < 3; ++inst) {
    const auto mu = random_measure(2, 3, rng);
    const auto m = build_model(l1, PhiMap::sigma_interp(l1, 0.5), mu, 1.0, {}, 10);
    CHECK_FALSE(m.subadditive);
    const Vector x = random_samples(2, 1, 100 + inst)[0];
    const auto g = seminorm(x, m);
    std::vector<double> cusps{0.0, std::numbers::pi / 2};
    for (const auto& e : mu.support) cusps.push_back(std::atan2(e(0), -e(1)));
    const double ref = oracle::two_part_gauge([&](const Vector& v) { return m.single_cost(v); }, x, 4e-3, cusps);
    INFO("value " << g.value << " lower " << g.lower << " grid " << ref);
    CHECK(std::abs(g.value - ref) <= 1e-6);
    CHECK(g.lower <= g.value + 1e-12);
  }
}

TEST_CASE("null space of the seminorm") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const auto m = build_model(l1, PhiMap::identity(l1), DiscreteMeasure::delta(vec({1, 0})), 1.0);
  REQUIRE(m.null_basis.size() == 1);
  CHECK(std::abs(m.null_basis[0](0)) <= 1e-12);
  CHECK(seminorm(vec({0, 3}), m).value <= 1e-12);
  CHECK(m.continuity <= 1.0 + 1e-12);

  const auto a = PhiMap::anchored(l1, vec({1, 1}));
  const auto ma = build_model(l1, a, DiscreteMeasure::delta(vec({1, 1})), 1.0, {}, 10);
  REQUIRE(ma.null_basis.size() == 1);
  CHECK(std::abs(ma.null_basis[0].sum()) <= 1e-12);
  const auto mb = build_model(l1, a, DiscreteMeasure::delta(vec({1, 0})), 1.0, {}, 10);
  CHECK(mb.null_basis.size() == 2);
}

TEST_CASE("factorization through the domination space") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const auto linf = FiniteSpace::lq(2, kInf);
  Matrix A(2, 2);
  A << 1.0, 0.5, -0.3, 0.8;
  const LinearMap T(l1, linf, A);
  const auto phi = PhiMap::identity(l1);
  const auto rep = summing_constant(T, phi, 1.0);
  REQUIRE(rep.certified());
  const auto f = build_factorization(T, phi, rep);
  CHECK(f.well_defined_residual <= 1e-12);
  const auto d = verify_diagram(f, random_samples(2, 100, 5));
  CHECK(d.pass);

  SummingReport bad = rep;
  bad.gap_open = true;
  CHECK_THROWS_AS(build_factorization(T, phi, bad), Error);
}

TEST_CASE("inclusion into the domination space") {
  std::mt19937_64 rng(3);
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const auto m = build_model(l1, PhiMap::sigma_interp(l1, 0.3), random_measure(2, 4, rng), 1.0, {}, 10);
  for (int k = 0; k < 5; ++k) {
    const auto fam = random_samples(2, 3, 40 + k);
    CHECK(inclusion_family_ratio(m, fam) <= 1.0 + 1e-9);
  }
}
