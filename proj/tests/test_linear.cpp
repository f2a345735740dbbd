#include "doctest.h"

#include "phisum/linear_summing.hpp"

#include <chrono>
#include <cmath>
#include <iostream>
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
}  // namespace

TEST_CASE("phi evaluation") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  CHECK(phi_eval(PhiMap::identity(l1), vec({1, 0}), vec({1, -1})) == 1.0);
  CHECK(phi_eval(PhiMap::sigma_interp(l1, 0.5), vec({1, 1}), vec({1, 0})) == doctest::Approx(std::sqrt(2.0)));
  CHECK(phi_eval(PhiMap::square_over_norm(l1), vec({0, 0}), vec({1, 0})) == 0.0);
  const auto a = PhiMap::anchored(l1, vec({2, 0}));
  CHECK(a.anchor(0) == 1.0);
  const Vector x = vec({0.3, -1.2}), xs = vec({0.5, 1.0});
  for (const auto& phi : {PhiMap::identity(l1), PhiMap::sigma_interp(l1, 0.3), PhiMap::square_over_norm(l1), a}) {
    CHECK(std::abs(phi_eval(phi, 3.5 * x, xs) - 3.5 * phi_eval(phi, x, xs)) <= 1e-12);
    CHECK(phi_eval(phi, x, xs) <= phi.bound() * norm(l1, x) + 1e-15);
  }
}

TEST_CASE("weak p norms") {
  const auto linf = FiniteSpace::lq(2, kInf);
  CHECK(weak_p_norm({vec({1, 0}), vec({0, 1})}, 1.0, linf) == doctest::Approx(1.0));
  CHECK(weak_p_norm({}, 1.0, linf) == 0.0);
  const auto l3 = FiniteSpace::lq(3, 3.0);
  const Vector x = vec({1.0, -2.0, 0.5});
  CHECK(weak_p_norm({x}, 2.0, l3) == doctest::Approx(norm(l3, x)).epsilon(1e-9));
}

TEST_CASE("family lower bounds") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const LinearMap id(l1, l1, Matrix::Identity(2, 2));
  CHECK(family_lower_bound(id, PhiMap::identity(l1), 1.0, {vec({1, 1}), vec({1, -1})}) == doctest::Approx(2.0));
  const LinearMap zero(l1, l1, Matrix::Zero(2, 2));
  CHECK(family_lower_bound(zero, PhiMap::identity(l1), 1.0, {vec({1, 1})}) == 0.0);
}

TEST_CASE("summing constant: identity on l_1^2") {
  const auto l1 = FiniteSpace::lq(2, 1.0);
  const LinearMap id(l1, l1, Matrix::Identity(2, 2));
  const auto rep = summing_constant(id, PhiMap::identity(l1), 1.0);
  CHECK(rep.upper_bound == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.lower_bound == doctest::Approx(2.0).epsilon(1e-9));
  CHECK(rep.certified());
  REQUIRE(rep.measure.support.size() == 2);
  CHECK(rep.measure.weights[0] == doctest::Approx(0.5));
  rep.measure.validate(l1);
  const auto chk = check_domination(id, PhiMap::identity(l1), 1.0, rep.measure, rep.upper_bound, random_samples(2, 100, 1));
  CHECK(chk.pass);
  const auto bad = check_domination(id, PhiMap::identity(l1), 1.0, rep.measure, rep.upper_bound / 2, random_samples(2, 100, 1));
  CHECK_FALSE(bad.pass);
}

TEST_CASE("summing constant: rank one and zero") {
  const auto l1 = FiniteSpace::lq(3, 1.0);
  const auto linf = FiniteSpace::lq(2, kInf);
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int k = 0; k < 5; ++k) {
    const Vector a = vec({g(rng), g(rng), g(rng)});
    const Vector y = vec({g(rng), g(rng)});
    const LinearMap T(l1, linf, y * a.transpose());
    const double expect = a.lpNorm<Eigen::Infinity>() * y.lpNorm<Eigen::Infinity>();
    for (double r : {1.0, 2.0}) {
      const auto rep = summing_constant(T, PhiMap::identity(l1), r);
      CHECK(std::abs(rep.upper_bound - expect) <= 1e-6);
      CHECK(std::abs(rep.lower_bound - expect) <= 1e-6);
    }
  }
  const LinearMap Z(l1, linf, Matrix::Zero(2, 3));
  const auto z = summing_constant(Z, PhiMap::identity(l1), 1.0);
  CHECK(z.upper_bound == 0.0);
  CHECK(z.measure.support.size() == 1);
}

TEST_CASE("summing constant: pi_2 of the Euclidean identity") {
  const auto l2 = FiniteSpace::lq(2, 2.0);
  const LinearMap id(l2, l2, Matrix::Identity(2, 2));
  for (int res : {16, 32}) {
    SummingConfig cfg;
    cfg.mesh_resolution = res;
    const auto t0 = std::chrono::steady_clock::now();
    const auto rep = summing_constant(id, PhiMap::identity(l2), 2.0, cfg);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    MESSAGE("res " << res << " lb " << rep.lower_bound << " ub " << rep.upper_bound << " it " << rep.iterations << " " << secs << "s");
    CHECK(rep.lower_bound <= std::sqrt(2.0) + 1e-9);
    CHECK(rep.upper_bound >= std::sqrt(2.0) - 1e-9);
  }
}
