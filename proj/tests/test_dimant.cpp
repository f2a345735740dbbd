#include "doctest.h"

#include "phisum/dimant_sigma.hpp"

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

const FiniteSpace l1 = FiniteSpace::lq(2, 1.0);
const FiniteSpace linf = FiniteSpace::lq(2, kInf);

MultilinearMap rank_one(const Vector& u) {
  Matrix c = Matrix::Zero(u.size(), 4);
  c.col(0) = u;
  return MultilinearMap({l1, l1}, linf, c);
}

MultilinearMap diagonal(const Vector& u) {
  Matrix c = Matrix::Zero(u.size(), 4);
  c.col(0) = u;
  c.col(3) = u;
  return MultilinearMap({l1, l1}, linf, c);
}

MultilinearMap random_bilinear(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix c(2, 4);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = u(rng);
  return MultilinearMap({l1, l1}, linf, c);
}

PlainFamily random_family(const TensorSpace& S, int n, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  PlainFamily fam{S, {}};
  for (int i = 0; i < n; ++i) {
    std::vector<Vector> row;
    for (int d : S.dims()) {
      Vector x(d);
      for (int k = 0; k < d; ++k) x(k) = g(rng);
      row.push_back(x);
    }
    fam.rows.push_back(row);
  }
  return fam;
}

SigmaConfig tight() {
  SigmaConfig c;
  c.summing.tol_gap = 1e-9;
  return c;
}
}  // namespace

TEST_CASE("delta p sigma") {
  const TensorSpace S{{l1, l1}};
  const auto model = forms_ball_model(S);
  std::mt19937_64 rng(4);
  for (int k = 0; k < 200; ++k) {
    const auto fam = random_family(S, 1 + k % 4, rng);
    const double sigma = (k % 3) / 3.0;
    const double p = 1.0 + (k % 2);
    CHECK(delta_p_sigma(fam, p, sigma, model) >= strongly_denominator(fam, p / (1.0 - sigma), model) * (1 - 1e-12));
    if (sigma == 0.0) CHECK(delta_p_sigma(fam, p, 0.0, model) == doctest::Approx(strongly_denominator(fam, p, model)));
  }
  PlainFamily zero{S, {{vec({0, 0}), vec({1, 0})}}};
  CHECK(delta_p_sigma(zero, 1.0, 0.5, model) == 0.0);
  // one row of unit vectors: at least the best sign form value
  PlainFamily one{S, {{vec({0.5, 0.5}), vec({1, 0})}}};
  CHECK(delta_p_sigma(one, 1.0, 0.5, model) >= std::pow(0.5, 0.5) - 1e-12);
}

TEST_CASE("dimant constant") {
  const auto T = rank_one(vec({2.0, -1.0}));
  for (double sigma : {0.0, 0.5}) {
    const auto rep = dimant_constant(T, 1.0, sigma);
    CHECK(rep.certified());
    CHECK(rep.upper_bound() == doctest::Approx(2.0).epsilon(1e-6));
  }
  std::mt19937_64 rng(9);
  const auto R = random_bilinear(rng);
  const auto d0 = dimant_constant(R, 1.0, 0.0);
  const auto s1 = strongly_constant(R, TensorPhi::identity(R.domains), 1.0);
  CHECK(std::abs(d0.upper_bound() - s1.summary.upper_bound) <= 1e-5);

  Matrix A(2, 2);
  A << 1.0, 0.5, -0.3, 0.8;
  const MultilinearMap L({l1}, linf, A);
  const auto d = dimant_constant(L, 1.0, 0.25);
  const auto s = summing_constant(LinearMap(l1, linf, A), PhiMap::sigma_interp(l1, 0.25), 1.0 / 0.75);
  CHECK(std::abs(d.upper_bound() - s.upper_bound) <= 1e-5);

  CHECK(dimant_constant(MultilinearMap({l1, l1}, linf, Matrix::Zero(2, 4)), 1.0, 0.3).upper_bound() == 0.0);
}

TEST_CASE("monotonicity and inclusion") {
  std::mt19937_64 rng(21);
  const auto T = random_bilinear(rng);
  CHECK(sigma_monotonicity_check(T, 1.0, 2.0, 1.0 / 3.0, tight()).pass);
  const auto eq = sigma_monotonicity_check(T, 1.0, 1.0, 0.0, tight());
  CHECK(eq.upper_p == eq.upper_q);
  CHECK(inclusion_check(T, 1.0, 0.5, tight()).pass);
  CHECK(inclusion_check(rank_one(vec({1.0, 1.0})), 1.0, 0.5, tight()).pass);
  CHECK_THROWS_AS(sigma_monotonicity_check(T, 2.0, 1.0, 0.0), Error);
}

TEST_CASE("factorable constant and certificate ordering") {
  const auto T = rank_one(vec({2.0, -1.0}));
  const auto f0 = factorable_constant(T, 1.0, 0.0);
  CHECK(f0.upper_bound() == doctest::Approx(2.0).epsilon(1e-6));
  std::mt19937_64 rng(5);
  const auto R = random_bilinear(rng);
  const auto d = dimant_constant(R, 1.0, 0.25);
  const auto f = factorable_constant(R, 1.0, 0.25);
  CHECK(d.lower_bound() <= f.upper_bound() + 1e-6);
  CHECK(d.upper_bound() <= f.upper_bound() + 1e-6);
  // plain rows as coefficient rows bound the factorable constant from below
  const auto model = forms_ball_model(R.domains);
  const double lb = strongly_family_lower_bound(R, TensorPhi::factorable(R.domains, 0.25), 1.0 / 0.75,
                                                as_coefficient_family(d.plain_family), model).value;
  CHECK(lb <= f.upper_bound() + 1e-6);
  CHECK(lb >= d.lower_bound() - 1e-12);
}

TEST_CASE("final factorization") {
  const auto T = rank_one(vec({2.0, -1.0}));
  const auto rep = factorable_constant(T, 1.0, 0.5);
  REQUIRE(rep.certified());
  const auto rec = final_factorization(T, rep);
  CHECK(rec.pass);
  CHECK(rec.inequality_residual <= 1e-9);
  CHECK(rec.domination_residual <= 1e-9);
  CHECK(rec.diagram_residual <= 1e-9);

  const auto D = diagonal(vec({1.0, 0.5}));
  const auto rd = factorable_constant(D, 1.0, 0.25);
  REQUIRE(rd.certified());
  CHECK(rd.summary.gap <= 1e-4);
  CHECK(final_factorization(D, rd).pass);

  CHECK_THROWS_AS(final_factorization(T, dimant_constant(T, 1.0, 0.5)), Error);
  SigmaReport bad = rep;
  bad.summary.gap_open = true;
  CHECK_THROWS_AS(final_factorization(T, bad), Error);
}
