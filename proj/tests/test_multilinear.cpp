#include "doctest.h"

#include "phisum/multilinear_summing.hpp"

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

// T(x,y) = x_1 y_1 u
MultilinearMap rank_one(const Vector& u) {
  Matrix c = Matrix::Zero(u.size(), 4);
  c.col(0) = u;
  return MultilinearMap({l1, l1}, FiniteSpace::lq(static_cast<int>(u.size()), kInf), c);
}

// T(x,y) = sum_i x_i y_i u
MultilinearMap diagonal(const Vector& u) {
  Matrix c = Matrix::Zero(u.size(), 4);
  c.col(0) = u;
  c.col(3) = u;
  return MultilinearMap({l1, l1}, FiniteSpace::lq(static_cast<int>(u.size()), kInf), c);
}

MultilinearMap random_bilinear(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Matrix c(2, 4);
  for (Eigen::Index i = 0; i < c.size(); ++i) c(i) = u(rng);
  return MultilinearMap({l1, l1}, linf, c);
}
}  // namespace

TEST_CASE("factorable tensor Phi is the representation infimum") {
  const TensorSpace S{{l1, l1}};
  const auto phi = TensorPhi::factorable(S, 0.4);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    Vector form(4), a(2), b(2), c(2), d(2);
    for (int i = 0; i < 4; ++i) form(i) = u(rng);
    a << u(rng), u(rng);
    b << u(rng), u(rng);
    c << u(rng), u(rng);
    d << u(rng), u(rng);
    const std::vector<VmTerm> terms{{0.7, {a, b}}, {-1.3, {c, d}}};
    const auto v = embed_vm(S, terms);
    const double closed = tensor_phi_eval(phi, v.coords, form);
    CHECK(closed <= tensor_phi_representation(phi, terms, form) + 1e-12);
    CHECK(closed <= tensor_phi_representation(phi, canonical_terms(S, v.coords), form) + 1e-12);
  }
  // attained on a norming elementary tensor
  const Vector form = vec({1.0, 0.5, -0.5, 0.25});
  const std::vector<VmTerm> one{{2.0, {vec({1, 0}), vec({1, 0})}}};
  const auto v = embed_vm(S, one);
  CHECK(tensor_phi_eval(phi, v.coords, form) == doctest::Approx(tensor_phi_representation(phi, one, form)));
}

TEST_CASE("strongly family lower bound") {
  const auto T = rank_one(vec({2.0, -1.0}));
  const auto model = forms_ball_model(T.domains);
  CoefficientFamily fam{T.domains, {{{1.0, {vec({1, 0}), vec({1, 0})}}}}};
  const auto fb = strongly_family_lower_bound(T, TensorPhi::identity(T.domains), 1.0, fam, model);
  CHECK(fb.value == doctest::Approx(2.0));
  CHECK_FALSE(fb.approx_denominator);
  CoefficientFamily zero{T.domains, {{{0.0, {vec({1, 0}), vec({1, 0})}}}}};
  CHECK(strongly_family_lower_bound(T, TensorPhi::identity(T.domains), 1.0, zero, model).value == 0.0);
  const CoefficientFamily empty{T.domains, {}};
  CHECK_THROWS_AS(empty.validate(), Error);
}

TEST_CASE("strongly constant of rank-one and zero maps") {
  const auto T = rank_one(vec({2.0, -1.0}));
  const auto rep = strongly_constant(T, TensorPhi::identity(T.domains), 1.0);
  CHECK(rep.summary.certified());
  CHECK(rep.summary.upper_bound == doctest::Approx(2.0).epsilon(1e-6));
  CHECK(rep.summary.lower_bound == doctest::Approx(2.0).epsilon(1e-6));
  CHECK_FALSE(rep.disagreement);

  const MultilinearMap Z({l1, l1}, linf, Matrix::Zero(2, 4));
  CHECK(strongly_constant(Z, TensorPhi::identity(Z.domains), 1.0).summary.upper_bound == 0.0);
}

TEST_CASE("strongly constant with one factor is the summing constant") {
  Matrix A(2, 2);
  A << 1.0, 0.5, -0.3, 0.8;
  const MultilinearMap T({l1}, linf, A);
  const auto s = strongly_constant(T, TensorPhi::identity(T.domains), 1.0);
  const auto l = summing_constant(LinearMap(l1, linf, A), PhiMap::identity(l1), 1.0);
  CHECK(std::abs(s.summary.upper_bound - l.upper_bound) <= 1e-6);
}

TEST_CASE("linearization equivalence") {
  std::mt19937_64 rng(8);
  const auto T = random_bilinear(rng);
  const auto s = strongly_constant(T, TensorPhi::identity(T.domains), 1.0);
  const auto L = linearized_operator(T, forms_ball_model(T.domains));
  const auto l = summing_constant(L, PhiMap::identity(L.domain), 1.0);
  CHECK(s.summary.certified());
  CHECK(std::abs(s.summary.upper_bound - l.upper_bound) <= 1e-3);
  // the factorable class at sigma is the identity class at r
  const auto f = strongly_constant(T, TensorPhi::factorable(T.domains, 0.5), 2.0);
  const auto i2 = strongly_constant(T, TensorPhi::identity(T.domains), 2.0);
  CHECK(std::abs(f.summary.upper_bound - i2.summary.upper_bound) <= 1e-9);
}

TEST_CASE("strongly factorization diagrams") {
  for (const auto& T : {rank_one(vec({2.0, -1.0})), diagonal(vec({1.0, 0.5}))}) {
    const auto rep = strongly_constant(T, TensorPhi::identity(T.domains), 1.0);
    REQUIRE(rep.summary.certified());
    const auto f = strongly_factorization(T, rep);
    const auto d = verify_strongly_diagram(f, 100, 17);
    CHECK(d.diagram_residual <= 1e-9);
    CHECK(d.pass);
  }
}

TEST_CASE("multi-ideal exponents") {
  CHECK(multi_ideal_exponent({2.0, 2.0}) == doctest::Approx(1.0));
  CHECK_NOTHROW(check_exponent_identity(1.0, {2.0, 2.0}));
  CHECK_THROWS_WITH(check_exponent_identity(1.0, {1.0, 2.0}), "exponent identity violated");
}

TEST_CASE("multi-ideal bounds on a product of functionals") {
  // T(x,y) = <x,a><y,b> u
  const Vector a = vec({1.0, -0.5}), b = vec({0.25, 0.75}), u = vec({2.0, 1.0});
  Matrix c(2, 4);
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) c.col(2 * i + j) = a(i) * b(j) * u;
  const MultilinearMap T({l1, l1}, linf, c);
  const std::vector<PhiMap> phis{PhiMap::identity(l1), PhiMap::identity(l1)};
  const double expect = 1.0 * 0.75 * 2.0;
  CHECK(multi_ideal_lower_bound(T, phis, {2.0, 2.0}, {{vec({1, 0}), vec({0, 1})}}) == doctest::Approx(expect));
  CHECK(multi_ideal_lower_bound(T, phis, {2.0, 2.0}, {{vec({0, 0}), vec({0, 1})}}) == 0.0);
  for (const std::vector<double>& ps : {std::vector<double>{1.0, 1.0}, std::vector<double>{2.0, 2.0}}) {
    const auto cert = multi_ideal_upper_bound(T, phis, ps);
    CHECK(cert.certified());
    CHECK(cert.C == doctest::Approx(expect).epsilon(1e-6));
    CHECK(cert.lower_bound == doctest::Approx(expect).epsilon(1e-9));
    CHECK(cert.cycles <= 2);
    const auto f = factor_multilinear(T, cert, phis, ps);
    CHECK(f.pointwise_residual <= 1e-9);
    CHECK(f.pass);
  }
  const MultilinearMap Z({l1, l1}, linf, Matrix::Zero(2, 4));
  CHECK(multi_ideal_upper_bound(Z, phis, {2.0, 2.0}).C == 0.0);
}

TEST_CASE("multi-ideal factorization of a diagonal map") {
  const auto T = diagonal(vec({1.0, 0.5}));
  const std::vector<PhiMap> phis{PhiMap::identity(l1), PhiMap::identity(l1)};
  const auto cert = multi_ideal_upper_bound(T, phis, {2.0, 2.0});
  REQUIRE(cert.certified());
  CHECK(cert.lower_bound <= cert.C + 1e-9);
  const auto f = factor_multilinear(T, cert, phis, {2.0, 2.0});
  CHECK(f.pass);
  MultiMeasureCertificate bad = cert;
  bad.converged = false;
  CHECK_THROWS_AS(factor_multilinear(T, bad, phis, {2.0, 2.0}), Error);
}
