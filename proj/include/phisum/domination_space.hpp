#pragma once

#include "phisum/linear_summing.hpp"

#include <functional>
#include <vector>

namespace phisum {

struct SeminormConfig {
  int k_max = 4;
  int mesh_resolution = 32;
  int max_rounds = 200;
  SphereSearchConfig search{8, 8, 0x5EED5EEDULL, 720, 40, 1e-13, 1};
};

struct GaugeResult {
  double value = 0.0;  // cost of `parts`, an upper bound
  double lower = 0.0;  // certified by a dual functional
  std::vector<Vector> parts;
};

/// inf { sum_i cost(x_i) : sum_i x_i = x } for an even, positively
/// homogeneous cost on R^d. This is the gauge of the convex hull of
/// {cost <= 1}; it is computed by column generation over part directions,
/// each round an LP whose optimal basis uses at most d parts. `seed_parts`
/// directions enter the first LP.
GaugeResult hull_gauge(const std::function<double(const Vector&)>& cost, const Vector& x,
                       const std::vector<Vector>& seed_parts, const SeminormConfig& cfg);

struct DominationSpaceModel {
  FiniteSpace base;
  PhiMap phi;
  DiscreteMeasure measure;
  double r = 1.0;
  SeminormConfig cfg;
  /// Orthonormal basis of the null space of the seminorm.
  std::vector<Vector> null_basis;
  /// max seminorm(x) / ||x|| over the build samples (at most the bound K of Phi).
  double continuity = 0.0;
  /// The single-part cost is itself a seminorm, so no splitting can help.
  bool subadditive = false;

  /// (sum_j mu_j Phi(x)(e_j)^r)^(1/r).
  double single_cost(const Vector& x) const;
};

DominationSpaceModel build_model(const FiniteSpace& X, const PhiMap& phi, const DiscreteMeasure& mu, double r,
                                 const SeminormConfig& cfg = {}, int samples = 100);

GaugeResult seminorm(const Vector& x, const DominationSpaceModel& model, const std::vector<Vector>& seed_parts = {});

struct Factorization {
  DominationSpaceModel model;
  LinearMap T;
  double norm_bound = 0.0;
  /// Orthogonal projector onto the complement of the null space.
  Matrix projector;
  /// max ||T n|| over the null basis.
  double well_defined_residual = 0.0;

  /// T-hat on the class of x, through the representative P x.
  Vector apply_hat(const Vector& x) const { return T.matrix * (projector * x); }
};

/// Refuses with ErrorCode::uncertified unless the report is certified.
Factorization build_factorization(const LinearMap& T, const PhiMap& phi, const SummingReport& report,
                                  const SeminormConfig& cfg = {});

struct DiagramReport {
  double diagram_residual = 0.0;  // max ||T x - T-hat [x]||
  double bound_residual = 0.0;    // max (||T-hat [x]|| - C seminorm(x))_+
  bool pass = true;
};

DiagramReport verify_diagram(const Factorization& f, const std::vector<Vector>& samples, double tol = 1e-8);

/// max over families of (sum seminorm(x_i)^p)^(1/p) / sup_{x*} (sum |<x_i,x*>|^p)^(1/p).
double p_concavity_ratio(const DominationSpaceModel& model, double p, const std::vector<std::vector<Vector>>& families);

/// (sum seminorm(x_i)^r)^(1/r) / weak Phi norm of the family; the inclusion
/// into the domination space is Phi-abstract r-summing with constant <= 1.
double inclusion_family_ratio(const DominationSpaceModel& model, const std::vector<Vector>& family);

}  // namespace phisum
