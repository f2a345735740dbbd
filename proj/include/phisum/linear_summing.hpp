#pragma once

#include "phisum/cutting_plane.hpp"
#include "phisum/operators.hpp"
#include "phisum/spaces.hpp"

#include <string>
#include <vector>

namespace phisum {

enum class PhiKind { identity, sigma_interp, square_over_norm, anchored };

std::string to_string(PhiKind k);

/// Positively homogeneous map x -> Phi(<x, .>) on the dual ball of `base`.
///
///   identity          |<x,x*>|
///   sigma_interp      ||x||^s |<x,x*>|^(1-s)
///   square_over_norm  |<x,x*>|^2 / ||x||      (0 at x = 0)
///   anchored          |<x,x0*>|^(1/2) |<x,x*>|^(1/2)
///
/// Every kind is bounded with K = 1.
struct PhiMap {
  PhiKind kind = PhiKind::identity;
  FiniteSpace base;
  double sigma = 0.0;
  Vector anchor;

  static PhiMap identity(const FiniteSpace& X);
  static PhiMap sigma_interp(const FiniteSpace& X, double sigma);
  static PhiMap square_over_norm(const FiniteSpace& X);
  /// `x0` is rescaled to dual norm one.
  static PhiMap anchored(const FiniteSpace& X, const Vector& x0);

  double bound() const { return 1.0; }
  /// Whether x* -> Phi(x)(x*)^r is convex.
  bool convex_power(double r) const;
  std::string describe() const;
};

double phi_eval(const PhiMap& phi, const Vector& x, const Vector& xstar);

struct DiscreteMeasure {
  std::vector<Vector> support;
  std::vector<double> weights;

  static DiscreteMeasure delta(const Vector& point);
  /// Throws unless weights are nonnegative, sum to one within 1e-10 and
  /// every support point lies in the dual ball of X.
  void validate(const FiniteSpace& X) const;
  /// Integral of f over the measure.
  template <class F>
  double integrate(F&& f) const {
    double s = 0.0;
    for (std::size_t j = 0; j < support.size(); ++j) s += weights[j] * f(support[j]);
    return s;
  }
};

struct SummingConfig {
  int max_iter = 200;
  double tol_gap = 1e-6;
  /// Mesh resolution for the support when the extreme-point restriction is unsound.
  int mesh_resolution = 16;
  SphereSearchConfig search{};
};

struct SummingReport {
  double r = 1.0;
  double lower_bound = 0.0;
  double upper_bound = 0.0;
  double gap = 0.0;
  std::vector<Vector> lb_family;
  DiscreteMeasure measure;
  int iterations = 0;
  std::vector<IterationRecord> history;
  bool converged = false;
  bool gap_open = false;
  bool weak_duality_held = true;
  /// Support is the dual vertex set (otherwise a mesh).
  bool support_exact = true;
  /// Denominators of lb_family were evaluated exactly.
  bool lower_exact = true;

  /// A valid (C, measure) pair with gap <= tol_duality.
  bool certified() const { return !gap_open && gap <= tol::duality * std::max(1.0, upper_bound); }
};

/// sup over the dual ball of (sum_i Phi(x_i)(x*)^r)^(1/r). `exact` reports
/// whether the value is a true supremum (vertex enumeration under
/// convexity, or closed form) rather than a search estimate.
struct WeakNorm {
  double value = 0.0;
  bool exact = true;
};
WeakNorm weak_phi_norm(const PhiMap& phi, const std::vector<Vector>& family, double r);

/// Weak l_p norm sup_{x*} (sum_i |<x_i,x*>|^p)^(1/p).
double weak_p_norm(const std::vector<Vector>& family, double p, const FiniteSpace& X);

/// (sum ||T x_i||^r)^(1/r) / weak_phi_norm. Returns +inf when the
/// denominator vanishes while the numerator does not.
double family_lower_bound(const LinearMap& T, const PhiMap& phi, double r, const std::vector<Vector>& family);

/// Two-sided estimate of the Phi-abstract r-summing constant with a
/// Pietsch measure attaining the upper bound.
SummingReport summing_constant(const LinearMap& T, const PhiMap& phi, double r, const SummingConfig& cfg = {});

struct ResidualReport {
  double max_residual = 0.0;
  bool pass = true;
};

/// max over samples of ||T x|| - C (sum_j mu_j Phi(x)(e_j)^r)^(1/r).
ResidualReport check_domination(const LinearMap& T, const PhiMap& phi, double r, const DiscreteMeasure& mu, double C,
                                const std::vector<Vector>& samples, double tol = 1e-10);

struct MixingReport {
  DiscreteMeasure mixed;
  double max_residual = 0.0;
  bool pass = true;
};

/// Builds (delta_{x0*} + eta) / 2 and checks ||T x|| <= C int |<x,.>| d(mixed) on samples.
MixingReport example3_mixing_check(const LinearMap& T, const Vector& x0, const DiscreteMeasure& eta, double C,
                                   const std::vector<Vector>& samples, double tol = 1e-8);

/// Deterministic Gaussian samples in R^d.
std::vector<Vector> random_samples(int d, int count, std::uint64_t seed);

}  // namespace phisum
