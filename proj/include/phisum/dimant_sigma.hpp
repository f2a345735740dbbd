#pragma once

#include "phisum/multilinear_summing.hpp"

#include <vector>

namespace phisum {

/// Rows (x_i^1, ..., x_i^m).
struct PlainFamily {
  TensorSpace space;
  std::vector<std::vector<Vector>> rows;

  void validate() const;
};

/// The same rows as single-term coefficient rows (n_2 = 1, lambda = 1).
CoefficientFamily as_coefficient_family(const PlainFamily& fam);

/// r = p / (1 - sigma); every (p, sigma) class runs at this exponent.
double sigma_exponent(double p, double sigma);

/// sup_{phi in model} (sum_i (|phi(x_i)|^(1-s) prod_j ||x_i^j||^s)^r)^(1/r), r = p/(1-s).
/// Throws ErrorCode::internal if the strongly r-summing denominator exceeds it.
double delta_p_sigma(const PlainFamily& fam, double p, double sigma, const FormsBallModel& model);

/// sup_{phi in model} (sum_i |phi(x_i)|^r)^(1/r).
double strongly_denominator(const PlainFamily& fam, double r, const FormsBallModel& model);

struct SigmaConfig {
  SummingConfig summing{};
  /// Oracle search over products of spheres (the Dimant constraint); a
  /// claimed convergence is confirmed with `summing.search`.
  SphereSearchConfig product_search{8, 8, 0x5EED5EEDULL, 240, 40, 1e-13, 1};
  FormsBallConfig forms{};
  int family_size = 3;
  /// Vertex products enumerated for the oracle start set.
  std::size_t max_vertex_products = 4096;
};

enum class SigmaClass { dimant, factorable };

struct SigmaReport {
  SigmaClass kind = SigmaClass::dimant;
  double p = 1.0;
  double sigma = 0.0;
  /// r, bounds, gap and the measure on the forms ball.
  SummingReport summary;
  PlainFamily plain_family;              // dimant lower-bound certificate
  CoefficientFamily coefficient_family;  // factorable lower-bound certificate

  double lower_bound() const { return summary.lower_bound; }
  double upper_bound() const { return summary.upper_bound; }
  bool certified() const { return summary.certified(); }
};

/// (sum ||T x_i||^r)^(1/r) / delta_p_sigma.
double dimant_family_lower_bound(const MultilinearMap& T, const PlainFamily& fam, double p, double sigma,
                                 const FormsBallModel& model);

SigmaReport dimant_constant(const MultilinearMap& T, double p, double sigma, const SigmaConfig& cfg = {});

/// The strongly Phi-abstract r-summing constant for the factorable tensor Phi.
SigmaReport factorable_constant(const MultilinearMap& T, double p, double sigma, const SigmaConfig& cfg = {});

struct MonotonicityReport {
  double upper_p = 0.0;
  double upper_q = 0.0;
  double lower_q = 0.0;
  bool pass = true;
};

/// Requires p <= q; checks ||T||_q <= ||T||_p on computed dimant reports.
MonotonicityReport sigma_monotonicity_check(const MultilinearMap& T, double p, double q, double sigma,
                                            const SigmaConfig& cfg = {}, double tol = 1e-6);

struct InclusionReport {
  double dimant_upper = 0.0;
  double strongly_upper = 0.0;
  bool pass = true;
};

/// Dimant (p, sigma) upper bound against the strongly p/(1-sigma)-summing upper bound.
InclusionReport inclusion_check(const MultilinearMap& T, double p, double sigma, const SigmaConfig& cfg = {},
                                double tol = 1e-6);

struct FinalRecord {
  double inequality_residual = 0.0;  // factorable inequality on random coefficient families
  double domination_residual = 0.0;  // ||T_L v|| - C (int Phi(v)^r d eta)^(1/r)
  double diagram_residual = 0.0;     // factorization through L_{p,sigma}(eta)
  double gap = 0.0;
  bool pass = true;
};

/// Refuses with ErrorCode::uncertified unless `report` is a certified factorable report.
FinalRecord final_factorization(const MultilinearMap& T, const SigmaReport& report, const SigmaConfig& cfg = {},
                                int samples = 100, double tol = 1e-8);

}  // namespace phisum
