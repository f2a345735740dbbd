#pragma once

#include "phisum/domination_space.hpp"
#include "phisum/linear_summing.hpp"
#include "phisum/operators.hpp"

#include <vector>

namespace phisum {

enum class TensorPhiKind { identity, factorable };

/// Homogeneous map on V_m evaluated at forms phi of the forms ball.
///
///   identity    |<v, phi>|
///   factorable  inf over representations v = sum_k lambda^k x^{1,k} (x) ... (x) x^{m,k} of
///               sum_k |lambda^k| |phi(x^{.,k})|^(1-s) prod_j ||x^{j,k}||^s
///
/// The factorable infimum equals |<v,phi>| ||phi||^(-s) and is attained.
struct TensorPhi {
  TensorPhiKind kind = TensorPhiKind::identity;
  TensorSpace space;
  double sigma = 0.0;

  static TensorPhi identity(const TensorSpace& space);
  static TensorPhi factorable(const TensorSpace& space, double sigma);
};

/// `form_norm` is the norm of `form` as an m-linear form; pass a negative
/// value to have it computed.
double tensor_phi_eval(const TensorPhi& phi, const Vector& coords, const Vector& form, double form_norm = -1.0);

/// sum_k |lambda^k| |phi(x^{.,k})|^(1-s) prod_j ||x^{j,k}||^s for one representation.
double tensor_phi_representation(const TensorPhi& phi, const std::vector<VmTerm>& terms, const Vector& form);

/// Rows v_i = sum_k lambda_i^k x_i^{1,k} (x) ... (x) x_i^{m,k}.
struct CoefficientFamily {
  TensorSpace space;
  std::vector<std::vector<VmTerm>> rows;

  /// Throws unless there is a row and every factor has the right dimension.
  void validate() const;
  std::vector<VmElement> elements() const;
};

/// Terms of the canonical-basis expansion of tensor coordinates.
std::vector<VmTerm> canonical_terms(const TensorSpace& space, const Vector& coords);

struct FamilyBound {
  double value = 0.0;
  /// The forms-ball model is not the full vertex set, so the denominator is
  /// a lower estimate and the ratio may overstate.
  bool approx_denominator = false;
};

/// (sum_i ||T_L v_i||^r)^(1/r) / sup_{phi in model} (sum_i Phi(v_i)(phi)^r)^(1/r).
FamilyBound strongly_family_lower_bound(const MultilinearMap& T, const TensorPhi& phi, double r,
                                        const CoefficientFamily& fam, const FormsBallModel& model);

struct StronglyConfig {
  SummingConfig summing{};
  FormsBallConfig forms{};
  /// Largest vertex-tensor family tried in the direct certificate search.
  int family_size = 3;
};

struct StronglyReport {
  SummingReport summary;  // measure support points are forms (tensor coordinates)
  CoefficientFamily lb_family;
  /// Best ratio from the direct search over coefficient families.
  double family_check = 0.0;
  /// The direct search exceeded the cutting-plane upper bound.
  bool disagreement = false;
  bool approx_denominator = false;
};

StronglyReport strongly_constant(const MultilinearMap& T, const TensorPhi& phi, double r, const StronglyConfig& cfg = {});

/// T_L as a linear map on the tensor space normed by the forms model
/// (the projective norm when the model is exact).
LinearMap linearized_operator(const MultilinearMap& T, const FormsBallModel& model);

struct StronglyFactorization {
  MultilinearMap T;
  FormsBallModel forms;
  Factorization linear;  // through the domination space over V_m
};

/// Refuses with ErrorCode::uncertified unless the report is certified.
StronglyFactorization strongly_factorization(const MultilinearMap& T, const StronglyReport& report,
                                             const StronglyConfig& cfg = {});

struct MultiDiagramReport {
  double diagram_residual = 0.0;  // max ||T(x^1..x^m) - T-hat[i_m(x^1..x^m)]||
  double bound_residual = 0.0;    // max (||T-hat[v]|| - C seminorm(v))_+
  bool pass = true;
};

/// Checks on `samples` random elementary inputs.
MultiDiagramReport verify_strongly_diagram(const StronglyFactorization& f, int samples, std::uint64_t seed,
                                           double tol = 1e-8);

/// Validates 1/p = sum_j 1/p_j within 1e-12 and returns p.
double multi_ideal_exponent(const std::vector<double>& ps);
void check_exponent_identity(double p, const std::vector<double>& ps);

/// (sum_i ||T(x_i^1..x_i^m)||^p)^(1/p) / prod_j weak Phi_j p_j norm of (x_i^j)_i.
double multi_ideal_lower_bound(const MultilinearMap& T, const std::vector<PhiMap>& phis, const std::vector<double>& ps,
                               const std::vector<std::vector<Vector>>& rows);

struct MultiIdealConfig {
  int max_cycles = 20;
  /// Cycles stop once C changes by at most max(rel_change, summing.tol_gap) relative.
  double rel_change = 1e-8;
  SummingConfig summing{200, 1e-6, 16, {8, 8, 0x5EED5EEDULL, 240, 40, 1e-13, 1}};
};

struct MultiMeasureCertificate {
  double C = kInf;
  double p = 1.0;
  std::vector<DiscreteMeasure> measures;
  int cycles = 0;
  std::vector<double> history;  // C after each single-measure step
  /// Every single-measure step closed its cutting-plane gap.
  bool converged = false;
  /// Some step failed to decrease C; the best certificate seen is returned.
  bool stalled = false;
  /// Best multi_ideal_lower_bound over vertex families.
  double lower_bound = 0.0;

  bool certified() const { return converged && std::isfinite(C); }
};

/// Upper-bound certificate by alternating single-measure minimizations,
/// starting from uniform measures and cycling j = 1..m.
MultiMeasureCertificate multi_ideal_upper_bound(const MultilinearMap& T, const std::vector<PhiMap>& phis,
                                                const std::vector<double>& ps, const MultiIdealConfig& cfg = {});

struct MultiFactorization {
  std::vector<DominationSpaceModel> models;
  std::vector<Matrix> projectors;  // u_j through the representative P_j x
  double C = 0.0;
  double pointwise_residual = 0.0;    // max ||T(x) - T-hat(u_1 x^1, ..., u_m x^m)||
  double factor_bound_residual = 0.0; // max (||u_j x^j|| - (int Phi_j^p_j dmu_j)^(1/p_j))_+
  double hat_bound_residual = 0.0;    // max (||T-hat(..)|| - C prod_j ||u_j x^j||)_+
  std::vector<double> factor_norms;   // max ||u_j x^j|| / ||x^j|| over samples
  bool pass = true;
};

/// Refuses with ErrorCode::uncertified unless `cert` is certified.
MultiFactorization factor_multilinear(const MultilinearMap& T, const MultiMeasureCertificate& cert,
                                      const std::vector<PhiMap>& phis, const std::vector<double>& ps, int samples = 100,
                                      double tol = 1e-8);

}  // namespace phisum
