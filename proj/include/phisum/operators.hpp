#pragma once

#include "phisum/spaces.hpp"
#include "phisum/sphere_search.hpp"

#include <cstdint>
#include <vector>

namespace phisum {

/// Linear operator X -> Y stored as a codomain.dim x domain.dim matrix.
struct LinearMap {
  FiniteSpace domain;
  FiniteSpace codomain;
  Matrix matrix;

  LinearMap(FiniteSpace dom, FiniteSpace cod, Matrix m);
  Vector apply(const Vector& x) const;
};

/// Product of factor spaces with coordinates in the product basis; the first
/// factor's index varies slowest.
struct TensorSpace {
  std::vector<FiniteSpace> factors;

  int order() const { return static_cast<int>(factors.size()); }
  int dim() const;
  std::vector<int> dims() const;
  bool polyhedral() const;
};

/// Coordinates of x^1 (x) ... (x) x^m in the product basis.
Vector outer(const std::vector<Vector>& xs);

/// m-linear operator X_1 x ... x X_m -> Y.
///
/// `coeffs` is codomain.dim x prod(dims): column t is T(e_{i_1}, ..., e_{i_m})
/// for the product index t. This is exactly the matrix of the linearization.
struct MultilinearMap {
  TensorSpace domains;
  FiniteSpace codomain;
  Matrix coeffs;

  MultilinearMap(std::vector<FiniteSpace> doms, FiniteSpace cod, Matrix c);
  /// From a flat row-major array indexed (i_1, ..., i_m, k), codomain last.
  static MultilinearMap from_flat(std::vector<FiniteSpace> doms, FiniteSpace cod,
                                  const std::vector<double>& flat);
  std::vector<double> to_flat() const;

  int order() const { return domains.order(); }
  Vector apply(const std::vector<Vector>& xs) const;
  /// Scalar-valued forms only.
  double eval_form(const std::vector<Vector>& xs) const;
};

/// Linearization T_L acting on tensor coordinates: T_L(x^1 (x) ... (x) x^m) = T(x^1, ..., x^m).
struct LinearizedMap {
  TensorSpace domain;
  FiniteSpace codomain;
  Matrix matrix;

  Vector apply(const Vector& coords) const { return matrix * coords; }
};

LinearizedMap linearize(const MultilinearMap& T);

struct TensorElement {
  TensorSpace space;
  Vector coords;
};

struct VmTerm {
  double lambda = 1.0;
  std::vector<Vector> factors;
};

/// Element sum_k lambda^k <x^{1,k} (x) ... (x) x^{m,k}, .> of V_m with cached
/// coordinates.
struct VmElement {
  TensorSpace space;
  std::vector<VmTerm> terms;
  Vector coords;

  bool equivalent(const VmElement& other, double tol = tol::eq) const;
  TensorElement tensor() const { return {space, coords}; }
};

VmElement embed_vm(const TensorSpace& space, std::vector<VmTerm> terms);

/// <coords, phi>; phi must be scalar valued on the same domains.
double vm_eval(const VmElement& v, const MultilinearMap& phi);

enum class OpNormMode { exact, mesh };

struct OpNormConfig {
  OpNormMode mode = OpNormMode::exact;
  int resolution = 16;
  SphereSearchConfig search{};
};

/// Operator norm. Exact mode maximizes over products of primal vertices and
/// requires polyhedral domains; mesh mode returns a lower bound.
double op_norm(const LinearMap& T, const OpNormConfig& cfg = {});
double op_norm(const MultilinearMap& T, const OpNormConfig& cfg = {});
/// Norm of a scalar form given by tensor coordinates.
double form_norm(const TensorSpace& space, const Vector& form, const OpNormConfig& cfg = {});

/// Elementary tensors x^1 (x) ... (x) x^m over primal vertices, one per
/// {t, -t} pair. Polyhedral factors only.
std::vector<Vector> extreme_elementary_tensors(const TensorSpace& space);

struct ProjectiveNormConfig {
  int restarts = 16;
  std::uint64_t seed = 0xC0FFEEULL;
  int max_alternations = 60;
  double tol_gap = tol::gap;
};

struct ProjectiveNorm {
  double upper = 0.0;
  double lower = 0.0;
  bool possibly_loose = false;
  /// Representation attaining `upper` and the form certifying `lower`.
  std::vector<VmTerm> representation;
  Vector certificate;
};

/// Two-sided estimate of the projective norm: `upper` from the best
/// representation with at most r_max terms (alternating minimization over
/// one factor at a time, deterministic multi-start, canonical-basis and SVD
/// seeds); `lower` from norm-one forms (the exact dual LP when every factor
/// is polyhedral, alternating rank-one ascent otherwise).
ProjectiveNorm projective_norm(const TensorElement& v, int r_max, const ProjectiveNormConfig& cfg = {},
                               const std::vector<std::vector<VmTerm>>& extra_seeds = {});

struct FormsBallConfig {
  int mesh_resolution = 8;
  int dense_forms = 64;
  std::uint64_t seed = 0xF0F0ULL;
  double max_enumeration = 4e6;
};

/// Finite model of the unit ball of m-linear forms (the dual of the
/// projective tensor product). Points are tensor coordinates of forms with
/// operator norm one, one per {phi, -phi} pair. `exact` means the point set is
/// the full vertex set of the ball.
struct FormsBallModel {
  TensorSpace space;
  std::vector<Vector> forms;
  bool exact = false;
};

FormsBallModel forms_ball_model(const TensorSpace& space, const FormsBallConfig& cfg = {});

/// The tensor space with the projective norm as a polytope-kind FiniteSpace
/// (its facets are the vertices of the forms ball). Polyhedral factors only.
FiniteSpace projective_tensor_space(const TensorSpace& space, const FormsBallConfig& cfg = {});

}  // namespace phisum
