#pragma once

#include "phisum/types.hpp"

#include <limits>
#include <string>
#include <vector>

namespace phisum {

enum class NormKind { lq, polytope };

/// A finite-dimensional real normed space in canonical coordinates.
///
/// Two families are supported: the l_q norms (1 <= q <= inf) and polytope
/// norms ||x|| = max_j |<x, f_j>| given by a facet list. The facet list is
/// closed under negation at construction. l_1 and l_inf count as polyhedral,
/// so extreme points of both unit balls are available for them as well.
class FiniteSpace {
 public:
  static FiniteSpace lq(int dim, double q, std::string label = {});
  static FiniteSpace polytope(const std::vector<Vector>& facets, std::string label = {});

  int dim() const { return dim_; }
  NormKind kind() const { return kind_; }
  double q() const { return q_; }
  const std::string& label() const { return label_; }
  /// Facets after closure under negation (polytope kind only).
  const std::vector<Vector>& facets() const { return facets_; }

  bool polyhedral() const { return polyhedral_; }
  /// Vertices of the primal unit ball. Empty for non-polyhedral spaces.
  const std::vector<Vector>& primal_extreme_points() const { return primal_ext_; }
  /// Vertices of the dual unit ball. Empty for non-polyhedral spaces.
  const std::vector<Vector>& dual_extreme_points() const { return dual_ext_; }

  /// Human-readable descriptor, e.g. "l_1^3" or "polytope^2[6]".
  std::string describe() const;

 private:
  FiniteSpace() = default;
  void init_polyhedral();

  int dim_ = 0;
  NormKind kind_ = NormKind::lq;
  double q_ = 2.0;
  std::string label_;
  std::vector<Vector> facets_;
  bool polyhedral_ = false;
  std::vector<Vector> primal_ext_;
  std::vector<Vector> dual_ext_;
};

inline constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(const FiniteSpace& X, const Vector& x);
double dual_norm(const FiniteSpace& X, const Vector& xstar);

/// Norm-one functional x* with <x, x*> = ||x||; ties go to the
/// lexicographically smallest candidate.
Vector norming_functional(const FiniteSpace& X, const Vector& x);

struct MeshConfig {
  bool extreme_exact = true;
  int resolution = 16;
};

struct DualBallModel {
  enum class Exactness { extreme_exact, mesh };
  std::vector<Vector> points;
  Exactness exactness = Exactness::extreme_exact;
  int resolution = 0;
};

/// Finite model of the dual unit ball.
///
/// extreme_exact returns the vertex set (polyhedral spaces only). Mesh mode
/// returns a deterministic set of points on the dual unit sphere: in two
/// dimensions 2r directions at angles k*pi/r, otherwise the integer points of
/// the surface of the cube [-r, r]^d rescaled to dual norm one. Meshes are
/// nested under doubling of the resolution and closed under negation.
DualBallModel dual_ball_points(const FiniteSpace& X, const MeshConfig& cfg);

/// Mesh of the primal unit sphere (same construction as the dual mesh).
std::vector<Vector> primal_sphere_mesh(const FiniteSpace& X, int resolution);

/// Keeps one representative of each {p, -p} pair (the lexicographically
/// larger one), preserving first-seen order.
std::vector<Vector> representatives_mod_sign(const std::vector<Vector>& points, double tol = 1e-12);

/// Vertices of {x : |<x, a_k>| <= 1 for all k}, assuming the a_k span R^d.
/// Throws when the enumeration would exceed `max_systems` linear solves.
std::vector<Vector> enumerate_symmetric_polytope_vertices(const std::vector<Vector>& normals,
                                                          double max_systems = 4e6);

bool lex_less(const Vector& a, const Vector& b);

}  // namespace phisum
