#pragma once

// Shared machinery for the domination problems: a cutting-plane run whose
// constraints are  lhs(x)^r <= sum_j nu_j integrand_j(x)^r  over products of
// spheres. Points are Euclidean unit blocks and support points have dual
// norm one, so integrand values are O(1).

#include "phisum/cutting_plane.hpp"
#include "phisum/linear_summing.hpp"
#include "phisum/sphere_search.hpp"

#include <functional>
#include <vector>

namespace phisum::detail {

struct DominationProblem {
  std::vector<int> dims;
  std::size_t support_size = 0;
  double r = 1.0;
  std::function<double(const Blocks&)> lhs;
  /// lhs values at or below this are treated as zero.
  double lhs_zero = 0.0;
  std::function<Vector(const Blocks&)> integrand;
  std::vector<Blocks> init;
  std::vector<Blocks> candidates;
  std::function<std::vector<Blocks>(const Vector& nu)> extra_candidates;
  std::function<double(const std::vector<Blocks>&, const Vector&)> family_bound;
};

/// `confirm`, when given, reruns the oracle whenever `search` finds no
/// violation, so that a light search can drive the iterations.
CuttingPlaneReport run_domination(const DominationProblem& p, const CuttingPlaneConfig& cp,
                                  const SphereSearchConfig& search, const SphereSearchConfig* confirm = nullptr);

/// Directions spanning the rays of the arrangement {<x, f> = 0 : f in fs}
/// in R^d, taken modulo the common kernel, plus a basis of that kernel.
std::vector<Vector> arrangement_rays(const std::vector<Vector>& fs, int d, std::size_t cap = 20000);

/// Orthonormal basis of the null space of the rows in `fs` (d columns).
Matrix null_basis(const std::vector<Vector>& fs, int d, double rel = 1e-10);

/// Nonempty index subsets of {0..n-1} with at most k elements, in lexicographic order.
std::vector<std::vector<int>> subsets_up_to(int n, int k);

/// Probability measure from nonnegative weights, dropping negligible atoms.
DiscreteMeasure normalized(const std::vector<Vector>& support, const Vector& w);

/// Euclidean-normalized primal vertices mod sign (a sphere mesh when not polyhedral).
std::vector<Vector> factor_starts(const FiniteSpace& X);

/// Cartesian product of per-factor lists, truncated at `cap` tuples.
std::vector<Blocks> products(const std::vector<std::vector<Vector>>& lists, std::size_t cap);

}  // namespace phisum::detail
