#pragma once

#include "phisum/types.hpp"

#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

namespace phisum {

/// A point of a product of Euclidean unit spheres, one vector per block.
using Blocks = std::vector<Vector>;

using BlockObjective = std::function<double(const Blocks&)>;

struct SphereSearchConfig {
  int restarts = 32;
  int keep_candidates = 8;     // best seeded candidates that get refined
  std::uint64_t seed = 0x5EED5EEDULL;
  int angle_samples = 720;     // 2-D blocks: samples per exact line search
  int max_sweeps = 40;
  double rel_tol = 1e-13;
  int threads = 1;
};

struct SphereSearchResult {
  Blocks argmax;
  double value = -1.0;
  long evaluations = 0;
  /// End point and value of every refined start, in start order.
  std::vector<Blocks> locals;
  std::vector<double> local_values;
};

/// Maximizes f over S^{d_1-1} x ... x S^{d_m-1} by block-coordinate ascent
/// from the given candidate points plus seeded random restarts.
///
/// Two-dimensional blocks are optimized exactly up to line-search accuracy
/// (dense angle sampling followed by golden-section refinement of every
/// sampled local maximum); larger blocks use projected finite-difference
/// gradient ascent polished by a shrinking pattern search. The reduction over
/// restarts is deterministic: ties keep the lowest restart index. A value of
/// +inf short-circuits the search.
SphereSearchResult maximize_on_spheres(const BlockObjective& f, const std::vector<int>& dims,
                                       const std::vector<Blocks>& candidates,
                                       const SphereSearchConfig& cfg);

/// Thread count from PHISUM_THREADS, falling back to 1.
int default_thread_count();

}  // namespace phisum
