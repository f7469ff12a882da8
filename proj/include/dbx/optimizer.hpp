#pragma once
// Multi-start projected gradient ascent over the product of simplices
// (p_U, p_{X|U}). Both the weighted-capacity and the tilted-cumulant
// maximizations run through this machinery. Deterministic given
// (seed, config): restarts are seeded by index and ties among restarts are
// broken by the lexicographically smallest flattened argmax.

#include <cstdint>
#include <functional>
#include <span>

#include "dbx/common.hpp"

namespace dbx {

struct OptConfig {
  int restarts = 16;      // random restarts on top of the deterministic starts
  int max_iters = 400;
  double step0 = 1.0;     // initial ascent step
  double tol = 1e-11;     // relative objective improvement stop
  int u_size = 0;         // 0 -> |X|
  uint64_t seed = 1;
  int threads = 0;        // 0 -> DBX_THREADS / all cores (grid sweeps only)
};

struct SimplexPoint {
  Vec p_u;     // |U|
  Mat p_x_u;   // |U| x |X|
};

struct OptResult {
  double value = -kInf;
  SimplexPoint arg;
  bool converged = false;
  int evals = 0;
};

// Euclidean projection onto {x >= 0, sum x = 1}.
void project_simplex(Vec& v);

// Clamp every entry to at least eps, renormalize. Keeps iterates strictly
// interior so log-ratio objectives stay finite.
void floor_simplex(Vec& v, double eps);

using Objective = std::function<double(const SimplexPoint&)>;
// Writes the (embedding-space) gradient into g; same shapes as the point.
using GradientFn = std::function<void(const SimplexPoint&, SimplexPoint& g)>;

// Maximizes f over p_U in the |U|-simplex and each row of p_{X|U} in the
// |X|-simplex. grad may be null (central finite differences are used).
// extra_starts are tried in addition to the uniform start and cfg.restarts
// random starts.
OptResult maximize_over_simplices(int u_size, int x_size, const Objective& f,
                                  const GradientFn* grad, const OptConfig& cfg,
                                  std::span<const SimplexPoint> extra_starts = {});

// Flattened (p_u, rows of p_x_u) for deterministic comparisons.
Vec flatten(const SimplexPoint& p);

}  // namespace dbx
