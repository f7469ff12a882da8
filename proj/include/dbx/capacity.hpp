#pragma once
// Capacity-region computations for a degraded broadcast channel: the
// weighted sum capacity C^(mu) = max_q { mu I(X;Y|U) + I(U;Z) }, its
// supporting-hyperplane profile over a mu grid, and region membership.

#include <utility>

#include "dbx/common.hpp"
#include "dbx/optimizer.hpp"
#include "dbx/prob.hpp"

namespace dbx {

struct RatePair {
  double r1 = 0.0;
  double r2 = 0.0;
  RatePair() = default;
  RatePair(double a, double b);  // throws if either coordinate is negative
};

struct CmuResult {
  double value = 0.0;
  AuxiliaryJoint arg;
  bool converged = false;
};

// C^(mu) over the class with |U| = |X| (cfg.u_size overrides, e.g. to test
// cardinality saturation). mu must be > 0.
CmuResult weighted_capacity(const DegradedPair& channel, double mu, const OptConfig& cfg = {});

struct HyperplaneProfile {
  Vec mu_grid;
  Vec c_values;
};

HyperplaneProfile hyperplane_profile(const DegradedPair& channel, const Vec& mu_grid,
                                     const OptConfig& cfg = {});

struct RegionCheck {
  bool inside = true;
  double worst_mu = 0.0;
  double margin = 0.0;  // max over the grid of mu*r1 + r2 - C^(mu)
};

// Outside iff the worst hyperplane violation exceeds slack.
RegionCheck in_region(const HyperplaneProfile& profile, const RatePair& rates,
                      double slack = 0.0);

// Corner (I(X;Y|U), I(U;Z)) of the rectangle achievable with joint p.
std::pair<double, double> rect_corner(const AuxiliaryJoint& p);

}  // namespace dbx
