#pragma once
// The strong-converse exponent machinery: the tilt weight omega (a weighted
// log-likelihood ratio), its cumulant Omega_q(mu,lambda) = log E_q exp(lambda
// omega), the channel-wide maximum over auxiliary joints, and the exponent
// lower bound F(R1,R2) obtained as a grid supremum over (mu, lambda).

#include <vector>

#include "dbx/capacity.hpp"
#include "dbx/common.hpp"
#include "dbx/optimizer.hpp"
#include "dbx/prob.hpp"

namespace dbx {

// (mu, lambda) with theta = lambda/(1+lambda); the bijection lambda =
// theta/(1-theta) is exact by construction.
struct TiltParams {
  double mu = 1.0;
  double lambda = 1.0;
  double theta = 0.5;
  TiltParams(double mu_, double lambda_);                    // throws unless both > 0
  static TiltParams from_theta(double mu_, double theta_);   // theta in (0,1)
};

// omega(u,x,y,z) = mu log[W1(y|x)/q_{Y|U}(y|u)] + log[q_{Z|U}(z|u)/q_Z(z)].
// Hard error on a zero denominator at a positive-mass index.
double tilt_weight(const AuxiliaryJoint& q, const Marginals& m, double mu, int u, int x,
                   int y, int z);

// Omega_q, exact (support-only log-sum-exp; never floors).
double tilted_cumulant(const AuxiliaryJoint& q, double mu, double lambda);

// Optimizer-facing evaluation over raw simplex coordinates with all induced
// marginals floored at floor_eps and renormalized.
double tilted_cumulant_floored(const Vec& p_u, const Mat& p_x_u, const DegradedPair& ch,
                               const StochasticMatrix& w_cascade, double mu, double lambda,
                               double floor_eps = kInteriorFloor);

// Same cumulant for an explicit (U,X) mass table with arbitrary U alphabet;
// rows with zero mass are skipped.
double tilted_cumulant_flat(const Vec& p_ux, int u_count, const DegradedPair& ch,
                            double mu, double lambda);

// Exact first and second derivatives of Omega_q in lambda (the tilted mean
// and tilted variance of omega).
double tilted_cumulant_slope(const AuxiliaryJoint& q, double mu, double lambda);
double tilted_cumulant_curvature(const AuxiliaryJoint& q, double mu, double lambda);

struct OmegaResult {
  double value = 0.0;
  AuxiliaryJoint arg;
  bool converged = false;
};

// Omega(mu,lambda) = max over auxiliary joints with |U| = |X| (cfg.u_size
// overrides). extra_starts lets callers seed with e.g. the C^(mu) argmax.
// For channels with zero entries the supremum can diverge at the simplex
// boundary once lambda > 1 (the support of q collapses discontinuously); the
// returned value is then a finite, floor-limited lower bound of that sup,
// which can only lower the exponent bound built from it.
OmegaResult max_tilted_cumulant(const DegradedPair& channel, double mu, double lambda,
                                const OptConfig& cfg = {},
                                std::span<const SimplexPoint> extra_starts = {});

// F^(mu,lambda) = [lambda (mu r1 + r2) - omega] / (1 + 2 lambda + lambda mu).
double exponent_objective(double omega, double mu, double lambda, const RatePair& rates);

// Rate-independent cache of Omega(mu,lambda) over a grid, plus the C^(mu)
// profile used both for region checks and to seed the cumulant optimizer.
struct ExponentGrid {
  Vec mu_grid, lambda_grid;
  Mat omega;                        // [mu index][lambda index]
  Vec c_values;                     // C^(mu) per mu
  std::vector<SimplexPoint> c_args; // C^(mu) argmax per mu
};

ExponentGrid build_exponent_grid(const DegradedPair& channel, const Vec& mu_grid,
                                 const Vec& lambda_grid, const OptConfig& cfg = {});

struct ExponentReport {
  double f_value = 0.0;
  double best_mu = 0.0;
  double best_lambda = 0.0;
  double omega_at_best = 0.0;
  bool boundary_flag = false;  // grid max sits on a grid edge
};

// Grid supremum of F^(mu,lambda); reported as a lower bound (never
// extrapolated beyond the grid).
ExponentReport exponent_lower_bound(const ExponentGrid& grid, const RatePair& rates);
ExponentReport exponent_lower_bound(const DegradedPair& channel, const RatePair& rates,
                                    const Vec& mu_grid, const Vec& lambda_grid,
                                    const OptConfig& cfg = {});

Vec default_mu_grid();      // 61 log-spaced points in [1e-3, 1e3]
Vec default_lambda_grid();  // 61 log-spaced points in [1e-3, 1e3]

}  // namespace dbx
