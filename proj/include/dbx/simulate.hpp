#pragma once
// Monte Carlo companion to the converse: superposition random codebooks with
// per-receiver maximum-likelihood decoding. Unbiased estimate of the average
// correct probability with a 95% confidence interval. Deterministic given
// (seed, config); per-sample streams make the estimate independent of the
// worker partition.

#include <cstdint>

#include "dbx/capacity.hpp"
#include "dbx/prob.hpp"

namespace dbx {

// Cloud-center / satellite draw distributions for the random codebook.
struct SuperpositionSpec {
  ProbVector p_u;
  StochasticMatrix p_x_given_u;  // |U| x |X|
};

struct SimPoint {
  int n = 0;
  long k_size = 0, l_size = 0;
  long samples = 0;
  double pc_hat = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;  // 95% Wilson interval
  double decay = 0.0;               // -(1/n) log pc_hat
  double floor = 0.0;               // exponent floor handed in by the caller
  bool holds = false;               // decay at the CI upper end still >= floor
};

// Message sizes are ceil(exp(n r)); a fresh codebook is drawn per sample.
SimPoint monte_carlo_pc(const SuperpositionSpec& spec, const DegradedPair& ch,
                        const RatePair& rates, int n, long samples, uint64_t seed,
                        double floor_value);

}  // namespace dbx
