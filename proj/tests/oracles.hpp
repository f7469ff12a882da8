#pragma once
// Independent test oracles. Everything here recomputes quantities from
// scratch (long-double direct summation, exhaustive grid search,
// Blahut-Arimoto) and must stay decoupled from the library implementation
// paths it cross-checks.

#include <cstdint>
#include <vector>

#include "dbx/prob.hpp"
#include "dbx/converse.hpp"

namespace oracle {

using dbx::Mat;
using dbx::Vec;

long double entropy_ld(const Vec& p);
long double mutual_information_ld(const Mat& joint_ab);
// joint_cab[c][a][b]
long double conditional_mutual_information_ld(const std::vector<Mat>& joint_cab);

// Full 4-way joint of an auxiliary distribution by direct multiplication.
struct Joint4 {
  int U, X, Y, Z;
  std::vector<long double> p;  // ((u*X+x)*Y+y)*Z+z
  long double& at(int u, int x, int y, int z) {
    return p[((static_cast<size_t>(u) * X + x) * Y + y) * Z + z];
  }
  long double at(int u, int x, int y, int z) const {
    return p[((static_cast<size_t>(u) * X + x) * Y + y) * Z + z];
  }
};
Joint4 bruteforce_joint(const dbx::AuxiliaryJoint& j);

// Exhaustive dyadic-grid maximization of mu*I(X;Y|U) + I(U;Z) over binary
// (p_U, p_{X|U}); refine_levels shrink the step locally around the best
// coarse cell. Only valid for |X| = |Y| = |Z| = 2 channels.
double cmu_grid_oracle(const dbx::DegradedPair& ch, double mu, int steps = 64,
                       int refine_levels = 2);

// Same grid search for the lambda-tilted cumulant.
double omega_grid_oracle(const dbx::DegradedPair& ch, double mu, double lambda,
                         int steps = 64, int refine_levels = 2);

// Single-user capacity max_p I(X;Y) of one kernel (Blahut-Arimoto).
double blahut_arimoto_capacity(const dbx::StochasticMatrix& w, int iters = 3000);

// Plain four-fold sum for the tilted cumulant (no log-sum-exp), long double.
long double omega_q_direct(const dbx::AuxiliaryJoint& q, double mu, double lambda);

// Monte Carlo estimate of the code error probabilities, for cross-checking
// exact enumeration. Returns {pc, pe1, pe2} and writes the standard error of
// pc into *se.
struct McEstimate {
  double pc, pe1, pe2, se_pc;
};
McEstimate mc_code_estimate(const dbx::BlockCode& code, const dbx::DegradedPair& ch,
                            long samples, uint64_t seed);

}  // namespace oracle
