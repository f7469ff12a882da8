#pragma once
// Exact small-blocklength code evaluation and numerical verification of the
// finite-n inequalities behind the strong converse: the n-letter
// change-of-measure bound on the correct probability, its per-letter form,
// the Chernoff step, the eta-balanced exponential bound, the telescoping
// product decomposition of the n-letter cumulant, the per-step Hoelder
// bound, and the per-code consequence of the exponent lower bound.
//
// Every checker instantiates a proved inequality: holds == false on valid
// inputs signals an implementation bug, never a property of the instance.

#include <cstdint>
#include <vector>

#include "dbx/common.hpp"
#include "dbx/exponent.hpp"
#include "dbx/prob.hpp"
#include "dbx/rng.hpp"

namespace dbx {

// Stochastic encoder plus two deterministic decoders. Message pair (k,l) is
// row k*l_size + l of the encoder; codeword sequences x^n are indexed in
// big-endian mixed radix (first symbol most significant), as are y^n, z^n.
struct BlockCode {
  int n = 0;
  int k_size = 0, l_size = 0;
  int x_size = 0;
  StochasticMatrix encoder;   // (k_size*l_size) rows over x_size^n sequences
  std::vector<int> dec1;      // y_size^n -> k
  std::vector<int> dec2;      // z_size^n -> l
};

inline constexpr double kEnumBudget = 1e8;  // max enumeration terms

// Throws BudgetError when k_size*l_size*(XYZ)^n exceeds the budget.
void check_enumeration_budget(const BlockCode& code, const DegradedPair& ch,
                              double budget = kEnumBudget);

ValidationReport validate_code(const BlockCode& code, const DegradedPair& ch);

struct CodeStats {
  double pc = 0.0, pe = 0.0, pe1 = 0.0, pe2 = 0.0;
};

// Exact error/correct probabilities by full summation.
CodeStats exact_probabilities(const BlockCode& code, const DegradedPair& ch);

// Code-induced laws needed by the per-letter machinery: P(l, x^n), the
// prefix conditionals P(x_t | l, x^{t-1}) and P(z_t | l, z^{t-1}).
struct CodeLaw {
  int n, k_size, l_size, x_size, y_size, z_size;
  Vec p_lx;                       // [l * X^n + x^n]
  std::vector<Vec> x_prefix;      // t=0..n: P(l, x^{<=t}), size L*X^t
  std::vector<Vec> z_prefix;      // t=0..n: P(l, z^{<=t}), size L*Z^t
};

CodeLaw code_law(const BlockCode& code, const DegradedPair& ch);

// P(x_t = x | l, x-prefix) with t in 0..n-1; prefix is an index into X^t.
double x_next_prob(const CodeLaw& law, int t, int l, long x_prefix, int x);
// P(z_t = z | l, z-prefix); the conditioning pair (l, z-prefix) is V_t.
double z_next_prob(const CodeLaw& law, int t, int l, long z_prefix, int z);

struct CheckResult {
  bool holds = false;
  double lhs = 0.0, rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
};

// n-letter bound: P_c <= P{ R1 <= (1/n) log[W1^n W2^n / q_{Y^nZ^n|L}] + eta,
//                           R2 <= (1/n) log[p_{Z^n|L} / qz_tilde] + eta }
//                  + 2 exp(-n eta).
// q_yz_given_l: one row per l, flattened over y^n * Z^n + z^n.
// qz_tilde: distribution over z^n.
CheckResult correct_prob_event_bound(const BlockCode& code, const DegradedPair& ch,
                                     const RatePair& rates, double eta,
                                     const Mat& q_yz_given_l, const Vec& qz_tilde);

// The two threshold-failure terms behind the bound above, each of which must
// not exceed exp(-n eta), plus the decomposition P_c <= d0 + d1 + d2.
struct SlackBreakdown {
  double delta0 = 0.0, delta1 = 0.0, delta2 = 0.0;
  double per_term_cap = 0.0;  // exp(-n eta)
  bool holds = false;
  double margin = 0.0;
};

SlackBreakdown threshold_slack_breakdown(const BlockCode& code, const DegradedPair& ch,
                                         double eta, const Mat& q_yz_given_l,
                                         const Vec& qz_tilde);

// A sequence of per-step test distributions q_t over U_t x X x Y x Z with
// U_t = L x Y^{t-1} x Z^{t-1}. No consistency across t is required. The
// natural projection kappa_t maps u_t = (l, y-prefix, z-prefix) to
// v_t = (l, z-prefix).
struct NLetterTestDist {
  int n = 0;
  int l_size = 0, x_size = 0, y_size = 0, z_size = 0;
  std::vector<Vec> steps;  // steps[t]: flat over ((u*X + x)*Y + y)*Z + z

  long u_count(int t) const;                       // |U_{t+1}| for 0-based t
  long u_index(int t, int l, long y_prefix, long z_prefix) const;
  long v_index(int t, int l, long z_prefix) const; // kappa_t
  ValidationReport validate() const;

  static NLetterTestDist random(int n, int l_size, const DegradedPair& ch, Rng& rng);
  // Degenerate mass on one symbol tuple, floored to keep ratios finite.
  static NLetterTestDist degenerate(int n, int l_size, const DegradedPair& ch,
                                    double floor_eps = 1e-9);
};

// Marginal tables induced by one step of a test distribution.
struct TestDistTables {
  std::vector<Mat> y_given_u;           // [t][u][y], valid where u_mass > 0
  std::vector<Vec> u_mass;              // [t][u]
  std::vector<Vec> z_marg;              // [t][z]
};
TestDistTables induced_tables(const NLetterTestDist& qn);

// Test distribution equal to the code's own induced marginals.
NLetterTestDist induced_test_dist(const BlockCode& code, const DegradedPair& ch);

// Per-letter bound: same shape as correct_prob_event_bound but with the
// per-letter log-likelihood sums log[W1(Y_t|X_t)/q_{Y_t|U_t}] and
// log[p_{Z_t|V_t}/q_{Z_t}].
CheckResult per_letter_event_bound(const BlockCode& code, const DegradedPair& ch,
                                   const RatePair& rates, double eta,
                                   const NLetterTestDist& qn);

// Exponential tail bound for a finite-support law: Pr{Z >= a} <=
// exp(-(theta a - log E[exp(theta Z)])). Returns the bound value.
double chernoff_bound(const std::vector<std::pair<double, double>>& law, double a,
                      double theta);

// The n-letter cumulant log E_p[ prod_t W1^{theta mu} p_{Z|V}^theta /
// (q_{Y|U}^{theta mu} q_Z^theta) ]. Returns +inf if a test denominator
// vanishes at a positive-mass point.
double code_cumulant(const BlockCode& code, const DegradedPair& ch, double mu,
                     double theta, const NLetterTestDist& qn);

struct CorrectProbBound {
  double bound = 0.0;     // 3 exp(-n eta*)
  double eta = 0.0;       // balanced eta
  double cumulant = 0.0;  // (1/n) * n-letter cumulant
  double pc = 0.0;
  bool holds = false;
  double margin = 0.0;
};

// The eta-balanced exponential bound on P_c for any test sequence q^n.
CorrectProbBound correct_prob_exponent_bound(const BlockCode& code, const DegradedPair& ch,
                                             const RatePair& rates, double mu, double theta,
                                             const NLetterTestDist& qn);

// Telescoping decomposition: C_0 = 1, Phi_t = C_t / C_{t-1}, and the tilted
// prefix distributions, built step by step through the recursion.
struct TelescopeTrace {
  int n = 0;
  Vec c_values;   // C_0..C_n
  Vec log_phi;    // log Phi_1..log Phi_n
  double log_c_n = 0.0;
  // tilted[t]: the tilted prefix distribution over (l, x^t, y^t, z^t),
  // flattened ((l*X^t + xp)*Y^t + yp)*Z^t + zp; tilted[0] is the l marginal
  std::vector<Vec> tilted;
  double max_norm_residual = 0.0;       // | sum(tilted_t) - 1 |
  double max_recursion_residual = 0.0;  // recursion vs direct product, pointwise
};

TelescopeTrace telescope(const BlockCode& code, const DegradedPair& ch, double mu,
                         double theta, const NLetterTestDist& qn);

// The recursively matched test sequence q*: q_t = tilted (U_t, X_t) marginal
// times W1 times W2. Returns the sequence, the telescope it generates, and
// the per-step (U_t, X_t) mass tables.
struct MatchedConstruction {
  NLetterTestDist qn;
  TelescopeTrace trace;
  std::vector<Vec> p_ux;  // [t]: flat over (u_t, x)
};

MatchedConstruction matched_test_dist(const BlockCode& code, const DegradedPair& ch,
                                      double mu, double theta);

// Per-step Hoelder bound along the matched construction:
//   log Phi_t <= Omega_{q_t}(mu, lambda) / (1 + lambda)   (exact), and
//   log Phi_t <= omega_channel / (1 + lambda) + opt_tol   (channel-wide).
struct HolderStepCheck {
  double log_phi = 0.0;
  double omega_qt = 0.0;
  double unit_mean_residual = 0.0;  // E_{q_t}[p_{Z|V}/q_{Z|U}] - 1
  bool holds = false;
  double margin = 0.0;
};

std::vector<HolderStepCheck> holder_chain_check(const BlockCode& code,
                                                const DegradedPair& ch, double mu,
                                                double theta, double omega_channel,
                                                double opt_tol = kOptTol);

// (1/n) Omega_{p||q*} <= Omega(mu,lambda)/(1+lambda) + opt_tol.
CheckResult cumulant_chain_check(const BlockCode& code, const DegradedPair& ch, double mu,
                                 double theta, double omega_channel,
                                 double opt_tol = kOptTol);

struct ConverseCheck {
  double pc = 0.0;
  double decay = 0.0;  // -(1/n) log pc (infinite when pc == 0)
  double floor = 0.0;  // f_value - log(3)/n
  bool holds = false;
};

// Desk-scale form of the converse: every code at the given rates must decay
// at least as fast as the exponent floor.
ConverseCheck per_code_converse(const BlockCode& code, const DegradedPair& ch,
                                const RatePair& rates, const ExponentReport& report);

// Random stochastic-encoder code; decoders are MAP (per receiver) when
// map_decoders is set, otherwise uniform random maps.
BlockCode random_code(int n, const DegradedPair& ch, int k_size, int l_size, Rng& rng,
                      bool map_decoders);

// Replace decoders with the per-receiver MAP rules induced by the code.
void set_map_decoders(BlockCode& code, const DegradedPair& ch);

}  // namespace dbx
