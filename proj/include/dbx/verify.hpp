#pragma once
// Randomized theorem-instance suites. Each trial draws a random instance
// (channel, code, test distributions, tilt parameters) and evaluates one of
// the finite-n checkers; since every checker instantiates a proved
// inequality, a single failed trial is a build-stopping bug.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dbx/converse.hpp"
#include "dbx/exponent.hpp"
#include "dbx/prob.hpp"

namespace dbx {

enum class Suite {
  Lemma1,     // n-letter change-of-measure bound
  Lemma2,     // per-letter form
  Prop1,      // eta-balanced exponential bound
  Lemma6,     // telescoping identity for the n-letter cumulant
  Holder,     // per-step Hoelder bound along the matched construction
  Prop2,      // single-letter bound on the n-letter cumulant
  PerCode,    // per-code converse against the exponent floor
  AppendixC,  // individual threshold-failure terms <= exp(-n eta)
};

std::optional<Suite> suite_from_name(const std::string& name);
const char* suite_name(Suite s);
std::vector<std::string> suite_names();

struct VerifyOptions {
  Suite suite = Suite::Lemma1;
  int n = 2;
  int trials = 100;
  uint64_t seed = 1;
  std::optional<DegradedPair> channel;  // unset -> fresh random binary channel per trial
  RatePair rates{0.5, 0.3};             // per-code suite only
  OptConfig opt;                        // cumulant optimizer (holder / prop2 / percode)
  int mu_points = 21, lambda_points = 21;       // per-code exponent grid
  double grid_lo = 1e-2, grid_hi = 1e2;
  const ExponentGrid* precomputed_grid = nullptr;  // per-code suite, optional
  double budget = kEnumBudget;
};

struct TrialOutcome {
  bool holds = false;
  double margin = 0.0;
  double lhs = 0.0, rhs = 0.0;
};

struct SuiteReport {
  Suite suite = Suite::Lemma1;
  int n = 0;
  uint64_t seed = 0;
  std::vector<TrialOutcome> trials;
  bool all_hold = false;
  double min_margin = 0.0;
  // Context for the per-code suite.
  double f_value = 0.0, floor = 0.0;
};

SuiteReport run_suite(const VerifyOptions& opts);

// Default channel for rate-dependent suites: BSC(0.1) -> BSC(0.1).
DegradedPair default_cascade();

// Estimated enumeration terms for a suite configuration (budget refusals
// report this number).
double estimated_terms(const VerifyOptions& opts);

}  // namespace dbx
