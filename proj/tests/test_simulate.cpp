#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>

#include "dbx/simulate.hpp"
#include "dbx/parallel.hpp"

using namespace dbx;

namespace {

SuperpositionSpec symmetric_spec() {
  return SuperpositionSpec{ProbVector({0.5, 0.5}),
                           StochasticMatrix({{0.8, 0.2}, {0.2, 0.8}})};
}

}  // namespace

TEST_CASE("zero-rate code decodes with certainty") {
  DegradedPair ch{binary_symmetric(0.3), binary_symmetric(0.3)};
  SimPoint pt = monte_carlo_pc(symmetric_spec(), ch, RatePair(0.0, 0.0), 8, 2000, 7, -1.0);
  CHECK(pt.k_size == 1);
  CHECK(pt.l_size == 1);
  CHECK(pt.pc_hat == doctest::Approx(1.0));
  CHECK(pt.holds);
}

TEST_CASE("rates deep inside the region keep pc near one at n = 32") {
  DegradedPair ch{binary_symmetric(0.02), binary_symmetric(0.02)};
  SimPoint pt =
      monte_carlo_pc(symmetric_spec(), ch, RatePair(0.05, 0.02), 32, 3000, 11, -1.0);
  CHECK(pt.pc_hat > 0.9);
}

TEST_CASE("correct probability decays exponentially outside the region") {
  // very noisy cascade, rates far outside its tiny region; note the measured
  // per-n decay overshoots the asymptotic rate at small n because message
  // sizes are ceilings of exp(n r)
  DegradedPair ch{binary_symmetric(0.45), binary_symmetric(0.45)};
  RatePair rates(0.15, 0.05);
  double last_pc = 1.0;
  for (int n : {8, 16, 32}) {
    SimPoint pt = monte_carlo_pc(symmetric_spec(), ch, rates, n, 4000, 1000 + n, 0.0);
    CHECK(pt.pc_hat < 0.5 * last_pc);
    CHECK(pt.decay > 0.05);
    CHECK(static_cast<double>(pt.k_size) >= std::exp(n * rates.r1) - 1e-9);
    last_pc = pt.pc_hat;
  }
}

TEST_CASE("deterministic given seed; counts independent of worker partition") {
  DegradedPair ch{binary_symmetric(0.2), binary_symmetric(0.2)};
  RatePair rates(0.2, 0.1);
  SimPoint a = monte_carlo_pc(symmetric_spec(), ch, rates, 8, 5000, 99, 0.0);
  SimPoint b = monte_carlo_pc(symmetric_spec(), ch, rates, 8, 5000, 99, 0.0);
  CHECK(a.pc_hat == b.pc_hat);
  CHECK(a.ci_lo == b.ci_lo);
  CHECK(a.ci_hi == b.ci_hi);

  // different worker counts must reproduce the same counts exactly
  setenv("DBX_THREADS", "1", 1);
  SimPoint one = monte_carlo_pc(symmetric_spec(), ch, rates, 8, 5000, 99, 0.0);
  setenv("DBX_THREADS", "3", 1);
  SimPoint three = monte_carlo_pc(symmetric_spec(), ch, rates, 8, 5000, 99, 0.0);
  unsetenv("DBX_THREADS");
  CHECK(one.pc_hat == three.pc_hat);
  CHECK(one.pc_hat == a.pc_hat);
}

TEST_CASE("confidence interval brackets the estimate") {
  DegradedPair ch{binary_symmetric(0.3), binary_symmetric(0.3)};
  SimPoint pt = monte_carlo_pc(symmetric_spec(), ch, RatePair(0.1, 0.05), 16, 2000, 5, 0.0);
  CHECK(pt.ci_lo <= pt.pc_hat);
  CHECK(pt.pc_hat <= pt.ci_hi);
  CHECK(pt.ci_lo >= 0.0);
  CHECK(pt.ci_hi <= 1.0);
}

TEST_CASE("input validation") {
  DegradedPair ch{binary_symmetric(0.3), binary_symmetric(0.3)};
  CHECK_THROWS_AS(monte_carlo_pc(symmetric_spec(), ch, RatePair(0.1, 0.1), 8, 0, 1, 0.0),
                  std::invalid_argument);
  CHECK_THROWS_AS(
      monte_carlo_pc(symmetric_spec(), ch, RatePair(0.1, 0.1), 100, 100, 1, 0.0),
      std::invalid_argument);
}
