#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "dbx/capacity.hpp"
#include "dbx/rng.hpp"
#include "oracles.hpp"

using namespace dbx;

namespace {

DegradedPair random_channel(Rng& rng) {
  Mat w1(2), w2(2);
  for (auto& r : w1) r = rng.dirichlet(2);
  for (auto& r : w2) r = rng.dirichlet(2);
  return DegradedPair{StochasticMatrix(w1), StochasticMatrix(w2)};
}

const double kLn2 = std::log(2.0);

}  // namespace

TEST_CASE("identity cascade: C^(1) = log 2") {
  DegradedPair ch{identity_kernel(2), identity_kernel(2)};
  CmuResult r = weighted_capacity(ch, 1.0);
  CHECK(r.value == doctest::Approx(kLn2).epsilon(1e-6));
  // matches the independent grid oracle
  const double grid = oracle::cmu_grid_oracle(ch, 1.0);
  CHECK(std::abs(r.value - grid) <= 1e-3);
}

TEST_CASE("uniform-rows W1 kills both informations") {
  DegradedPair ch{uniform_kernel(2, 2), binary_symmetric(0.2)};
  for (double mu : {0.5, 1.0, 7.0}) {
    CmuResult r = weighted_capacity(ch, mu);
    CHECK(std::abs(r.value) <= 1e-9);
  }
}

TEST_CASE("weighted capacity rejects non-positive mu") {
  DegradedPair ch{identity_kernel(2), identity_kernel(2)};
  CHECK_THROWS_AS(weighted_capacity(ch, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(weighted_capacity(ch, -1.0), std::invalid_argument);
}

TEST_CASE("BSC cascade: large-mu slope approaches ln2 - H_b(0.1)") {
  DegradedPair ch{binary_symmetric(0.1), binary_symmetric(0.1)};
  const double r1max = kLn2 - binary_entropy(0.1);  // 0.368064
  CHECK(r1max == doctest::Approx(0.368064).epsilon(1e-5));
  CmuResult big = weighted_capacity(ch, 1000.0);
  CHECK(big.value / 1000.0 == doctest::Approx(r1max).epsilon(2e-3));
  // against the grid oracle at moderate mu
  for (double mu : {0.5, 1.0, 2.0}) {
    CmuResult r = weighted_capacity(ch, mu);
    CHECK(std::abs(r.value - oracle::cmu_grid_oracle(ch, mu)) <= 1e-3);
  }
}

TEST_CASE("analytic gradient path agrees with the grid oracle on random channels") {
  Rng rng(31);
  for (int trial = 0; trial < 8; ++trial) {
    DegradedPair ch = random_channel(rng);
    const double mu = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    CmuResult r = weighted_capacity(ch, mu);
    const double grid = oracle::cmu_grid_oracle(ch, mu);
    CHECK(r.value == doctest::Approx(grid).epsilon(0).scale(1).epsilon(1e-3));
    CHECK(std::abs(r.value - grid) <= 1e-3);
  }
}

TEST_CASE("hyperplane profile: shape, monotonicity and convexity in mu") {
  DegradedPair ch{binary_symmetric(0.1), binary_symmetric(0.1)};
  Vec grid = log_space_grid(0.25, 4.0, 9);
  HyperplaneProfile prof = hyperplane_profile(ch, grid);
  REQUIRE(prof.c_values.size() == grid.size());
  for (size_t i = 0; i + 1 < grid.size(); ++i)
    CHECK(prof.c_values[i + 1] >= prof.c_values[i] - kOptTol);
  // max of linear functions of p is convex in mu
  for (size_t i = 0; i + 2 < grid.size(); ++i) {
    const double a = grid[i], b = grid[i + 1], c = grid[i + 2];
    const double lam = (c - b) / (c - a);
    const double chord = lam * prof.c_values[i] + (1 - lam) * prof.c_values[i + 2];
    CHECK(prof.c_values[i + 1] <= chord + kOptTol);
  }
}

TEST_CASE("profile rejects bad grids") {
  DegradedPair ch{identity_kernel(2), identity_kernel(2)};
  CHECK_THROWS_AS(hyperplane_profile(ch, Vec{}), std::invalid_argument);
  CHECK_THROWS_AS(hyperplane_profile(ch, Vec{2.0, 1.0}), std::invalid_argument);
  CHECK_THROWS_AS(hyperplane_profile(ch, Vec{-1.0, 1.0}), std::invalid_argument);
  // single-point grid is fine
  HyperplaneProfile p = hyperplane_profile(ch, Vec{1.0});
  CHECK(p.c_values.size() == 1);
  CHECK(p.c_values[0] == doctest::Approx(kLn2).epsilon(1e-6));
}

TEST_CASE("uniform-noise channel: all-zero profile") {
  DegradedPair ch{uniform_kernel(2, 2), binary_symmetric(0.25)};
  HyperplaneProfile prof = hyperplane_profile(ch, log_space_grid(0.1, 10, 5));
  for (double c : prof.c_values) CHECK(std::abs(c) <= 1e-9);
}

TEST_CASE("region membership") {
  DegradedPair ch{binary_symmetric(0.1), binary_symmetric(0.1)};
  HyperplaneProfile prof = hyperplane_profile(ch, default_mu_grid());

  // origin is inside any region
  CHECK(in_region(prof, RatePair(0.0, 0.0)).inside);

  // (0.5, 0.3) violates the R1 corner 0.368064
  RegionCheck out = in_region(prof, RatePair(0.5, 0.3));
  CHECK_FALSE(out.inside);
  CHECK(out.margin > 0.0);

  // zero-capacity channel: any positive rate is outside; margin grows with mu
  DegradedPair dead{uniform_kernel(2, 2), binary_symmetric(0.25)};
  HyperplaneProfile zero = hyperplane_profile(dead, default_mu_grid());
  RegionCheck z = in_region(zero, RatePair(0.01, 0.0));
  CHECK_FALSE(z.inside);
  CHECK(z.worst_mu == doctest::Approx(zero.mu_grid.back()));
  CHECK(z.margin == doctest::Approx(0.01 * zero.mu_grid.back()).epsilon(1e-3));
}

TEST_CASE("rectangle corners") {
  DegradedPair ch{identity_kernel(2), identity_kernel(2)};
  // U degenerate, X uniform -> (log 2, 0)
  AuxiliaryJoint deg(ProbVector({1.0, 0.0}),
                     StochasticMatrix({{0.5, 0.5}, {0.5, 0.5}}), ch);
  auto [i1, i2] = rect_corner(deg);
  CHECK(i1 == doctest::Approx(kLn2).epsilon(1e-12));
  CHECK(i2 == doctest::Approx(0.0));
  // U = X uniform -> (0, log 2)
  AuxiliaryJoint copy(ProbVector({0.5, 0.5}), identity_kernel(2), ch);
  auto [j1, j2] = rect_corner(copy);
  CHECK(j1 == doctest::Approx(0.0));
  CHECK(j2 == doctest::Approx(kLn2).epsilon(1e-12));
}

TEST_CASE("sandwich: sampled corners lie inside the hyperplane region") {
  Rng rng(77);
  DegradedPair ch{binary_symmetric(0.1), binary_symmetric(0.1)};
  HyperplaneProfile prof = hyperplane_profile(ch, default_mu_grid());
  for (int trial = 0; trial < 200; ++trial) {
    Mat pxu(2);
    for (auto& r : pxu) r = rng.dirichlet(2);
    AuxiliaryJoint p(ProbVector(rng.dirichlet(2)), StochasticMatrix(pxu), ch);
    auto [i1, i2] = rect_corner(p);
    RegionCheck rc = in_region(prof, RatePair(i1, i2), 1e-6);
    CHECK(rc.inside);
    // argmax dominance: mu*I1 + I2 <= C^(mu) + tol at every grid point
    for (size_t i = 0; i < prof.mu_grid.size(); ++i)
      CHECK(prof.mu_grid[i] * i1 + i2 <= prof.c_values[i] + kOptTol);
  }
}

TEST_CASE("degenerate U reduces to single-user capacity (Blahut-Arimoto)") {
  Rng rng(99);
  for (int trial = 0; trial < 5; ++trial) {
    DegradedPair ch = random_channel(rng);
    OptConfig cfg;
    cfg.u_size = 1;
    const double mu = 1.0 + trial;
    CmuResult r = weighted_capacity(ch, mu, cfg);
    const double ba = oracle::blahut_arimoto_capacity(ch.w1());
    CHECK(std::abs(r.value - mu * ba) <= kOptTol * mu);
  }
}

TEST_CASE("cardinality saturation: |U| = |X| + 2 does not improve C^(mu)") {
  Rng rng(123);
  for (int trial = 0; trial < 4; ++trial) {
    DegradedPair ch = random_channel(rng);
    const double mu = std::exp(rng.uniform(std::log(0.5), std::log(2.0)));
    CmuResult base = weighted_capacity(ch, mu);
    OptConfig wide;
    wide.u_size = ch.x_size() + 2;
    CmuResult aug = weighted_capacity(ch, mu, wide);
    CHECK(aug.value <= base.value + 1e-3);
  }
}

TEST_CASE("determinism: same seed and config give identical results") {
  DegradedPair ch{binary_symmetric(0.1), binary_symmetric(0.2)};
  OptConfig cfg;
  cfg.seed = 2024;
  CmuResult a = weighted_capacity(ch, 1.5, cfg);
  CmuResult b = weighted_capacity(ch, 1.5, cfg);
  CHECK(a.value == b.value);
  CHECK(a.arg.p_u().probs() == b.arg.p_u().probs());
  CHECK(a.arg.p_x_given_u().rows() == b.arg.p_x_given_u().rows());
}

TEST_CASE("ternary channel: degenerate-U capacity against Blahut-Arimoto") {
  Rng rng(401);
  for (int trial = 0; trial < 3; ++trial) {
    Mat w1(3), w2(3);
    for (auto& r : w1) r = rng.dirichlet_floored(3, 1e-2);
    for (auto& r : w2) r = rng.dirichlet_floored(3, 1e-2);
    DegradedPair ch{StochasticMatrix(w1), StochasticMatrix(w2)};
    OptConfig cfg;
    cfg.u_size = 1;
    CmuResult r = weighted_capacity(ch, 1.0, cfg);
    CHECK(std::abs(r.value - oracle::blahut_arimoto_capacity(ch.w1())) <= kOptTol);
    // the full objective with auxiliary U can only do better
    CmuResult full = weighted_capacity(ch, 1.0);
    CHECK(full.value >= r.value - kOptTol);
  }
}

TEST_CASE("rate pairs reject negatives") {
  CHECK_THROWS_AS(RatePair(-0.1, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(RatePair(0.0, -0.1), std::invalid_argument);
}
