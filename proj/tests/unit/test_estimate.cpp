#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "stein/error.hpp"
#include "stein/estimate.hpp"
#include "stein/models.hpp"
#include "stein/sampling.hpp"

using namespace stein;

TEST(SNb, MatchesNaiveOracle) {
  RandomStream rng(202);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const auto values = oracle::random_values(rng, n, 0, 20);
    const double r = 0.1 + 10.0 * rng.uniform();
    const double q = 0.02 + 0.96 * rng.uniform();
    const double expected = oracle::naive_s_nb(values, r, q);
    EXPECT_NEAR(s_nb(Sample(values), r, q), expected, 1e-10 * std::max(1.0, expected));
  }
}

TEST(SNb, HandValue) {
  for (double q : {0.1, 0.5, 0.9}) EXPECT_NEAR(s_nb(Sample({0}), 1.0, q), (q - 1) * (q - 1), 1e-15);
}

TEST(SNb, DomainErrors) {
  EXPECT_THROW(s_nb(Sample({1, 2}), 0.0, 0.5), DomainError);
  EXPECT_THROW(s_nb(Sample({1, 2}), 1.0, 1.0), DomainError);
  EXPECT_THROW(s_nb(Sample({1, 2}), 1.0, 0.0), DomainError);
}

TEST(SNb, SmallerAtTruth) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const auto x = draw(alt::NegBinomial{2.0, 0.25}, 2000, rng);
    if (s_nb(x, 2.0, 0.25) < s_nb(x, 3.0, 0.25)) ++wins;
  }
  EXPECT_GE(wins, 95);
}

TEST(SPe, MatchesNaiveOracle) {
  RandomStream rng(303);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + static_cast<std::size_t>(rng.uniform() * 30);
    const auto values = oracle::random_values(rng, n, 1, 8);
    const double t1 = 2.0 * rng.uniform() - 1.0;
    const double t3 = -0.01 - 0.5 * rng.uniform();
    const std::vector<double> closed = {t1, 0.0, t3};
    const double e1 = oracle::naive_s_pe(values, closed);
    EXPECT_NEAR(s_pe(Sample(values), closed), e1, 1e-10 * std::max(1.0, e1));
    const std::vector<double> general = {t1, 0.3 * rng.uniform() - 0.15, t3};
    const double e2 = oracle::naive_s_pe(values, general);
    EXPECT_NEAR(s_pe(Sample(values), general), e2, 1e-10 * std::max(1.0, e2));
  }
}

TEST(SPe, HandValue) {
  const double t1 = 0.4, t3 = -0.3;
  const double e1 = std::exp(t1 + 7.0 * t3);
  EXPECT_NEAR(s_pe(Sample({1}), {t1, 0.0, t3}), e1 * e1, 1e-15);
}

TEST(SPe, DomainErrors) {
  EXPECT_THROW(s_pe(Sample({0, 1}), {0.5, 0.0, -0.2}), DomainError);
  EXPECT_THROW(s_pe(Sample({1, 2}), {0.5, 0.0, 0.2}), DomainError);
  EXPECT_THROW(s_pe(Sample({1, 2}), {0.5}), DomainError);
}

TEST(SPe, SmallerAtTruth) {
  int wins = 0;
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    RandomStream rng(seed);
    const auto x = draw(alt::ExpPoly{{0.5, 0.0, -0.2}}, 2000, rng);
    if (s_pe(x, {0.5, 0.0, -0.2}) < s_pe(x, {0.7, 0.0, -0.2})) ++wins;
  }
  EXPECT_GE(wins, 95);
}

TEST(Objectives, PermutationInvariant) {
  std::vector<std::int64_t> v = {1, 3, 2, 2, 5, 1, 4};
  std::vector<std::int64_t> w(v.rbegin(), v.rend());
  EXPECT_DOUBLE_EQ(s_nb(Sample(v), 1.5, 0.4), s_nb(Sample(w), 1.5, 0.4));
  EXPECT_DOUBLE_EQ(s_pe(Sample(v), {0.2, 0.0, -0.1}), s_pe(Sample(w), {0.2, 0.0, -0.1}));
  EXPECT_DOUBLE_EQ(hd_objective(Sample(v), {0.2, 0.0, -0.1}),
                   hd_objective(Sample(w), {0.2, 0.0, -0.1}));
}

TEST(Moments, Examples) {
  const auto a = moment_estimators_nb(Sample({0, 0, 4, 4}));
  EXPECT_NEAR(a.q_tilde, 0.5, 1e-15);
  EXPECT_NEAR(a.r_tilde, 2.0, 1e-15);
  EXPECT_FALSE(a.underdispersed);

  const auto b = moment_estimators_nb(Sample({1, 3, 3, 5}));
  EXPECT_NEAR(b.r_tilde, -9.0, 1e-12);
  EXPECT_TRUE(b.underdispersed);

  const auto c = moment_estimators_nb(Sample({0, 2}));
  EXPECT_TRUE(std::isinf(c.r_tilde) && c.r_tilde > 0);
  EXPECT_TRUE(c.underdispersed);

  EXPECT_THROW(moment_estimators_nb(Sample({3, 3, 3})), DegenerateSample);
}

TEST(EstimateNb, ConvergesInsideBounds) {
  RandomStream data(5);
  const auto x = draw(alt::NegBinomial{2.0, 0.25}, 200, data);
  const auto res = estimate_nb(x, {}, RandomStream(6));
  ASSERT_EQ(res.params.size(), 2u);
  EXPECT_TRUE(res.converged) << res.status;
  EXPECT_TRUE(res.in_bounds);
  EXPECT_GT(res.params[0], 0.0);
  EXPECT_GT(res.params[1], 0.0);
  EXPECT_LT(res.params[1], 1.0);
  EXPECT_NEAR(res.objective, s_nb(x, res.params[0], res.params[1]), 1e-12);
  EXPECT_LE(res.objective, s_nb(x, 2.0, 0.25) + 1e-12);
}

TEST(EstimateNb, UnderdispersedStaysInSpace) {
  std::vector<std::int64_t> v;
  for (int i = 0; i < 25; ++i) v.insert(v.end(), {2, 2, 2, 3});
  const Sample x(v);
  const auto res = estimate_nb(x, {}, RandomStream(1));
  EXPECT_TRUE(res.in_bounds);
  EXPECT_GT(res.params[0], 0.0);
  EXPECT_LT(res.params[1], 1.0);
  const auto m = moment_estimators_nb(x);
  EXPECT_TRUE(m.underdispersed);
  EXPECT_LT(m.r_tilde, 0.0);
  EXPECT_GT(m.q_tilde, 1.0);
}

TEST(EstimateNb, MultiStartNeverWorse) {
  RandomStream data(8);
  const auto x = draw(alt::NegBinomial{5.0, 0.5}, 100, data);
  const auto one = estimate_nb(x, {}, RandomStream(2));
  NbOptions opts;
  opts.n_starts = 5;
  const auto five = estimate_nb(x, {}, RandomStream(2), opts);
  EXPECT_LE(five.objective, one.objective + 1e-14);
}

TEST(EstimateNb, Consistency) {
  int hits = 0;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    RandomStream data(seed);
    const auto x = draw(alt::NegBinomial{2.0, 0.25}, 2000, data);
    const auto res = estimate_nb(x, {}, substream(RandomStream(seed), 1));
    if (std::abs(res.params[1] - 0.25) < 0.05) ++hits;
  }
  EXPECT_GE(hits, 27);
}

TEST(EstimateExpPoly, FixedComponentAndNoNormalizer) {
  RandomStream data(12);
  const auto x = draw(alt::ExpPoly{{0.5, 0.0, -0.2}}, 100, data);
  const auto before = exppoly_normalizer_evaluations();
  const auto mde = estimate_exppoly(x, 3, {{2, 0.0}}, {}, RandomStream(3));
  const auto hd = estimate_exppoly_hd(x, 3, {{2, 0.0}}, {}, {}, RandomStream(4));
  EXPECT_EQ(exppoly_normalizer_evaluations(), before);
  ASSERT_EQ(mde.params.size(), 3u);
  EXPECT_EQ(mde.params[1], 0.0);
  EXPECT_EQ(hd.params[1], 0.0);
  EXPECT_LE(mde.params[2], -1e-6);
  EXPECT_LE(hd.params[2], -1e-6);
  EXPECT_NEAR(mde.objective, s_pe(x, mde.params), 1e-12);
  EXPECT_NEAR(hd.objective, hd_objective(x, hd.params), 1e-12);
  EXPECT_TRUE(mde.converged) << mde.status;
}

TEST(EstimateExpPoly, Consistency) {
  // Nearly all mass sits on {1, 2, 3}, so theta_1 hinges on the few values
  // equal to 3 and needs a large n; sd(theta_1 hat) is about 0.13 at n = 2000
  // and 0.04 at n = 20000. Tight tolerances isolate the estimator from the
  // optimizer's default stopping rule.
  OptimizerConfig tight;
  tight.f_rel_tol = 1e-16;
  ExpPolyOptions opts;
  opts.n_starts = 3;
  int hits = 0;
  const int seeds = 20;
  for (int seed = 0; seed < seeds; ++seed) {
    RandomStream data(static_cast<std::uint64_t>(seed));
    const auto x = draw(alt::ExpPoly{{0.5, 0.0, -0.2}}, 20000, data);
    const auto res = estimate_exppoly(x, 3, {{2, 0.0}}, tight, substream(RandomStream(seed), 1), opts);
    if (std::abs(res.params[0] - 0.5) < 0.1 && std::abs(res.params[2] + 0.2) < 0.1) ++hits;
  }
  EXPECT_GE(hits, 18);
}

TEST(EstimateExpPoly, ConfigErrors) {
  const Sample x({1, 2, 3, 2});
  EXPECT_THROW(estimate_exppoly(x, 3, {{3, -0.2}}, {}, RandomStream(0)), ConfigError);
  EXPECT_THROW(estimate_exppoly(x, 3, {{4, 0.0}}, {}, RandomStream(0)), ConfigError);
  EXPECT_THROW(estimate_exppoly(x, 1, {}, {}, RandomStream(0)), ConfigError);
  EXPECT_THROW(estimate_exppoly(Sample({0, 1, 2}), 3, {}, {}, RandomStream(0)), DomainError);
}

TEST(HdObjective, ScaleInvariance) {
  RandomStream rng(44);
  for (int rep = 0; rep < 100; ++rep) {
    const auto values = oracle::random_values(rng, 5 + static_cast<std::size_t>(rng.uniform() * 40), 1, 9);
    const std::vector<double> theta = {2.0 * rng.uniform() - 1.0, 0.0, -0.05 - 0.5 * rng.uniform()};
    const double log_c = 10.0 * rng.uniform() - 5.0;
    const Sample x(values);
    EXPECT_NEAR(hd_objective(x, theta, {}, log_c), hd_objective(x, theta), 1e-10);
  }
}

TEST(HdObjective, FirstCoefficientShiftIsNotUniformRescaling) {
  // A shift of theta_1 multiplies q(k) by exp(delta k), which varies with k,
  // so the objective moves unless the sample has a single distinct value.
  const std::vector<double> theta = {0.5, 0.0, -0.2};
  const std::vector<double> shifted = {0.8, 0.0, -0.2};
  const Sample spread({1, 2, 2, 3, 4, 1, 2});
  EXPECT_GT(std::abs(hd_objective(spread, shifted) - hd_objective(spread, theta)), 1e-4);
  const Sample single({3, 3, 3});
  EXPECT_NEAR(hd_objective(single, shifted), hd_objective(single, theta), 1e-12);
}

TEST(HdObjective, GammaToZeroCollapses) {
  const Sample x({1, 2, 2, 3, 5});
  EXPECT_NEAR(hd_objective(x, {0.3, -0.1}, {1.1, 0.1, 1e-13}), 0.0, 1e-10);
}

TEST(HdObjective, DomainErrors) {
  const Sample x({1, 2});
  EXPECT_THROW(hd_objective(x, {0.1, -0.1}, {0.1, 1.1, 1.0 / 9.0}), DomainError);
  EXPECT_THROW(hd_objective(x, {0.1, -0.1}, {1.1, 0.1, 0.0}), DomainError);
  EXPECT_THROW(hd_objective(x, {0.1, -0.1}, {1.1, 0.0, 0.1}), DomainError);
}
