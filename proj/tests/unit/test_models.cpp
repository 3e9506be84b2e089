#include <gtest/gtest.h>

#include <cmath>

#include "oracles.hpp"
#include "stein/error.hpp"
#include "stein/models.hpp"

using namespace stein;

namespace {

family::Gibbs five_state_gibbs() {
  family::Gibbs g;
  const double energies[] = {0.0, 0.7, 1.1, 2.5, 3.0};
  const std::int64_t particles[] = {1, 1, 2, 3, 3};
  for (int k = 1; k <= 5; ++k) {
    g.energies[k] = energies[k - 1];
    g.particles[k] = particles[k - 1];
  }
  g.mu = 0.4;
  g.temperature = 1.3;
  g.kappa = 1.0;
  return g;
}

std::vector<DiscreteModel> all_models() {
  return {DiscreteModel::poisson(1.0),          DiscreteModel::poisson(5.0),
          DiscreteModel::negbinomial(2.0, 0.5), DiscreteModel::negbinomial(1.0, 0.3),
          DiscreteModel::binomial(10, 0.3),     DiscreteModel::uniform(6),
          DiscreteModel::exppoly({0.5, 0.0, -0.2}), DiscreteModel::exppoly({0.0, -1.0}),
          DiscreteModel::gibbs(five_state_gibbs())};
}

}  // namespace

TEST(Models, ScoreExamples) {
  EXPECT_DOUBLE_EQ(DiscreteModel::poisson(1.0).score_forward(0), 0.0);
  EXPECT_DOUBLE_EQ(DiscreteModel::binomial(7, 0.4).score_forward(7), -1.0);
  const auto geo = DiscreteModel::negbinomial(1.0, 0.35);
  for (int k = 0; k < 20; ++k) EXPECT_NEAR(geo.score_forward(k), -0.35, 1e-15);
}

TEST(Models, BackwardScoreExamples) {
  EXPECT_DOUBLE_EQ(DiscreteModel::binomial(6, 0.3).score_backward(0), 1.0);
  const auto u = DiscreteModel::uniform(5);
  EXPECT_DOUBLE_EQ(u.score_backward(1), 1.0);
  for (int k = 2; k <= 5; ++k) EXPECT_DOUBLE_EQ(u.score_backward(k), 0.0);
  const auto b = DiscreteModel::binomial(8, 0.3);
  for (int k = 1; k <= 8; ++k)
    EXPECT_NEAR(b.score_backward(k), 1.0 - (0.7 / 0.3) * k / (8.0 - k + 1.0), 1e-12);
  EXPECT_THROW(DiscreteModel::poisson(2.0).score_backward(3), UnsupportedOperation);
}

TEST(Models, ScoreMatchesPmfRatio) {
  for (const auto& m : all_models()) {
    const auto& spt = m.support();
    const std::int64_t hi = spt.upper ? *spt.upper - 1 : spt.lower + 25;
    // Stop where the normalized pmf loses relative precision to underflow.
    for (std::int64_t k = spt.lower; k <= hi && m.pmf(k + 1) > 1e-250; ++k) {
      const double ratio = m.pmf(k + 1) / m.pmf(k) - 1.0;
      EXPECT_NEAR(m.score_forward(k), ratio, 1e-10 * std::max(1.0, std::abs(ratio)))
          << m.name() << " k=" << k;
    }
    if (spt.upper) EXPECT_DOUBLE_EQ(m.score_forward(*spt.upper), -1.0) << m.name();
  }
}

TEST(Models, PmfSumsToOne) {
  for (const auto& m : all_models()) {
    double s = 0.0;
    for (std::int64_t k = m.support().lower; k <= m.summation_limit(); ++k) s += m.pmf(k);
    EXPECT_NEAR(s, 1.0, 1e-10) << m.name();
  }
}

TEST(Models, PmfExamples) {
  EXPECT_NEAR(DiscreteModel::poisson(1.0).pmf(0), std::exp(-1.0), 1e-15);
  EXPECT_DOUBLE_EQ(DiscreteModel::uniform(4).pmf(2), 0.25);
  EXPECT_EQ(DiscreteModel::uniform(4).pmf(0), 0.0);
  EXPECT_EQ(DiscreteModel::poisson(1.0).pmf(-1), 0.0);

  double z = 0.0;
  for (int j = 1; j < 40; ++j) z += std::exp(-static_cast<double>(j) * j);
  EXPECT_NEAR(DiscreteModel::exppoly({0.0, -1.0}).pmf(1), std::exp(-1.0) / z, 1e-15);

  const auto p = DiscreteModel::poisson(3.7);
  for (int k = 0; k < 30; ++k) {
    EXPECT_NEAR(p.pmf(k), oracle::poisson_pmf(3.7, k), 1e-14);
    EXPECT_NEAR(p.cdf(k), oracle::poisson_cdf(3.7, k), 1e-13);
  }
}

TEST(Models, OutOfSupportScoreThrows) {
  EXPECT_THROW(DiscreteModel::poisson(1.0).score_forward(-1), DomainError);
  EXPECT_THROW(DiscreteModel::uniform(4).score_forward(0), DomainError);
  EXPECT_THROW(DiscreteModel::uniform(4).score_forward(5), DomainError);
  EXPECT_THROW(DiscreteModel::exppoly({0.1, -0.1}).score_forward(0), DomainError);
}

TEST(Models, ConstructionValidates) {
  EXPECT_THROW(DiscreteModel::poisson(0.0), DomainError);
  EXPECT_THROW(DiscreteModel::negbinomial(2.0, 1.0), DomainError);
  EXPECT_THROW(DiscreteModel::binomial(0, 0.5), DomainError);
  EXPECT_THROW(DiscreteModel::uniform(1), DomainError);
  EXPECT_THROW(DiscreteModel::exppoly({0.5, 0.0, 0.2}), DomainError);
  EXPECT_THROW(DiscreteModel::exppoly({0.5}), DomainError);

  auto g = five_state_gibbs();
  g.energies[3] = INFINITY;
  EXPECT_THROW(DiscreteModel::gibbs(g), DomainError);
  auto gap = five_state_gibbs();
  gap.energies.erase(2);
  EXPECT_THROW(DiscreteModel::gibbs(gap), DomainError);
}

TEST(Models, SupportsMatchFamilies) {
  EXPECT_EQ(DiscreteModel::poisson(1).support().lower, 0);
  EXPECT_FALSE(DiscreteModel::poisson(1).support().finite());
  EXPECT_EQ(*DiscreteModel::binomial(4, 0.2).support().upper, 4);
  EXPECT_EQ(DiscreteModel::uniform(6).support().lower, 1);
  EXPECT_EQ(DiscreteModel::exppoly({1, -1}).support().lower, 1);
  EXPECT_EQ(*DiscreteModel::gibbs(five_state_gibbs()).support().upper, 5);
}

TEST(Models, GibbsScoreClosedForm) {
  const auto g = five_state_gibbs();
  const auto m = DiscreteModel::gibbs(g);
  for (int k = 1; k < 5; ++k) {
    const double expo = (g.energies.at(k) - g.energies.at(k + 1) +
                         g.mu * static_cast<double>(g.particles.at(k + 1) - g.particles.at(k))) /
                        (g.kappa * g.temperature);
    EXPECT_NEAR(m.score_forward(k), std::exp(expo) - 1.0, 1e-14);
  }
}

TEST(Models, ScoreNeverNormalizesExpPoly) {
  const auto before = exppoly_normalizer_evaluations();
  const auto m = DiscreteModel::exppoly({0.3, 0.1, -0.05});
  for (int k = 1; k < 100; ++k) (void)m.score_forward(k);
  EXPECT_EQ(exppoly_normalizer_evaluations(), before);
  (void)m.pmf(1);
  EXPECT_EQ(exppoly_normalizer_evaluations(), before + 1);
}

TEST(Models, ConditionC2) {
  const auto po = check_c2(DiscreteModel::poisson(1.0), 200);
  EXPECT_TRUE(std::isfinite(po.sup_value));
  EXPECT_TRUE(po.stabilized);
  // Paper bound |lambda/(k+1) - 1| / (1 - lambda/(k+2)) at lambda = 1 stays below 2.
  EXPECT_LT(po.sup_value, 2.0);

  const auto u = check_c2(DiscreteModel::uniform(6), 100);
  EXPECT_TRUE(u.stabilized);
  EXPECT_TRUE(std::isfinite(u.sup_value));

  const auto ep = check_c2(DiscreteModel::exppoly({1.0, -0.5}), 100);
  EXPECT_LE(ep.limsup_proxy, 1.0 + 1e-9);
  EXPECT_TRUE(std::isfinite(ep.sup_value));
}
