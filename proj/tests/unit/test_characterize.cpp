#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "stein/characterize.hpp"
#include "stein/error.hpp"

using namespace stein;

TEST(Empirical, Pmf) {
  EXPECT_NEAR(empirical_pmf(Sample({0, 0, 1}), 0), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(empirical_pmf(Sample({5}), 4), 0.0);
  const Sample s({0, 3, 3, 1, 7, 2, 2, 2});
  double total = 0.0;
  for (std::int64_t k = 0; k <= s.max(); ++k) total += empirical_pmf(s, k);
  EXPECT_NEAR(total, 1.0, 1e-15);
}

TEST(Empirical, ExpectationSide) {
  EXPECT_NEAR(empirical_expectation_side(Sample({0, 1}), DiscreteModel::poisson(1.0), 1), 0.25,
              1e-15);
  EXPECT_EQ(empirical_expectation_side(Sample({0, 1}), DiscreteModel::poisson(1.0), 5), 0.0);
  // Brute force: -score(x) = 1 - lambda/(x+1) for the Poisson family.
  const Sample s({0, 2, 2, 5, 1});
  for (std::int64_t k = 0; k <= 6; ++k) {
    double acc = 0.0;
    for (auto x : s.values())
      if (x >= k) acc += 1.0 - 2.5 / (static_cast<double>(x) + 1.0);
    EXPECT_NEAR(empirical_expectation_side(s, DiscreteModel::poisson(2.5), k), acc / 5.0, 1e-15);
  }
  EXPECT_THROW(empirical_expectation_side(Sample({0, 1}), DiscreteModel::uniform(4), 1),
               DomainError);
}

TEST(Identity, PmfForward) {
  EXPECT_LT(pmf_identity_residual(DiscreteModel::poisson(2.0), 40).sup_abs, 1e-10);
  EXPECT_LT(pmf_identity_residual(DiscreteModel::negbinomial(3.0, 0.4), 60).sup_abs, 1e-10);
}

TEST(Identity, PmfDiscriminates) {
  const auto r =
      pmf_identity_residual(DiscreteModel::uniform(6), DiscreteModel::poisson(2.0), 10);
  EXPECT_GT(r.sup_abs, 0.05);

  const std::vector<DiscreteModel> models = {DiscreteModel::poisson(2.0),
                                             DiscreteModel::negbinomial(2.0, 0.5),
                                             DiscreteModel::uniform(6)};
  for (std::size_t a = 0; a < models.size(); ++a)
    for (std::size_t b = 0; b < models.size(); ++b) {
      const auto res = pmf_identity_residual(models[a], models[b], 20);
      if (a == b)
        EXPECT_LT(res.sup_abs, 1e-10);
      else
        EXPECT_GT(res.sup_abs, 1e-3) << a << " vs " << b;
    }
}

TEST(Identity, Cdf) {
  EXPECT_LT(cdf_identity_residual(DiscreteModel::poisson(1.0), 30).sup_abs, 1e-10);
  const auto b = cdf_identity_residual(DiscreteModel::binomial(5, 0.5), 5);
  EXPECT_LT(b.sup_abs, 1e-12);
  EXPECT_NEAR(b.lhs.back(), 1.0, 1e-12);
  EXPECT_NEAR(b.rhs.back(), 1.0, 1e-12);
}

TEST(Identity, CharacteristicFunction) {
  const auto at0 = cf_identity_residual(DiscreteModel::poisson(1.0), {0.0, 2.0 * std::numbers::pi});
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(std::abs(at0.lhs[i] - 1.0), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(at0.rhs[i] - 1.0), 0.0, 1e-12);
  }
  EXPECT_LT(cf_identity_residual(DiscreteModel::poisson(1.0), {0.5, 1.0, 2.0}).sup_abs, 1e-10);
  const auto u = cf_identity_residual(DiscreteModel::uniform(3), {std::numbers::pi});
  EXPECT_LT(u.sup_abs, 1e-12);
  // Closed form: (e^{i pi} + e^{2 i pi} + e^{3 i pi}) / 3 = -1/3.
  EXPECT_NEAR(u.lhs[0].real(), -1.0 / 3.0, 1e-12);
}

TEST(Identity, GeneratingFunction) {
  const auto po = DiscreteModel::poisson(2.0);
  const auto half = pgf_identity_residual(po, {0.5});
  EXPECT_NEAR(half.lhs[0], std::exp(-1.0), 1e-12);
  EXPECT_LT(half.sup_abs, 1e-10);

  const auto zero = pgf_identity_residual(po, {0.0});
  const auto pmf0 = pmf_identity_residual(po, 0);
  EXPECT_DOUBLE_EQ(zero.lhs[0], pmf0.lhs[0]);
  EXPECT_NEAR(zero.rhs[0], po.pmf(0), 1e-12);
  EXPECT_NEAR(zero.sup_abs, pmf0.sup_abs, 1e-15);

  std::vector<double> grid;
  for (int i = 1; i <= 9; ++i) grid.push_back(i / 10.0);
  EXPECT_LT(pgf_identity_residual(DiscreteModel::negbinomial(2.0, 0.5), grid).sup_abs, 1e-10);

  EXPECT_THROW(pgf_identity_residual(DiscreteModel::uniform(4), {0.5}), UnsupportedOperation);
  EXPECT_THROW(pgf_identity_residual(DiscreteModel::binomial(4, 0.5), {0.5}), UnsupportedOperation);
  EXPECT_THROW(pgf_identity_residual(po, {1.0}), DomainError);
}

TEST(Identity, Backward) {
  EXPECT_LT(backward_identity_residual(DiscreteModel::binomial(4, 0.3)).sup_abs, 1e-12);
  const auto u = backward_identity_residual(DiscreteModel::uniform(5));
  for (double v : u.rhs) EXPECT_NEAR(v, 0.2, 1e-15);
  EXPECT_THROW(backward_identity_residual(DiscreteModel::poisson(1.0)), UnsupportedOperation);
}

TEST(Identity, BinomialForwardAndBackwardAgree) {
  const auto m = DiscreteModel::binomial(6, 0.35);
  EXPECT_LT(pmf_identity_residual(m, 6).sup_abs, 1e-12);
  EXPECT_LT(backward_identity_residual(m).sup_abs, 1e-12);
  // The two weight sequences differ pointwise.
  EXPECT_GT(std::abs(m.score_forward(2) - m.score_backward(2)), 0.1);
}

TEST(Identity, ResidualSummaries) {
  const auto r = pmf_identity_residual(DiscreteModel::uniform(6), DiscreteModel::poisson(2.0), 6);
  double sup = 0.0, l2 = 0.0;
  for (std::size_t i = 0; i < r.lhs.size(); ++i) {
    const double d = std::abs(r.lhs[i] - r.rhs[i]);
    sup = std::max(sup, d);
    l2 += d * d;
  }
  EXPECT_DOUBLE_EQ(r.sup_abs, sup);
  EXPECT_DOUBLE_EQ(r.l2, l2);
}

TEST(SteinOperator, TestFunctionsVanishUnderTheModel) {
  const std::vector<DiscreteModel> models = {DiscreteModel::poisson(1.0),
                                             DiscreteModel::negbinomial(2.0, 0.5),
                                             DiscreteModel::uniform(6), DiscreteModel::binomial(8, 0.4),
                                             DiscreteModel::exppoly({0.5, 0.0, -0.2})};
  for (const auto& m : models)
    for (std::int64_t j = m.support().lower; j < m.support().lower + 4; ++j)
      EXPECT_LT(std::abs(stein_operator_expectation(m, make_fm(m, j), m)), 1e-10) << m.name();
}

TEST(SteinOperator, ConstantFunction) {
  // sum_k score(k) p(k) telescopes to -p(0).
  const auto po = DiscreteModel::poisson(1.0);
  const IntFunction one = [](std::int64_t) { return 1.0; };
  EXPECT_NEAR(stein_operator_expectation(po, one, po), -std::exp(-1.0), 1e-10);
}

TEST(SteinOperator, DetectsOtherLaw) {
  const auto po = DiscreteModel::poisson(1.0);
  const auto unif = DiscreteModel::uniform(6);
  const double value = stein_operator_expectation(po, make_fm(po, 3), unif);
  EXPECT_NEAR(value, unif.cdf(3) - po.cdf(3), 1e-10);
  EXPECT_GT(std::abs(value), 0.1);
  EXPECT_THROW(stein_operator_expectation(unif, make_fm(unif, 3), po), DomainError);
}

TEST(MakeFm, Examples) {
  const auto u = DiscreteModel::uniform(3);
  const auto f = make_fm(u, 1);
  EXPECT_EQ(f(1), 0.0);
  // (1{1 <= 1} - P(Z <= 1)) p(1) / p(2) = (1 - 1/3) = 2/3.
  EXPECT_NEAR(f(2), 2.0 / 3.0, 1e-15);
  EXPECT_EQ(make_fm(DiscreteModel::poisson(2.0), 4)(0), 0.0);

  const auto po = DiscreteModel::poisson(2.5);
  const std::int64_t m = 3;
  const auto fm = make_fm(po, m);
  const double c = po.cdf(m);
  for (std::int64_t k = 0; k < 15; ++k) {
    const double lhs = po.pmf(k + 1) * fm(k + 1) - po.pmf(k) * fm(k);
    EXPECT_NEAR(lhs, ((k <= m ? 1.0 : 0.0) - c) * po.pmf(k), 1e-13) << k;
  }
  EXPECT_THROW(make_fm(u, 0), DomainError);
}
