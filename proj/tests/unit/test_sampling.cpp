#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <unordered_set>

#include "oracles.hpp"
#include "stein/error.hpp"
#include "stein/models.hpp"
#include "stein/sampling.hpp"

using namespace stein;

namespace {

constexpr std::size_t kDraws = 100000;

double phi(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

// Analytic pmf of each family, written from the family definitions.
double reference_pmf(const AltDistSpec& spec, std::int64_t k) {
  const double kd = static_cast<double>(k);
  return std::visit(
      [&](const auto& s) -> double {
        using T = std::decay_t<decltype(s)>;
        if constexpr (std::is_same_v<T, alt::Poisson>) {
          return oracle::poisson_pmf(s.lambda, k);
        } else if constexpr (std::is_same_v<T, alt::Uniform>) {
          return k <= s.m ? 1.0 / (s.m + 1.0) : 0.0;
        } else if constexpr (std::is_same_v<T, alt::Binomial>) {
          if (k > s.m) return 0.0;
          return std::exp(std::lgamma(s.m + 1.0) - std::lgamma(kd + 1.0) - std::lgamma(s.m - kd + 1.0) +
                          kd * std::log(s.q) + (s.m - kd) * std::log1p(-s.q));
        } else if constexpr (std::is_same_v<T, alt::PoissonMixture>) {
          return s.q * oracle::poisson_pmf(s.lambda1, k) + (1 - s.q) * oracle::poisson_pmf(s.lambda2, k);
        } else if constexpr (std::is_same_v<T, alt::PoissonDeltaZero>) {
          return (1 - s.w0) * oracle::poisson_pmf(s.lambda, k) + (k == 0 ? s.w0 : 0.0);
        } else if constexpr (std::is_same_v<T, alt::DiscreteWeibull>) {
          return std::pow(s.q, std::pow(kd, s.beta)) - std::pow(s.q, std::pow(kd + 1.0, s.beta));
        } else if constexpr (std::is_same_v<T, alt::ZeroModifiedPoisson>) {
          if (k == 0) return s.pi;
          return (1 - s.pi) * oracle::poisson_pmf(s.lambda, k) / (1 - std::exp(-s.lambda));
        } else if constexpr (std::is_same_v<T, alt::ZeroTruncatedPoisson>) {
          if (k == 0) return 0.0;
          return oracle::poisson_pmf(s.lambda, k) / (1 - std::exp(-s.lambda));
        } else if constexpr (std::is_same_v<T, alt::AbsDiscreteNormal>) {
          const double pos = phi(kd + 1 - s.mu) - phi(kd - s.mu);
          if (k == 0) return pos;
          return pos + phi(-kd + 1 - s.mu) - phi(-kd - s.mu);
        } else if constexpr (std::is_same_v<T, alt::NegBinomial>) {
          return std::exp(std::lgamma(s.r + kd) - std::lgamma(s.r) - std::lgamma(kd + 1.0) +
                          s.r * std::log(s.q) + kd * std::log1p(-s.q));
        } else {
          return DiscreteModel::exppoly(s.theta).pmf(k);
        }
      },
      spec);
}

const std::vector<AltDistSpec>& families() {
  static const std::vector<AltDistSpec> f = {
      alt::Poisson{5.0},          alt::Poisson{30.0},
      alt::Uniform{1},            alt::Uniform{4},
      alt::Binomial{10, 0.5},     alt::PoissonMixture{0.25, 1.0, 5.0},
      alt::PoissonDeltaZero{3.0, 0.1}, alt::DiscreteWeibull{0.5, 2.0},
      alt::DiscreteWeibull{0.9, 1.0}, alt::ZeroModifiedPoisson{1.0, 0.1},
      alt::ZeroTruncatedPoisson{2.0}, alt::AbsDiscreteNormal{0.0},
      alt::AbsDiscreteNormal{3.0}, alt::NegBinomial{2.0, 0.25},
      alt::NegBinomial{30.0, 0.9}, alt::ExpPoly{{0.5, 0.0, -0.2}}};
  return f;
}

}  // namespace

TEST(Sampling, MeansWithinFourStandardErrors) {
  std::uint64_t id = 0;
  for (const auto& spec : families()) {
    RandomStream rng(99, id++);
    const auto x = draw(spec, kDraws, rng);
    double m1 = 0.0, m2 = 0.0;
    for (std::int64_t k = 0; k < 400; ++k) {
      const double p = reference_pmf(spec, k);
      m1 += static_cast<double>(k) * p;
      m2 += static_cast<double>(k * k) * p;
    }
    const double se = std::sqrt((m2 - m1 * m1) / static_cast<double>(kDraws));
    EXPECT_NEAR(x.mean(), m1, 4.0 * se) << label(spec);
    EXPECT_NEAR(mean(spec), m1, 1e-8 * std::max(1.0, m1)) << label(spec);
  }
}

TEST(Sampling, KolmogorovDistance) {
  std::uint64_t id = 0;
  for (const auto& spec : families()) {
    RandomStream rng(7, id++);
    const auto x = draw(spec, kDraws, rng);
    double cdf = 0.0, worst = 0.0;
    std::int64_t below = 0;
    for (std::int64_t k = 0; k <= x.max(); ++k) {
      cdf += reference_pmf(spec, k);
      below += x.count(k);
      worst = std::max(worst, std::abs(static_cast<double>(below) / kDraws - cdf));
    }
    EXPECT_LT(worst, 0.01) << label(spec);
  }
}

TEST(Sampling, ExpPolyCellwise) {
  const alt::ExpPoly spec{{0.5, 0.0, -0.2}};
  RandomStream rng(2024);
  const auto x = draw(spec, kDraws, rng);
  const auto model = DiscreteModel::exppoly(spec.theta);
  EXPECT_GE(x.min(), 1);
  for (std::int64_t k = 1; k <= model.summation_limit(); ++k) {
    const double p = model.pmf(k);
    const double expected = p * kDraws;
    if (expected < 25) continue;
    const double se = std::sqrt(kDraws * p * (1 - p));
    EXPECT_NEAR(static_cast<double>(x.count(k)), expected, 3.0 * se) << "k=" << k;
  }
}

TEST(Sampling, SupportRestrictions) {
  RandomStream rng(4);
  EXPECT_EQ(draw(alt::ZeroTruncatedPoisson{2.0}, 20000, rng).count(0), 0);
  EXPECT_LE(draw(alt::Uniform{1}, 20000, rng).max(), 1);
  EXPECT_LE(draw(alt::Binomial{2, 0.5}, 20000, rng).max(), 2);
}

TEST(Sampling, UniformMean) {
  RandomStream rng(10);
  EXPECT_NEAR(draw(alt::Uniform{1}, kDraws, rng).mean(), 0.5, 0.01);
}

TEST(Sampling, InvalidSpecs) {
  RandomStream rng(0);
  EXPECT_THROW(draw(alt::Poisson{-1.0}, 5, rng), DomainError);
  EXPECT_THROW(draw(alt::PoissonMixture{1.5, 1.0, 2.0}, 5, rng), DomainError);
  EXPECT_THROW(draw(alt::DiscreteWeibull{1.0, 1.0}, 5, rng), DomainError);
  EXPECT_THROW(draw(alt::NegBinomial{1.0, 0.0}, 5, rng), DomainError);
  EXPECT_THROW(draw(alt::ExpPoly{{0.5, 0.1}}, 5, rng), DomainError);
}

TEST(Streams, Determinism) {
  const RandomStream root(42);
  auto a = substream(root, 7);
  auto b = substream(root, 7);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(a(), b());
  auto c = substream(substream(root, 3), 5);
  auto d = substream(substream(RandomStream(42), 3), 5);
  for (int i = 0; i < 100; ++i) EXPECT_EQ(c(), d());

  RandomStream r1(5), r2(5);
  const auto x = draw(alt::PoissonMixture{0.25, 1.0, 5.0}, 500, r1);
  const auto y = draw(alt::PoissonMixture{0.25, 1.0, 5.0}, 500, r2);
  EXPECT_TRUE(std::equal(x.values().begin(), x.values().end(), y.values().begin()));
}

TEST(Streams, NoCollisions) {
  const RandomStream root(0);
  std::unordered_set<std::uint64_t> seen;
  for (std::uint64_t i = 0; i < 10000; ++i) {
    auto s = substream(root, i);
    EXPECT_TRUE(seen.insert(s()).second) << i;
  }
  auto p = substream(root, 1);
  auto q = substream(root, 2);
  EXPECT_NE(p(), q());
}

TEST(Streams, SubstreamIgnoresEnginePosition) {
  RandomStream a(9);
  const RandomStream fresh(9);
  for (int i = 0; i < 10; ++i) a();
  auto s1 = substream(a, 4);
  auto s2 = substream(fresh, 4);
  EXPECT_EQ(s1(), s2());
}

TEST(Streams, UniformOpenInterval) {
  RandomStream rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = rng.uniform();
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}
