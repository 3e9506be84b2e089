#include "stein/sampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stein/error.hpp"
#include "stein/models.hpp"

namespace stein {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kSequentialSearchMaxLambda = 500.0;

bool positive_finite(double x) { return x > 0.0 && std::isfinite(x); }
bool open_unit(double x) { return x > 0.0 && x < 1.0; }

std::int64_t draw_zero_truncated_poisson(double lambda, RandomStream& rng) {
  for (;;) {
    const auto x = draw_poisson(lambda, rng);
    if (x > 0) return x;
  }
}

// Inversion by sequential search on the recursion p(k+1) = p(k) (r+k)/(k+1) (1-q).
std::int64_t draw_negbinomial(double r, double q, RandomStream& rng) {
  const double p0 = std::exp(r * std::log(q));
  if (p0 < 1e-250) {
    std::gamma_distribution<double> gamma(r, (1.0 - q) / q);
    return draw_poisson(gamma(rng), rng);
  }
  const double u = rng.uniform();
  std::int64_t k = 0;
  double p = p0;
  double cum = p;
  while (u > cum) {
    p *= (r + static_cast<double>(k)) / static_cast<double>(k + 1) * (1.0 - q);
    ++k;
    cum += p;
    if (p < 1e-300 && static_cast<double>(k) > r * (1.0 - q) / q) break;
  }
  return k;
}

std::int64_t draw_discrete_weibull(double q, double beta, RandomStream& rng) {
  // P(X >= k) = q^(k^beta)  =>  X = ceil((log U / log q)^(1/beta)) - 1
  const double v = std::pow(std::log(rng.uniform()) / std::log(q), 1.0 / beta);
  return std::max<std::int64_t>(0, static_cast<std::int64_t>(std::ceil(v)) - 1);
}

std::int64_t draw_abs_discrete_normal(double mu, RandomStream& rng) {
  std::normal_distribution<double> normal(mu, 1.0);
  return static_cast<std::int64_t>(std::llround(std::abs(std::floor(normal(rng)))));
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace

std::int64_t draw_poisson(double lambda, RandomStream& rng) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw DomainError("poisson: bad rate");
  if (lambda == 0.0) return 0;
  if (lambda > kSequentialSearchMaxLambda) {
    std::poisson_distribution<std::int64_t> dist(lambda);
    return dist(rng);
  }
  const double u = rng.uniform();
  std::int64_t k = 0;
  double p = std::exp(-lambda);
  double cum = p;
  while (u > cum) {
    ++k;
    p *= lambda / static_cast<double>(k);
    cum += p;
    if (p < 1e-300 && static_cast<double>(k) > lambda) break;
  }
  return k;
}

std::vector<std::int64_t> draw_poisson(double lambda, std::size_t n, RandomStream& rng) {
  std::vector<std::int64_t> out(n);
  for (auto& x : out) x = draw_poisson(lambda, rng);
  return out;
}

void validate(const AltDistSpec& spec) {
  std::visit(
      overloaded{
          [](const alt::Poisson& s) {
            if (!positive_finite(s.lambda)) throw DomainError("Po: lambda must be positive");
          },
          [](const alt::Uniform& s) {
            if (s.m < 1) throw DomainError("U: m must be >= 1");
          },
          [](const alt::Binomial& s) {
            if (s.m < 1 || !open_unit(s.q)) throw DomainError("Bin: need m >= 1, q in (0,1)");
          },
          [](const alt::PoissonMixture& s) {
            if (!open_unit(s.q) || !positive_finite(s.lambda1) || !positive_finite(s.lambda2))
              throw DomainError("PP: need q in (0,1) and positive rates");
          },
          [](const alt::PoissonDeltaZero& s) {
            if (!positive_finite(s.lambda) || !open_unit(s.w0))
              throw DomainError("Po-delta0: need lambda > 0, w0 in (0,1)");
          },
          [](const alt::DiscreteWeibull& s) {
            if (!open_unit(s.q) || !positive_finite(s.beta))
              throw DomainError("W: need q in (0,1), beta > 0");
          },
          [](const alt::ZeroModifiedPoisson& s) {
            if (!positive_finite(s.lambda) || !(s.pi >= 0.0 && s.pi < 1.0))
              throw DomainError("zmPo: need lambda > 0, q in [0,1)");
          },
          [](const alt::ZeroTruncatedPoisson& s) {
            if (!positive_finite(s.lambda)) throw DomainError("ztPo: lambda must be positive");
          },
          [](const alt::AbsDiscreteNormal& s) {
            if (!std::isfinite(s.mu)) throw DomainError("|N|: mu must be finite");
          },
          [](const alt::NegBinomial& s) {
            if (!positive_finite(s.r) || !open_unit(s.q))
              throw DomainError("NB: need r > 0, q in (0,1)");
          },
          [](const alt::ExpPoly& s) { DiscreteModel::exppoly(s.theta); },
      },
      spec);
}

std::string label(const AltDistSpec& spec) {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const alt::Poisson& s) { os << "Po(" << s.lambda << ")"; },
                 [&](const alt::Uniform& s) { os << "U{0.." << s.m << "}"; },
                 [&](const alt::Binomial& s) { os << "Bin(" << s.m << ";" << s.q << ")"; },
                 [&](const alt::PoissonMixture& s) {
                   os << "PP(" << s.q << ";" << s.lambda1 << ";" << s.lambda2 << ")";
                 },
                 [&](const alt::PoissonDeltaZero& s) {
                   os << "Po(" << s.lambda << ")d0(" << s.w0 << ")";
                 },
                 [&](const alt::DiscreteWeibull& s) { os << "W(" << s.q << ";" << s.beta << ")"; },
                 [&](const alt::ZeroModifiedPoisson& s) {
                   os << "zmPo(" << s.lambda << ";" << s.pi << ")";
                 },
                 [&](const alt::ZeroTruncatedPoisson& s) { os << "ztPo(" << s.lambda << ")"; },
                 [&](const alt::AbsDiscreteNormal& s) { os << "|N(" << s.mu << ";1)|"; },
                 [&](const alt::NegBinomial& s) { os << "NB(" << s.r << ";" << s.q << ")"; },
                 [&](const alt::ExpPoly& s) {
                   os << "EP(";
                   for (std::size_t i = 0; i < s.theta.size(); ++i)
                     os << (i ? ";" : "") << s.theta[i];
                   os << ")";
                 },
             },
             spec);
  return os.str();
}

double mean(const AltDistSpec& spec) {
  validate(spec);
  return std::visit(
      overloaded{
          [](const alt::Poisson& s) { return s.lambda; },
          [](const alt::Uniform& s) { return s.m / 2.0; },
          [](const alt::Binomial& s) { return s.m * s.q; },
          [](const alt::PoissonMixture& s) { return s.q * s.lambda1 + (1.0 - s.q) * s.lambda2; },
          [](const alt::PoissonDeltaZero& s) { return (1.0 - s.w0) * s.lambda; },
          [](const alt::DiscreteWeibull& s) {
            double acc = 0.0;
            for (int k = 1;; ++k) {
              const double t = std::pow(s.q, std::pow(k, s.beta));
              acc += t;
              if (t < 1e-17 * acc) break;
            }
            return acc;
          },
          [](const alt::ZeroModifiedPoisson& s) {
            return (1.0 - s.pi) * s.lambda / -std::expm1(-s.lambda);
          },
          [](const alt::ZeroTruncatedPoisson& s) { return s.lambda / -std::expm1(-s.lambda); },
          [](const alt::AbsDiscreteNormal& s) {
            double acc = 0.0;
            const auto centre = static_cast<std::int64_t>(std::llround(s.mu));
            for (std::int64_t k = centre - 60; k <= centre + 60; ++k) {
              const double p = normal_cdf(k + 1.0 - s.mu) - normal_cdf(k - s.mu);
              acc += std::abs(static_cast<double>(k)) * p;
            }
            return acc;
          },
          [](const alt::NegBinomial& s) { return s.r * (1.0 - s.q) / s.q; },
          [](const alt::ExpPoly& s) {
            const auto model = DiscreteModel::exppoly(s.theta);
            double acc = 0.0;
            for (std::int64_t k = 1; k <= model.summation_limit(); ++k)
              acc += static_cast<double>(k) * model.pmf(k);
            return acc;
          },
      },
      spec);
}

Sample draw(const AltDistSpec& spec, std::size_t n, RandomStream& rng) {
  if (n < 1) throw DomainError("draw: n must be >= 1");
  validate(spec);
  std::vector<std::int64_t> out(n);

  if (const auto* s = std::get_if<alt::ExpPoly>(&spec)) {
    // Inverse CDF on the truncated normalized table.
    const auto model = DiscreteModel::exppoly(s->theta);
    const std::int64_t last = model.summation_limit();
    std::vector<double> cdf;
    for (std::int64_t k = 1; k <= last; ++k) cdf.push_back(model.cdf(k));
    for (auto& x : out) {
      const double u = rng.uniform();
      const auto it = std::lower_bound(cdf.begin(), cdf.end(), u);
      x = 1 + std::min<std::int64_t>(it - cdf.begin(), last - 1);
    }
    return Sample(std::move(out));
  }

  for (auto& x : out) {
    x = std::visit(
        overloaded{
            [&](const alt::Poisson& s) { return draw_poisson(s.lambda, rng); },
            [&](const alt::Uniform& s) {
              const auto k = static_cast<std::int64_t>(rng.uniform() * (s.m + 1));
              return std::min<std::int64_t>(k, s.m);
            },
            [&](const alt::Binomial& s) {
              std::int64_t k = 0;
              for (int i = 0; i < s.m; ++i) k += rng.uniform() < s.q ? 1 : 0;
              return k;
            },
            [&](const alt::PoissonMixture& s) {
              return draw_poisson(rng.uniform() < s.q ? s.lambda1 : s.lambda2, rng);
            },
            [&](const alt::PoissonDeltaZero& s) {
              return rng.uniform() < s.w0 ? std::int64_t{0} : draw_poisson(s.lambda, rng);
            },
            [&](const alt::DiscreteWeibull& s) { return draw_discrete_weibull(s.q, s.beta, rng); },
            [&](const alt::ZeroModifiedPoisson& s) {
              return rng.uniform() < s.pi ? std::int64_t{0}
                                          : draw_zero_truncated_poisson(s.lambda, rng);
            },
            [&](const alt::ZeroTruncatedPoisson& s) {
              return draw_zero_truncated_poisson(s.lambda, rng);
            },
            [&](const alt::AbsDiscreteNormal& s) { return draw_abs_discrete_normal(s.mu, rng); },
            [&](const alt::NegBinomial& s) { return draw_negbinomial(s.r, s.q, rng); },
            [&](const alt::ExpPoly&) -> std::int64_t { return 0; },
        },
        spec);
  }
  return Sample(std::move(out));
}

}  // namespace stein
