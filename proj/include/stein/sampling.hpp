#pragma once

// Random generation for the Poisson goodness-of-fit alternatives and the
// estimation studies.

#include <cstdint>
#include <string>
#include <variant>
#include <vector>

#include "stein/data.hpp"
#include "stein/random.hpp"

namespace stein {

namespace alt {

struct Poisson {
  double lambda;
};
// Uniform on {0, ..., m}.
struct Uniform {
  int m;
};
struct Binomial {
  int m;
  double q;
};
// q Po(lambda1) + (1-q) Po(lambda2)
struct PoissonMixture {
  double q;
  double lambda1;
  double lambda2;
};
// (1 - w0) Po(lambda) + w0 delta_0
struct PoissonDeltaZero {
  double lambda;
  double w0;
};
// P(X >= k) = q^(k^beta), k = 0, 1, ...
struct DiscreteWeibull {
  double q;
  double beta;
};
// P(X = 0) = pi; otherwise zero-truncated Po(lambda).
struct ZeroModifiedPoisson {
  double lambda;
  double pi;
};
struct ZeroTruncatedPoisson {
  double lambda;
};
// |Y| with Y = floor(N(mu, 1)), i.e. P(Y = k) = Phi(k + 1 - mu) - Phi(k - mu).
struct AbsDiscreteNormal {
  double mu;
};
struct NegBinomial {
  double r;
  double q;
};
struct ExpPoly {
  std::vector<double> theta;
};

}  // namespace alt

using AltDistSpec =
    std::variant<alt::Poisson, alt::Uniform, alt::Binomial, alt::PoissonMixture,
                 alt::PoissonDeltaZero, alt::DiscreteWeibull, alt::ZeroModifiedPoisson,
                 alt::ZeroTruncatedPoisson, alt::AbsDiscreteNormal, alt::NegBinomial, alt::ExpPoly>;

// Throws DomainError when parameters are outside the family's domain.
void validate(const AltDistSpec& spec);

// Row label in the style of the power table, e.g. "PP(0.25;1,5)".
std::string label(const AltDistSpec& spec);

// Analytic mean, used by the sampler self-checks.
double mean(const AltDistSpec& spec);

// n i.i.d. draws.
Sample draw(const AltDistSpec& spec, std::size_t n, RandomStream& rng);

// Single-variate samplers shared with the bootstrap.
std::int64_t draw_poisson(double lambda, RandomStream& rng);
std::vector<std::int64_t> draw_poisson(double lambda, std::size_t n, RandomStream& rng);

}  // namespace stein
