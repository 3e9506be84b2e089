#pragma once

// Discrete distribution families with connected integer support.
//
// Every model exposes the forward score ratio p(k+1)/p(k) - 1 in closed form.
// The score never involves the normalizing constant, which for the
// exponential-polynomial family is computed lazily and only when a
// normalized quantity (pmf, cdf) is requested.

#include <cstdint>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace stein {

struct SupportRange {
  std::int64_t lower = 0;
  std::optional<std::int64_t> upper;  // nullopt means +infinity

  bool finite() const noexcept { return upper.has_value(); }
  bool contains(std::int64_t k) const noexcept {
    return k >= lower && (!upper || k <= *upper);
  }
};

namespace family {

struct Poisson {
  double lambda;
};

struct NegBinomial {
  double r;
  double q;
};

struct Binomial {
  int m;
  double q;
};

// Uniform on {1, ..., m}.
struct Uniform {
  int m;
};

// Grand-canonical Gibbs measure, p(k) proportional to
// exp((mu N(k) - V(k)) / (kappa T)).
//
// Finite systems list energies and particle numbers for states 1..S.
// Infinite systems supply callbacks plus a truncation bound that is used
// wherever a normalized quantity is summed.
struct Gibbs {
  std::map<std::int64_t, double> energies;
  std::map<std::int64_t, std::int64_t> particles;
  double mu = 0.0;
  double temperature = 1.0;
  double kappa = 1.0;

  std::function<double(std::int64_t)> energy_fn;
  std::function<std::int64_t(std::int64_t)> particles_fn;
  std::int64_t truncation = 0;

  bool infinite() const noexcept { return static_cast<bool>(energy_fn); }
};

// p(k) proportional to exp(theta_1 k + ... + theta_d k^d) on k >= 1.
struct ExpPoly {
  std::vector<double> theta;
};

}  // namespace family

using Family = std::variant<family::Poisson, family::NegBinomial, family::Binomial,
                            family::Uniform, family::Gibbs, family::ExpPoly>;

// log q(k) = sum_i theta_i k^i for the exponential-polynomial family.
double exppoly_log_weight(const std::vector<double>& theta, double k);

// Exponent of the ratio q(k+1)/q(k), sum_i theta_i ((k+1)^i - k^i).
double exppoly_log_ratio(const std::vector<double>& theta, double k);

// Number of times an exponential-polynomial normalizer has been computed in
// this process. Estimators must never move this counter.
std::uint64_t exppoly_normalizer_evaluations() noexcept;

class DiscreteModel {
 public:
  // Validates parameters and the support; throws DomainError on violation.
  explicit DiscreteModel(Family family);

  static DiscreteModel poisson(double lambda);
  static DiscreteModel negbinomial(double r, double q);
  static DiscreteModel binomial(int m, double q);
  static DiscreteModel uniform(int m);
  static DiscreteModel exppoly(std::vector<double> theta);
  static DiscreteModel gibbs(family::Gibbs g);

  const Family& family() const noexcept { return family_; }
  const SupportRange& support() const noexcept { return support_; }
  std::string name() const;

  // Delta+ p(k) / p(k). At a finite upper bound R the value is -1
  // (p(R+1) = 0).
  double score_forward(std::int64_t k) const;

  // Delta- p(k) / p(k) = 1 - p(k-1)/p(k); +1 at the lower bound. Requires a
  // finite upper bound.
  double score_backward(std::int64_t k) const;

  // Normalized probability; zero outside the support.
  double pmf(std::int64_t k) const;
  double cdf(std::int64_t k) const;

  // Largest k that normalized sums need to visit: the finite upper bound, the
  // Gibbs truncation, or the smallest K with P(K) >= 1 - tail_mass.
  std::int64_t summation_limit(double tail_mass = 1e-14) const;

 private:
  struct Table;  // normalized pmf table for families without closed forms

  const Table& table() const;
  double pmf_closed_form(std::int64_t k) const;

  Family family_;
  SupportRange support_;
  std::shared_ptr<Table> table_;
};

struct ConditionReport {
  double sup_value = 0.0;     // max over L <= k <= k_max of the (C2) ratio
  double limsup_proxy = 0.0;  // max of |score (1-P(k)) / p(k+1)| over the last ten k
  bool stabilized = false;
  std::int64_t evaluated_to = 0;
};

// Numeric diagnostic for the (C2) regularity condition. Uses score ratios
// only, so it works for non-normalized families and far into the tail.
ConditionReport check_c2(const DiscreteModel& model, std::int64_t k_max);

}  // namespace stein
