#include "stein/characterize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "stein/error.hpp"

namespace stein {

namespace {

template <class T>
void finish(BasicIdentityResidual<T>& r) {
  r.sup_abs = 0.0;
  r.l2 = 0.0;
  for (std::size_t i = 0; i < r.lhs.size(); ++i) {
    const double d = std::abs(r.lhs[i] - r.rhs[i]);
    r.sup_abs = std::max(r.sup_abs, d);
    r.l2 += d * d;
  }
}

// Upper end of the summation range: the support bound, or the point where the
// remaining mass is below 1e-14.
std::int64_t upper_limit(const DiscreteModel& model, std::int64_t at_least) {
  return std::max(model.summation_limit(1e-14), at_least);
}

std::int64_t clip_to_support(const DiscreteModel& model, std::int64_t k) {
  const auto& spt = model.support();
  return spt.upper ? std::min(k, *spt.upper) : k;
}

// Identity terms -score(l) w(l) and their suffix sums over [lo, hi].
IdentityResidual pmf_residual_from_weights(const DiscreteModel& model,
                                           const std::vector<double>& weights,
                                           std::int64_t lo, std::int64_t k_max) {
  const std::size_t count = weights.size();
  std::vector<double> suffix(count + 1, 0.0);
  for (std::size_t i = count; i-- > 0;) {
    const auto l = lo + static_cast<std::int64_t>(i);
    suffix[i] = suffix[i + 1] + (-model.score_forward(l)) * weights[i];
  }
  IdentityResidual r;
  for (std::int64_t k = lo; k <= k_max; ++k) {
    const auto i = static_cast<std::size_t>(k - lo);
    r.at.push_back(static_cast<double>(k));
    r.lhs.push_back(i < count ? weights[i] : 0.0);
    r.rhs.push_back(i < count ? suffix[i] : 0.0);
  }
  finish(r);
  return r;
}

}  // namespace

double empirical_pmf(const Sample& sample, std::int64_t k) {
  return static_cast<double>(sample.count(k)) / sample.n();
}

double empirical_expectation_side(const Sample& sample, const DiscreteModel& model,
                                  std::int64_t k) {
  double acc = 0.0;
  for (const auto& level : sample.levels()) {
    if (!model.support().contains(level.value))
      throw DomainError("empirical_expectation_side: sample value outside the model support");
    if (level.value >= k)
      acc += -model.score_forward(level.value) * static_cast<double>(level.count);
  }
  return acc / sample.n();
}

IdentityResidual pmf_identity_residual(const DiscreteModel& model, std::int64_t k_max) {
  const std::int64_t lo = model.support().lower;
  k_max = clip_to_support(model, k_max);
  const std::int64_t hi = upper_limit(model, k_max);
  std::vector<double> weights;
  for (std::int64_t l = lo; l <= hi; ++l) weights.push_back(model.pmf(l));
  return pmf_residual_from_weights(model, weights, lo, k_max);
}

IdentityResidual pmf_identity_residual(const DiscreteModel& law, const DiscreteModel& model,
                                       std::int64_t k_max) {
  const auto& spt = model.support();
  const std::int64_t lo = spt.lower;
  k_max = clip_to_support(model, k_max);
  std::int64_t hi = std::max(law.summation_limit(1e-14), k_max);
  if (spt.upper) hi = std::min(hi, *spt.upper);

  std::vector<double> weights;
  double mass = 0.0;
  for (std::int64_t l = lo; l <= hi; ++l) {
    weights.push_back(law.pmf(l));
    mass += weights.back();
  }
  if (!(mass > 0.0)) throw DomainError("pmf_identity_residual: law puts no mass on the support");
  for (double& w : weights) w /= mass;
  return pmf_residual_from_weights(model, weights, lo, k_max);
}

IdentityResidual cdf_identity_residual(const DiscreteModel& model, std::int64_t k_max) {
  const std::int64_t lo = model.support().lower;
  k_max = clip_to_support(model, k_max);
  const std::int64_t hi = upper_limit(model, k_max);

  std::vector<double> weight;  // -score(l) p(l)
  std::vector<double> pmf;
  for (std::int64_t l = lo; l <= hi; ++l) {
    pmf.push_back(model.pmf(l));
    weight.push_back(-model.score_forward(l) * pmf.back());
  }

  IdentityResidual r;
  double cdf = 0.0;
  for (std::int64_t k = lo; k <= k_max; ++k) {
    cdf += pmf[static_cast<std::size_t>(k - lo)];
    double rhs = 0.0;
    for (std::int64_t l = lo; l <= hi; ++l)
      rhs += weight[static_cast<std::size_t>(l - lo)] * static_cast<double>(std::min(l, k) - lo + 1);
    r.at.push_back(static_cast<double>(k));
    r.lhs.push_back(cdf);
    r.rhs.push_back(rhs);
  }
  finish(r);
  return r;
}

ComplexIdentityResidual cf_identity_residual(const DiscreteModel& model,
                                             const std::vector<double>& t_grid) {
  using cd = std::complex<double>;
  const std::int64_t lo = model.support().lower;
  const std::int64_t hi = upper_limit(model, lo);

  ComplexIdentityResidual r;
  for (double t : t_grid) {
    const cd denom = 1.0 - std::polar(1.0, t);
    const bool singular = std::abs(denom) < 1e-6;
    const cd head = std::polar(1.0, t * static_cast<double>(lo));
    cd lhs = 0.0;
    cd rhs = 0.0;
    cd partial = 0.0;  // sum_{l=L}^{x} e^{itl}, used at the removable singularity
    for (std::int64_t x = lo; x <= hi; ++x) {
      const double p = model.pmf(x);
      const cd e = std::polar(1.0, t * static_cast<double>(x));
      lhs += e * p;
      partial += e;
      const cd g = singular ? partial
                            : (head - std::polar(1.0, t * static_cast<double>(x + 1))) / denom;
      rhs += -model.score_forward(x) * g * p;
    }
    r.at.push_back(t);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
  }
  finish(r);
  return r;
}

IdentityResidual pgf_identity_residual(const DiscreteModel& model,
                                       const std::vector<double>& s_grid) {
  const auto& spt = model.support();
  if (spt.lower != 0 || spt.finite())
    throw UnsupportedOperation("pgf_identity_residual: requires support N_0");
  const std::int64_t hi = upper_limit(model, 0);

  IdentityResidual r;
  for (double s : s_grid) {
    if (!(s >= 0.0 && s < 1.0)) throw DomainError("pgf_identity_residual: s must lie in [0,1)");
    double lhs = 0.0;
    double rhs = 0.0;
    double power = 1.0;  // s^x
    for (std::int64_t x = 0; x <= hi; ++x) {
      const double p = model.pmf(x);
      lhs += power * p;
      rhs += -model.score_forward(x) * (1.0 - power * s) / (1.0 - s) * p;
      power *= s;
    }
    r.at.push_back(s);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
  }
  finish(r);
  return r;
}

IdentityResidual backward_identity_residual(const DiscreteModel& model) {
  const auto& spt = model.support();
  if (!spt.finite())
    throw UnsupportedOperation("backward_identity_residual: requires a finite support");
  IdentityResidual r;
  double acc = 0.0;
  for (std::int64_t k = spt.lower; k <= *spt.upper; ++k) {
    const double p = model.pmf(k);
    acc += model.score_backward(k) * p;
    r.at.push_back(static_cast<double>(k));
    r.lhs.push_back(p);
    r.rhs.push_back(acc);
  }
  finish(r);
  return r;
}

namespace {

double stein_operator_sum(const DiscreteModel& model, const IntFunction& f,
                          const IntFunction& weights, std::int64_t lo, std::int64_t hi) {
  const auto& spt = model.support();
  double acc = 0.0;
  for (std::int64_t k = lo; k <= hi; ++k) {
    const double w = weights(k);
    if (w == 0.0) continue;
    const bool at_upper = spt.upper && k == *spt.upper;
    const double f_next = at_upper ? 0.0 : f(k + 1);
    acc += (f_next - f(k) + model.score_forward(k) * f_next) * w;
  }
  return acc;
}

}  // namespace

double stein_operator_expectation(const DiscreteModel& model, const IntFunction& f,
                                  const DiscreteModel& weights) {
  const auto& spt = model.support();
  const auto& wspt = weights.support();
  if (wspt.lower < spt.lower || (spt.upper && (!wspt.upper || *wspt.upper > *spt.upper)))
    throw DomainError("stein_operator_expectation: weights not supported inside the model support");
  return stein_operator_sum(
      model, f, [&](std::int64_t k) { return weights.pmf(k); }, wspt.lower,
      weights.summation_limit(1e-14));
}

double stein_operator_expectation(const DiscreteModel& model, const IntFunction& f,
                                  const IntFunction& weights) {
  return stein_operator_sum(model, f, weights, model.support().lower,
                            model.summation_limit(1e-14));
}

IntFunction make_fm(const DiscreteModel& model, std::int64_t m) {
  const std::int64_t lo = model.support().lower;
  if (m < lo) throw DomainError("make_fm: m below the support");
  const double c = model.cdf(m);
  const std::int64_t hi = model.summation_limit(1e-14);
  return [model, m, c, lo, hi](std::int64_t k) -> double {
    if (k <= lo || !model.support().contains(k)) return 0.0;
    const double p = model.pmf(k);
    if (p == 0.0) return 0.0;
    // sum_{l<k} (1{l<=m} - c) p(l) = (1 - c) P(k-1) when k-1 <= m, else c (1 - P(k-1)).
    if (k - 1 <= m) return (1.0 - c) * model.cdf(k - 1) / p;
    double tail = 0.0;
    for (std::int64_t l = std::max(k, hi); l >= k; --l) tail += model.pmf(l);
    return c * tail / p;
  };
}

}  // namespace stein
