#pragma once

// Both sides of the Stein-type characterization identities, evaluated
// numerically. For the true law every residual vanishes up to truncation and
// rounding; for a different law it does not.

#include <complex>
#include <cstdint>
#include <functional>
#include <vector>

#include "stein/data.hpp"
#include "stein/models.hpp"

namespace stein {

template <class T>
struct BasicIdentityResidual {
  std::vector<double> at;  // k for integer identities, t or s for transforms
  std::vector<T> lhs;
  std::vector<T> rhs;
  double sup_abs = 0.0;  // max |lhs - rhs|
  double l2 = 0.0;       // sum |lhs - rhs|^2
};

using IdentityResidual = BasicIdentityResidual<double>;
using ComplexIdentityResidual = BasicIdentityResidual<std::complex<double>>;

// (1/n) #{j : X_j = k}
double empirical_pmf(const Sample& sample, std::int64_t k);

// (1/n) sum_j -score(X_j) 1{X_j >= k}. Throws DomainError if a value lies
// outside the model support.
double empirical_expectation_side(const Sample& sample, const DiscreteModel& model,
                                  std::int64_t k);

// lhs(k) = p(k), rhs(k) = sum_{l >= k} -score(l) p(l), for k = L..k_max.
IdentityResidual pmf_identity_residual(const DiscreteModel& model, std::int64_t k_max);

// Same identity with the law of X given by `law` (conditioned on the support
// of `model`) and the score taken from `model`.
IdentityResidual pmf_identity_residual(const DiscreteModel& law, const DiscreteModel& model,
                                       std::int64_t k_max);

// lhs(k) = P(k), rhs(k) = sum_l -score(l) (min{l,k} - L + 1) p(l).
IdentityResidual cdf_identity_residual(const DiscreteModel& model, std::int64_t k_max);

// lhs(t) = E e^{itX}, rhs(t) = E[-score(X) (e^{itL} - e^{it(X+1)}) / (1 - e^{it})].
// At t = 0 mod 2pi the geometric factor is summed directly.
ComplexIdentityResidual cf_identity_residual(const DiscreteModel& model,
                                             const std::vector<double>& t_grid);

// lhs(s) = E s^X, rhs(s) = E[-score(X) (1 - s^{X+1}) / (1 - s)], s in [0,1).
// Requires support N_0 with infinite upper bound.
IdentityResidual pgf_identity_residual(const DiscreteModel& model,
                                       const std::vector<double>& s_grid);

// lhs(k) = p(k), rhs(k) = sum_{l <= k} backward_score(l) p(l). Finite support only.
IdentityResidual backward_identity_residual(const DiscreteModel& model);

using IntFunction = std::function<double(std::int64_t)>;

// sum_k (Delta+ f(k) + score(k) f(k+1)) w(k) over the model support (with
// f(R+1) = 0 at a finite upper bound R). `weights` must be a pmf supported
// inside the model support.
double stein_operator_expectation(const DiscreteModel& model, const IntFunction& f,
                                  const DiscreteModel& weights);
double stein_operator_expectation(const DiscreteModel& model, const IntFunction& f,
                                  const IntFunction& weights);

// f_m(k) = (1/p(k)) sum_{l=L}^{k-1} (1{l <= m} - P(Z <= m)) p(l), with f_m(L) = 0.
IntFunction make_fm(const DiscreteModel& model, std::int64_t m);

}  // namespace stein
