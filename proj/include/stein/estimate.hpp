#pragma once

// Minimum-distance estimation for the negative binomial and discrete
// exponential-polynomial families, with the moment and homogeneous-divergence
// baselines.

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "stein/data.hpp"
#include "stein/optimize.hpp"
#include "stein/random.hpp"

namespace stein {

struct EstimateResult {
  std::vector<double> params;
  double objective = 0.0;
  bool converged = false;
  int iterations = 0;
  bool in_bounds = true;
  std::string status;
};

// (1/n^2) double-sum form of sum_k (e_n(k; r, q) - rho_n(k))^2.
// Throws DomainError unless r > 0 and 0 < q < 1.
double s_nb(const Sample& sample, double r, double q);

struct NbOptions {
  double r_lower = 1e-4;
  double r_upper = 1e3;
  double q_lower = 1e-4;
  double q_upper = 1.0 - 1e-4;
  int n_starts = 1;  // best objective over this many random starts
};

// Starts r ~ U(1,3), q ~ U(0.1,0.9). params = (r, q).
EstimateResult estimate_nb(const Sample& sample, const OptimizerConfig& opt, RandomStream rng,
                           const NbOptions& options = {});

struct MomentEstimates {
  double r_tilde = 0.0;  // +inf when mean == variance
  double q_tilde = 0.0;
  bool underdispersed = false;  // mean >= variance
};

// q = mean / var, r = mean^2 / (var - mean). Throws DegenerateSample when the
// variance is zero.
MomentEstimates moment_estimators_nb(const Sample& sample);

// sum_{k>=1} (e_n(k; theta) - rho_n(k))^2 for the exponential-polynomial
// model with theta = (theta_1, ..., theta_d). Uses the closed double sum when
// d = 3 and theta_2 = 0. Throws DomainError if the sample contains 0, d < 2 or
// theta_d >= 0.
double s_pe(const Sample& sample, const std::vector<double>& theta);

// 1-based index of a pinned component and its value.
using FixedParams = std::vector<std::pair<int, double>>;

struct ExpPolyOptions {
  double last_upper = -1e-6;
  int n_starts = 1;
};

// Minimizes s_pe over the free components. Starts theta_1 ~ U(-1,1),
// theta_d ~ U(-1,0), other free components ~ U(-0.1,0.1). params = full theta.
EstimateResult estimate_exppoly(const Sample& sample, int d, const FixedParams& fixed,
                                const OptimizerConfig& opt, RandomStream rng,
                                const ExpPolyOptions& options = {});

struct HdConstants {
  double alpha = 1.1;
  double alpha_p = 0.1;
  double gamma = 1.0 / 9.0;
};

// Empirically localized homogeneous divergence with unnormalized
// q(k) = exp(log_scale + sum_i theta_i k^i). Throws DomainError unless
// alpha > alpha_p > 0 and gamma > 0.
double hd_objective(const Sample& sample, const std::vector<double>& theta,
                    const HdConstants& constants = {}, double log_scale = 0.0);

EstimateResult estimate_exppoly_hd(const Sample& sample, int d, const FixedParams& fixed,
                                   const OptimizerConfig& opt, const HdConstants& constants,
                                   RandomStream rng, const ExpPolyOptions& options = {});

}  // namespace stein
