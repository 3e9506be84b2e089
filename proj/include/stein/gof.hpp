#pragma once

// Goodness-of-fit tests for the Poisson family, calibrated by the parametric
// bootstrap.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "stein/data.hpp"
#include "stein/random.hpp"
#include "stein/sampling.hpp"

namespace stein {

enum class GofStatistic { TnPo, BH, SR, RU, K1, K2, KS, CM };

inline constexpr GofStatistic kAllStatistics[] = {
    GofStatistic::TnPo, GofStatistic::BH, GofStatistic::SR, GofStatistic::RU,
    GofStatistic::K1,   GofStatistic::K2, GofStatistic::KS, GofStatistic::CM};

// Lower-case CLI name ("tnpo", "bh", ...).
std::string to_string(GofStatistic stat);
// Throws ConfigError on an unknown name.
GofStatistic parse_statistic(const std::string& name);

struct BootstrapConfig {
  std::size_t B = 500;
  double alpha = 0.05;
  std::uint64_t seed = 0;
};

struct TestReport {
  double statistic = 0.0;
  double critical_value = 0.0;
  bool reject = false;  // statistic > critical_value
  std::optional<std::vector<double>> replicates;
};

// sum_k (e_n(k) - rho_n(k))^2 via the finite double-sum representation with
// lambda_hat = sample mean.
double tn_po(const Sample& sample);

double bh(const Sample& sample);
double sr(const Sample& sample);
// Throws DegenerateSample when the sample mean is zero.
double ru(const Sample& sample);
double k1(const Sample& sample);
double k2(const Sample& sample);
double ks(const Sample& sample);
double cm(const Sample& sample);

// Any of the eight statistics, including TnPo.
double competitor(GofStatistic stat, const Sample& sample);

// Mean-distance CDF estimate M_n(j) for j = 0..last from the empirical mean
// distances m_k = (1/n) sum_i |X_i - k| and the Poisson relation
// m_k = (k - lambda)(2 F(k-1) - 1) + 2k p(k). M(j) = M(j-1) + the increment
// solved at k = j + 1 (energy package indexing), clamped to [0, 1].
std::vector<double> mean_distance_cdf(const Sample& sample, std::int64_t last);

// c* = T_(k) + (1 - alpha)(T_(k+1) - T_(k)) with k = floor((1 - alpha) B).
// Throws ConfigError if k = 0 or k + 1 > B.
double interpolated_critical_value(std::vector<double> replicates, double alpha);

struct BootstrapResult {
  double c_star = 0.0;
  std::vector<double> replicates;  // in replicate order
};

// Draws B Po(lambda_hat) samples of size n; replicate b uses substream(rng, b).
BootstrapResult bootstrap_critical_value(const Sample& sample, GofStatistic stat,
                                         const BootstrapConfig& cfg, const RandomStream& rng);

TestReport run_test(const Sample& sample, GofStatistic stat, const BootstrapConfig& cfg,
                    const RandomStream& rng);
// Uses RandomStream(cfg.seed).
TestReport run_test(const Sample& sample, GofStatistic stat, const BootstrapConfig& cfg);

// Several statistics against one shared set of bootstrap samples. Each entry
// equals the corresponding single-statistic run_test.
std::vector<TestReport> run_tests(const Sample& sample, std::span<const GofStatistic> stats,
                                  const BootstrapConfig& cfg, const RandomStream& rng,
                                  bool keep_replicates = false);

struct RejectionSummary {
  std::vector<double> rates;  // per statistic, fraction of reps rejected
  std::size_t reps = 0;
  std::size_t degenerate = 0;  // reps with an all-zero sample (never rejected)
};

// Monte Carlo rejection rates; rep r draws its data from substream(substream(rng, r), 0)
// and bootstraps from substream(substream(rng, r), 1).
RejectionSummary rejection_rates(const AltDistSpec& alt, std::size_t n, std::size_t reps,
                                 std::span<const GofStatistic> stats, const BootstrapConfig& cfg,
                                 const RandomStream& rng, unsigned workers = 1);

double rejection_rate(const AltDistSpec& alt, std::size_t n, std::size_t reps, GofStatistic stat,
                      const BootstrapConfig& cfg, const RandomStream& rng, unsigned workers = 1);

}  // namespace stein
