#include "stein/gof.hpp"

#include <algorithm>
#include <cmath>

#include "stein/error.hpp"
#include "stein/parallel.hpp"

namespace stein {

namespace {

// Poisson(lambda_hat) fit of a sample: pmf / cdf tables up to
// max(M, quantile(1 - 1e-10)) and the empirical cdf on 0..M.
struct PoissonFit {
  const Sample& sample;
  double lambda;
  std::int64_t max;
  std::vector<double> pmf;
  std::vector<double> cdf;
  std::vector<double> ecdf;

  explicit PoissonFit(const Sample& s) : sample(s), lambda(s.mean()), max(s.max()) {
    std::int64_t j = 0;
    double cum = 0.0;
    const bool recursive = lambda < 600.0;
    double p = std::exp(-lambda);
    for (;; ++j) {
      if (j > 0) {
        p = recursive ? p * lambda / static_cast<double>(j)
                      : std::exp(static_cast<double>(j) * std::log(lambda) - lambda -
                                 std::lgamma(static_cast<double>(j) + 1.0));
      }
      cum += p;
      pmf.push_back(p);
      cdf.push_back(std::min(cum, 1.0));
      if (j >= max && (cum >= 1.0 - 1e-10 || lambda == 0.0)) break;
    }
    ecdf.assign(static_cast<std::size_t>(max) + 1, 0.0);
    for (const auto& l : s.levels()) ecdf[static_cast<std::size_t>(l.value)] += static_cast<double>(l.count);
    double acc = 0.0;
    for (double& e : ecdf) {
      acc += e;
      e = acc / s.n();
    }
  }

  double P(std::int64_t j) const { return cdf[static_cast<std::size_t>(j)]; }
  double p(std::int64_t j) const { return pmf[static_cast<std::size_t>(j)]; }
  double F(std::int64_t j) const { return ecdf[static_cast<std::size_t>(j)]; }
};

double tn_po_impl(const PoissonFit& fit) {
  const double lam = fit.lambda;
  const auto levels = fit.sample.levels();
  double acc = 0.0;
  for (const auto& a : levels) {
    const double xj = static_cast<double>(a.value);
    for (const auto& b : levels) {
      const double xl = static_cast<double>(b.value);
      double term;
      if (a.value >= b.value)
        term = (1.0 - lam / (xj + 1.0)) * (xl - 1.0 - lam);
      else
        term = (xj + 1.0 - lam) * (1.0 - lam / (xl + 1.0));
      if (a.value == b.value) term += 1.0;
      acc += static_cast<double>(a.count) * static_cast<double>(b.count) * term;
    }
  }
  return acc / (fit.sample.n() * fit.sample.n());
}

double bh_impl(const PoissonFit& fit) {
  const double lam = fit.lambda;
  const double n = fit.sample.n();
  const auto levels = fit.sample.levels();
  double acc = 0.0;
  for (const auto& a : levels) {
    for (const auto& b : levels) {
      const double xi = static_cast<double>(a.value);
      const double xj = static_cast<double>(b.value);
      // X_i X_j / (X_i + X_j - 1) vanishes whenever either value is zero.
      const double cross = (a.value == 0 || b.value == 0) ? 0.0 : xi * xj / (xi + xj - 1.0);
      acc += static_cast<double>(a.count) * static_cast<double>(b.count) *
             (lam * lam / (xi + xj + 1.0) + cross);
    }
  }
  const double zeros = static_cast<double>(fit.sample.count(0));
  return acc / n - lam * (n - zeros * zeros / n);
}

double sr_impl(const PoissonFit& fit) {
  const auto last = static_cast<std::int64_t>(fit.pmf.size()) - 1;
  const auto mhat = mean_distance_cdf(fit.sample, last);
  double acc = 0.0;
  for (std::int64_t j = 0; j <= last; ++j) {
    const double d = mhat[static_cast<std::size_t>(j)] - fit.P(j);
    acc += d * d * fit.p(j);
  }
  return fit.sample.n() * acc;
}

// Integral of t^x e^{lambda (t - 1)} over [0, 1] as the positive series
// e^{-lambda} sum_m lambda^m / (m! (x + m + 1)).
double ru_cross_series(std::int64_t x, double lambda) {
  const double lx = static_cast<double>(x);
  double acc = 0.0;
  for (std::int64_t m = 0;; ++m) {
    const double md = static_cast<double>(m);
    const double term =
        std::exp(md * std::log(lambda) - lambda - std::lgamma(md + 1.0)) / (lx + md + 1.0);
    acc += term;
    if (md > lambda && term < 1e-17 * acc) break;
  }
  return acc;
}

// (-1)^x x! (1 - e^{-l}) / l^{x+1} + sum_{j=1}^{x} (-1)^{j+1} x! / ((x-j+1)! l^j),
// summed in log space with sign tracking.
double ru_cross_term(std::int64_t x, double lambda) {
  const double lx = static_cast<double>(x);
  const double log_lambda = std::log(lambda);
  const double log_fact = std::lgamma(lx + 1.0);
  std::vector<std::pair<double, double>> terms;  // (log magnitude, sign)
  terms.emplace_back(log_fact + std::log(-std::expm1(-lambda)) - (lx + 1.0) * log_lambda,
                     x % 2 == 0 ? 1.0 : -1.0);
  for (std::int64_t j = 1; j <= x; ++j) {
    const double jd = static_cast<double>(j);
    terms.emplace_back(log_fact - std::lgamma(lx - jd + 2.0) - jd * log_lambda,
                       j % 2 == 1 ? 1.0 : -1.0);
  }
  double top = -INFINITY;
  for (const auto& t : terms) top = std::max(top, t.first);
  double acc = 0.0;
  for (const auto& t : terms) acc += t.second * std::exp(t.first - top);

  // The true value lies in [e^{-l}/(x+1), 1/(x+1)]; if the summands dwarf
  // it, cancellation has eaten the digits.
  const double scale = std::exp(-lambda) / (lx + 1.0);
  if (top > 700.0 || std::exp(top) > 1e8 * scale) return ru_cross_series(x, lambda);
  return acc * std::exp(top);
}

double ru_impl(const PoissonFit& fit) {
  const double lam = fit.lambda;
  if (!(lam > 0.0)) throw DegenerateSample("RU: sample mean is zero");
  const double n = fit.sample.n();
  const auto levels = fit.sample.levels();
  double pair_sum = 0.0;
  for (const auto& a : levels)
    for (const auto& b : levels)
      pair_sum += static_cast<double>(a.count) * static_cast<double>(b.count) /
                  (static_cast<double>(a.value + b.value) + 1.0);
  double cross = 0.0;
  for (const auto& a : levels) cross += static_cast<double>(a.count) * ru_cross_term(a.value, lam);
  return pair_sum / n + n * -std::expm1(-2.0 * lam) / (2.0 * lam) - 2.0 * cross;
}

double k1_impl(const PoissonFit& fit) {
  double abs_sum = 0.0;
  double tail_sum = 0.0;
  for (std::int64_t j = 0; j <= fit.max; ++j) {
    abs_sum += std::abs(fit.F(j) - fit.P(j));
    tail_sum += 1.0 - fit.P(j);
  }
  return std::sqrt(fit.sample.n()) * (abs_sum + fit.lambda - tail_sum);
}

double k2_impl(const PoissonFit& fit) {
  double best = 0.0;
  double partial = 0.0;
  for (std::int64_t k = 1; k <= fit.max; ++k) {
    partial += fit.F(k - 1) - fit.P(k - 1);
    best = std::max(best, std::abs(partial));
  }
  return std::sqrt(fit.sample.n()) * best;
}

double ks_impl(const PoissonFit& fit) {
  double best = 0.0;
  for (std::int64_t k = 0; k <= fit.max; ++k) best = std::max(best, std::abs(fit.F(k) - fit.P(k)));
  return std::sqrt(fit.sample.n()) * best;
}

double cm_impl(const PoissonFit& fit) {
  const double n = fit.sample.n();
  double acc = 0.0;
  for (const auto& l : fit.sample.levels()) {
    const double d = fit.F(l.value) - fit.P(l.value);
    acc += d * d * static_cast<double>(l.count) / n;
  }
  return n * acc;
}

double evaluate(GofStatistic stat, const PoissonFit& fit) {
  switch (stat) {
    case GofStatistic::TnPo: return tn_po_impl(fit);
    case GofStatistic::BH: return bh_impl(fit);
    case GofStatistic::SR: return sr_impl(fit);
    case GofStatistic::RU: return ru_impl(fit);
    case GofStatistic::K1: return k1_impl(fit);
    case GofStatistic::K2: return k2_impl(fit);
    case GofStatistic::KS: return ks_impl(fit);
    case GofStatistic::CM: return cm_impl(fit);
  }
  throw ConfigError("unknown statistic");
}

// Bootstrap replicates that come out all zero take the lambda -> 0 limit of
// each statistic, which is 0 for all eight.
double evaluate_replicate(GofStatistic stat, const PoissonFit& fit) {
  if (fit.max == 0) return 0.0;
  return evaluate(stat, fit);
}

std::size_t order_index(std::size_t B, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("bootstrap: alpha must lie in (0,1)");
  return static_cast<std::size_t>(std::floor((1.0 - alpha) * static_cast<double>(B) + 1e-9));
}

void check_config(const BootstrapConfig& cfg) {
  if (cfg.B < 2) throw ConfigError("bootstrap: B must be >= 2");
  const std::size_t k = order_index(cfg.B, cfg.alpha);
  if (k < 1 || k + 1 > cfg.B)
    throw ConfigError("bootstrap: k = floor((1-alpha)B) must satisfy 1 <= k < B");
}

}  // namespace

std::string to_string(GofStatistic stat) {
  switch (stat) {
    case GofStatistic::TnPo: return "tnpo";
    case GofStatistic::BH: return "bh";
    case GofStatistic::SR: return "sr";
    case GofStatistic::RU: return "ru";
    case GofStatistic::K1: return "k1";
    case GofStatistic::K2: return "k2";
    case GofStatistic::KS: return "ks";
    case GofStatistic::CM: return "cm";
  }
  return "?";
}

GofStatistic parse_statistic(const std::string& name) {
  for (auto s : kAllStatistics)
    if (to_string(s) == name) return s;
  throw ConfigError("unknown statistic '" + name + "'");
}

double tn_po(const Sample& sample) { return tn_po_impl(PoissonFit(sample)); }
double bh(const Sample& sample) { return bh_impl(PoissonFit(sample)); }
double sr(const Sample& sample) { return sr_impl(PoissonFit(sample)); }
double ru(const Sample& sample) { return ru_impl(PoissonFit(sample)); }
double k1(const Sample& sample) { return k1_impl(PoissonFit(sample)); }
double k2(const Sample& sample) { return k2_impl(PoissonFit(sample)); }
double ks(const Sample& sample) { return ks_impl(PoissonFit(sample)); }
double cm(const Sample& sample) { return cm_impl(PoissonFit(sample)); }

double competitor(GofStatistic stat, const Sample& sample) {
  return evaluate(stat, PoissonFit(sample));
}

std::vector<double> mean_distance_cdf(const Sample& sample, std::int64_t last) {
  const double lam = sample.mean();
  auto mean_distance = [&](std::int64_t k) {
    double acc = 0.0;
    for (const auto& l : sample.levels())
      acc += static_cast<double>(std::abs(l.value - k)) * static_cast<double>(l.count);
    return acc / sample.n();
  };
  // M(0) from E|X - 1| = 2F(0) + lambda - 1. Each later step adds the
  // increment solved from the Poisson relation
  // E|X - k| = (k - lambda)(2F(k-1) - 1) + 2k p(k) at k = j + 1, the
  // indexing of the reference implementation in the energy package.
  std::vector<double> out;
  double cdf = std::clamp((mean_distance(1) + 1.0 - lam) / 2.0, 0.0, 1.0);
  out.push_back(cdf);
  for (std::int64_t k = 1; k <= last; ++k) {
    const double kd = static_cast<double>(k);
    const double pk = (mean_distance(k + 1) - (kd + 1.0 - lam) * (2.0 * cdf - 1.0)) / (2.0 * (kd + 1.0));
    cdf = std::min(cdf + std::max(pk, 0.0), 1.0);
    out.push_back(cdf);
  }
  return out;
}

double interpolated_critical_value(std::vector<double> replicates, double alpha) {
  const std::size_t B = replicates.size();
  if (B < 2) throw ConfigError("bootstrap: need at least two replicates");
  const std::size_t k = order_index(B, alpha);
  if (k < 1 || k + 1 > B)
    throw ConfigError("bootstrap: k = floor((1-alpha)B) must satisfy 1 <= k < B");
  std::sort(replicates.begin(), replicates.end());
  const double lo = replicates[k - 1];
  const double hi = replicates[k];
  return lo + (1.0 - alpha) * (hi - lo);
}

std::vector<TestReport> run_tests(const Sample& sample, std::span<const GofStatistic> stats,
                                  const BootstrapConfig& cfg, const RandomStream& rng,
                                  bool keep_replicates) {
  check_config(cfg);
  const PoissonFit fit(sample);
  if (!(fit.lambda > 0.0)) throw DegenerateSample("bootstrap: sample mean is zero");

  std::vector<TestReport> reports(stats.size());
  for (std::size_t s = 0; s < stats.size(); ++s) reports[s].statistic = evaluate(stats[s], fit);

  std::vector<std::vector<double>> reps(stats.size(), std::vector<double>(cfg.B));
  for (std::size_t b = 0; b < cfg.B; ++b) {
    RandomStream stream = substream(rng, b);
    const Sample star(draw_poisson(fit.lambda, sample.size(), stream));
    const PoissonFit star_fit(star);
    for (std::size_t s = 0; s < stats.size(); ++s) reps[s][b] = evaluate_replicate(stats[s], star_fit);
  }
  for (std::size_t s = 0; s < stats.size(); ++s) {
    reports[s].critical_value = interpolated_critical_value(reps[s], cfg.alpha);
    reports[s].reject = reports[s].statistic > reports[s].critical_value;
    if (keep_replicates) reports[s].replicates = std::move(reps[s]);
  }
  return reports;
}

BootstrapResult bootstrap_critical_value(const Sample& sample, GofStatistic stat,
                                         const BootstrapConfig& cfg, const RandomStream& rng) {
  const GofStatistic one[] = {stat};
  auto reports = run_tests(sample, one, cfg, rng, true);
  return {reports[0].critical_value, std::move(*reports[0].replicates)};
}

TestReport run_test(const Sample& sample, GofStatistic stat, const BootstrapConfig& cfg,
                    const RandomStream& rng) {
  const GofStatistic one[] = {stat};
  return std::move(run_tests(sample, one, cfg, rng, true)[0]);
}

TestReport run_test(const Sample& sample, GofStatistic stat, const BootstrapConfig& cfg) {
  return run_test(sample, stat, cfg, RandomStream(cfg.seed));
}

RejectionSummary rejection_rates(const AltDistSpec& alt, std::size_t n, std::size_t reps,
                                 std::span<const GofStatistic> stats, const BootstrapConfig& cfg,
                                 const RandomStream& rng, unsigned workers) {
  if (reps < 1) throw ConfigError("rejection_rates: reps must be >= 1");
  validate(alt);
  check_config(cfg);
  std::vector<std::vector<char>> rejected(reps, std::vector<char>(stats.size(), 0));
  std::vector<char> degenerate(reps, 0);
  parallel_for(reps, workers, [&](std::size_t r) {
    const RandomStream rep = substream(rng, r);
    RandomStream data_stream = substream(rep, 0);
    const Sample sample = draw(alt, n, data_stream);
    if (sample.max() == 0) {
      degenerate[r] = 1;
      return;
    }
    const auto reports = run_tests(sample, stats, cfg, substream(rep, 1));
    for (std::size_t s = 0; s < stats.size(); ++s) rejected[r][s] = reports[s].reject ? 1 : 0;
  });

  RejectionSummary out;
  out.reps = reps;
  out.rates.assign(stats.size(), 0.0);
  for (std::size_t r = 0; r < reps; ++r) {
    out.degenerate += degenerate[r];
    for (std::size_t s = 0; s < stats.size(); ++s) out.rates[s] += rejected[r][s];
  }
  for (double& rate : out.rates) rate /= static_cast<double>(reps);
  return out;
}

double rejection_rate(const AltDistSpec& alt, std::size_t n, std::size_t reps, GofStatistic stat,
                      const BootstrapConfig& cfg, const RandomStream& rng, unsigned workers) {
  const GofStatistic one[] = {stat};
  return rejection_rates(alt, n, reps, one, cfg, rng, workers).rates[0];
}

}  // namespace stein
