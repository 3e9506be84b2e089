#include "stein/models.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <numeric>
#include <sstream>

#include "stein/error.hpp"

namespace stein {

namespace {

constexpr double kTableTermRatio = 1e-16;
constexpr std::size_t kMaxTableSize = 10'000'000;

std::atomic<std::uint64_t> g_exppoly_normalizations{0};

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};

double log_sum_exp(const std::vector<double>& xs) {
  const double top = *std::max_element(xs.begin(), xs.end());
  double acc = 0.0;
  for (double x : xs) acc += std::exp(x - top);
  return top + std::log(acc);
}

std::int64_t gibbs_particles(const family::Gibbs& g, std::int64_t k) {
  if (g.infinite()) return g.particles_fn ? g.particles_fn(k) : 1;
  return g.particles.at(k);
}

double gibbs_energy(const family::Gibbs& g, std::int64_t k) {
  return g.infinite() ? g.energy_fn(k) : g.energies.at(k);
}

// (mu N(k) - V(k)) / (kappa T)
double gibbs_log_weight(const family::Gibbs& g, std::int64_t k) {
  return (g.mu * static_cast<double>(gibbs_particles(g, k)) - gibbs_energy(g, k)) /
         (g.kappa * g.temperature);
}

// Beyond this k the ratio polynomial sum_i theta_i ((k+1)^i - k^i) is
// negative for good (Cauchy bound on its real roots).
double exppoly_decreasing_from(const std::vector<double>& theta) {
  const std::size_t d = theta.size();
  // Coefficients c_j of k^j in sum_i theta_i ((k+1)^i - k^i), j = 0..d-1.
  std::vector<double> c(d, 0.0);
  for (std::size_t i = 1; i <= d; ++i) {
    double binom = 1.0;  // C(i, j)
    for (std::size_t j = 0; j < i; ++j) {
      c[j] += theta[i - 1] * binom;
      binom = binom * static_cast<double>(i - j) / static_cast<double>(j + 1);
    }
  }
  const double lead = std::abs(c[d - 1]);
  double bound = 0.0;
  for (std::size_t j = 0; j + 1 < d; ++j) bound = std::max(bound, std::abs(c[j]) / lead);
  return 1.0 + bound;
}

}  // namespace

double exppoly_log_weight(const std::vector<double>& theta, double k) {
  double acc = 0.0;
  double power = k;
  for (double t : theta) {
    acc += t * power;
    power *= k;
  }
  return acc;
}

double exppoly_log_ratio(const std::vector<double>& theta, double k) {
  double acc = 0.0;
  double pk = k;
  double pk1 = k + 1.0;
  for (double t : theta) {
    acc += t * (pk1 - pk);
    pk *= k;
    pk1 *= k + 1.0;
  }
  return acc;
}

std::uint64_t exppoly_normalizer_evaluations() noexcept {
  return g_exppoly_normalizations.load(std::memory_order_relaxed);
}

struct DiscreteModel::Table {
  std::once_flag once;
  std::int64_t lower = 0;
  std::vector<double> pmf;
  std::vector<double> cdf;
};

DiscreteModel::DiscreteModel(Family fam) : family_(std::move(fam)) {
  std::visit(
      overloaded{
          [&](const family::Poisson& p) {
            if (!(p.lambda > 0.0) || !std::isfinite(p.lambda))
              throw DomainError("poisson: lambda must be positive");
            support_ = {0, std::nullopt};
          },
          [&](const family::NegBinomial& p) {
            if (!(p.r > 0.0) || !std::isfinite(p.r)) throw DomainError("negbin: r must be positive");
            if (!(p.q > 0.0 && p.q < 1.0)) throw DomainError("negbin: q must lie in (0,1)");
            support_ = {0, std::nullopt};
          },
          [&](const family::Binomial& p) {
            if (p.m < 1) throw DomainError("binomial: m must be >= 1");
            if (!(p.q > 0.0 && p.q < 1.0)) throw DomainError("binomial: q must lie in (0,1)");
            support_ = {0, p.m};
          },
          [&](const family::Uniform& p) {
            if (p.m < 2) throw DomainError("uniform: m must be >= 2");
            support_ = {1, p.m};
          },
          [&](const family::Gibbs& g) {
            if (!(g.temperature > 0.0)) throw DomainError("gibbs: temperature must be positive");
            if (!(g.kappa > 0.0)) throw DomainError("gibbs: kappa must be positive");
            if (g.infinite()) {
              if (g.truncation < 2) throw DomainError("gibbs: truncation bound must be >= 2");
              support_ = {1, std::nullopt};
              return;
            }
            const auto states = static_cast<std::int64_t>(g.energies.size());
            if (states < 2) throw DomainError("gibbs: need at least two states");
            for (std::int64_t k = 1; k <= states; ++k) {
              auto e = g.energies.find(k);
              if (e == g.energies.end())
                throw DomainError("gibbs: energies must cover states 1..S contiguously");
              if (!g.particles.contains(k)) throw DomainError("gibbs: missing particle count");
              if (g.particles.at(k) < 1) throw DomainError("gibbs: particle counts must be >= 1");
              // V(k) = +inf gives p(k) = 0 inside the support, violating (C1).
              if (!std::isfinite(e->second))
                throw DomainError("gibbs: infinite energy inside the support");
            }
            support_ = {1, states};
          },
          [&](const family::ExpPoly& p) {
            if (p.theta.size() < 2) throw DomainError("exppoly: need d >= 2 coefficients");
            for (double t : p.theta)
              if (!std::isfinite(t)) throw DomainError("exppoly: non-finite coefficient");
            if (!(p.theta.back() < 0.0))
              throw DomainError("exppoly: leading coefficient must be negative");
            support_ = {1, std::nullopt};
          },
      },
      family_);

  if (std::holds_alternative<family::Gibbs>(family_) ||
      std::holds_alternative<family::ExpPoly>(family_)) {
    table_ = std::make_shared<Table>();
  }
  if (std::holds_alternative<family::Gibbs>(family_)) {
    // Built eagerly: the (C1) check needs every state's mass.
    for (double v : table().pmf)
      if (!(v > 0.0)) throw DomainError("gibbs: zero mass inside the support");
  }
}

DiscreteModel DiscreteModel::poisson(double lambda) { return DiscreteModel(family::Poisson{lambda}); }
DiscreteModel DiscreteModel::negbinomial(double r, double q) {
  return DiscreteModel(family::NegBinomial{r, q});
}
DiscreteModel DiscreteModel::binomial(int m, double q) { return DiscreteModel(family::Binomial{m, q}); }
DiscreteModel DiscreteModel::uniform(int m) { return DiscreteModel(family::Uniform{m}); }
DiscreteModel DiscreteModel::exppoly(std::vector<double> theta) {
  return DiscreteModel(family::ExpPoly{std::move(theta)});
}
DiscreteModel DiscreteModel::gibbs(family::Gibbs g) { return DiscreteModel(std::move(g)); }

std::string DiscreteModel::name() const {
  std::ostringstream os;
  std::visit(overloaded{
                 [&](const family::Poisson& p) { os << "Poisson(" << p.lambda << ")"; },
                 [&](const family::NegBinomial& p) { os << "NegBin(" << p.r << "," << p.q << ")"; },
                 [&](const family::Binomial& p) { os << "Bin(" << p.m << "," << p.q << ")"; },
                 [&](const family::Uniform& p) { os << "Uniform(" << p.m << ")"; },
                 [&](const family::Gibbs& g) {
                   os << "Gibbs(" << (g.infinite() ? "inf" : std::to_string(g.energies.size()))
                      << ")";
                 },
                 [&](const family::ExpPoly& p) {
                   os << "ExpPoly(";
                   for (std::size_t i = 0; i < p.theta.size(); ++i)
                     os << (i ? "," : "") << p.theta[i];
                   os << ")";
                 },
             },
             family_);
  return os.str();
}

double DiscreteModel::score_forward(std::int64_t k) const {
  if (!support_.contains(k)) throw DomainError("score_forward: k outside support of " + name());
  if (support_.upper && k == *support_.upper) return -1.0;
  const double x = static_cast<double>(k);
  return std::visit(
      overloaded{
          [&](const family::Poisson& p) { return p.lambda / (x + 1.0) - 1.0; },
          [&](const family::NegBinomial& p) { return (p.r + x) / (x + 1.0) * (1.0 - p.q) - 1.0; },
          [&](const family::Binomial& p) {
            return p.q / (1.0 - p.q) * (p.m - x) / (x + 1.0) - 1.0;
          },
          [&](const family::Uniform&) { return 0.0; },
          [&](const family::Gibbs& g) {
            const double dv = gibbs_energy(g, k) - gibbs_energy(g, k + 1);
            const double dn =
                static_cast<double>(gibbs_particles(g, k + 1) - gibbs_particles(g, k));
            return std::expm1((dv + g.mu * dn) / (g.kappa * g.temperature));
          },
          [&](const family::ExpPoly& p) { return std::expm1(exppoly_log_ratio(p.theta, x)); },
      },
      family_);
}

double DiscreteModel::score_backward(std::int64_t k) const {
  if (!support_.finite())
    throw UnsupportedOperation("score_backward: requires a finite upper support bound");
  if (!support_.contains(k)) throw DomainError("score_backward: k outside support of " + name());
  if (k == support_.lower) return 1.0;
  const double x = static_cast<double>(k);
  return std::visit(
      overloaded{
          [&](const family::Binomial& p) {
            return 1.0 - (1.0 - p.q) / p.q * x / (p.m - x + 1.0);
          },
          [&](const family::Uniform&) { return 0.0; },
          [&](const family::Gibbs& g) {
            return -std::expm1(gibbs_log_weight(g, k - 1) - gibbs_log_weight(g, k));
          },
          [&](const auto&) { return 1.0 - pmf(k - 1) / pmf(k); },
      },
      family_);
}

const DiscreteModel::Table& DiscreteModel::table() const {
  Table& t = *table_;
  std::call_once(t.once, [&] {
    t.lower = support_.lower;
    std::vector<double> logw;
    if (const auto* g = std::get_if<family::Gibbs>(&family_)) {
      const std::int64_t last = g->infinite() ? g->truncation : *support_.upper;
      for (std::int64_t k = 1; k <= last; ++k) logw.push_back(gibbs_log_weight(*g, k));
    } else {
      const auto& theta = std::get<family::ExpPoly>(family_).theta;
      g_exppoly_normalizations.fetch_add(1, std::memory_order_relaxed);
      // Stop once a term drops below 1e-16 of the running sum, but only past
      // the point where the weights are decreasing for good.
      const double decreasing_from = exppoly_decreasing_from(theta);
      double running_top = -std::numeric_limits<double>::infinity();
      double running_sum = 0.0;  // scaled by exp(-running_top)
      for (std::int64_t k = 1;; ++k) {
        const double lw = exppoly_log_weight(theta, static_cast<double>(k));
        logw.push_back(lw);
        if (lw > running_top) {
          running_sum = running_sum * std::exp(running_top - lw) + 1.0;
          running_top = lw;
        } else {
          running_sum += std::exp(lw - running_top);
        }
        const double term = std::exp(lw - running_top);
        if (static_cast<double>(k) >= decreasing_from && term < kTableTermRatio * running_sum)
          break;
        if (logw.size() >= kMaxTableSize)
          throw DomainError("exppoly: normalizing sum does not settle");
      }
    }
    const double log_norm = log_sum_exp(logw);
    t.pmf.resize(logw.size());
    t.cdf.resize(logw.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < logw.size(); ++i) {
      t.pmf[i] = std::exp(logw[i] - log_norm);
      acc += t.pmf[i];
      t.cdf[i] = acc;
    }
    for (double& c : t.cdf) c = std::min(c / acc, 1.0);
    for (double& p : t.pmf) p /= acc;
  });
  return t;
}

double DiscreteModel::pmf_closed_form(std::int64_t k) const {
  const double x = static_cast<double>(k);
  return std::visit(
      overloaded{
          [&](const family::Poisson& p) {
            return std::exp(x * std::log(p.lambda) - p.lambda - std::lgamma(x + 1.0));
          },
          [&](const family::NegBinomial& p) {
            return std::exp(std::lgamma(x + p.r) - std::lgamma(p.r) - std::lgamma(x + 1.0) +
                            x * std::log1p(-p.q) + p.r * std::log(p.q));
          },
          [&](const family::Binomial& p) {
            const double m = p.m;
            return std::exp(std::lgamma(m + 1.0) - std::lgamma(x + 1.0) - std::lgamma(m - x + 1.0) +
                            x * std::log(p.q) + (m - x) * std::log1p(-p.q));
          },
          [&](const family::Uniform& p) { return 1.0 / p.m; },
          [&](const auto&) -> double {
            const Table& t = table();
            const auto idx = static_cast<std::size_t>(k - t.lower);
            return idx < t.pmf.size() ? t.pmf[idx] : 0.0;
          },
      },
      family_);
}

double DiscreteModel::pmf(std::int64_t k) const {
  if (!support_.contains(k)) return 0.0;
  return pmf_closed_form(k);
}

double DiscreteModel::cdf(std::int64_t k) const {
  if (k < support_.lower) return 0.0;
  if (support_.upper && k >= *support_.upper) return 1.0;
  if (table_) {
    const Table& t = table();
    const auto idx = static_cast<std::size_t>(k - t.lower);
    return idx < t.cdf.size() ? t.cdf[idx] : 1.0;
  }
  double acc = 0.0;
  for (std::int64_t j = support_.lower; j <= k; ++j) acc += pmf_closed_form(j);
  return std::min(acc, 1.0);
}

std::int64_t DiscreteModel::summation_limit(double tail_mass) const {
  if (support_.upper) return *support_.upper;
  if (const auto* g = std::get_if<family::Gibbs>(&family_)) return g->truncation;
  if (table_) return table().lower + static_cast<std::int64_t>(table().pmf.size()) - 1;
  // Poisson / negative binomial: walk past the mode until the tail is small.
  double acc = 0.0;
  std::int64_t k = support_.lower;
  for (;; ++k) {
    acc += pmf_closed_form(k);
    if (acc >= 1.0 - tail_mass && score_forward(k) < 0.0) break;
    if (k - support_.lower > static_cast<std::int64_t>(kMaxTableSize))
      throw DomainError("summation_limit: tail does not settle for " + name());
  }
  return k;
}

ConditionReport check_c2(const DiscreteModel& model, std::int64_t k_max) {
  const SupportRange& spt = model.support();
  if (k_max < spt.lower) throw DomainError("check_c2: k_max below the support");
  std::int64_t last = k_max;
  bool covers_support = false;
  if (spt.upper && last >= *spt.upper - 1) {
    last = *spt.upper - 1;
    covers_support = true;
  }

  ConditionReport report;
  std::vector<double> running_max;
  std::vector<double> tail_values;
  double rmax = 0.0;
  for (std::int64_t k = spt.lower; k <= last; ++k) {
    const double score = model.score_forward(k);

    // (1 - P(k)) / p(k+1) = sum_{j>=0} p(k+1+j)/p(k+1), built from score ratios.
    double tail = 0.0;
    double term = 1.0;
    for (std::int64_t j = k + 1; term > 0.0; ++j) {
      tail += term;
      if (term < 1e-17 * tail || j - k > 1'000'000) break;
      term *= 1.0 + model.score_forward(j);
    }

    // P(k) / p(k+1) = sum_{l<=k} p(l)/p(k+1); stop once it exceeds the tail
    // ratio since only the minimum matters.
    double head = 0.0;
    double ratio = 1.0;
    for (std::int64_t l = k; l >= spt.lower; --l) {
      ratio /= 1.0 + model.score_forward(l);
      head += ratio;
      if (!std::isfinite(head) || head >= tail) break;
    }

    const double value = std::abs(score) * std::min(head, tail);
    rmax = std::max(rmax, value);
    running_max.push_back(rmax);
    tail_values.push_back(std::abs(score) * tail);
  }

  report.sup_value = rmax;
  report.evaluated_to = last;
  const std::size_t count = running_max.size();
  const std::size_t window = std::min<std::size_t>(10, count);
  for (std::size_t i = count - window; i < count; ++i)
    report.limsup_proxy = std::max(report.limsup_proxy, tail_values[i]);

  if (covers_support) {
    report.stabilized = true;
  } else if (count > 10) {
    report.stabilized = true;
    for (std::size_t i = count - 10; i < count; ++i) {
      const double prev = running_max[i - 1];
      const double cur = running_max[i];
      const double rel = cur > 0.0 ? (cur - prev) / cur : 0.0;
      if (!(rel < 1e-6)) report.stabilized = false;
    }
  }
  return report;
}

}  // namespace stein
