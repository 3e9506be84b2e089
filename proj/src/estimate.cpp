#include "stein/estimate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "stein/error.hpp"

namespace stein {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double uniform(RandomStream& rng, double a, double b) { return a + (b - a) * rng.uniform(); }

EstimateResult to_estimate(const MinimizeResult& m, const BoxBounds& box) {
  EstimateResult r;
  r.params = m.x;
  r.objective = m.f;
  r.converged = m.converged;
  r.iterations = m.iterations;
  r.in_bounds = box.contains(m.x);
  r.status = to_string(m.status);
  return r;
}

// Runs `starts` minimizations from draw(), keeping the best objective. A start
// whose objective is not finite counts as a failed start.
template <class Draw>
MinimizeResult best_of(const Objective& f, const BoxBounds& box, const OptimizerConfig& opt,
                       int starts, Draw&& draw) {
  if (starts < 1) throw ConfigError("estimate: n_starts must be >= 1");
  std::optional<MinimizeResult> best;
  for (int s = 0; s < starts; ++s) {
    std::vector<double> x0 = draw();
    try {
      auto m = minimize(f, std::move(x0), box, opt);
      if (!best || m.f < best->f) best = std::move(m);
    } catch (const StartError&) {
    }
  }
  if (!best) throw StartError("estimate: objective not finite at any start");
  return *best;
}

void check_exppoly_theta(const std::vector<double>& theta) {
  if (theta.size() < 2) throw DomainError("exppoly: theta needs d >= 2 components");
  if (!(theta.back() < 0.0)) throw DomainError("exppoly: last theta component must be negative");
}

// 1 - exp(sum_i theta_i ((x+1)^i - x^i))
double exppoly_weight(const std::vector<double>& theta, std::int64_t x) {
  const double xd = static_cast<double>(x);
  double expo = 0.0;
  double up = xd + 1.0;
  double here = xd;
  for (double t : theta) {
    expo += t * (up - here);
    up *= xd + 1.0;
    here *= xd;
  }
  return 1.0 - std::exp(expo);
}

double s_pe_closed(const Sample& sample, double t1, double t3) {
  const auto levels = sample.levels();
  std::vector<double> e(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = static_cast<double>(levels[i].value);
    e[i] = std::exp(t1 + t3 + 3.0 * t3 * x + 3.0 * t3 * x * x);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const double xj = static_cast<double>(levels[j].value);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double xl = static_cast<double>(levels[l].value);
      double term;
      if (levels[j].value >= levels[l].value)
        term = (e[j] - 1.0) * (e[l] * xl - xl + 2.0);
      else
        term = (e[j] - 1.0) * (e[l] - 1.0) * xj;
      if (j == l) term += 1.0;
      acc += static_cast<double>(levels[j].count) * static_cast<double>(levels[l].count) * term;
    }
  }
  return acc / (sample.n() * sample.n());
}

// sum_{k=1}^{M} (e_n(k) - rho_n(k))^2 with e_n accumulated from the top.
double s_pe_general(const Sample& sample, const std::vector<double>& theta) {
  const auto levels = sample.levels();
  double acc = 0.0;
  double e = 0.0;
  std::size_t i = levels.size();
  for (std::int64_t k = sample.max(); k >= 1; --k) {
    double rho = 0.0;
    if (i > 0 && levels[i - 1].value == k) {
      --i;
      const double c = static_cast<double>(levels[i].count) / sample.n();
      e += exppoly_weight(theta, k) * c;
      rho = c;
    }
    acc += (e - rho) * (e - rho);
  }
  return acc;
}

struct ThetaLayout {
  int d;
  std::vector<int> free;              // 0-based indices
  std::vector<double> template_theta;  // fixed values filled in

  std::vector<double> expand(const std::vector<double>& x) const {
    auto theta = template_theta;
    for (std::size_t i = 0; i < free.size(); ++i) theta[static_cast<std::size_t>(free[i])] = x[i];
    return theta;
  }
};

ThetaLayout make_layout(int d, const FixedParams& fixed) {
  if (d < 2) throw ConfigError("exppoly: d must be >= 2");
  ThetaLayout layout{d, {}, std::vector<double>(static_cast<std::size_t>(d), 0.0)};
  std::vector<bool> pinned(static_cast<std::size_t>(d), false);
  for (const auto& [index, value] : fixed) {
    if (index < 1 || index > d) throw ConfigError("exppoly: fixed index out of range");
    if (index == d) throw ConfigError("exppoly: the leading coefficient cannot be fixed");
    pinned[static_cast<std::size_t>(index - 1)] = true;
    layout.template_theta[static_cast<std::size_t>(index - 1)] = value;
  }
  for (int i = 0; i < d; ++i)
    if (!pinned[static_cast<std::size_t>(i)]) layout.free.push_back(i);
  return layout;
}

EstimateResult estimate_theta(const ThetaLayout& layout,
                              const std::function<double(const std::vector<double>&)>& objective,
                              const OptimizerConfig& opt, RandomStream& rng,
                              const ExpPolyOptions& options) {
  const std::size_t p = layout.free.size();
  BoxBounds box{std::vector<double>(p, -kInf), std::vector<double>(p, kInf)};
  box.upper.back() = options.last_upper;

  auto draw = [&] {
    std::vector<double> x0(p);
    for (std::size_t i = 0; i < p; ++i) {
      const int idx = layout.free[i];
      if (idx == layout.d - 1)
        x0[i] = uniform(rng, -1.0, 0.0);
      else if (idx == 0)
        x0[i] = uniform(rng, -1.0, 1.0);
      else
        x0[i] = uniform(rng, -0.1, 0.1);
    }
    return x0;
  };
  auto f = [&](const std::vector<double>& x) { return objective(layout.expand(x)); };
  const auto m = best_of(f, box, opt, options.n_starts, draw);
  auto r = to_estimate(m, box);
  r.params = layout.expand(m.x);
  return r;
}

void check_exppoly_sample(const Sample& sample) {
  if (sample.size() < 2) throw DomainError("exppoly estimation: need n >= 2");
  if (sample.min() < 1) throw DomainError("exppoly: sample values must be >= 1");
}

}  // namespace

double s_nb(const Sample& sample, double r, double q) {
  if (!(r > 0.0) || !(q > 0.0 && q < 1.0)) throw DomainError("s_nb: need r > 0 and 0 < q < 1");
  const auto levels = sample.levels();
  std::vector<double> a(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    const double x = static_cast<double>(levels[i].value);
    a[i] = 1.0 - (r + x) / (x + 1.0) * (1.0 - q);
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < levels.size(); ++j) {
    const double xj = static_cast<double>(levels[j].value);
    for (std::size_t l = 0; l < levels.size(); ++l) {
      const double xl = static_cast<double>(levels[l].value);
      double term;
      if (levels[j].value >= levels[l].value)
        term = a[j] * (q * (r + xl) - r - 1.0);
      else
        term = (q * (r + xj) - r + 1.0) * a[l];
      if (j == l) term += 1.0;
      acc += static_cast<double>(levels[j].count) * static_cast<double>(levels[l].count) * term;
    }
  }
  return acc / (sample.n() * sample.n());
}

EstimateResult estimate_nb(const Sample& sample, const OptimizerConfig& opt, RandomStream rng,
                           const NbOptions& options) {
  if (sample.size() < 2) throw DomainError("estimate_nb: need n >= 2");
  const BoxBounds box{{options.r_lower, options.q_lower}, {options.r_upper, options.q_upper}};
  auto f = [&](const std::vector<double>& x) { return s_nb(sample, x[0], x[1]); };
  auto draw = [&] {
    const double r0 = uniform(rng, 1.0, 3.0);
    const double q0 = uniform(rng, 0.1, 0.9);
    return std::vector<double>{r0, q0};
  };
  return to_estimate(best_of(f, box, opt, options.n_starts, draw), box);
}

MomentEstimates moment_estimators_nb(const Sample& sample) {
  const double mean = sample.mean();
  const double var = sample.variance();
  if (!(var > 0.0)) throw DegenerateSample("moment estimators: sample variance is zero");
  MomentEstimates m;
  m.q_tilde = mean / var;
  m.r_tilde = var == mean ? kInf : mean * mean / (var - mean);
  m.underdispersed = mean >= var;
  return m;
}

double s_pe(const Sample& sample, const std::vector<double>& theta) {
  check_exppoly_theta(theta);
  if (sample.min() < 1) throw DomainError("s_pe: sample values must be >= 1");
  if (theta.size() == 3 && theta[1] == 0.0) return s_pe_closed(sample, theta[0], theta[2]);
  return s_pe_general(sample, theta);
}

EstimateResult estimate_exppoly(const Sample& sample, int d, const FixedParams& fixed,
                                const OptimizerConfig& opt, RandomStream rng,
                                const ExpPolyOptions& options) {
  check_exppoly_sample(sample);
  const auto layout = make_layout(d, fixed);
  return estimate_theta(
      layout, [&](const std::vector<double>& theta) { return s_pe(sample, theta); }, opt,
      rng, options);
}

double hd_objective(const Sample& sample, const std::vector<double>& theta,
                    const HdConstants& c, double log_scale) {
  if (!(c.alpha > c.alpha_p && c.alpha_p > 0.0 && c.gamma > 0.0))
    throw DomainError("hd_objective: need alpha > alpha' > 0 and gamma > 0");
  if (theta.empty()) throw DomainError("hd_objective: empty theta");
  const double abar = (c.alpha + c.gamma * c.alpha_p) / (1.0 + c.gamma);

  const auto levels = sample.levels();
  std::vector<double> log_freq(levels.size());
  std::vector<double> log_q(levels.size());
  for (std::size_t i = 0; i < levels.size(); ++i) {
    log_freq[i] = std::log(static_cast<double>(levels[i].count) / sample.n());
    double acc = 0.0;
    double power = 1.0;
    for (double t : theta) {
      power *= static_cast<double>(levels[i].value);
      acc += t * power;
    }
    log_q[i] = log_scale + acc;
  }
  // log sum_k (n_k/n)^a q(k)^{1-a}
  auto log_sum = [&](double a) {
    double top = -kInf;
    for (std::size_t i = 0; i < levels.size(); ++i) top = std::max(top, a * log_freq[i] + (1.0 - a) * log_q[i]);
    double s = 0.0;
    for (std::size_t i = 0; i < levels.size(); ++i) s += std::exp(a * log_freq[i] + (1.0 - a) * log_q[i] - top);
    return top + std::log(s);
  };
  return log_sum(c.alpha) / (1.0 + c.gamma) + c.gamma / (1.0 + c.gamma) * log_sum(c.alpha_p) -
         log_sum(abar);
}

EstimateResult estimate_exppoly_hd(const Sample& sample, int d, const FixedParams& fixed,
                                   const OptimizerConfig& opt, const HdConstants& constants,
                                   RandomStream rng, const ExpPolyOptions& options) {
  check_exppoly_sample(sample);
  const auto layout = make_layout(d, fixed);
  return estimate_theta(
      layout,
      [&](const std::vector<double>& theta) { return hd_objective(sample, theta, constants); }, opt,
      rng, options);
}

}  // namespace stein
