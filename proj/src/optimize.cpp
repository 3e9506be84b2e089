#include "stein/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>

#include "stein/error.hpp"

namespace stein {

namespace {

using Vec = std::vector<double>;

double dot(const Vec& a, const Vec& b) { return std::inner_product(a.begin(), a.end(), b.begin(), 0.0); }

double inf_norm(const Vec& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Central differences, one-sided when the central stencil would leave the box.
// Returns false if any evaluation is non-finite.
bool fd_gradient(const Objective& f, const Vec& x, double fx, const BoxBounds& box,
                 const OptimizerConfig& cfg, Vec& grad) {
  grad.assign(x.size(), 0.0);
  Vec probe = x;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double h = std::max(cfg.fd_step * std::abs(x[i]), 1e-9);
    const bool room_up = x[i] + h <= box.upper[i];
    const bool room_down = x[i] - h >= box.lower[i];
    double g;
    if (room_up && room_down) {
      probe[i] = x[i] + h;
      const double fp = f(probe);
      probe[i] = x[i] - h;
      const double fm = f(probe);
      g = (fp - fm) / (2.0 * h);
    } else if (room_up) {
      probe[i] = x[i] + h;
      g = (f(probe) - fx) / h;
    } else {
      probe[i] = x[i] - h;
      g = (fx - f(probe)) / h;
    }
    probe[i] = x[i];
    if (!std::isfinite(g)) return false;
    grad[i] = g;
  }
  return true;
}

// P(x - g) - x
Vec projected_gradient(const Vec& x, const Vec& g, const BoxBounds& box) {
  Vec pg(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    pg[i] = std::clamp(x[i] - g[i], box.lower[i], box.upper[i]) - x[i];
  return pg;
}

// Variables held at a bound by the gradient.
std::vector<bool> active_set(const Vec& x, const Vec& g, const BoxBounds& box) {
  std::vector<bool> active(x.size());
  for (std::size_t i = 0; i < x.size(); ++i)
    active[i] = (x[i] <= box.lower[i] && g[i] > 0.0) || (x[i] >= box.upper[i] && g[i] < 0.0);
  return active;
}

struct Pair {
  Vec s;
  Vec y;
  double rho;
};

Vec two_loop(const Vec& g, const std::deque<Pair>& pairs, const std::vector<bool>& active) {
  Vec q = g;
  for (std::size_t i = 0; i < q.size(); ++i)
    if (active[i]) q[i] = 0.0;
  std::vector<double> a(pairs.size());
  for (std::size_t j = pairs.size(); j-- > 0;) {
    a[j] = pairs[j].rho * dot(pairs[j].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= a[j] * pairs[j].y[i];
  }
  if (!pairs.empty()) {
    const auto& last = pairs.back();
    const double gamma = dot(last.s, last.y) / dot(last.y, last.y);
    for (double& v : q) v *= gamma;
  }
  for (std::size_t j = 0; j < pairs.size(); ++j) {
    const double b = pairs[j].rho * dot(pairs[j].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += (a[j] - b) * pairs[j].s[i];
  }
  Vec d(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) d[i] = active[i] ? 0.0 : -q[i];
  return d;
}

void check_inputs(const Vec& x0, const BoxBounds& box, const OptimizerConfig& cfg) {
  cfg.validate();
  if (box.lower.size() != x0.size() || box.upper.size() != x0.size())
    throw ConfigError("minimize: bounds dimension does not match x0");
  for (std::size_t i = 0; i < x0.size(); ++i)
    if (!(box.lower[i] < box.upper[i])) throw ConfigError("minimize: lower bound must be < upper bound");
}

}  // namespace

void OptimizerConfig::validate() const {
  if (max_iter <= 0 || !(grad_tol > 0.0) || !(step_tol > 0.0) || !(fd_step > 0.0) ||
      !(f_rel_tol > 0.0) || memory <= 0)
    throw ConfigError("optimizer: all settings must be positive");
}

BoxBounds BoxBounds::unbounded(std::size_t dim) {
  const double inf = std::numeric_limits<double>::infinity();
  return {Vec(dim, -inf), Vec(dim, inf)};
}

bool BoxBounds::contains(const Vec& x) const {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= lower[i] && x[i] <= upper[i])) return false;
  return true;
}

Vec BoxBounds::project(Vec x) const {
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::clamp(x[i], lower[i], upper[i]);
  return x;
}

std::string to_string(OptimizerStatus status) {
  switch (status) {
    case OptimizerStatus::GradientTolerance: return "gradient-tolerance";
    case OptimizerStatus::StepTolerance: return "step-tolerance";
    case OptimizerStatus::RelativeReduction: return "relative-reduction";
    case OptimizerStatus::SimplexConverged: return "simplex-converged";
    case OptimizerStatus::MaxIterations: return "max-iterations";
    case OptimizerStatus::LineSearchFailed: return "line-search-failed";
  }
  return "?";
}

MinimizeResult minimize(const Objective& objective, Vec x0, const BoxBounds& box,
                        const OptimizerConfig& cfg) {
  check_inputs(x0, box, cfg);
  Vec x = box.project(std::move(x0));
  double fx = objective(x);
  if (!std::isfinite(fx)) throw StartError("minimize: objective is not finite at the start");

  Vec g;
  if (!fd_gradient(objective, x, fx, box, cfg, g)) {
    auto r = minimize_simplex(objective, x, box, cfg);
    r.used_fallback = true;
    return r;
  }

  MinimizeResult res;
  std::deque<Pair> pairs;
  int failures = 0;
  constexpr int kMaxBacktracks = 50;
  constexpr double kArmijo = 1e-4;

  for (res.iterations = 0; res.iterations < cfg.max_iter;) {
    if (inf_norm(projected_gradient(x, g, box)) < cfg.grad_tol) {
      res.converged = true;
      res.status = OptimizerStatus::GradientTolerance;
      break;
    }
    const auto active = active_set(x, g, box);
    Vec d = two_loop(g, pairs, active);
    if (!(dot(d, g) < 0.0)) {
      pairs.clear();
      d = projected_gradient(x, g, box);
    }
    // First step of steepest descent is scaled to unit length.
    double t = pairs.empty() ? std::min(1.0, 1.0 / std::max(inf_norm(d), 1e-300)) : 1.0;

    Vec x_new;
    double f_new = fx;
    bool accepted = false;
    for (int bt = 0; bt < kMaxBacktracks; ++bt, t *= 0.5) {
      x_new = x;
      for (std::size_t i = 0; i < x.size(); ++i) x_new[i] += t * d[i];
      x_new = box.project(std::move(x_new));
      f_new = objective(x_new);
      Vec step(x.size());
      for (std::size_t i = 0; i < x.size(); ++i) step[i] = x_new[i] - x[i];
      if (std::isfinite(f_new) && f_new <= fx + kArmijo * dot(g, step)) {
        accepted = true;
        break;
      }
    }
    ++res.iterations;
    if (!accepted) {
      if (++failures >= 2 || pairs.empty()) {
        auto r = minimize_simplex(objective, x, box, cfg);
        r.iterations += res.iterations;
        r.used_fallback = true;
        if (!r.converged && r.f > fx) {
          r.x = x;
          r.f = fx;
        }
        if (!r.converged) r.status = OptimizerStatus::LineSearchFailed;
        return r;
      }
      pairs.clear();
      continue;
    }
    failures = 0;

    Vec g_new;
    if (!fd_gradient(objective, x_new, f_new, box, cfg, g_new)) {
      auto r = minimize_simplex(objective, x_new, box, cfg);
      r.iterations += res.iterations;
      r.used_fallback = true;
      return r;
    }
    Pair p{Vec(x.size()), Vec(x.size()), 0.0};
    for (std::size_t i = 0; i < x.size(); ++i) {
      p.s[i] = x_new[i] - x[i];
      p.y[i] = g_new[i] - g[i];
    }
    const double sy = dot(p.s, p.y);
    const double step_norm = inf_norm(p.s);
    const double reduction = fx - f_new;
    const double scale = std::max({std::abs(fx), std::abs(f_new), 1.0});
    if (sy > 1e-10 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      pairs.push_back(std::move(p));
      if (pairs.size() > static_cast<std::size_t>(cfg.memory)) pairs.pop_front();
    }
    x = std::move(x_new);
    fx = f_new;
    g = std::move(g_new);

    if (step_norm < cfg.step_tol) {
      res.converged = true;
      res.status = OptimizerStatus::StepTolerance;
      break;
    }
    if (reduction <= cfg.f_rel_tol * scale) {
      res.converged = true;
      res.status = OptimizerStatus::RelativeReduction;
      break;
    }
  }
  if (!res.converged && inf_norm(projected_gradient(x, g, box)) < cfg.grad_tol) {
    res.converged = true;
    res.status = OptimizerStatus::GradientTolerance;
  }
  res.x = std::move(x);
  res.f = fx;
  return res;
}

MinimizeResult minimize_simplex(const Objective& objective, Vec x0, const BoxBounds& box,
                                const OptimizerConfig& cfg) {
  check_inputs(x0, box, cfg);
  const std::size_t n = x0.size();
  auto eval = [&](const Vec& x) {
    const double v = objective(x);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
  };

  std::vector<Vec> pts(n + 1, box.project(std::move(x0)));
  std::vector<double> fs(n + 1);
  fs[0] = eval(pts[0]);
  if (!std::isfinite(fs[0])) throw StartError("minimize: objective is not finite at the start");
  for (std::size_t i = 0; i < n; ++i) {
    Vec& p = pts[i + 1];
    const double h = 0.1 * std::max(std::abs(p[i]), 1.0);
    p[i] = p[i] + h <= box.upper[i] ? p[i] + h : p[i] - h;
    p = box.project(p);
    fs[i + 1] = eval(p);
  }

  MinimizeResult res;
  const int max_iter = cfg.max_iter * 10;
  std::vector<std::size_t> order(n + 1);
  for (res.iterations = 0; res.iterations < max_iter; ++res.iterations) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fs[a] < fs[b]; });
    const std::size_t best = order.front();
    const std::size_t worst = order.back();
    const std::size_t second = order[n - 1];

    double size = 0.0;
    for (std::size_t j = 0; j <= n; ++j)
      for (std::size_t i = 0; i < n; ++i) size = std::max(size, std::abs(pts[j][i] - pts[best][i]));
    const double spread = fs[worst] - fs[best];
    if (size < cfg.step_tol ||
        (std::isfinite(spread) && spread <= cfg.f_rel_tol * std::max(std::abs(fs[best]), 1.0) &&
         size < std::sqrt(cfg.step_tol))) {
      res.converged = true;
      res.status = OptimizerStatus::SimplexConverged;
      break;
    }

    Vec centroid(n, 0.0);
    for (std::size_t j = 0; j <= n; ++j)
      if (j != worst)
        for (std::size_t i = 0; i < n; ++i) centroid[i] += pts[j][i] / static_cast<double>(n);
    auto along = [&](double coef) {
      Vec p(n);
      for (std::size_t i = 0; i < n; ++i) p[i] = centroid[i] + coef * (pts[worst][i] - centroid[i]);
      return box.project(std::move(p));
    };

    Vec xr = along(-1.0);
    const double fr = eval(xr);
    if (fr < fs[best]) {
      Vec xe = along(-2.0);
      const double fe = eval(xe);
      if (fe < fr) {
        pts[worst] = std::move(xe);
        fs[worst] = fe;
      } else {
        pts[worst] = std::move(xr);
        fs[worst] = fr;
      }
      continue;
    }
    if (fr < fs[second]) {
      pts[worst] = std::move(xr);
      fs[worst] = fr;
      continue;
    }
    const bool outside = fr < fs[worst];
    Vec xc = along(outside ? -0.5 : 0.5);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fs[worst])) {
      pts[worst] = std::move(xc);
      fs[worst] = fc;
      continue;
    }
    for (std::size_t j = 0; j <= n; ++j) {
      if (j == best) continue;
      for (std::size_t i = 0; i < n; ++i) pts[j][i] = pts[best][i] + 0.5 * (pts[j][i] - pts[best][i]);
      fs[j] = eval(pts[j]);
    }
  }
  const auto best = static_cast<std::size_t>(std::min_element(fs.begin(), fs.end()) - fs.begin());
  res.x = pts[best];
  res.f = fs[best];
  return res;
}

}  // namespace stein
