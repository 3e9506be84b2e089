#pragma once

// Box-constrained minimization: projected limited-memory quasi-Newton with
// finite-difference gradients and a derivative-free simplex fallback.

#include <functional>
#include <limits>
#include <string>
#include <vector>

namespace stein {

using Objective = std::function<double(const std::vector<double>&)>;

struct OptimizerConfig {
  int max_iter = 1000;
  double grad_tol = 1e-8;
  double step_tol = 1e-10;
  double fd_step = 1e-6;  // relative, with absolute floor 1e-9
  // Relative reduction tolerance (factr * machine epsilon).
  double f_rel_tol = 1e7 * std::numeric_limits<double>::epsilon();
  int memory = 6;

  // Throws ConfigError unless every field is positive.
  void validate() const;
};

struct BoxBounds {
  std::vector<double> lower;
  std::vector<double> upper;

  static BoxBounds unbounded(std::size_t dim);
  std::size_t dim() const { return lower.size(); }
  bool contains(const std::vector<double>& x) const;
  std::vector<double> project(std::vector<double> x) const;
};

enum class OptimizerStatus {
  GradientTolerance,
  StepTolerance,
  RelativeReduction,
  SimplexConverged,
  MaxIterations,
  LineSearchFailed,
};

std::string to_string(OptimizerStatus status);

struct MinimizeResult {
  std::vector<double> x;
  double f = 0.0;
  bool converged = false;
  int iterations = 0;
  OptimizerStatus status = OptimizerStatus::MaxIterations;
  bool used_fallback = false;
};

// Throws StartError when the objective is not finite at the (projected) start,
// ConfigError on invalid bounds or configuration.
MinimizeResult minimize(const Objective& objective, std::vector<double> x0, const BoxBounds& bounds,
                        const OptimizerConfig& cfg = {});

// Nelder-Mead with every trial point projected onto the box.
MinimizeResult minimize_simplex(const Objective& objective, std::vector<double> x0,
                                const BoxBounds& bounds, const OptimizerConfig& cfg = {});

}  // namespace stein
