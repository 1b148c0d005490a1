#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace thresholds {

/// Objective to minimize: returns f(x) and writes the gradient.
using Objective = std::function<double(std::span<const double> x, std::span<double> grad)>;

struct OptimizerOptions {
  int max_iterations = 500;
  int memory = 10;
  double grad_tolerance = 1e-5;  // on the max-norm of the gradient
  double rel_tolerance = 1e-9;   // relative change of f that stops iteration
};

struct OptimizerResult {
  std::vector<double> x;
  double value = 0.0;
  std::vector<double> gradient;
  double grad_norm = 0.0;
  int iterations = 0;
  bool converged = false;  // grad_norm < grad_tolerance
  std::vector<double> trace;  // f after every accepted step, starting at f(x0)
  std::string stop_reason;
};

/// Limited-memory BFGS with a backtracking (Armijo) line search. Trial points
/// at which the objective throws an Error are treated as infeasible.
OptimizerResult minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                               const OptimizerOptions& options = {});

double max_abs(std::span<const double> v);

}  // namespace thresholds
