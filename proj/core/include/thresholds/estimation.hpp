#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "thresholds/likelihood.hpp"
#include "thresholds/model.hpp"
#include "thresholds/types.hpp"

namespace thresholds {

struct FitOptions {
  int max_iterations = 500;
  double grad_tolerance = 1e-5;
  double rel_tolerance = 1e-9;
  /// Overrides spec.quadrature_nodes when set.
  std::optional<int> quadrature_nodes;
  /// Additional fits from perturbed starting values; the best is kept.
  int random_starts = 0;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  /// Holds sigma fixed instead of estimating it.
  std::optional<double> fixed_sigma;
  bool compute_standard_errors = true;
  /// Newton steps (finite-difference Hessian) after the quasi-Newton phase.
  int newton_steps = 20;
};

/// One constrained parameter: an item coefficient or sigma.
struct ParameterEstimate {
  std::string item;       // empty for sigma
  std::string parameter;  // intercept, slope, threshold<r>, coef<l>, sigma
  double value = 0.0;
  double se = 0.0;        // NaN when unavailable
  bool fixed = false;     // not estimated (inert binary slope, fixed sigma)
};

/// Constrained parameters of a model in reporting order: item coefficients
/// in item order, then sigma. Standard errors are set to NaN.
std::vector<ParameterEstimate> parameter_table(const FittedModel& model, bool sigma_fixed);

struct FitResult {
  ModelSpec spec;
  FittedModel model;
  std::vector<std::string> unconstrained_names;
  std::vector<double> unconstrained;
  std::vector<double> unconstrained_se;
  std::vector<ParameterEstimate> estimates;
  double loglik = 0.0;
  double penalty_value = 0.0;
  bool converged = false;
  int iterations = 0;
  double grad_norm = 0.0;
  std::size_t underflow_count = 0;
  bool standard_errors_available = false;
  std::string standard_error_message;
  std::vector<double> objective_trace;  // penalized log-likelihood per accepted step
  std::vector<double> start_logliks;    // penalized optimum of each start
  std::optional<double> fixed_sigma;
  std::size_t persons = 0;

  double sigma() const { return model.sigma; }
  std::size_t parameter_count() const { return unconstrained.size(); }
  /// Throws UnknownItem when no such estimate exists.
  const ParameterEstimate& estimate(const std::string& item, const std::string& parameter) const;
};

/// Maximizes the (penalized) marginal log-likelihood. Never throws for
/// non-convergence: the result is flagged instead.
FitResult fit(const ItemResponseMatrix& data, const ModelSpec& spec, const FitOptions& options = {});

/// Starting values on the unconstrained scale from per-item moments.
std::vector<double> starting_values(const MarginalLikelihood& likelihood);

/// Negative Hessian of the penalized log-likelihood by central differences of
/// the analytic score (step h), symmetrized. Row-major.
std::vector<double> observed_information(const MarginalLikelihood& likelihood,
                                         std::span<const double> u, double h = 1e-5);

struct StandardErrors {
  std::vector<double> unconstrained;
  std::vector<double> covariance;   // unconstrained, row-major
  std::vector<double> information;  // row-major
  std::vector<double> constrained;  // in the order of FitResult::estimates
};

/// Throws SingularInformation when the information matrix is not positive
/// definite.
StandardErrors standard_errors(const FitResult& fit, const ItemResponseMatrix& data,
                               const ModelSpec& spec, unsigned threads = 1);

struct LrTestResult {
  double statistic = 0.0;
  int df = 0;
  double p_value = 1.0;
};

/// Likelihood-ratio test of a common-slope fit against the varying-slopes
/// fit of the same items. Throws NotNested or NotConverged.
LrTestResult lr_test(const FitResult& full, const FitResult& reduced);

/// Upper tail of the chi-square distribution.
double chi_square_sf(double statistic, int df);

}  // namespace thresholds
