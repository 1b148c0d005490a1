#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "thresholds/estimation.hpp"
#include "thresholds/model.hpp"
#include "thresholds/types.hpp"

namespace thresholds {

/// Draws a response given theta and a uniform u in (0,1), with u playing the
/// role of an exceedance draw: Y > y exactly when u < F(theta - delta(y)).
///   continuous: y = delta^{-1}(theta - F^{-1}(u))
///   discrete:   smallest r with u >= F(theta - delta(r))
/// Count items stop once F(theta - delta(r)) <= 1e-12.
double sample_response(ResponseFunctionKind response, const DifficultyFunction& delta,
                       DensityBranch branch, double theta, double u);

struct SimulationScenario {
  FittedModel truth;   // true difficulties, response function and sigma
  ModelSpec fit_spec;  // model refitted in recovery studies
  std::size_t persons = 100;
  std::uint64_t seed = 0;
  int replications = 1;

  void validate() const;
};

struct SimulatedData {
  ItemResponseMatrix data;
  std::vector<double> theta;
};

/// Dataset `replication` of a scenario; each replication uses its own
/// substream of the scenario seed.
SimulatedData simulate_dataset(const SimulationScenario& scenario, std::size_t replication = 0);

struct ParameterRecovery {
  std::string item;
  std::string parameter;
  double truth = 0.0;
  double mean_estimate = 0.0;
  double bias = 0.0;
  double rmse = 0.0;
  double coverage = 0.0;  // share of replications with |estimate - truth| <= 2 SE
  int replications = 0;
};

struct RecoveryReport {
  std::uint64_t seed = 0;
  std::size_t persons = 0;
  int replications = 0;
  int converged = 0;
  int not_converged = 0;
  int se_unavailable = 0;
  std::vector<ParameterRecovery> parameters;
  std::vector<double> theta_correlation;  // per converged replication
  double mean_theta_correlation = 0.0;
  double intercept_rmse = 0.0;            // pooled over item intercepts
  double item_parameter_coverage = 0.0;   // pooled over estimated item parameters
};

/// Simulates, refits and scores every replication (in parallel over
/// replications), then aggregates. Throws InvalidConfig for zero replications.
RecoveryReport recovery_study(const SimulationScenario& scenario, const FitOptions& options = {},
                              unsigned threads = 1);

std::string recovery_report_json(const RecoveryReport& report);
std::string recovery_report_table(const RecoveryReport& report);

/// Scenario file: {"response_function", "sigma", "persons", "seed",
/// "replications", "model": {...}, "items": {...}, "order": [...]} with true
/// parameter values in each item's `family.values`. A missing seed is an error.
SimulationScenario parse_scenario(std::string_view json_text);
SimulationScenario load_scenario(const std::filesystem::path& path);

}  // namespace thresholds
