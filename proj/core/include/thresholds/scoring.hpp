#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thresholds/model.hpp"
#include "thresholds/types.hpp"

namespace thresholds {

/// Observed response of one item, on the model scale.
struct ItemResponse {
  std::size_t item = 0;
  double value = 0.0;
};

struct PersonScore {
  std::size_t person_index = 0;
  double posterior_mean = 0.0;
  double posterior_mode = 0.0;
  double posterior_sd = 0.0;
  std::size_t n_items_observed = 0;
};

/// sum_i log f_i(y_i | theta) under each item's density branch.
double response_log_likelihood(const FittedModel& model, std::span<const ItemResponse> responses,
                               double theta);

/// Posterior density of theta, normalized with the model's quadrature rule.
/// With no responses this is the N(0, sigma^2) prior density.
double posterior_density(const FittedModel& model, std::span<const ItemResponse> responses,
                         double theta);

/// Posterior mean and SD by quadrature, and the posterior mode. Throws
/// NoObservedItems for an empty response set.
PersonScore posterior_mean(const FittedModel& model, std::span<const ItemResponse> responses,
                           std::size_t person_index = 0);
/// Mode of the log-posterior on [-8 sigma, 8 sigma].
double posterior_mode(const FittedModel& model, std::span<const ItemResponse> responses);

struct ScoreRow {
  std::optional<PersonScore> score;
  std::string error;  // set when the person could not be scored
};

/// Scores every person of a matrix whose items match the model by id.
/// Persons without observed items get an error entry.
std::vector<ScoreRow> score_persons(const FittedModel& model, const ItemResponseMatrix& data,
                                    unsigned threads = 1);

}  // namespace thresholds
