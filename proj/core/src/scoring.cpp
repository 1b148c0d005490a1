#include "thresholds/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "thresholds/error.hpp"
#include "thresholds/likelihood.hpp"
#include "thresholds/parallel.hpp"
#include "thresholds/quadrature.hpp"

namespace thresholds {

namespace {

double log_prior(double sigma, double theta) {
  const double z = theta / sigma;
  return -0.5 * z * z - std::log(sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
}

void require_items(std::span<const ItemResponse> responses) {
  if (responses.empty()) throw Error(ErrorCode::NoObservedItems, "no observed items to score");
}

// Log normalizing constant of the posterior: log sum_k w_k L(theta_k).
double log_normalizer(const FittedModel& model, std::span<const ItemResponse> responses,
                      const QuadratureRule& rule) {
  double max_ll = -kInf;
  std::vector<double> ll(rule.nodes.size());
  for (std::size_t k = 0; k < ll.size(); ++k) {
    const double theta = std::numbers::sqrt2 * model.sigma * rule.nodes[k];
    ll[k] = std::log(rule.weights[k]) + response_log_likelihood(model, responses, theta);
    max_ll = std::max(max_ll, ll[k]);
  }
  double total = 0.0;
  for (double v : ll) total += std::exp(v - max_ll);
  return max_ll + std::log(total);
}

}  // namespace

double response_log_likelihood(const FittedModel& model, std::span<const ItemResponse> responses,
                               double theta) {
  double s = 0.0;
  for (const auto& r : responses) {
    if (r.item >= model.items.size()) throw Error(ErrorCode::UnknownItem, "response names an unknown item");
    s += log_density(model.response_function, model.difficulties[r.item],
                     model.items[r.item].treat_as, theta, r.value);
  }
  return s;
}

double posterior_density(const FittedModel& model, std::span<const ItemResponse> responses,
                         double theta) {
  if (responses.empty()) return std::exp(log_prior(model.sigma, theta));
  const auto rule = gauss_hermite(model.quadrature_nodes);
  const double log_c = log_normalizer(model, responses, rule);
  return std::exp(response_log_likelihood(model, responses, theta) + log_prior(model.sigma, theta) -
                  log_c);
}

double posterior_mode(const FittedModel& model, std::span<const ItemResponse> responses) {
  require_items(responses);
  const auto objective = [&](double t) {
    return response_log_likelihood(model, responses, t) + log_prior(model.sigma, t);
  };
  // Coarse scan for the bracket, then golden-section refinement.
  const double lo = -8.0 * model.sigma;
  const double hi = 8.0 * model.sigma;
  constexpr int kGrid = 160;
  int best = 0;
  double best_val = -kInf;
  for (int g = 0; g <= kGrid; ++g) {
    const double v = objective(lo + (hi - lo) * g / kGrid);
    if (v > best_val) {
      best_val = v;
      best = g;
    }
  }
  double a = lo + (hi - lo) * std::max(best - 1, 0) / kGrid;
  double b = lo + (hi - lo) * std::min(best + 1, kGrid) / kGrid;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = objective(c);
  double fd = objective(d);
  for (int it = 0; it < 200 && b - a > 1e-12 * (1.0 + std::fabs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = objective(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = objective(d);
    }
  }
  return 0.5 * (a + b);
}

PersonScore posterior_mean(const FittedModel& model, std::span<const ItemResponse> responses,
                           std::size_t person_index) {
  require_items(responses);
  const auto rule = gauss_hermite(model.quadrature_nodes);
  std::vector<double> ll(rule.nodes.size());
  std::vector<double> theta(rule.nodes.size());
  double max_ll = -kInf;
  for (std::size_t k = 0; k < ll.size(); ++k) {
    theta[k] = std::numbers::sqrt2 * model.sigma * rule.nodes[k];
    ll[k] = std::log(rule.weights[k]) + response_log_likelihood(model, responses, theta[k]);
    max_ll = std::max(max_ll, ll[k]);
  }
  double total = 0.0;
  double m1 = 0.0;
  for (std::size_t k = 0; k < ll.size(); ++k) {
    const double w = std::exp(ll[k] - max_ll);
    total += w;
    m1 += w * theta[k];
  }
  const double mean = m1 / total;
  double m2 = 0.0;
  for (std::size_t k = 0; k < ll.size(); ++k) {
    m2 += std::exp(ll[k] - max_ll) * (theta[k] - mean) * (theta[k] - mean);
  }
  PersonScore s;
  s.person_index = person_index;
  s.posterior_mean = mean;
  s.posterior_sd = std::sqrt(m2 / total);
  s.posterior_mode = posterior_mode(model, responses);
  s.n_items_observed = responses.size();
  if (!std::isfinite(s.posterior_mean) || !std::isfinite(s.posterior_mode)) {
    throw Error(ErrorCode::NonFiniteLikelihood,
                "posterior of person " + std::to_string(person_index) + " is not finite");
  }
  return s;
}

std::vector<ScoreRow> score_persons(const FittedModel& model, const ItemResponseMatrix& data,
                                    unsigned threads) {
  std::vector<std::size_t> column(data.item_count());
  for (std::size_t i = 0; i < data.item_count(); ++i) column[i] = model.item_index(data.item(i).id);
  std::vector<ScoreRow> rows(data.persons());
  const std::size_t blocks = (data.persons() + kPersonBlock - 1) / kPersonBlock;
  run_blocks(blocks, threads, [&](std::size_t b) {
    const std::size_t end = std::min(data.persons(), (b + 1) * kPersonBlock);
    std::vector<ItemResponse> responses;
    for (std::size_t p = b * kPersonBlock; p < end; ++p) {
      responses.clear();
      for (std::size_t i = 0; i < data.item_count(); ++i) {
        if (data.observed(p, i)) responses.push_back({column[i], data.value(p, i)});
      }
      try {
        rows[p].score = posterior_mean(model, responses, p);
      } catch (const Error& e) {
        rows[p].error = e.what();
      }
    }
  });
  return rows;
}

}  // namespace thresholds
