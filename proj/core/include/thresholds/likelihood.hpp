#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "thresholds/difficulty.hpp"
#include "thresholds/model.hpp"
#include "thresholds/quadrature.hpp"
#include "thresholds/types.hpp"

namespace thresholds {

/// Probabilities below this are floored before taking logs (and counted).
inline constexpr double kProbabilityFloor = 1e-300;

/// log f(theta - delta(y)) + log delta'(y). Throws ZeroDerivative when
/// delta'(y) is not positive.
double log_density_continuous(ResponseFunctionKind response, const DifficultyFunction& delta,
                              double theta, double y);
/// log [F(theta - delta(y-1)) - F(theta - delta(y))], delta(-1) = -inf and
/// delta(top) = +inf.
double log_density_discrete(ResponseFunctionKind response, const DifficultyFunction& delta,
                            double theta, double y);
double log_density(ResponseFunctionKind response, const DifficultyFunction& delta,
                   DensityBranch branch, double theta, double y);

/// Maps the unconstrained parameter vector onto per-item difficulty
/// coefficients. Layout: item blocks in item order, then shared blocks (common
/// slope, or common spline shape followed by per-item offsets), then log sigma.
class ParameterLayout {
 public:
  /// `fixed_sigma` removes log sigma from the vector.
  static ParameterLayout build(const ItemResponseMatrix& data, const ModelSpec& spec,
                               std::optional<double> fixed_sigma = std::nullopt);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::size_t item_count() const { return items_.size(); }
  bool has_sigma() const { return !fixed_sigma_; }
  std::size_t sigma_index() const { return names_.size() - 1; }
  double sigma(std::span<const double> u) const;

  /// Unconstrained indices the item's coefficients depend on.
  const std::vector<std::size_t>& item_globals(std::size_t item) const {
    return items_[item].globals;
  }
  /// Constrained coefficients of an item and the Jacobian d c / d u[globals],
  /// row-major (coefficients x globals).
  void item_coefficients(std::size_t item, std::span<const double> u, std::vector<double>& c,
                         std::vector<double>& jacobian) const;

  /// Difficulty function templates (structure and basis) in item order.
  const std::vector<DifficultyFunction>& templates() const { return templates_; }
  std::vector<DifficultyFunction> difficulties(std::span<const double> u) const;

  /// Inverse map: unconstrained vector reproducing the given difficulties and
  /// sigma. Shared blocks are taken from the first item that uses them.
  std::vector<double> pack(const std::vector<DifficultyFunction>& difficulties,
                           double sigma) const;

  /// Indices of spline items entering the shape penalty, in item order.
  const std::vector<std::size_t>& penalty_items() const { return penalty_items_; }

 private:
  enum class Link { Parametric, InertSlope, Ordered, CommonShape };
  struct ItemBlock {
    Link link = Link::Parametric;
    std::vector<std::size_t> globals;
    std::size_t n_coefficients = 0;
  };

  std::vector<ItemBlock> items_;
  std::vector<DifficultyFunction> templates_;
  std::vector<std::string> names_;
  std::vector<std::size_t> penalty_items_;
  std::optional<double> fixed_sigma_;
};

struct LikelihoodOptions {
  unsigned threads = 1;  // 0 = hardware concurrency
  std::optional<double> fixed_sigma;
};

struct Evaluation {
  double loglik = 0.0;
  std::vector<double> gradient;  // empty unless requested
  std::size_t underflows = 0;
};

struct PenaltyValue {
  double value = 0.0;
  std::vector<double> gradient;
};

/// Gauss-Hermite marginal log-likelihood of a data set under a model
/// specification, with its analytic score. Person contributions are summed
/// in fixed blocks and reduced pairwise, so results do not depend on the
/// number of threads.
class MarginalLikelihood {
 public:
  MarginalLikelihood(ItemResponseMatrix data, ModelSpec spec, LikelihoodOptions options = {});

  const ItemResponseMatrix& data() const { return data_; }
  const ModelSpec& spec() const { return spec_; }
  const ParameterLayout& layout() const { return layout_; }
  const QuadratureRule& rule() const { return rule_; }
  const LikelihoodOptions& options() const { return options_; }

  Evaluation evaluate(std::span<const double> u, bool with_gradient) const;
  double value(std::span<const double> u) const { return evaluate(u, false).loglik; }
  /// Per-person marginal log-likelihoods.
  std::vector<double> person_values(std::span<const double> u) const;
  /// Shape penalty and its gradient; zero outside SplineFree mode.
  PenaltyValue penalty(std::span<const double> u) const;

 private:
  struct Observation {
    std::uint32_t item = 0;
    bool continuous = false;
    bool has_lower = false;  // discrete: y > 0, so delta(y-1) is finite
    bool has_upper = false;  // discrete: y below the top category
    std::size_t phi = 0;     // offset of basis(y)
    std::size_t phi_lower = 0;  // discrete: basis(y-1); continuous: basis'(y)
  };
  struct BlockResult;

  void precompute();
  void evaluate_block(std::size_t block, const std::vector<std::vector<double>>& coefficients,
                      double sigma, bool with_gradient, BlockResult& out,
                      std::vector<double>* person_ll) const;

  ItemResponseMatrix data_;
  ModelSpec spec_;
  LikelihoodOptions options_;
  ParameterLayout layout_;
  QuadratureRule rule_;
  std::vector<Observation> observations_;
  std::vector<std::size_t> person_start_;
  std::vector<double> basis_values_;
  std::vector<std::size_t> coefficient_offset_;
  std::size_t total_coefficients_ = 0;
};

double marginal_log_likelihood(std::span<const double> params, const ItemResponseMatrix& data,
                               const ModelSpec& spec);
std::vector<double> score(std::span<const double> params, const ItemResponseMatrix& data,
                          const ModelSpec& spec);
/// Throws WrongMode unless spec.slope_mode is SplineFree.
PenaltyValue shape_penalty(std::span<const double> params, const ItemResponseMatrix& data,
                           const ModelSpec& spec);

}  // namespace thresholds
