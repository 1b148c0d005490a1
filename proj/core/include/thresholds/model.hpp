#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "thresholds/difficulty.hpp"
#include "thresholds/response_function.hpp"
#include "thresholds/types.hpp"

namespace thresholds {

/// A thresholds model with concrete parameter values: one difficulty function
/// per item, the response function and the trait SD. Produced by fitting, or
/// built directly from item metadata carrying `family.values`.
struct FittedModel {
  ResponseFunctionKind response_function = ResponseFunctionKind::Normal;
  std::vector<ItemSpec> items;
  std::vector<DifficultyFunction> difficulties;
  double sigma = 1.0;
  int quadrature_nodes = 30;
  /// Observed [min, max] per item on the model scale; empty when unknown.
  std::vector<std::array<double, 2>> observed_ranges;

  /// Throws UnknownItem.
  std::size_t item_index(std::string_view id) const;

  /// Builds a model from `family.values` of every item. Spline items need a
  /// configured knot_range. Throws InvalidConfig when values are missing.
  static FittedModel from_item_values(std::vector<ItemSpec> items, ResponseFunctionKind response,
                                      double sigma, int quadrature_nodes = 30);
};

/// Difficulty function of the item's family with the given constrained
/// coefficients; `basis` is required for spline items.
DifficultyFunction make_difficulty(const ItemSpec& item, ResponseFunctionKind response,
                                   std::shared_ptr<const BSplineBasis> basis,
                                   std::vector<double> coefficients);

/// Number of constrained coefficients of the item's family.
std::size_t coefficient_count(const ItemSpec& item);

}  // namespace thresholds
