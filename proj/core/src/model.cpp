#include "thresholds/model.hpp"

#include <cmath>

#include "thresholds/error.hpp"

namespace thresholds {

std::size_t FittedModel::item_index(std::string_view id) const {
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (items[i].id == id) return i;
  }
  throw Error(ErrorCode::UnknownItem, "unknown item '" + std::string(id) + "'");
}

std::size_t coefficient_count(const ItemSpec& item) {
  switch (item.family.kind) {
    case FamilyKind::FreeOrdinal: return static_cast<std::size_t>(item.support.category_count() - 1);
    case FamilyKind::BSpline: return static_cast<std::size_t>(item.family.n_basis);
    default: return 2;
  }
}

DifficultyFunction make_difficulty(const ItemSpec& item, ResponseFunctionKind response,
                                   std::shared_ptr<const BSplineBasis> basis,
                                   std::vector<double> coefficients) {
  const auto support = item.effective_support();
  switch (item.family.kind) {
    case FamilyKind::FreeOrdinal: return DifficultyFunction::free_ordinal(std::move(coefficients), support);
    case FamilyKind::BSpline:
      return DifficultyFunction::bspline(std::move(basis), std::move(coefficients), support);
    default:
      if (coefficients.size() != 2) {
        throw Error(ErrorCode::InvalidConfig,
                    "item '" + item.id + "' needs values [intercept, slope]");
      }
      return DifficultyFunction::parametric(item.family.kind, coefficients[0], coefficients[1],
                                            support,
                                            item.family.inverse_cdf_kind.value_or(response));
  }
}

FittedModel FittedModel::from_item_values(std::vector<ItemSpec> items,
                                          ResponseFunctionKind response, double sigma,
                                          int quadrature_nodes) {
  if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
    throw Error(ErrorCode::InvalidConfig, "sigma must be finite and >= 0");
  }
  FittedModel m;
  m.response_function = response;
  m.sigma = sigma;
  m.quadrature_nodes = quadrature_nodes;
  for (auto& item : items) {
    item.validate();
    if (item.family.values.size() != coefficient_count(item)) {
      throw Error(ErrorCode::InvalidConfig,
                  "item '" + item.id + "' needs " + std::to_string(coefficient_count(item)) +
                      " parameter values");
    }
    std::shared_ptr<const BSplineBasis> basis;
    if (item.family.kind == FamilyKind::BSpline) {
      if (!item.family.knot_range) {
        throw Error(ErrorCode::InvalidConfig, "spline item '" + item.id + "' needs a knot_range");
      }
      basis = std::make_shared<const BSplineBasis>(
          BSplineBasis::build((*item.family.knot_range)[0], (*item.family.knot_range)[1],
                              item.family.n_basis, item.family.degree));
    }
    m.difficulties.push_back(make_difficulty(item, response, basis, item.family.values));
  }
  m.items = std::move(items);
  return m;
}

}  // namespace thresholds
