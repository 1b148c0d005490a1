#pragma once

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "thresholds/model.hpp"

namespace thresholds {

enum class CurveKind { PT, IC, Difficulty };

std::string_view to_string(CurveKind kind);

/// Tabulated curve of one item.
///   PT:         y -> F(theta - delta(y)) at fixed theta
///   IC:         theta -> F(theta - delta(y)) at fixed y
///   Difficulty: y -> delta(y)
struct CurveTable {
  CurveKind kind = CurveKind::PT;
  std::string item_id;
  std::optional<double> fixed;  // theta for PT, y for IC
  std::vector<double> grid;
  std::vector<double> values;
  bool step = false;  // discrete item: render PT as a step function
};

/// Throw OutOfSupport when a grid point (or the fixed y) is outside the item's support.
CurveTable pt_curve(const FittedModel& model, std::size_t item, double theta,
                    const std::vector<double>& y_grid);
/// y must lie below the top category of a finite support.
CurveTable ic_curve(const FittedModel& model, std::size_t item, double y,
                    const std::vector<double>& theta_grid);
CurveTable difficulty_curve(const FittedModel& model, std::size_t item,
                            const std::vector<double>& y_grid);

/// Support points for discrete items (up to the largest observed count for
/// count items), otherwise 201 points over the observed range.
std::vector<double> default_y_grid(const FittedModel& model, std::size_t item);
/// 201 points over [-4 sigma, 4 sigma].
std::vector<double> default_theta_grid(const FittedModel& model);

/// CSV with header kind,item,fixed,abscissa,value.
void write_curves_csv(std::ostream& out, std::span<const CurveTable> tables);

/// Checks the monotonicity and range invariants of a single table; returns an
/// empty string when they hold.
std::string check_curve(const CurveTable& table);
/// IC curves of different items at the same y never cross.
std::string check_no_crossing(const CurveTable& a, const CurveTable& b);

}  // namespace thresholds
