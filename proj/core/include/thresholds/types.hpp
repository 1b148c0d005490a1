#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "thresholds/response_function.hpp"

namespace thresholds {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Support of an item's observable response.
struct SupportKind {
  enum class Type { Continuous, Binary, OrderedCategorical, Count };

  Type type = Type::Continuous;
  double lower = -kInf;  // Continuous only
  double upper = kInf;   // Continuous only
  int categories = 0;    // OrderedCategorical: labels 0..categories-1

  static SupportKind continuous(double lower = -kInf, double upper = kInf);
  static SupportKind binary();
  static SupportKind ordinal(int categories);
  static SupportKind count();

  bool is_discrete() const { return type != Type::Continuous; }
  /// Binary and ordinal supports; the top category carries delta = +inf.
  bool is_finite_discrete() const {
    return type == Type::Binary || type == Type::OrderedCategorical;
  }
  /// Number of categories for finite discrete supports (2 for binary).
  int category_count() const;
  /// Label of the top category of a finite discrete support.
  int top_category() const { return category_count() - 1; }
  bool contains(double y) const;

  /// Throws InvalidConfig when the variant's invariants fail.
  void validate() const;

  bool operator==(const SupportKind&) const = default;
};

std::string describe(const SupportKind& support);

enum class FamilyKind { Linear, Log, LogP1, InverseCdf, FreeOrdinal, BSpline };

std::string_view to_string(FamilyKind kind);
FamilyKind family_from_string(std::string_view name);

/// Configuration of an item's difficulty family. `values` optionally carries
/// constrained parameter values (true values for simulation, or a fixed
/// model for scoring/curves): (intercept, slope) for the parametric families,
/// increasing thresholds for FreeOrdinal, nondecreasing coefficients for BSpline.
struct DifficultyFamily {
  FamilyKind kind = FamilyKind::Linear;
  std::optional<ResponseFunctionKind> inverse_cdf_kind;
  int n_basis = 8;
  int degree = 3;
  std::optional<std::array<double, 2>> knot_range;
  std::vector<double> values;

  bool is_parametric() const {
    return kind == FamilyKind::Linear || kind == FamilyKind::Log || kind == FamilyKind::LogP1 ||
           kind == FamilyKind::InverseCdf;
  }

  bool operator==(const DifficultyFamily&) const = default;
};

enum class DensityBranch { Discrete, Continuous };

/// Affine map of a bounded continuous item onto (0,1) followed by the
/// boundary squeeze y' = (y (n-1) + 0.5) / n.
struct UnitRescale {
  double lower = 0.0;
  double upper = 1.0;
  int levels = 100;

  bool operator==(const UnitRescale&) const = default;
};

struct ItemSpec {
  std::string id;
  SupportKind support;
  DifficultyFamily family;
  DensityBranch treat_as = DensityBranch::Discrete;
  /// Permits the continuous branch for ordinal/count items.
  bool allow_continuous_override = false;
  /// Unit rescale + boundary squeeze for bounded continuous data. Defaults to
  /// on for InverseCdf items (whose difficulty diverges at 0 and 1), off otherwise.
  std::optional<bool> squeeze;
  /// Filled in at ingestion when the unit rescale was applied.
  std::optional<UnitRescale> rescale;

  /// Support on which the difficulty function lives: the declared support,
  /// or a continuous interval when a discrete item uses the continuous branch.
  SupportKind effective_support() const;
  bool uses_unit_rescale() const;

  void validate() const;

  bool operator==(const ItemSpec&) const = default;
};

/// Persons x items observations with a missing-value mask. Instances are only
/// created through `create`, which enforces every invariant. `values` passed to
/// `create` are raw values; items carrying a UnitRescale are mapped onto (0,1).
class ItemResponseMatrix {
 public:
  struct Options {
    /// Scoring accepts persons with no observed item; estimation does not.
    bool allow_empty_persons = false;
  };

  static ItemResponseMatrix create(std::vector<ItemSpec> items, std::size_t persons,
                                   std::vector<double> values, std::vector<std::uint8_t> observed,
                                   Options options);
  static ItemResponseMatrix create(std::vector<ItemSpec> items, std::size_t persons,
                                   std::vector<double> values, std::vector<std::uint8_t> observed) {
    return create(std::move(items), persons, std::move(values), std::move(observed), Options{});
  }

  std::size_t persons() const { return persons_; }
  std::size_t item_count() const { return items_.size(); }
  const std::vector<ItemSpec>& items() const { return items_; }
  const ItemSpec& item(std::size_t i) const { return items_[i]; }
  std::optional<std::size_t> item_index(std::string_view id) const;

  /// Value on the model scale (after any unit rescale).
  double value(std::size_t person, std::size_t item) const {
    return values_[person * items_.size() + item];
  }
  /// Value as ingested.
  double raw_value(std::size_t person, std::size_t item) const {
    return raw_[person * items_.size() + item];
  }
  bool observed(std::size_t person, std::size_t item) const {
    return observed_[person * items_.size() + item] != 0;
  }
  std::size_t observed_count(std::size_t item) const;
  std::size_t person_observed_count(std::size_t person) const;
  /// Minimum and maximum observed value of an item.
  std::array<double, 2> observed_range(std::size_t item) const;

  /// New matrix with the persons in `rows` (repeats allowed) in that order.
  ItemResponseMatrix select_persons(const std::vector<std::size_t>& rows) const;
  /// New matrix with the items reordered by `order`.
  ItemResponseMatrix select_items(const std::vector<std::size_t>& order) const;

  bool operator==(const ItemResponseMatrix& other) const;

 private:
  ItemResponseMatrix() = default;

  std::size_t persons_ = 0;
  std::vector<ItemSpec> items_;
  std::vector<double> raw_;
  std::vector<double> values_;
  std::vector<std::uint8_t> observed_;
  Options options_;
};

enum class SlopeMode { CommonSlope, VaryingSlopes, SplineFree, SplineCommonShape };
enum class Identification { FirstSplineInterceptZero, PenaltyOnly };

std::string_view to_string(SlopeMode mode);
SlopeMode slope_mode_from_string(std::string_view name);
std::string_view to_string(Identification id);
Identification identification_from_string(std::string_view name);
std::string_view to_string(DensityBranch branch);

/// Model-level settings. Per-item families and supports travel with the
/// ItemSpecs of the data being fitted.
struct ModelSpec {
  ResponseFunctionKind response_function = ResponseFunctionKind::Normal;
  SlopeMode slope_mode = SlopeMode::VaryingSlopes;
  int quadrature_nodes = 30;
  double penalty_lambda = 0.0;
  Identification identification = Identification::PenaltyOnly;

  void validate() const;
};

}  // namespace thresholds
