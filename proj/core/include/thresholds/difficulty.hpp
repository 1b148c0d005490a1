#pragma once

#include <array>
#include <memory>
#include <span>
#include <vector>

#include "thresholds/response_function.hpp"
#include "thresholds/types.hpp"

namespace thresholds {

/// Clamped B-spline basis with equally spaced interior knots over
/// [lower, upper]. Outside that interval the basis is extended linearly from
/// the boundary so that spline difficulty functions stay monotone and finite.
class BSplineBasis {
 public:
  /// Throws InvalidConfig unless n_basis >= degree + 1, degree >= 1 and lower < upper.
  static BSplineBasis build(double lower, double upper, int n_basis, int degree);

  int size() const { return n_basis_; }
  int degree() const { return degree_; }
  double lower() const { return lower_; }
  double upper() const { return upper_; }
  const std::vector<double>& knots() const { return knots_; }

  void evaluate(double y, std::span<double> out) const;
  void derivative(double y, std::span<double> out) const;
  std::vector<double> evaluate(double y) const;
  std::vector<double> derivative(double y) const;

  /// Knot averages; coefficients equal to a + b * greville() reproduce the
  /// line a + b * y exactly.
  std::vector<double> greville() const;

 private:
  // Nonzero basis functions of the given degree on knot span `span`.
  void nonzero(int span, double y, int degree, std::span<double> out) const;
  int find_span(double y) const;
  void evaluate_inside(double y, std::span<double> out) const;
  void derivative_inside(double y, std::span<double> out) const;

  double lower_ = 0.0;
  double upper_ = 1.0;
  int n_basis_ = 0;
  int degree_ = 3;
  std::vector<double> knots_;
};

/// Monotone item difficulty function. Every family is linear in its
/// constrained coefficients: delta(y) = basis(y) . coefficients, where
///   Linear/Log/LogP1/InverseCdf: coefficients (intercept, slope), basis (1, g(y))
///   FreeOrdinal: increasing thresholds, basis e_y
///   BSpline: nondecreasing coefficients, basis B-spline values.
/// For a finite discrete support the top category maps to +inf.
class DifficultyFunction {
 public:
  static DifficultyFunction parametric(FamilyKind kind, double intercept, double slope,
                                       SupportKind support,
                                       ResponseFunctionKind inverse_cdf_kind = ResponseFunctionKind::Normal);
  static DifficultyFunction free_ordinal(std::vector<double> thresholds, SupportKind support);
  static DifficultyFunction bspline(std::shared_ptr<const BSplineBasis> basis,
                                    std::vector<double> coefficients, SupportKind support);

  FamilyKind kind() const { return kind_; }
  const SupportKind& support() const { return support_; }
  const std::vector<double>& coefficients() const { return coefficients_; }
  std::size_t coefficient_count() const { return coefficients_.size(); }
  ResponseFunctionKind inverse_cdf_kind() const { return icdf_kind_; }
  const std::shared_ptr<const BSplineBasis>& spline_basis() const { return basis_; }

  /// Same structure, new constrained coefficients (checked for monotonicity).
  DifficultyFunction with_coefficients(std::vector<double> coefficients) const;

  /// Throws OutOfSupport when y is not in the support.
  double eval(double y) const;
  /// d delta / dy. Throws NotDifferentiable for FreeOrdinal.
  double eval_deriv(double y) const;
  /// log(d delta / dy), kept finite where the derivative itself overflows.
  double log_eval_deriv(double y) const;
  /// y with eval(y) = t. Throws OutOfRange when t is outside the range of
  /// delta, NotDifferentiable for FreeOrdinal.
  double invert(double t) const;

  /// basis(y) such that eval(y) = basis(y) . coefficients; y finite and
  /// below the top category.
  void basis(double y, std::span<double> out) const;
  /// d basis / dy.
  void basis_deriv(double y, std::span<double> out) const;

  std::vector<double> to_unconstrained() const;
  DifficultyFunction from_unconstrained(std::span<const double> u) const;

 private:
  DifficultyFunction() = default;
  void check_support(double y) const;
  double transform(double y) const;        // g(y) of the parametric families
  double transform_deriv(double y) const;  // g'(y)
  void check_coefficients() const;
  double spline_value(double y) const;  // no support check
  double spline_slope(double y) const;

  FamilyKind kind_ = FamilyKind::Linear;
  SupportKind support_;
  ResponseFunctionKind icdf_kind_ = ResponseFunctionKind::Normal;
  std::shared_ptr<const BSplineBasis> basis_;
  std::vector<double> coefficients_;
};

/// Floor applied to adjacent spline-coefficient differences in the log map.
inline constexpr double kSplineDifferenceFloor = 1e-8;

/// (c0, log(c1 - c0), ...). Differences below `floor` are raised to it; negative
/// differences (or nonpositive ones when floor == 0) throw NonMonotoneInput.
std::vector<double> ordered_to_unconstrained(std::span<const double> c, double floor);
std::vector<double> ordered_from_unconstrained(std::span<const double> u);

/// Knot range used for a spline item when none is configured: the observed
/// range for continuous data, [0, k-2] for ordinal items, [0, max] for counts.
std::array<double, 2> default_knot_range(const ItemSpec& item, std::array<double, 2> observed);

}  // namespace thresholds
