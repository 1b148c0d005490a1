#include "thresholds/difficulty.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "thresholds/error.hpp"

namespace thresholds {

// ---------------------------------------------------------------------------
// BSplineBasis

BSplineBasis BSplineBasis::build(double lower, double upper, int n_basis, int degree) {
  if (degree < 1) throw Error(ErrorCode::InvalidConfig, "spline degree must be >= 1");
  if (n_basis < degree + 1) {
    throw Error(ErrorCode::InvalidConfig, "spline needs n_basis >= degree + 1");
  }
  if (degree > 15 || n_basis > 64) {
    throw Error(ErrorCode::InvalidConfig, "spline supports degree <= 15 and n_basis <= 64");
  }
  if (!(lower < upper) || !std::isfinite(lower) || !std::isfinite(upper)) {
    throw Error(ErrorCode::InvalidConfig, "spline range needs finite lower < upper");
  }
  BSplineBasis b;
  b.lower_ = lower;
  b.upper_ = upper;
  b.n_basis_ = n_basis;
  b.degree_ = degree;
  const int interior = n_basis - degree - 1;
  b.knots_.assign(degree + 1, lower);
  for (int j = 1; j <= interior; ++j) {
    b.knots_.push_back(lower + (upper - lower) * j / (interior + 1));
  }
  b.knots_.insert(b.knots_.end(), degree + 1, upper);
  return b;
}

int BSplineBasis::find_span(double y) const {
  if (y >= upper_) return n_basis_ - 1;
  if (y <= lower_) return degree_;
  int lo = degree_;
  int hi = n_basis_;
  while (hi - lo > 1) {
    const int mid = (lo + hi) / 2;
    if (y < knots_[mid]) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return lo;
}

void BSplineBasis::nonzero(int span, double y, int degree, std::span<double> out) const {
  double left[16];
  double right[16];
  out[0] = 1.0;
  for (int j = 1; j <= degree; ++j) {
    left[j] = y - knots_[span + 1 - j];
    right[j] = knots_[span + j] - y;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double temp = out[r] / (right[r + 1] + left[j - r]);
      out[r] = saved + right[r + 1] * temp;
      saved = left[j - r] * temp;
    }
    out[j] = saved;
  }
}

void BSplineBasis::evaluate_inside(double y, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int span = find_span(y);
  double local[16];
  nonzero(span, y, degree_, std::span<double>(local, degree_ + 1));
  for (int r = 0; r <= degree_; ++r) out[span - degree_ + r] = local[r];
}

void BSplineBasis::derivative_inside(double y, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  const int p = degree_;
  const int span = find_span(y);
  double low[16];
  // N_{j,p-1} for j = span-p+1 .. span
  nonzero(span, y, p - 1, std::span<double>(low, p));
  const auto lower_basis = [&](int j) {
    const int r = j - (span - p + 1);
    return (r >= 0 && r < p) ? low[r] : 0.0;
  };
  for (int j = span - p; j <= span; ++j) {
    double d = 0.0;
    const double den1 = knots_[j + p] - knots_[j];
    const double den2 = knots_[j + p + 1] - knots_[j + 1];
    if (den1 > 0.0) d += p / den1 * lower_basis(j);
    if (den2 > 0.0) d -= p / den2 * lower_basis(j + 1);
    out[j] = d;
  }
}

void BSplineBasis::evaluate(double y, std::span<double> out) const {
  if (y >= lower_ && y <= upper_) {
    evaluate_inside(y, out);
    return;
  }
  const double edge = y < lower_ ? lower_ : upper_;
  double deriv[64];
  std::span<double> d(deriv, n_basis_);
  evaluate_inside(edge, out);
  derivative_inside(edge, d);
  for (int l = 0; l < n_basis_; ++l) out[l] += (y - edge) * d[l];
}

void BSplineBasis::derivative(double y, std::span<double> out) const {
  derivative_inside(std::clamp(y, lower_, upper_), out);
}

std::vector<double> BSplineBasis::evaluate(double y) const {
  std::vector<double> out(n_basis_);
  evaluate(y, out);
  return out;
}

std::vector<double> BSplineBasis::derivative(double y) const {
  std::vector<double> out(n_basis_);
  derivative(y, out);
  return out;
}

std::vector<double> BSplineBasis::greville() const {
  std::vector<double> g(n_basis_);
  for (int l = 0; l < n_basis_; ++l) {
    double s = 0.0;
    for (int k = 1; k <= degree_; ++k) s += knots_[l + k];
    g[l] = s / degree_;
  }
  return g;
}

// ---------------------------------------------------------------------------
// Reparameterization

std::vector<double> ordered_to_unconstrained(std::span<const double> c, double floor) {
  std::vector<double> u(c.size());
  if (c.empty()) return u;
  u[0] = c[0];
  for (std::size_t l = 1; l < c.size(); ++l) {
    double diff = c[l] - c[l - 1];
    if (diff < 0.0 || (floor == 0.0 && diff <= 0.0) || std::isnan(diff)) {
      std::ostringstream os;
      os << "coefficients must increase: c[" << l - 1 << "]=" << c[l - 1] << " > c[" << l
         << "]=" << c[l];
      throw Error(ErrorCode::NonMonotoneInput, os.str());
    }
    u[l] = std::log(std::max(diff, floor));
  }
  return u;
}

std::vector<double> ordered_from_unconstrained(std::span<const double> u) {
  std::vector<double> c(u.size());
  if (u.empty()) return c;
  c[0] = u[0];
  for (std::size_t l = 1; l < u.size(); ++l) c[l] = c[l - 1] + std::exp(u[l]);
  return c;
}

std::array<double, 2> default_knot_range(const ItemSpec& item, std::array<double, 2> observed) {
  if (item.family.knot_range) return *item.family.knot_range;
  const auto support = item.effective_support();
  if (item.treat_as == DensityBranch::Discrete) {
    if (support.type == SupportKind::Type::OrderedCategorical) {
      return {0.0, static_cast<double>(support.categories - 2)};
    }
    return {0.0, std::max(observed[1], 1.0)};
  }
  if (observed[0] < observed[1]) return observed;
  return {observed[0] - 0.5, observed[0] + 0.5};
}

// ---------------------------------------------------------------------------
// DifficultyFunction

DifficultyFunction DifficultyFunction::parametric(FamilyKind kind, double intercept, double slope,
                                                  SupportKind support,
                                                  ResponseFunctionKind inverse_cdf_kind) {
  DifficultyFunction d;
  d.kind_ = kind;
  d.support_ = support;
  d.icdf_kind_ = inverse_cdf_kind;
  d.coefficients_ = {intercept, slope};
  if (!(kind == FamilyKind::Linear || kind == FamilyKind::Log || kind == FamilyKind::LogP1 ||
        kind == FamilyKind::InverseCdf)) {
    throw Error(ErrorCode::InvalidConfig, "parametric() needs a two-parameter family");
  }
  d.check_coefficients();
  return d;
}

DifficultyFunction DifficultyFunction::free_ordinal(std::vector<double> thresholds,
                                                    SupportKind support) {
  if (!support.is_finite_discrete()) {
    throw Error(ErrorCode::InvalidConfig, "free ordinal difficulties need a finite discrete support");
  }
  DifficultyFunction d;
  d.kind_ = FamilyKind::FreeOrdinal;
  d.support_ = support;
  d.coefficients_ = std::move(thresholds);
  d.check_coefficients();
  return d;
}

DifficultyFunction DifficultyFunction::bspline(std::shared_ptr<const BSplineBasis> basis,
                                               std::vector<double> coefficients,
                                               SupportKind support) {
  if (!basis) throw Error(ErrorCode::InvalidConfig, "spline difficulty needs a basis");
  DifficultyFunction d;
  d.kind_ = FamilyKind::BSpline;
  d.support_ = support;
  d.basis_ = std::move(basis);
  d.coefficients_ = std::move(coefficients);
  d.check_coefficients();
  return d;
}

DifficultyFunction DifficultyFunction::with_coefficients(std::vector<double> coefficients) const {
  DifficultyFunction d = *this;
  d.coefficients_ = std::move(coefficients);
  d.check_coefficients();
  return d;
}

void DifficultyFunction::check_coefficients() const {
  for (double c : coefficients_) {
    if (!std::isfinite(c)) {
      throw Error(ErrorCode::NonMonotoneInput, "difficulty coefficients must be finite");
    }
  }
  switch (kind_) {
    case FamilyKind::FreeOrdinal:
      if (coefficients_.size() != static_cast<std::size_t>(support_.category_count() - 1)) {
        throw Error(ErrorCode::InvalidConfig,
                    "free ordinal difficulty needs one threshold per category boundary");
      }
      for (std::size_t r = 1; r < coefficients_.size(); ++r) {
        if (!(coefficients_[r] > coefficients_[r - 1])) {
          throw Error(ErrorCode::NonMonotoneInput, "ordinal thresholds must strictly increase");
        }
      }
      break;
    case FamilyKind::BSpline:
      if (coefficients_.size() != static_cast<std::size_t>(basis_->size())) {
        throw Error(ErrorCode::InvalidConfig, "spline coefficient count must match the basis");
      }
      for (std::size_t l = 1; l < coefficients_.size(); ++l) {
        if (coefficients_[l] < coefficients_[l - 1]) {
          throw Error(ErrorCode::NonMonotoneInput, "spline coefficients must be nondecreasing");
        }
      }
      break;
    default:
      if (coefficients_.size() != 2) {
        throw Error(ErrorCode::InvalidConfig, "parametric difficulty needs (intercept, slope)");
      }
      if (!(coefficients_[1] > 0.0)) {
        throw Error(ErrorCode::NonMonotoneInput, "difficulty slope must be positive");
      }
  }
}

void DifficultyFunction::check_support(double y) const {
  bool ok = support_.contains(y);
  if (ok && kind_ == FamilyKind::Log) ok = y >= 0.0;
  if (ok && kind_ == FamilyKind::InverseCdf) ok = y >= 0.0 && y <= 1.0;
  if (!ok) {
    std::ostringstream os;
    os << "y=" << y << " outside support " << describe(support_) << " of the "
       << to_string(kind_) << " difficulty";
    throw Error(ErrorCode::OutOfSupport, os.str());
  }
}

double DifficultyFunction::transform(double y) const {
  switch (kind_) {
    case FamilyKind::Linear: return y;
    case FamilyKind::Log: return y == 0.0 ? -kInf : std::log(y);
    case FamilyKind::LogP1: return std::log1p(y);
    case FamilyKind::InverseCdf:
      if (y == 0.0) return -kInf;
      if (y == 1.0) return kInf;
      return quantile(icdf_kind_, y);
    default: return y;
  }
}

double DifficultyFunction::transform_deriv(double y) const {
  switch (kind_) {
    case FamilyKind::Linear: return 1.0;
    case FamilyKind::Log: return 1.0 / y;
    case FamilyKind::LogP1: return 1.0 / (1.0 + y);
    case FamilyKind::InverseCdf: return 1.0 / pdf(icdf_kind_, quantile(icdf_kind_, y));
    default: return 0.0;
  }
}

double DifficultyFunction::eval(double y) const {
  check_support(y);
  if (support_.is_finite_discrete() && y == support_.top_category()) return kInf;
  switch (kind_) {
    case FamilyKind::FreeOrdinal: return coefficients_[static_cast<std::size_t>(y)];
    case FamilyKind::BSpline: {
      double phi[64];
      basis_->evaluate(y, std::span<double>(phi, basis_->size()));
      return std::inner_product(coefficients_.begin(), coefficients_.end(), phi, 0.0);
    }
    default: {
      const double g = transform(y);
      if (std::isinf(g)) return g;
      return coefficients_[0] + coefficients_[1] * g;
    }
  }
}

double DifficultyFunction::eval_deriv(double y) const {
  if (kind_ == FamilyKind::FreeOrdinal) {
    throw Error(ErrorCode::NotDifferentiable, "free ordinal difficulties have no derivative");
  }
  check_support(y);
  if (kind_ == FamilyKind::BSpline) {
    double dphi[64];
    basis_->derivative(y, std::span<double>(dphi, basis_->size()));
    return std::inner_product(coefficients_.begin(), coefficients_.end(), dphi, 0.0);
  }
  return coefficients_[1] * transform_deriv(y);
}

double DifficultyFunction::log_eval_deriv(double y) const {
  if (kind_ == FamilyKind::InverseCdf) {
    check_support(y);
    return std::log(coefficients_[1]) - log_pdf(icdf_kind_, quantile(icdf_kind_, y));
  }
  return std::log(eval_deriv(y));
}

double DifficultyFunction::spline_value(double y) const {
  double phi[64];
  basis_->evaluate(y, std::span<double>(phi, basis_->size()));
  return std::inner_product(coefficients_.begin(), coefficients_.end(), phi, 0.0);
}

double DifficultyFunction::spline_slope(double y) const {
  double dphi[64];
  basis_->derivative(y, std::span<double>(dphi, basis_->size()));
  return std::inner_product(coefficients_.begin(), coefficients_.end(), dphi, 0.0);
}

double DifficultyFunction::invert(double t) const {
  if (kind_ == FamilyKind::FreeOrdinal) {
    throw Error(ErrorCode::NotDifferentiable, "free ordinal difficulties have no continuous inverse");
  }
  if (std::isnan(t)) throw Error(ErrorCode::NotANumber, "invert called with NaN");
  double y = 0.0;
  if (kind_ == FamilyKind::BSpline) {
    const double lo = basis_->lower();
    const double hi = basis_->upper();
    const double d_lo = spline_slope(lo);
    const double d_hi = spline_slope(hi);
    const double v_lo = spline_value(lo);
    const double v_hi = spline_value(hi);
    if (t < v_lo) {
      if (!(d_lo > 0.0)) throw Error(ErrorCode::OutOfRange, "target below the spline's range");
      y = lo + (t - v_lo) / d_lo;
    } else if (t > v_hi) {
      if (!(d_hi > 0.0)) throw Error(ErrorCode::OutOfRange, "target above the spline's range");
      y = hi + (t - v_hi) / d_hi;
    } else {
      double a = lo;
      double b = hi;
      for (int it = 0; it < 200 && b - a > 1e-15 * std::max(1.0, std::fabs(a)); ++it) {
        const double mid = 0.5 * (a + b);
        if (spline_value(mid) < t) {
          a = mid;
        } else {
          b = mid;
        }
      }
      y = 0.5 * (a + b);
    }
  } else {
    const double z = (t - coefficients_[0]) / coefficients_[1];
    switch (kind_) {
      case FamilyKind::Linear: y = z; break;
      case FamilyKind::Log: y = std::exp(z); break;
      case FamilyKind::LogP1: y = std::expm1(z); break;
      case FamilyKind::InverseCdf: y = cdf(icdf_kind_, z); break;
      default: break;
    }
  }
  if (!support_.is_discrete() && !(y >= support_.lower && y <= support_.upper)) {
    std::ostringstream os;
    os << "target " << t << " maps to y=" << y << " outside " << describe(support_);
    throw Error(ErrorCode::OutOfRange, os.str());
  }
  return y;
}

void DifficultyFunction::basis(double y, std::span<double> out) const {
  switch (kind_) {
    case FamilyKind::FreeOrdinal:
      std::fill(out.begin(), out.end(), 0.0);
      out[static_cast<std::size_t>(y)] = 1.0;
      return;
    case FamilyKind::BSpline: basis_->evaluate(y, out); return;
    default:
      out[0] = 1.0;
      out[1] = transform(y);
  }
}

void DifficultyFunction::basis_deriv(double y, std::span<double> out) const {
  switch (kind_) {
    case FamilyKind::FreeOrdinal: std::fill(out.begin(), out.end(), 0.0); return;
    case FamilyKind::BSpline: basis_->derivative(y, out); return;
    default:
      out[0] = 0.0;
      out[1] = transform_deriv(y);
  }
}

std::vector<double> DifficultyFunction::to_unconstrained() const {
  switch (kind_) {
    case FamilyKind::FreeOrdinal: return ordered_to_unconstrained(coefficients_, 0.0);
    case FamilyKind::BSpline: return ordered_to_unconstrained(coefficients_, kSplineDifferenceFloor);
    default:
      if (!(coefficients_[1] > 0.0)) {
        throw Error(ErrorCode::NonMonotoneInput, "difficulty slope must be positive");
      }
      return {coefficients_[0], std::log(coefficients_[1])};
  }
}

DifficultyFunction DifficultyFunction::from_unconstrained(std::span<const double> u) const {
  if (u.size() != coefficients_.size()) {
    throw Error(ErrorCode::InvalidConfig, "unconstrained vector has the wrong length");
  }
  switch (kind_) {
    case FamilyKind::FreeOrdinal:
    case FamilyKind::BSpline: return with_coefficients(ordered_from_unconstrained(u));
    default: return with_coefficients({u[0], std::exp(u[1])});
  }
}

}  // namespace thresholds
