#include "thresholds/types.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "thresholds/error.hpp"
#include "thresholds/dataset.hpp"
#include "thresholds/quadrature.hpp"

namespace thresholds {

namespace {

bool is_integer(double y) { return std::isfinite(y) && std::floor(y) == y; }

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

SupportKind SupportKind::continuous(double lower, double upper) {
  SupportKind s;
  s.type = Type::Continuous;
  s.lower = lower;
  s.upper = upper;
  return s;
}

SupportKind SupportKind::binary() {
  SupportKind s;
  s.type = Type::Binary;
  return s;
}

SupportKind SupportKind::ordinal(int categories) {
  SupportKind s;
  s.type = Type::OrderedCategorical;
  s.categories = categories;
  return s;
}

SupportKind SupportKind::count() {
  SupportKind s;
  s.type = Type::Count;
  return s;
}

int SupportKind::category_count() const {
  switch (type) {
    case Type::Binary: return 2;
    case Type::OrderedCategorical: return categories;
    default: return 0;
  }
}

bool SupportKind::contains(double y) const {
  if (std::isnan(y)) return false;
  switch (type) {
    case Type::Continuous: return y >= lower && y <= upper;
    case Type::Binary: return y == 0.0 || y == 1.0;
    case Type::OrderedCategorical: return is_integer(y) && y >= 0.0 && y <= categories - 1;
    case Type::Count: return is_integer(y) && y >= 0.0;
  }
  return false;
}

void SupportKind::validate() const {
  if (type == Type::Continuous && !(lower < upper)) {
    throw Error(ErrorCode::InvalidConfig, "continuous support requires lower < upper");
  }
  if (type == Type::OrderedCategorical && categories < 2) {
    throw Error(ErrorCode::InvalidConfig, "ordered categorical support requires k >= 2");
  }
}

std::string describe(const SupportKind& support) {
  switch (support.type) {
    case SupportKind::Type::Continuous:
      return "continuous[" + fmt(support.lower) + "," + fmt(support.upper) + "]";
    case SupportKind::Type::Binary: return "binary";
    case SupportKind::Type::OrderedCategorical:
      return "ordinal(" + std::to_string(support.categories) + ")";
    case SupportKind::Type::Count: return "count";
  }
  return "?";
}

std::string_view to_string(FamilyKind kind) {
  switch (kind) {
    case FamilyKind::Linear: return "linear";
    case FamilyKind::Log: return "log";
    case FamilyKind::LogP1: return "logp1";
    case FamilyKind::InverseCdf: return "inverse_cdf";
    case FamilyKind::FreeOrdinal: return "free_ordinal";
    case FamilyKind::BSpline: return "bspline";
  }
  return "?";
}

FamilyKind family_from_string(std::string_view name) {
  for (auto k : {FamilyKind::Linear, FamilyKind::Log, FamilyKind::LogP1, FamilyKind::InverseCdf,
                 FamilyKind::FreeOrdinal, FamilyKind::BSpline}) {
    if (to_string(k) == name) return k;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown difficulty family '" + std::string(name) + "'");
}

bool ItemSpec::uses_unit_rescale() const {
  if (support.type != SupportKind::Type::Continuous) return false;
  return squeeze.value_or(family.kind == FamilyKind::InverseCdf);
}

SupportKind ItemSpec::effective_support() const {
  if (uses_unit_rescale()) return SupportKind::continuous(0.0, 1.0);
  if (treat_as == DensityBranch::Continuous && support.is_discrete()) {
    if (support.type == SupportKind::Type::Count) return SupportKind::continuous(0.0, kInf);
    return SupportKind::continuous(0.0, support.top_category());
  }
  return support;
}

void ItemSpec::validate() const {
  const auto where = [this](const std::string& msg) {
    return Error(ErrorCode::InvalidConfig, "item '" + id + "': " + msg);
  };
  if (id.empty()) throw Error(ErrorCode::InvalidConfig, "item id must not be empty");
  support.validate();

  if (treat_as == DensityBranch::Continuous && support.is_discrete()) {
    if (support.type == SupportKind::Type::Binary) {
      throw where("binary items cannot use the continuous density branch");
    }
    if (!allow_continuous_override) {
      throw where("continuous treatment of a discrete item requires allow_continuous = true");
    }
  }
  if (treat_as == DensityBranch::Discrete && !support.is_discrete()) {
    throw where("continuous support requires treat_as = continuous");
  }
  if (uses_unit_rescale() && !(std::isfinite(support.lower) && std::isfinite(support.upper))) {
    throw where("unit rescale needs finite support bounds");
  }

  const bool discrete_branch = treat_as == DensityBranch::Discrete;
  switch (family.kind) {
    case FamilyKind::Log:
      if (discrete_branch) throw where("log family needs y > 0; use logp1 for discrete items");
      if (effective_support().lower < 0.0) throw where("log family needs a nonnegative support");
      break;
    case FamilyKind::InverseCdf:
      if (discrete_branch) throw where("inverse_cdf family needs the continuous branch");
      if (!uses_unit_rescale() &&
          !(effective_support().lower >= 0.0 && effective_support().upper <= 1.0)) {
        throw where("inverse_cdf family needs data on (0,1) or the unit rescale");
      }
      break;
    case FamilyKind::FreeOrdinal:
      if (!discrete_branch || !support.is_finite_discrete()) {
        throw where("free_ordinal family needs a binary or ordinal item on the discrete branch");
      }
      break;
    case FamilyKind::BSpline:
      if (support.type == SupportKind::Type::Binary) {
        throw where("bspline family is meaningless for binary items");
      }
      if (discrete_branch && support.type == SupportKind::Type::OrderedCategorical &&
          support.categories < 3) {
        throw where("bspline family needs at least 3 ordinal categories");
      }
      if (family.degree < 1) throw where("bspline degree must be >= 1");
      if (family.n_basis < family.degree + 1) throw where("bspline needs n_basis >= degree + 1");
      if (family.knot_range && !((*family.knot_range)[0] < (*family.knot_range)[1])) {
        throw where("bspline knot_range needs lower < upper");
      }
      break;
    case FamilyKind::Linear:
    case FamilyKind::LogP1: break;
  }
}

std::optional<std::size_t> ItemResponseMatrix::item_index(std::string_view id) const {
  for (std::size_t i = 0; i < items_.size(); ++i) {
    if (items_[i].id == id) return i;
  }
  return std::nullopt;
}

ItemResponseMatrix ItemResponseMatrix::create(std::vector<ItemSpec> items, std::size_t persons,
                                              std::vector<double> values,
                                              std::vector<std::uint8_t> observed,
                                              Options options) {
  const std::size_t n_items = items.size();
  if (n_items == 0) throw Error(ErrorCode::InvalidConfig, "a dataset needs at least one item");
  if (persons == 0) throw Error(ErrorCode::EmptyPerson, "a dataset needs at least one person");
  if (values.size() != persons * n_items || observed.size() != persons * n_items) {
    throw Error(ErrorCode::InvalidConfig, "value/mask size does not match persons x items");
  }
  for (std::size_t i = 0; i < n_items; ++i) {
    items[i].validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (items[j].id == items[i].id) {
        throw Error(ErrorCode::InvalidConfig, "duplicate item id '" + items[i].id + "'");
      }
    }
  }

  ItemResponseMatrix m;
  m.persons_ = persons;
  m.options_ = options;
  m.values_.resize(values.size());
  for (std::size_t p = 0; p < persons; ++p) {
    for (std::size_t i = 0; i < n_items; ++i) {
      const std::size_t k = p * n_items + i;
      if (!observed[k]) {
        values[k] = std::numeric_limits<double>::quiet_NaN();
        m.values_[k] = values[k];
        continue;
      }
      const ItemSpec& item = items[i];
      const double y = values[k];
      if (!item.support.contains(y)) {
        throw Error(ErrorCode::ValueOutOfSupport,
                    "row " + std::to_string(p + 1) + ", column '" + item.id + "': value " +
                        fmt(y) + " outside support " + describe(item.support));
      }
      double model_y = y;
      if (item.rescale) {
        const auto& r = *item.rescale;
        model_y = squeeze_unit((y - r.lower) / (r.upper - r.lower), r.levels);
      }
      const auto eff = item.effective_support();
      const bool open_needed = item.family.kind == FamilyKind::InverseCdf ||
                               item.family.kind == FamilyKind::Log;
      if (open_needed && !(model_y > eff.lower && model_y < eff.upper)) {
        throw Error(ErrorCode::ValueOutOfSupport,
                    "row " + std::to_string(p + 1) + ", column '" + item.id + "': value " +
                        fmt(y) + " sits on the boundary of the " +
                        std::string(to_string(item.family.kind)) + " family's support");
      }
      m.values_[k] = model_y;
    }
  }
  m.items_ = std::move(items);
  m.raw_ = std::move(values);
  m.observed_ = std::move(observed);

  for (std::size_t i = 0; i < n_items; ++i) {
    if (m.observed_count(i) == 0) {
      throw Error(ErrorCode::EmptyItem, "item '" + m.items_[i].id + "' has no observed response");
    }
  }
  if (!options.allow_empty_persons) {
    for (std::size_t p = 0; p < persons; ++p) {
      if (m.person_observed_count(p) == 0) {
        throw Error(ErrorCode::EmptyPerson,
                    "row " + std::to_string(p + 1) + " has no observed response");
      }
    }
  }
  return m;
}

std::size_t ItemResponseMatrix::observed_count(std::size_t item) const {
  std::size_t n = 0;
  for (std::size_t p = 0; p < persons_; ++p) n += observed(p, item) ? 1 : 0;
  return n;
}

std::size_t ItemResponseMatrix::person_observed_count(std::size_t person) const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < items_.size(); ++i) n += observed(person, i) ? 1 : 0;
  return n;
}

std::array<double, 2> ItemResponseMatrix::observed_range(std::size_t item) const {
  double lo = kInf;
  double hi = -kInf;
  for (std::size_t p = 0; p < persons_; ++p) {
    if (!observed(p, item)) continue;
    lo = std::min(lo, value(p, item));
    hi = std::max(hi, value(p, item));
  }
  return {lo, hi};
}

ItemResponseMatrix ItemResponseMatrix::select_persons(const std::vector<std::size_t>& rows) const {
  const std::size_t n = items_.size();
  std::vector<double> raw;
  std::vector<std::uint8_t> mask;
  raw.reserve(rows.size() * n);
  mask.reserve(rows.size() * n);
  for (auto r : rows) {
    if (r >= persons_) throw Error(ErrorCode::OutOfRange, "person index out of range");
    raw.insert(raw.end(), raw_.begin() + r * n, raw_.begin() + (r + 1) * n);
    mask.insert(mask.end(), observed_.begin() + r * n, observed_.begin() + (r + 1) * n);
  }
  return create(items_, rows.size(), std::move(raw), std::move(mask), options_);
}

ItemResponseMatrix ItemResponseMatrix::select_items(const std::vector<std::size_t>& order) const {
  std::vector<ItemSpec> items;
  for (auto i : order) {
    if (i >= items_.size()) throw Error(ErrorCode::OutOfRange, "item index out of range");
    items.push_back(items_[i]);
  }
  std::vector<double> raw(persons_ * order.size());
  std::vector<std::uint8_t> mask(persons_ * order.size());
  for (std::size_t p = 0; p < persons_; ++p) {
    for (std::size_t j = 0; j < order.size(); ++j) {
      raw[p * order.size() + j] = raw_[p * items_.size() + order[j]];
      mask[p * order.size() + j] = observed_[p * items_.size() + order[j]];
    }
  }
  return create(std::move(items), persons_, std::move(raw), std::move(mask), options_);
}

bool ItemResponseMatrix::operator==(const ItemResponseMatrix& other) const {
  if (persons_ != other.persons_ || items_ != other.items_ || observed_ != other.observed_) {
    return false;
  }
  for (std::size_t k = 0; k < raw_.size(); ++k) {
    if (!observed_[k]) continue;
    if (raw_[k] != other.raw_[k] || values_[k] != other.values_[k]) return false;
  }
  return true;
}

std::string_view to_string(SlopeMode mode) {
  switch (mode) {
    case SlopeMode::CommonSlope: return "common_slope";
    case SlopeMode::VaryingSlopes: return "varying_slopes";
    case SlopeMode::SplineFree: return "spline_free";
    case SlopeMode::SplineCommonShape: return "spline_common_shape";
  }
  return "?";
}

SlopeMode slope_mode_from_string(std::string_view name) {
  for (auto m : {SlopeMode::CommonSlope, SlopeMode::VaryingSlopes, SlopeMode::SplineFree,
                 SlopeMode::SplineCommonShape}) {
    if (to_string(m) == name) return m;
  }
  throw Error(ErrorCode::InvalidConfig, "unknown slope mode '" + std::string(name) + "'");
}

std::string_view to_string(Identification id) {
  return id == Identification::FirstSplineInterceptZero ? "first_spline_intercept_zero"
                                                        : "penalty_only";
}

Identification identification_from_string(std::string_view name) {
  if (name == "first_spline_intercept_zero") return Identification::FirstSplineInterceptZero;
  if (name == "penalty_only") return Identification::PenaltyOnly;
  throw Error(ErrorCode::InvalidConfig, "unknown identification '" + std::string(name) + "'");
}

std::string_view to_string(DensityBranch branch) {
  return branch == DensityBranch::Discrete ? "discrete" : "continuous";
}

void ModelSpec::validate() const {
  if (quadrature_nodes < 5) throw Error(ErrorCode::InvalidConfig, "quadrature_nodes must be >= 5");
  if (quadrature_nodes > kMaxQuadratureNodes) {
    throw Error(ErrorCode::InvalidConfig, "quadrature_nodes must be <= 300");
  }
  if (!(penalty_lambda >= 0.0) || !std::isfinite(penalty_lambda)) {
    throw Error(ErrorCode::InvalidConfig, "penalty_lambda must be a finite nonnegative number");
  }
  if (penalty_lambda > 0.0 && slope_mode != SlopeMode::SplineFree) {
    throw Error(ErrorCode::InvalidConfig, "penalty_lambda applies only to spline_free mode");
  }
  if (slope_mode == SlopeMode::SplineCommonShape &&
      identification != Identification::FirstSplineInterceptZero) {
    throw Error(ErrorCode::InvalidConfig,
                "spline_common_shape requires identification first_spline_intercept_zero");
  }
  if (slope_mode != SlopeMode::SplineCommonShape &&
      identification == Identification::FirstSplineInterceptZero) {
    throw Error(ErrorCode::InvalidConfig,
                "first_spline_intercept_zero applies only to spline_common_shape; the zero-mean "
                "ability distribution already fixes the location");
  }
}

}  // namespace thresholds
