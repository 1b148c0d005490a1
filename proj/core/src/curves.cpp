#include "thresholds/curves.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <ostream>
#include <sstream>

#include "thresholds/error.hpp"

namespace thresholds {

namespace {

constexpr int kGridPoints = 201;

std::string format_number(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> g(n);
  for (int k = 0; k < n; ++k) g[k] = k == n - 1 ? hi : lo + (hi - lo) * k / (n - 1);
  return g;
}

const DifficultyFunction& delta_of(const FittedModel& model, std::size_t item) {
  if (item >= model.difficulties.size()) throw Error(ErrorCode::UnknownItem, "item index out of range");
  return model.difficulties[item];
}

}  // namespace

std::string_view to_string(CurveKind kind) {
  switch (kind) {
    case CurveKind::PT: return "pt";
    case CurveKind::IC: return "ic";
    case CurveKind::Difficulty: return "difficulty";
  }
  return "";
}

CurveTable pt_curve(const FittedModel& model, std::size_t item, double theta,
                    const std::vector<double>& y_grid) {
  const auto& delta = delta_of(model, item);
  CurveTable t;
  t.kind = CurveKind::PT;
  t.item_id = model.items[item].id;
  t.fixed = theta;
  t.grid = y_grid;
  t.step = model.items[item].treat_as == DensityBranch::Discrete;
  for (double y : y_grid) t.values.push_back(cdf(model.response_function, theta - delta.eval(y)));
  return t;
}

CurveTable ic_curve(const FittedModel& model, std::size_t item, double y,
                    const std::vector<double>& theta_grid) {
  const auto& delta = delta_of(model, item);
  const double d = delta.eval(y);
  if (std::isinf(d)) {
    throw Error(ErrorCode::OutOfSupport, "IC curve needs a finite difficulty; y is the top category or a support boundary");
  }
  CurveTable t;
  t.kind = CurveKind::IC;
  t.item_id = model.items[item].id;
  t.fixed = y;
  t.grid = theta_grid;
  for (double theta : theta_grid) t.values.push_back(cdf(model.response_function, theta - d));
  return t;
}

CurveTable difficulty_curve(const FittedModel& model, std::size_t item,
                            const std::vector<double>& y_grid) {
  const auto& delta = delta_of(model, item);
  CurveTable t;
  t.kind = CurveKind::Difficulty;
  t.item_id = model.items[item].id;
  t.grid = y_grid;
  for (double y : y_grid) t.values.push_back(delta.eval(y));
  return t;
}

std::vector<double> default_y_grid(const FittedModel& model, std::size_t item) {
  const auto& delta = delta_of(model, item);
  const auto& support = delta.support();
  const bool known = item < model.observed_ranges.size();
  if (support.is_discrete()) {
    int top = 0;
    if (support.is_finite_discrete()) {
      top = support.top_category();
    } else if (known) {
      top = static_cast<int>(model.observed_ranges[item][1]);
    } else {
      // Largest count with a non-negligible exceedance rate at theta = 4 sigma.
      while (top < 1000 &&
             cdf(model.response_function, 4.0 * model.sigma - delta.eval(top)) > 1e-3) {
        ++top;
      }
    }
    std::vector<double> g;
    for (int r = 0; r <= top; ++r) g.push_back(r);
    return g;
  }
  double lo = support.lower;
  double hi = support.upper;
  if (known) {
    lo = model.observed_ranges[item][0];
    hi = model.observed_ranges[item][1];
  } else if (delta.spline_basis()) {
    lo = std::max(lo, delta.spline_basis()->lower());
    hi = std::min(hi, delta.spline_basis()->upper());
  } else {
    const double reach = 4.0 * model.sigma + 3.0;
    const auto clamp_inv = [&](double t, double fallback) {
      try {
        return delta.invert(t);
      } catch (const Error&) {
        return fallback;
      }
    };
    if (!std::isfinite(lo)) lo = clamp_inv(-reach, -reach);
    if (!std::isfinite(hi)) hi = clamp_inv(reach, reach);
  }
  if (delta.kind() == FamilyKind::InverseCdf || delta.kind() == FamilyKind::Log) {
    // Keep the grid inside the open support.
    const double eps = 1e-3 * (hi - lo);
    if (lo <= support.lower) lo = support.lower + eps;
    if (hi >= support.upper) hi = support.upper - eps;
  }
  if (!(lo < hi)) return {lo};
  return linspace(lo, hi, kGridPoints);
}

std::vector<double> default_theta_grid(const FittedModel& model) {
  const double s = model.sigma > 0.0 ? model.sigma : 1.0;
  return linspace(-4.0 * s, 4.0 * s, kGridPoints);
}

void write_curves_csv(std::ostream& out, std::span<const CurveTable> tables) {
  out << "kind,item,fixed,abscissa,value\n";
  for (const auto& t : tables) {
    const std::string fixed = t.fixed ? format_number(*t.fixed) : "";
    for (std::size_t k = 0; k < t.grid.size(); ++k) {
      out << to_string(t.kind) << ',' << t.item_id << ',' << fixed << ','
          << format_number(t.grid[k]) << ',' << format_number(t.values[k]) << '\n';
    }
  }
}

std::string check_curve(const CurveTable& t) {
  std::ostringstream os;
  for (std::size_t k = 0; k < t.values.size(); ++k) {
    const double v = t.values[k];
    if (std::isnan(v)) {
      os << to_string(t.kind) << " curve of " << t.item_id << " has NaN at " << t.grid[k];
      return os.str();
    }
    if (t.kind != CurveKind::Difficulty && !(v >= 0.0 && v <= 1.0)) {
      os << to_string(t.kind) << " curve of " << t.item_id << " leaves [0,1] at " << t.grid[k];
      return os.str();
    }
    if (k == 0) continue;
    const double prev = t.values[k - 1];
    const bool ok = t.kind == CurveKind::PT ? v <= prev : v >= prev;
    if (!ok) {
      os << to_string(t.kind) << " curve of " << t.item_id << " breaks monotonicity at "
         << t.grid[k];
      return os.str();
    }
  }
  return {};
}

std::string check_no_crossing(const CurveTable& a, const CurveTable& b) {
  if (a.grid != b.grid) return "IC curves use different grids";
  int sign = 0;
  for (std::size_t k = 0; k < a.values.size(); ++k) {
    const double d = a.values[k] - b.values[k];
    const int s = d > 0.0 ? 1 : (d < 0.0 ? -1 : 0);
    if (s == 0) continue;
    if (sign != 0 && s != sign) {
      return "IC curves of " + a.item_id + " and " + b.item_id + " cross";
    }
    sign = s;
  }
  return {};
}

}  // namespace thresholds
