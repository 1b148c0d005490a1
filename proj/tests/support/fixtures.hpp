#pragma once

// Shared builders and independent oracles for the test suites.

#include <boost/math/distributions/logistic.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>
#include <cmath>
#include <functional>
#include <vector>

#include "thresholds/thresholds.hpp"

namespace fixtures {

using namespace thresholds;

inline double oracle_cdf(ResponseFunctionKind kind, double x) {
  if (kind == ResponseFunctionKind::Normal) return boost::math::cdf(boost::math::normal(), x);
  return boost::math::cdf(boost::math::logistic(), x);
}

inline double oracle_pdf(ResponseFunctionKind kind, double x) {
  if (kind == ResponseFunctionKind::Normal) return boost::math::pdf(boost::math::normal(), x);
  return boost::math::pdf(boost::math::logistic(), x);
}

// tanh-sinh on bounded pieces copes with integrable endpoint singularities.
inline double integrate(const std::function<double(double)>& f, double a, double b) {
  if (std::isfinite(a) && std::isfinite(b)) {
    return boost::math::quadrature::tanh_sinh<double>().integrate(f, a, b, 1e-13);
  }
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(f, a, b, 20, 1e-13);
}

// Integral of a continuous-branch density over the support, split at the
// spline knots so the integrand is smooth on every piece.
inline double density_mass(ResponseFunctionKind F, const DifficultyFunction& d, double theta) {
  const auto f = [&](double y) { return std::exp(log_density_continuous(F, d, theta, y)); };
  const auto& s = d.support();
  if (std::isfinite(s.lower) && std::isfinite(s.upper)) {
    // y = lower + width * Phi(z) spreads mass piled against the bounds.
    const double width = s.upper - s.lower;
    const auto g = [&](double z) {
      const double y = s.lower + width * oracle_cdf(ResponseFunctionKind::Normal, z);
      if (!(y > s.lower && y < s.upper)) return 0.0;
      return f(y) * width * oracle_pdf(ResponseFunctionKind::Normal, z);
    };
    return integrate(g, -kInf, kInf);
  }
  std::vector<double> cuts{s.lower};
  if (d.spline_basis()) {
    for (double k : d.spline_basis()->knots()) {
      if (k > cuts.back()) cuts.push_back(k);
    }
  }
  if (std::isfinite(s.lower) && !std::isfinite(s.upper)) cuts.push_back(s.lower + 1.0);
  if (s.upper > cuts.back()) cuts.push_back(s.upper);
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < cuts.size(); ++k) total += integrate(f, cuts[k], cuts[k + 1]);
  return total;
}

// Graded response model coded directly: P(Y = r) = F(theta - t_{r-1}) - F(theta - t_r).
inline double grm_probability(ResponseFunctionKind F, const std::vector<double>& t, double theta, int r) {
  const int k = static_cast<int>(t.size()) + 1;
  const double above = r == 0 ? 1.0 : oracle_cdf(F, theta - t[r - 1]);
  const double beyond = r == k - 1 ? 0.0 : oracle_cdf(F, theta - t[r]);
  return above - beyond;
}

inline ItemSpec binary_item(const std::string& id, FamilyKind family = FamilyKind::Linear) {
  ItemSpec s;
  s.id = id;
  s.support = SupportKind::binary();
  s.family.kind = family;
  s.treat_as = DensityBranch::Discrete;
  return s;
}

inline ItemSpec ordinal_item(const std::string& id, int k, FamilyKind family = FamilyKind::FreeOrdinal) {
  ItemSpec s;
  s.id = id;
  s.support = SupportKind::ordinal(k);
  s.family.kind = family;
  s.treat_as = DensityBranch::Discrete;
  return s;
}

inline ItemSpec count_item(const std::string& id, FamilyKind family = FamilyKind::LogP1) {
  ItemSpec s;
  s.id = id;
  s.support = SupportKind::count();
  s.family.kind = family;
  s.treat_as = DensityBranch::Discrete;
  return s;
}

inline ItemSpec continuous_item(const std::string& id, FamilyKind family = FamilyKind::Linear,
                                double lower = -kInf, double upper = kInf) {
  ItemSpec s;
  s.id = id;
  s.support = SupportKind::continuous(lower, upper);
  s.family.kind = family;
  s.treat_as = DensityBranch::Continuous;
  if (family == FamilyKind::InverseCdf) s.squeeze = false;
  return s;
}

inline ItemSpec with_values(ItemSpec item, std::vector<double> values) {
  item.family.values = std::move(values);
  return item;
}

/// Mixed-format scenario: binary, ordinal k=5 free thresholds, count LogP1,
/// two continuous Linear items.
inline SimulationScenario mixed_scenario(std::size_t persons, std::uint64_t seed) {
  std::vector<ItemSpec> items = {
      with_values(binary_item("b1"), {-0.3, 1.0}),
      with_values(ordinal_item("o1", 5), {-1.2, -0.4, 0.3, 1.1}),
      with_values(count_item("c1"), {-0.5, 1.3}),
      with_values(continuous_item("y1"), {0.4, 1.5}),
      with_values(continuous_item("y2"), {-0.2, 0.8}),
  };
  SimulationScenario s;
  s.truth = FittedModel::from_item_values(items, ResponseFunctionKind::Normal, 1.1);
  s.fit_spec.slope_mode = SlopeMode::VaryingSlopes;
  s.persons = persons;
  s.seed = seed;
  return s;
}

/// Ten linear continuous items, intercepts -2.25 + 0.5 (i-1), slopes
/// 1,1,1,1,2,2,2,2,3,3, sigma 1.
inline SimulationScenario recovery_scenario(std::size_t persons, std::uint64_t seed, int replications) {
  const double slopes[10] = {1, 1, 1, 1, 2, 2, 2, 2, 3, 3};
  std::vector<ItemSpec> items;
  for (int i = 0; i < 10; ++i) {
    items.push_back(with_values(continuous_item("item" + std::to_string(i + 1)),
                                {-2.25 + 0.5 * i, slopes[i]}));
  }
  SimulationScenario s;
  s.truth = FittedModel::from_item_values(items, ResponseFunctionKind::Normal, 1.0);
  s.fit_spec.slope_mode = SlopeMode::VaryingSlopes;
  s.persons = persons;
  s.seed = seed;
  s.replications = replications;
  return s;
}

/// Central finite differences of the marginal log-likelihood.
inline std::vector<double> fd_gradient(const MarginalLikelihood& lik, std::vector<double> u,
                                       double h = 1e-6) {
  std::vector<double> g(u.size());
  for (std::size_t k = 0; k < u.size(); ++k) {
    const double x = u[k];
    u[k] = x + h;
    const double up = lik.value(u);
    u[k] = x - h;
    const double down = lik.value(u);
    u[k] = x;
    g[k] = (up - down) / (2.0 * h);
  }
  return g;
}

/// Relative agreement with an absolute floor for components near zero.
inline double gradient_discrepancy(double analytic, double numeric) {
  return std::fabs(analytic - numeric) / std::max(1.0, std::fabs(numeric));
}

}  // namespace fixtures
