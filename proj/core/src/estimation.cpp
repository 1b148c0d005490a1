#include "thresholds/estimation.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>
#include <numeric>

#include "thresholds/error.hpp"
#include "thresholds/optimizer.hpp"
#include "thresholds/rng.hpp"

namespace thresholds {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Moments {
  double mean = 0.0;
  double var = 0.0;
};

Moments moments(const std::vector<double>& v) {
  Moments m;
  if (v.empty()) return m;
  for (double x : v) m.mean += x;
  m.mean /= static_cast<double>(v.size());
  for (double x : v) m.var += (x - m.mean) * (x - m.mean);
  m.var /= static_cast<double>(v.size());
  return m;
}

bool inert_slope(const ItemSpec& item) {
  return item.family.is_parametric() && item.treat_as == DensityBranch::Discrete &&
         item.support.is_finite_discrete() && item.support.category_count() == 2;
}

// Linear start delta(y) = anchor_t + slope * (g(y) - anchor_g).
struct LinearStart {
  double slope = 1.0;
  double anchor_g = 0.0;
  double anchor_t = 0.0;
  std::vector<double> thresholds;  // discrete targets by category
};

double transform_of(const DifficultyFunction& tmpl, double y) {
  if (!tmpl.support().contains(y)) return y;
  double b[2];
  tmpl.basis(y, std::span<double>(b, 2));
  return b[1];
}

LinearStart item_start(const ItemResponseMatrix& data, std::size_t i,
                       const DifficultyFunction& tmpl, ResponseFunctionKind response) {
  const auto& item = data.item(i);
  const double v = moment_constants(response).var_f;
  const bool parametric = item.family.is_parametric();
  LinearStart s;
  std::vector<double> ys;
  for (std::size_t p = 0; p < data.persons(); ++p) {
    if (data.observed(p, i)) ys.push_back(data.value(p, i));
  }
  if (item.treat_as == DensityBranch::Continuous) {
    std::vector<double> g;
    for (double y : ys) g.push_back(parametric ? transform_of(tmpl, y) : y);
    const auto m = moments(g);
    s.slope = std::sqrt((1.0 + v) / (m.var > 1e-12 ? m.var : 1.0));
    s.anchor_g = m.mean;
    s.anchor_t = 0.0;
    return s;
  }
  // Discrete: match empirical exceedance rates P(Y > r).
  double top = 0.0;
  for (double y : ys) top = std::max(top, y);
  if (item.support.is_finite_discrete()) top = item.support.top_category();
  const double scale = std::sqrt((1.0 + v) / v);
  std::vector<double> gs;
  std::vector<double> ts;
  for (int r = 0; r < static_cast<int>(top); ++r) {
    double above = 0.0;
    for (double y : ys) above += y > r ? 1.0 : 0.0;
    const double p = std::clamp(above / static_cast<double>(ys.size()), 0.005, 0.995);
    const double t = -quantile(response, p) * scale;
    s.thresholds.push_back(t);
    gs.push_back(parametric ? transform_of(tmpl, r) : static_cast<double>(r));
    ts.push_back(t);
  }
  if (ts.empty()) {
    gs.push_back(0.0);
    ts.push_back(0.0);
    s.thresholds.push_back(0.0);
  }
  const auto mg = moments(gs);
  const auto mt = moments(ts);
  double cov = 0.0;
  for (std::size_t k = 0; k < gs.size(); ++k) cov += (gs[k] - mg.mean) * (ts[k] - mt.mean);
  cov /= static_cast<double>(gs.size());
  s.slope = mg.var > 1e-12 && cov > 0.0 ? std::max(cov / mg.var, 0.05) : 1.0;
  s.anchor_g = mg.mean;
  s.anchor_t = mt.mean;
  return s;
}

std::vector<double> penalized_gradient(const MarginalLikelihood& lik, std::span<const double> u) {
  auto eval = lik.evaluate(u, true);
  const auto pen = lik.penalty(u);
  for (std::size_t k = 0; k < eval.gradient.size(); ++k) eval.gradient[k] -= pen.gradient[k];
  return eval.gradient;
}

// Newton steps with a finite-difference Hessian; the objective is minimized.
void newton_polish(const MarginalLikelihood& lik, const Objective& objective, OptimizerResult& r,
                   const FitOptions& options) {
  const std::size_t n = r.x.size();
  std::vector<double> x_new(n);
  std::vector<double> g_new(n);
  for (int step = 0; step < options.newton_steps && r.grad_norm >= options.grad_tolerance; ++step) {
    std::vector<double> info;
    try {
      info = observed_information(lik, r.x);
    } catch (const Error&) {
      return;
    }
    Eigen::Map<const Eigen::MatrixXd> H(info.data(), static_cast<Eigen::Index>(n),
                                        static_cast<Eigen::Index>(n));
    Eigen::Map<const Eigen::VectorXd> g(r.gradient.data(), static_cast<Eigen::Index>(n));
    double mu = 0.0;
    const double diag_scale = 1.0 + H.diagonal().cwiseAbs().maxCoeff();
    Eigen::VectorXd d;
    bool solved = false;
    for (int attempt = 0; attempt < 12; ++attempt) {
      Eigen::MatrixXd A = H;
      A.diagonal().array() += mu;
      Eigen::LDLT<Eigen::MatrixXd> ldlt(A);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive() &&
          ldlt.vectorD().minCoeff() > 1e-12 * diag_scale) {
        d = -ldlt.solve(g);
        solved = d.allFinite();
        if (solved) break;
      }
      mu = mu == 0.0 ? 1e-8 * diag_scale : mu * 10.0;
    }
    if (!solved) return;
    bool accepted = false;
    double t = 1.0;
    for (int trial = 0; trial < 30; ++trial, t *= 0.5) {
      for (std::size_t k = 0; k < n; ++k) x_new[k] = r.x[k] + t * d[static_cast<Eigen::Index>(k)];
      double f_new;
      try {
        f_new = objective(x_new, g_new);
      } catch (const Error&) {
        continue;
      }
      if (std::isfinite(f_new) && f_new <= r.value + 1e-12 * (1.0 + std::fabs(r.value)) &&
          max_abs(g_new) < r.grad_norm) {
        r.x = x_new;
        r.gradient = g_new;
        r.value = std::min(f_new, r.value);
        r.grad_norm = max_abs(g_new);
        r.trace.push_back(r.value);
        ++r.iterations;
        accepted = true;
        break;
      }
    }
    if (!accepted) return;
  }
  r.converged = r.grad_norm < options.grad_tolerance;
}

}  // namespace

const ParameterEstimate& FitResult::estimate(const std::string& item,
                                             const std::string& parameter) const {
  for (const auto& e : estimates) {
    if (e.item == item && e.parameter == parameter) return e;
  }
  throw Error(ErrorCode::UnknownItem, "no estimate '" + parameter + "' for item '" + item + "'");
}

std::vector<ParameterEstimate> parameter_table(const FittedModel& model, bool sigma_fixed) {
  std::vector<ParameterEstimate> out;
  for (std::size_t i = 0; i < model.items.size(); ++i) {
    const auto& item = model.items[i];
    const auto& c = model.difficulties[i].coefficients();
    for (std::size_t l = 0; l < c.size(); ++l) {
      ParameterEstimate e;
      e.item = item.id;
      e.value = c[l];
      e.se = kNaN;
      switch (item.family.kind) {
        case FamilyKind::FreeOrdinal: e.parameter = "threshold" + std::to_string(l); break;
        case FamilyKind::BSpline: e.parameter = "coef" + std::to_string(l); break;
        default:
          e.parameter = l == 0 ? "intercept" : "slope";
          e.fixed = l == 1 && inert_slope(item);
      }
      out.push_back(e);
    }
  }
  ParameterEstimate s;
  s.parameter = "sigma";
  s.value = model.sigma;
  s.se = kNaN;
  s.fixed = sigma_fixed;
  out.push_back(s);
  return out;
}

std::vector<double> starting_values(const MarginalLikelihood& likelihood) {
  const auto& data = likelihood.data();
  const auto& layout = likelihood.layout();
  const auto& spec = likelihood.spec();
  const auto& templates = layout.templates();
  std::vector<LinearStart> starts;
  for (std::size_t i = 0; i < data.item_count(); ++i) {
    starts.push_back(item_start(data, i, templates[i], spec.response_function));
  }
  if (spec.slope_mode == SlopeMode::CommonSlope) {
    double log_sum = 0.0;
    int n = 0;
    for (std::size_t i = 0; i < data.item_count(); ++i) {
      if (data.item(i).family.is_parametric() && !inert_slope(data.item(i))) {
        log_sum += std::log(starts[i].slope);
        ++n;
      }
    }
    for (std::size_t i = 0; i < data.item_count() && n > 0; ++i) {
      if (data.item(i).family.is_parametric() && !inert_slope(data.item(i))) {
        starts[i].slope = std::exp(log_sum / n);
      }
    }
  }
  std::vector<DifficultyFunction> difficulties;
  for (std::size_t i = 0; i < data.item_count(); ++i) {
    const auto& item = data.item(i);
    const auto& s = starts[i];
    const auto& tmpl = templates[i];
    std::vector<double> c;
    switch (item.family.kind) {
      case FamilyKind::FreeOrdinal: {
        c = s.thresholds;
        c.resize(tmpl.coefficient_count(), c.empty() ? 0.0 : c.back());
        for (std::size_t r = 1; r < c.size(); ++r) c[r] = std::max(c[r], c[r - 1] + 0.05);
        break;
      }
      case FamilyKind::BSpline: {
        for (double gl : tmpl.spline_basis()->greville()) {
          c.push_back(s.anchor_t + s.slope * (gl - s.anchor_g));
        }
        break;
      }
      default:
        if (inert_slope(item)) {
          c = {s.anchor_t - s.anchor_g, 1.0};
        } else {
          c = {s.anchor_t - s.slope * s.anchor_g, s.slope};
        }
    }
    difficulties.push_back(tmpl.with_coefficients(std::move(c)));
  }
  const double sigma = likelihood.options().fixed_sigma.value_or(1.0);
  return layout.pack(difficulties, sigma);
}

std::vector<double> observed_information(const MarginalLikelihood& likelihood,
                                         std::span<const double> u, double h) {
  const std::size_t n = u.size();
  std::vector<double> info(n * n, 0.0);
  std::vector<double> x(u.begin(), u.end());
  for (std::size_t j = 0; j < n; ++j) {
    x[j] = u[j] + h;
    const auto plus = penalized_gradient(likelihood, x);
    x[j] = u[j] - h;
    const auto minus = penalized_gradient(likelihood, x);
    x[j] = u[j];
    for (std::size_t i = 0; i < n; ++i) info[i * n + j] = -(plus[i] - minus[i]) / (2.0 * h);
  }
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double avg = 0.5 * (info[i * n + j] + info[j * n + i]);
      info[i * n + j] = avg;
      info[j * n + i] = avg;
    }
  }
  return info;
}

FitResult fit(const ItemResponseMatrix& data, const ModelSpec& spec, const FitOptions& options) {
  ModelSpec effective = spec;
  if (options.quadrature_nodes) effective.quadrature_nodes = *options.quadrature_nodes;
  effective.validate();
  if (options.random_starts < 0 || options.max_iterations < 0) {
    throw Error(ErrorCode::InvalidConfig, "random_starts and max_iterations must be >= 0");
  }
  MarginalLikelihood lik(data, effective, LikelihoodOptions{options.threads, options.fixed_sigma});

  const Objective objective = [&lik](std::span<const double> x, std::span<double> grad) {
    const auto eval = lik.evaluate(x, true);
    const auto pen = lik.penalty(x);
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] = -(eval.gradient[k] - pen.gradient[k]);
    return -(eval.loglik - pen.value);
  };
  OptimizerOptions opt_options;
  opt_options.max_iterations = options.max_iterations;
  opt_options.grad_tolerance = options.grad_tolerance;
  opt_options.rel_tolerance = options.rel_tolerance;

  const auto start = starting_values(lik);
  FitResult result;
  std::optional<OptimizerResult> best;
  for (int s = 0; s <= options.random_starts; ++s) {
    auto x0 = start;
    if (s > 0) {
      auto rng = Rng::substream(options.seed, static_cast<std::uint64_t>(s));
      for (auto& v : x0) v += 0.5 * rng.normal();
    }
    OptimizerResult r;
    try {
      r = minimize_lbfgs(objective, x0, opt_options);
    } catch (const Error&) {
      if (s == 0) throw;
      continue;
    }
    newton_polish(lik, objective, r, options);
    result.start_logliks.push_back(-r.value);
    if (!best || r.value < best->value) best = std::move(r);
  }

  const auto& r = *best;
  const auto eval = lik.evaluate(r.x, false);
  const auto pen = lik.penalty(r.x);
  result.spec = effective;
  result.unconstrained_names = lik.layout().names();
  result.unconstrained = r.x;
  result.unconstrained_se.assign(r.x.size(), kNaN);
  result.loglik = eval.loglik;
  result.penalty_value = pen.value;
  result.converged = r.converged;
  result.iterations = r.iterations;
  result.grad_norm = r.grad_norm;
  result.underflow_count = eval.underflows;
  for (double f : r.trace) result.objective_trace.push_back(-f);
  result.fixed_sigma = options.fixed_sigma;
  result.persons = data.persons();

  result.model.response_function = effective.response_function;
  result.model.items = data.items();
  result.model.difficulties = lik.layout().difficulties(r.x);
  result.model.sigma = lik.layout().sigma(r.x);
  result.model.quadrature_nodes = effective.quadrature_nodes;
  for (std::size_t i = 0; i < data.item_count(); ++i) {
    result.model.observed_ranges.push_back(data.observed_range(i));
    const auto& basis = result.model.difficulties[i].spline_basis();
    if (basis) result.model.items[i].family.knot_range = std::array<double, 2>{basis->lower(), basis->upper()};
  }
  result.estimates = parameter_table(result.model, !lik.layout().has_sigma());

  if (options.compute_standard_errors) {
    try {
      const auto se = standard_errors(result, data, effective, options.threads);
      result.unconstrained_se = se.unconstrained;
      for (std::size_t k = 0; k < result.estimates.size(); ++k) result.estimates[k].se = se.constrained[k];
      result.standard_errors_available = true;
    } catch (const Error& e) {
      result.standard_error_message = e.what();
    }
  } else {
    result.standard_error_message = "not computed";
  }
  return result;
}

StandardErrors standard_errors(const FitResult& fit, const ItemResponseMatrix& data,
                               const ModelSpec& spec, unsigned threads) {
  if (spec.slope_mode != fit.spec.slope_mode ||
      spec.response_function != fit.spec.response_function) {
    throw Error(ErrorCode::InvalidConfig, "standard_errors: spec does not match the fit");
  }
  ModelSpec effective = spec;
  effective.quadrature_nodes = fit.spec.quadrature_nodes;
  MarginalLikelihood lik(data, effective, LikelihoodOptions{threads, fit.fixed_sigma});
  const std::size_t n = fit.unconstrained.size();
  if (lik.layout().size() != n) {
    throw Error(ErrorCode::InvalidConfig, "standard_errors: data does not match the fit");
  }
  StandardErrors out;
  out.information = observed_information(lik, fit.unconstrained);
  const Eigen::Map<const Eigen::MatrixXd> info(out.information.data(),
                                               static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(n));
  Eigen::LDLT<Eigen::MatrixXd> ldlt(info);
  const double scale = 1.0 + info.diagonal().cwiseAbs().maxCoeff();
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
      !(ldlt.vectorD().minCoeff() > 1e-10 * scale)) {
    throw Error(ErrorCode::SingularInformation,
                "observed information is not positive definite; standard errors unavailable");
  }
  const Eigen::MatrixXd cov = ldlt.solve(Eigen::MatrixXd::Identity(n, n));
  out.covariance.assign(cov.data(), cov.data() + n * n);
  for (std::size_t k = 0; k < n; ++k) {
    const double v = cov(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
    if (!(v > 0.0)) {
      throw Error(ErrorCode::SingularInformation, "nonpositive variance for " +
                                                      lik.layout().names()[k]);
    }
    out.unconstrained.push_back(std::sqrt(v));
  }

  // Delta method through each item's Jacobian.
  std::vector<double> c;
  std::vector<double> jac;
  for (std::size_t i = 0; i < data.item_count(); ++i) {
    lik.layout().item_coefficients(i, fit.unconstrained, c, jac);
    const auto& globals = lik.layout().item_globals(i);
    const std::size_t ng = globals.size();
    for (std::size_t l = 0; l < c.size(); ++l) {
      double var = 0.0;
      for (std::size_t a = 0; a < ng; ++a) {
        for (std::size_t b = 0; b < ng; ++b) {
          var += jac[l * ng + a] * jac[l * ng + b] *
                 cov(static_cast<Eigen::Index>(globals[a]), static_cast<Eigen::Index>(globals[b]));
        }
      }
      const bool fixed = inert_slope(data.item(i)) && l == 1;
      out.constrained.push_back(fixed ? kNaN : std::sqrt(std::max(var, 0.0)));
    }
  }
  if (lik.layout().has_sigma()) {
    out.constrained.push_back(fit.model.sigma * out.unconstrained[lik.layout().sigma_index()]);
  } else {
    out.constrained.push_back(kNaN);
  }
  return out;
}

double chi_square_sf(double statistic, int df) {
  if (df <= 0 || statistic <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * df, 0.5 * statistic);
}

LrTestResult lr_test(const FitResult& full, const FitResult& reduced) {
  const auto not_nested = [](const std::string& why) {
    return Error(ErrorCode::NotNested,
                 "models are not nested (" + why +
                     "): the log-likelihood difference is not an informative test statistic");
  };
  if (!full.converged || !reduced.converged) {
    throw Error(ErrorCode::NotConverged, "both fits must converge before a likelihood-ratio test");
  }
  if (full.model.items != reduced.model.items) throw not_nested("item families or supports differ");
  if (full.spec.response_function != reduced.spec.response_function) {
    throw not_nested("response functions differ");
  }
  if (full.fixed_sigma != reduced.fixed_sigma || full.persons != reduced.persons) {
    throw not_nested("data or sigma settings differ");
  }
  LrTestResult r;
  if (full.spec.slope_mode == reduced.spec.slope_mode &&
      full.parameter_count() == reduced.parameter_count()) {
    r.statistic = std::max(0.0, 2.0 * (full.loglik - reduced.loglik));
    r.df = 0;
    r.p_value = 1.0;
    return r;
  }
  if (full.spec.slope_mode != SlopeMode::VaryingSlopes ||
      reduced.spec.slope_mode != SlopeMode::CommonSlope) {
    throw not_nested("only a common-slope model nested in a varying-slopes model is supported");
  }
  r.df = static_cast<int>(full.parameter_count()) - static_cast<int>(reduced.parameter_count());
  if (r.df <= 0) throw not_nested("the full model has no additional parameters");
  r.statistic = std::max(0.0, 2.0 * (full.loglik - reduced.loglik));
  r.p_value = chi_square_sf(r.statistic, r.df);
  return r;
}

}  // namespace thresholds
