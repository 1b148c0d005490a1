#include "thresholds/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include "json_convert.hpp"
#include "thresholds/error.hpp"
#include "thresholds/parallel.hpp"
#include "thresholds/rng.hpp"
#include "thresholds/scoring.hpp"

namespace thresholds {

double sample_response(ResponseFunctionKind response, const DifficultyFunction& delta,
                       DensityBranch branch, double theta, double u) {
  if (!(u > 0.0 && u < 1.0)) {
    throw Error(ErrorCode::ProbabilityOutOfRange, "sample_response needs 0 < u < 1");
  }
  if (branch == DensityBranch::Continuous) return delta.invert(theta - quantile(response, u));
  const auto& support = delta.support();
  for (int r = 0;; ++r) {
    if (support.is_finite_discrete() && r == support.top_category()) return r;
    const double exceed = cdf(response, theta - delta.eval(r));
    if (u >= exceed) return r;
    if (exceed <= 1e-12 && !support.is_finite_discrete()) return r;
    if (r >= 100000000) throw Error(ErrorCode::OutOfRange, "count sampling did not terminate");
  }
}

void SimulationScenario::validate() const {
  if (persons < 1) throw Error(ErrorCode::InvalidConfig, "a scenario needs at least one person");
  if (replications < 1) throw Error(ErrorCode::InvalidConfig, "a scenario needs replications >= 1");
  if (!(truth.sigma >= 0.0) || !std::isfinite(truth.sigma)) {
    throw Error(ErrorCode::InvalidConfig, "scenario sigma must be finite and >= 0");
  }
  if (truth.items.empty() || truth.items.size() != truth.difficulties.size()) {
    throw Error(ErrorCode::InvalidConfig, "scenario needs at least one item with true values");
  }
  fit_spec.validate();
}

SimulatedData simulate_dataset(const SimulationScenario& scenario, std::size_t replication) {
  scenario.validate();
  const auto& truth = scenario.truth;
  const std::size_t n_items = truth.items.size();
  auto rng = Rng::substream(scenario.seed, replication);
  std::vector<double> values(scenario.persons * n_items);
  std::vector<double> thetas(scenario.persons);
  for (std::size_t p = 0; p < scenario.persons; ++p) {
    const double theta = truth.sigma * rng.normal();
    thetas[p] = theta;
    for (std::size_t i = 0; i < n_items; ++i) {
      values[p * n_items + i] = sample_response(truth.response_function, truth.difficulties[i],
                                                truth.items[i].treat_as, theta, rng.uniform());
    }
  }
  std::vector<ItemSpec> items = truth.items;
  for (auto& item : items) {
    item.family.values.clear();
    item.rescale.reset();
  }
  return SimulatedData{
      ItemResponseMatrix::create(std::move(items), scenario.persons, std::move(values),
                                 std::vector<std::uint8_t>(scenario.persons * n_items, 1)),
      std::move(thetas)};
}

namespace {

double correlation(const std::vector<double>& a, const std::vector<double>& b) {
  const double n = static_cast<double>(a.size());
  double ma = 0.0;
  double mb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    ma += a[k];
    mb += b[k];
  }
  ma /= n;
  mb /= n;
  double sab = 0.0;
  double saa = 0.0;
  double sbb = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    sab += (a[k] - ma) * (b[k] - mb);
    saa += (a[k] - ma) * (a[k] - ma);
    sbb += (b[k] - mb) * (b[k] - mb);
  }
  return sab / std::sqrt(saa * sbb);
}

struct Replication {
  bool converged = false;
  bool se_available = false;
  std::vector<ParameterEstimate> estimates;
  double theta_correlation = 0.0;
};

}  // namespace

RecoveryReport recovery_study(const SimulationScenario& scenario, const FitOptions& options,
                              unsigned threads) {
  scenario.validate();
  const auto truth_table = parameter_table(scenario.truth, options.fixed_sigma.has_value());
  std::vector<Replication> reps(static_cast<std::size_t>(scenario.replications));
  FitOptions fit_options = options;
  fit_options.threads = 1;
  run_blocks(reps.size(), threads, [&](std::size_t r) {
    const auto sim = simulate_dataset(scenario, r);
    const auto result = fit(sim.data, scenario.fit_spec, fit_options);
    auto& rep = reps[r];
    rep.converged = result.converged;
    rep.se_available = result.standard_errors_available;
    rep.estimates = result.estimates;
    std::vector<double> means;
    for (const auto& row : score_persons(result.model, sim.data)) {
      means.push_back(row.score ? row.score->posterior_mean : 0.0);
    }
    rep.theta_correlation = correlation(sim.theta, means);
  });

  RecoveryReport report;
  report.seed = scenario.seed;
  report.persons = scenario.persons;
  report.replications = scenario.replications;
  for (const auto& rep : reps) {
    if (!rep.converged) {
      ++report.not_converged;
      continue;
    }
    ++report.converged;
    if (!rep.se_available) ++report.se_unavailable;
    report.theta_correlation.push_back(rep.theta_correlation);
  }
  double intercept_sq = 0.0;
  int intercept_n = 0;
  int covered = 0;
  int coverage_n = 0;
  for (std::size_t k = 0; k < truth_table.size(); ++k) {
    ParameterRecovery pr;
    pr.item = truth_table[k].item;
    pr.parameter = truth_table[k].parameter;
    pr.truth = truth_table[k].value;
    double sum = 0.0;
    double sq = 0.0;
    int inside = 0;
    int with_se = 0;
    for (const auto& rep : reps) {
      if (!rep.converged) continue;
      const auto& e = rep.estimates[k];
      const double err = e.value - pr.truth;
      sum += e.value;
      sq += err * err;
      ++pr.replications;
      if (std::isfinite(e.se) && !e.fixed) {
        ++with_se;
        if (std::fabs(err) <= 2.0 * e.se) ++inside;
      }
      if (pr.parameter == "intercept") {
        intercept_sq += err * err;
        ++intercept_n;
      }
    }
    if (pr.replications > 0) {
      pr.mean_estimate = sum / pr.replications;
      pr.bias = pr.mean_estimate - pr.truth;
      pr.rmse = std::sqrt(sq / pr.replications);
    }
    pr.coverage = with_se > 0 ? static_cast<double>(inside) / with_se : std::nan("");
    if (!pr.item.empty()) {
      covered += inside;
      coverage_n += with_se;
    }
    report.parameters.push_back(pr);
  }
  double corr_sum = 0.0;
  for (double c : report.theta_correlation) corr_sum += c;
  report.mean_theta_correlation = report.theta_correlation.empty()
                                      ? std::nan("")
                                      : corr_sum / static_cast<double>(report.theta_correlation.size());
  report.intercept_rmse = intercept_n > 0 ? std::sqrt(intercept_sq / intercept_n) : std::nan("");
  report.item_parameter_coverage =
      coverage_n > 0 ? static_cast<double>(covered) / coverage_n : std::nan("");
  return report;
}

std::string recovery_report_json(const RecoveryReport& report) {
  using detail::json;
  using detail::number_to_json;
  json params = json::array();
  for (const auto& p : report.parameters) {
    params.push_back({{"item", p.item},
                      {"parameter", p.parameter},
                      {"truth", number_to_json(p.truth)},
                      {"mean_estimate", number_to_json(p.mean_estimate)},
                      {"bias", number_to_json(p.bias)},
                      {"rmse", number_to_json(p.rmse)},
                      {"coverage_2se", number_to_json(p.coverage)},
                      {"replications", p.replications}});
  }
  json corr = json::array();
  for (double c : report.theta_correlation) corr.push_back(number_to_json(c));
  json j = {{"schema_version", 1},
            {"seed", report.seed},
            {"persons", report.persons},
            {"replications", report.replications},
            {"converged", report.converged},
            {"not_converged", report.not_converged},
            {"se_unavailable", report.se_unavailable},
            {"mean_theta_correlation", number_to_json(report.mean_theta_correlation)},
            {"intercept_rmse", number_to_json(report.intercept_rmse)},
            {"item_parameter_coverage_2se", number_to_json(report.item_parameter_coverage)},
            {"theta_correlation", corr},
            {"parameters", params}};
  return j.dump(2) + "\n";
}

std::string recovery_report_table(const RecoveryReport& report) {
  std::ostringstream os;
  os << "seed " << report.seed << ", persons " << report.persons << ", replications "
     << report.replications << " (" << report.converged << " converged)\n";
  os << std::fixed << std::setprecision(4);
  os << "mean theta correlation " << report.mean_theta_correlation << ", intercept RMSE "
     << report.intercept_rmse << ", item coverage (2 SE) " << report.item_parameter_coverage
     << "\n\n";
  os << std::left << std::setw(12) << "item" << std::setw(12) << "parameter" << std::right
     << std::setw(10) << "truth" << std::setw(10) << "mean" << std::setw(10) << "bias"
     << std::setw(10) << "rmse" << std::setw(10) << "cover" << '\n';
  for (const auto& p : report.parameters) {
    os << std::left << std::setw(12) << (p.item.empty() ? "-" : p.item) << std::setw(12)
       << p.parameter << std::right << std::setw(10) << p.truth << std::setw(10)
       << p.mean_estimate << std::setw(10) << p.bias << std::setw(10) << p.rmse << std::setw(10)
       << p.coverage << '\n';
  }
  return os.str();
}

SimulationScenario parse_scenario(std::string_view json_text) {
  using detail::json;
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("scenario is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "scenario must be a JSON object");
  if (!j.contains("seed") || !j["seed"].is_number_unsigned()) {
    throw Error(ErrorCode::InvalidConfig, "scenario needs a nonnegative integer 'seed'");
  }
  SimulationScenario s;
  s.seed = j["seed"].get<std::uint64_t>();
  s.persons = j.value("persons", std::size_t{100});
  s.replications = j.value("replications", 1);
  const json model = j.value("model", json::object());
  s.fit_spec = detail::model_spec_from_json(model);
  const auto response =
      response_function_from_string(j.value("response_function", std::string(to_string(s.fit_spec.response_function))));
  s.fit_spec.response_function = response;
  s.truth = FittedModel::from_item_values(detail::items_from_json(j), response,
                                          j.value("sigma", 1.0), s.fit_spec.quadrature_nodes);
  s.validate();
  return s;
}

SimulationScenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open scenario '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str());
}

}  // namespace thresholds
