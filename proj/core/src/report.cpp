#include "thresholds/report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "json_convert.hpp"
#include "thresholds/error.hpp"

namespace thresholds {

using detail::json;
using detail::number_to_json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

std::string fit_report_json(const FitResult& fit, std::string_view config_json) {
  json config;
  try {
    config = json::parse(config_json.empty() ? std::string_view("{}") : config_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("config echo is not valid JSON: ") + e.what());
  }
  json params = json::array();
  for (const auto& e : fit.estimates) {
    params.push_back({{"item", e.item},
                      {"parameter", e.parameter},
                      {"value", number_to_json(e.value)},
                      {"se", number_to_json(e.se)},
                      {"fixed", e.fixed}});
  }
  json unconstrained = json::array();
  for (std::size_t k = 0; k < fit.unconstrained.size(); ++k) {
    unconstrained.push_back({{"name", fit.unconstrained_names[k]},
                             {"value", number_to_json(fit.unconstrained[k])},
                             {"se", number_to_json(fit.unconstrained_se[k])}});
  }
  std::vector<ItemSpec> items = fit.model.items;
  for (std::size_t i = 0; i < items.size(); ++i) {
    items[i].family.values = fit.model.difficulties[i].coefficients();
  }
  json item_json = detail::items_to_json(items);
  json ranges = json::object();
  for (std::size_t i = 0; i < fit.model.observed_ranges.size(); ++i) {
    ranges[items[i].id] = {fit.model.observed_ranges[i][0], fit.model.observed_ranges[i][1]};
  }
  json trace = json::array();
  for (double v : fit.objective_trace) trace.push_back(number_to_json(v));
  json starts = json::array();
  for (double v : fit.start_logliks) starts.push_back(number_to_json(v));
  const auto& sigma = fit.estimates.back();

  json j = {{"schema_version", kReportSchemaVersion},
            {"config", config},
            {"model", detail::model_spec_to_json(fit.spec)},
            {"converged", fit.converged},
            {"iterations", fit.iterations},
            {"grad_norm", number_to_json(fit.grad_norm)},
            {"loglik", number_to_json(fit.loglik)},
            {"penalty_value", number_to_json(fit.penalty_value)},
            {"penalized_loglik", number_to_json(fit.loglik - fit.penalty_value)},
            {"underflow_count", fit.underflow_count},
            {"persons", fit.persons},
            {"parameter_count", fit.parameter_count()},
            {"sigma", {{"value", number_to_json(sigma.value)},
                       {"se", number_to_json(sigma.se)},
                       {"fixed", sigma.fixed}}},
            {"standard_errors", {{"available", fit.standard_errors_available},
                                 {"message", fit.standard_error_message}}},
            {"parameters", params},
            {"unconstrained", unconstrained},
            {"items", item_json["items"]},
            {"order", item_json["order"]},
            {"observed_ranges", ranges},
            {"objective_trace", trace},
            {"start_logliks", starts}};
  return j.dump(2) + "\n";
}

FittedModel model_from_report(std::string_view report_json) {
  json j;
  try {
    j = json::parse(report_json);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::InvalidConfig, std::string("fit report is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("schema_version") || !j.contains("model") ||
      !j.contains("sigma")) {
    throw Error(ErrorCode::InvalidConfig, "not a fit report");
  }
  if (j["schema_version"].get<int>() != kReportSchemaVersion) {
    throw Error(ErrorCode::InvalidConfig, "unsupported fit report schema_version");
  }
  const auto spec = detail::model_spec_from_json(j["model"]);
  const double sigma = detail::number_from_json(j["sigma"]["value"]);
  auto model = FittedModel::from_item_values(detail::items_from_json(j), spec.response_function,
                                             sigma, spec.quadrature_nodes);
  if (j.contains("observed_ranges")) {
    const auto& r = j["observed_ranges"];
    bool complete = true;
    std::vector<std::array<double, 2>> ranges;
    for (const auto& item : model.items) {
      if (!r.contains(item.id)) {
        complete = false;
        break;
      }
      ranges.push_back({r[item.id][0].get<double>(), r[item.id][1].get<double>()});
    }
    if (complete) model.observed_ranges = std::move(ranges);
  }
  return model;
}

FittedModel load_model_from_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open fit report '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return model_from_report(buf.str());
}

std::string lr_test_json(const LrTestResult& test, const FitResult& full, const FitResult& reduced) {
  json j = {{"schema_version", kReportSchemaVersion},
            {"full", {{"slope_mode", std::string(to_string(full.spec.slope_mode))},
                      {"loglik", number_to_json(full.loglik)},
                      {"parameter_count", full.parameter_count()}}},
            {"reduced", {{"slope_mode", std::string(to_string(reduced.spec.slope_mode))},
                         {"loglik", number_to_json(reduced.loglik)},
                         {"parameter_count", reduced.parameter_count()}}},
            {"statistic", number_to_json(test.statistic)},
            {"df", test.df},
            {"p_value", number_to_json(test.p_value)}};
  return j.dump(2) + "\n";
}

std::string fit_summary_text(const FitResult& fit) {
  std::ostringstream os;
  os << "slope mode " << to_string(fit.spec.slope_mode) << ", response "
     << to_string(fit.spec.response_function) << ", " << fit.persons << " persons\n";
  os << std::fixed << std::setprecision(4);
  os << "loglik " << fit.loglik;
  if (fit.penalty_value != 0.0) os << "  penalty " << fit.penalty_value;
  os << "  (" << (fit.converged ? "converged" : "NOT converged") << ", " << fit.iterations
     << " iterations, |grad| " << std::scientific << std::setprecision(2) << fit.grad_norm
     << ")\n"
     << std::fixed << std::setprecision(4);
  os << std::left << std::setw(14) << "item" << std::setw(12) << "parameter" << std::right
     << std::setw(12) << "estimate" << std::setw(10) << "se" << '\n';
  for (const auto& e : fit.estimates) {
    os << std::left << std::setw(14) << (e.item.empty() ? "-" : e.item) << std::setw(12)
       << e.parameter << std::right << std::setw(12) << e.value << std::setw(10);
    if (e.fixed) {
      os << "fixed";
    } else if (std::isfinite(e.se)) {
      os << e.se;
    } else {
      os << "NA";
    }
    os << '\n';
  }
  if (!fit.standard_errors_available) os << "standard errors: " << fit.standard_error_message << '\n';
  return os.str();
}

void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows) {
  out << "person,posterior_mean,posterior_mode,posterior_sd,n_items,error\n";
  for (std::size_t p = 0; p < rows.size(); ++p) {
    out << p + 1 << ',';
    if (rows[p].score) {
      const auto& s = *rows[p].score;
      out << format_double(s.posterior_mean) << ',' << format_double(s.posterior_mode) << ','
          << format_double(s.posterior_sd) << ',' << s.n_items_observed << ",\n";
    } else {
      std::string msg = rows[p].error;
      for (auto& c : msg) {
        if (c == ',' || c == '\n' || c == '"') c = ' ';
      }
      out << ",,,0," << msg << '\n';
    }
  }
}

void write_theta_csv(std::ostream& out, const std::vector<double>& theta) {
  out << "person,theta\n";
  for (std::size_t p = 0; p < theta.size(); ++p) out << p + 1 << ',' << format_double(theta[p]) << '\n';
}

}  // namespace thresholds
