#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "thresholds/estimation.hpp"
#include "thresholds/model.hpp"
#include "thresholds/scoring.hpp"

namespace thresholds {

inline constexpr int kReportSchemaVersion = 1;

/// Fit report as JSON. `config_json` (a JSON object, may be empty) is echoed
/// under "config". The output has no timestamp, so equal inputs give equal bytes.
std::string fit_report_json(const FitResult& fit, std::string_view config_json = "{}");

/// Model stored in a fit report (items with fitted values, sigma, response).
FittedModel model_from_report(std::string_view report_json);
FittedModel load_model_from_report(const std::filesystem::path& path);

std::string lr_test_json(const LrTestResult& test, const FitResult& full, const FitResult& reduced);

/// Human-readable parameter table.
std::string fit_summary_text(const FitResult& fit);

/// person,posterior_mean,posterior_mode,posterior_sd,n_items,error
void write_scores_csv(std::ostream& out, const std::vector<ScoreRow>& rows);
/// person,theta
void write_theta_csv(std::ostream& out, const std::vector<double>& theta);

/// Shortest round-trip decimal form of a double ("inf", "-inf", "nan" for
/// non-finite values).
std::string format_double(double v);

}  // namespace thresholds
