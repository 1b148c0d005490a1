#include "thresholds/response_function.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "thresholds/error.hpp"

namespace thresholds {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kInvSqrt2Pi = 0.39894228040143267794;
constexpr double kLogSqrt2Pi = 0.91893853320467274178;

void require_number(double x) {
  if (std::isnan(x)) throw Error(ErrorCode::NotANumber, "response function evaluated at NaN");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double logistic_cdf(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// Acklam's rational approximation for the lower half (p <= 0.5), followed by
// one Halley step against the erfc-based CDF.
double normal_quantile_lower(double p) {
  static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                 -2.759285104469687e+02, 1.383577518672690e+02,
                                 -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                 -1.556989798598866e+02, 6.680131188771972e+01,
                                 -1.328068155288572e+01};
  static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                 -2.400758277161838e+00, -2.549732539343734e+00,
                                 4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                                 2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  }
  for (int step = 0; step < 2; ++step) {
    const double dens = std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
    if (!(dens > 0.0)) break;
    const double u = (normal_cdf(x) - p) / dens;
    x -= u / (1.0 + 0.5 * x * u);
  }
  return x;
}

}  // namespace

std::string_view to_string(ResponseFunctionKind kind) {
  return kind == ResponseFunctionKind::Normal ? "normal" : "logistic";
}

ResponseFunctionKind response_function_from_string(std::string_view name) {
  if (name == "normal") return ResponseFunctionKind::Normal;
  if (name == "logistic") return ResponseFunctionKind::Logistic;
  throw Error(ErrorCode::InvalidConfig, "unknown response function '" + std::string(name) + "'");
}

double cdf(ResponseFunctionKind kind, double x) {
  require_number(x);
  return kind == ResponseFunctionKind::Normal ? normal_cdf(x) : logistic_cdf(x);
}

double survival(ResponseFunctionKind kind, double x) { return cdf(kind, -x); }

double pdf(ResponseFunctionKind kind, double x) {
  require_number(x);
  if (std::isinf(x)) return 0.0;
  if (kind == ResponseFunctionKind::Normal) return kInvSqrt2Pi * std::exp(-0.5 * x * x);
  const double e = std::exp(-std::fabs(x));
  const double s = 1.0 + e;
  return e / (s * s);
}

double pdf_deriv(ResponseFunctionKind kind, double x) {
  require_number(x);
  if (std::isinf(x)) return 0.0;
  return pdf(kind, x) * dlog_pdf(kind, x);
}

double log_pdf(ResponseFunctionKind kind, double x) {
  require_number(x);
  if (kind == ResponseFunctionKind::Normal) return -0.5 * x * x - kLogSqrt2Pi;
  const double ax = std::fabs(x);
  return -ax - 2.0 * std::log1p(std::exp(-ax));
}

double dlog_pdf(ResponseFunctionKind kind, double x) {
  require_number(x);
  if (kind == ResponseFunctionKind::Normal) return -x;
  return -std::tanh(0.5 * x);
}

double quantile(ResponseFunctionKind kind, double p) {
  require_number(p);
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::ProbabilityOutOfRange,
                "quantile requires 0 < p < 1, got " + std::to_string(p));
  }
  if (kind == ResponseFunctionKind::Logistic) return std::log(p) - std::log1p(-p);
  // 1 - p is exact for p >= 0.5
  if (p > 0.5) return -normal_quantile_lower(1.0 - p);
  return normal_quantile_lower(p);
}

double cdf_difference(ResponseFunctionKind kind, double a, double b) {
  require_number(a);
  require_number(b);
  if (a == b) return 0.0;
  if (std::isinf(a) && a > 0) return survival(kind, b);
  if (std::isinf(b) && b < 0) return cdf(kind, a);
  if (a + b > 0.0) return survival(kind, b) - survival(kind, a);
  return cdf(kind, a) - cdf(kind, b);
}

MomentConstants moment_constants(ResponseFunctionKind kind) {
  if (kind == ResponseFunctionKind::Normal) return {0.0, 1.0};
  return {0.0, std::numbers::pi * std::numbers::pi / 3.0};
}

ResponseMoments linear_response_moments(ResponseFunctionKind kind, double theta, double intercept,
                                        double slope) {
  if (!(slope > 0.0)) throw Error(ErrorCode::InvalidConfig, "linear slope must be positive");
  const auto m = moment_constants(kind);
  return {(theta - intercept - m.e_f) / slope, m.var_f / (slope * slope)};
}

}  // namespace thresholds
