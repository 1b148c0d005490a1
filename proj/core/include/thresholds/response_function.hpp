#pragma once

#include <string_view>

namespace thresholds {

/// Symmetric response functions F linking the latent scale to exceedance
/// probabilities. Logistic is kept at its standard scale (variance pi^2/3).
enum class ResponseFunctionKind { Normal, Logistic };

std::string_view to_string(ResponseFunctionKind kind);
ResponseFunctionKind response_function_from_string(std::string_view name);

struct MomentConstants {
  double e_f = 0.0;
  double var_f = 1.0;
};

// All functions throw Error(NotANumber) on NaN input.
double cdf(ResponseFunctionKind kind, double x);
/// 1 - F(x), evaluated without cancellation.
double survival(ResponseFunctionKind kind, double x);
double pdf(ResponseFunctionKind kind, double x);
double pdf_deriv(ResponseFunctionKind kind, double x);
double log_pdf(ResponseFunctionKind kind, double x);
/// d log f / dx = f'(x) / f(x), finite for every finite x.
double dlog_pdf(ResponseFunctionKind kind, double x);
/// Throws ProbabilityOutOfRange unless 0 < p < 1.
double quantile(ResponseFunctionKind kind, double p);

/// F(a) - F(b) for a >= b, using the complementary form when both arguments
/// sit in the upper tail.
double cdf_difference(ResponseFunctionKind kind, double a, double b);

MomentConstants moment_constants(ResponseFunctionKind kind);

struct ResponseMoments {
  double mean = 0.0;
  double variance = 0.0;
};

/// Mean and variance of a continuous response under a linear difficulty
/// delta(y) = intercept + slope * y:
///   E(Y) = (theta - intercept - E_F) / slope,  var(Y) = var_F / slope^2.
/// This is the latent-trait counterpart of the true-score/error decomposition
/// Y = E(Y) + E with var(E) = var_F / slope^2.
ResponseMoments linear_response_moments(ResponseFunctionKind kind, double theta, double intercept,
                                        double slope);

}  // namespace thresholds
