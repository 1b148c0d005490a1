#pragma once

#include <vector>

namespace thresholds {

/// Gauss-Hermite rule for integrals against exp(-x^2), with weights divided
/// by sqrt(pi) so that they sum to one. For a N(0, sigma^2) trait use nodes
/// theta_k = sqrt(2) * sigma * x_k with the same weights.
struct QuadratureRule {
  std::vector<double> nodes;    // ascending
  std::vector<double> weights;  // sum to 1
};

/// Above this the outermost weights underflow double precision.
inline constexpr int kMaxQuadratureNodes = 300;

/// Throws InvalidConfig unless 1 <= n <= kMaxQuadratureNodes.
QuadratureRule gauss_hermite(int n);

}  // namespace thresholds
