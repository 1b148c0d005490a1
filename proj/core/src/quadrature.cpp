#include "thresholds/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <numbers>

#include "thresholds/error.hpp"

namespace thresholds {

namespace {

struct HermiteEval {
  double ratio;     // p_n(z) / p_n'(z)
  double log_dpn;   // log |p_n'(z)|
};

// Orthonormal Hermite recurrence, rescaled as it grows so large n and large
// |z| do not overflow.
HermiteEval hermite(int n, double z) {
  double p1 = std::pow(std::numbers::pi, -0.25);
  double p2 = 0.0;
  double log_scale = 0.0;
  for (int j = 1; j <= n; ++j) {
    const double p3 = p2;
    p2 = p1;
    p1 = z * std::sqrt(2.0 / j) * p2 - std::sqrt(static_cast<double>(j - 1) / j) * p3;
    if (std::fabs(p1) > 1e100) {
      p1 *= 1e-100;
      p2 *= 1e-100;
      log_scale += 100.0 * std::numbers::ln10;
    }
  }
  const double pp = std::sqrt(2.0 * n) * p2;
  return {p1 / pp, std::log(std::fabs(pp)) + log_scale};
}

}  // namespace

QuadratureRule gauss_hermite(int n) {
  if (n < 1 || n > kMaxQuadratureNodes) {
    throw Error(ErrorCode::InvalidConfig, "quadrature needs 1..300 nodes");
  };
  QuadratureRule rule;
  rule.nodes.assign(n, 0.0);
  rule.weights.assign(n, 0.0);
  if (n == 1) {
    rule.weights[0] = 1.0;
    return rule;
  }
  // Starting nodes from the Jacobi matrix, refined by Newton on the recurrence.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd sub(n - 1);
  for (int k = 1; k < n; ++k) sub[k - 1] = std::sqrt(k / 2.0);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig;
  eig.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& start = eig.eigenvalues();

  std::vector<double> log_w(n);
  for (int k = 0; k < n; ++k) {
    double z = start[k];
    HermiteEval h{};
    for (int it = 0; it < 50; ++it) {
      h = hermite(n, z);
      const double z1 = z;
      z -= h.ratio;
      if (std::fabs(z - z1) <= 1e-15 * std::max(1.0, std::fabs(z))) break;
    }
    h = hermite(n, z);
    rule.nodes[k] = z;
    log_w[k] = std::log(2.0) - 2.0 * h.log_dpn;
  }
  // Exact symmetry.
  for (int k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    log_w[n - 1 - k] = log_w[k] = 0.5 * (log_w[k] + log_w[n - 1 - k]);
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  const double top = *std::max_element(log_w.begin(), log_w.end());
  double total = 0.0;
  for (int k = 0; k < n; ++k) total += std::exp(log_w[k] - top);
  for (int k = 0; k < n; ++k) rule.weights[k] = std::exp(log_w[k] - top) / total;
  return rule;
}

}  // namespace thresholds
