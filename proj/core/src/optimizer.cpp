#include "thresholds/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "thresholds/error.hpp"

namespace thresholds {

double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::fabs(x));
  return m;
}

namespace {

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

struct Pair {
  std::vector<double> s;
  std::vector<double> y;
  double rho;
};

std::vector<double> direction(const std::deque<Pair>& memory, const std::vector<double>& grad) {
  std::vector<double> q = grad;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * dot(memory[k].s, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] -= alpha[k] * memory[k].y[i];
  }
  double gamma = 1.0;
  if (!memory.empty()) {
    const auto& last = memory.back();
    gamma = dot(last.s, last.y) / dot(last.y, last.y);
  } else {
    gamma = 1.0 / std::max(1.0, max_abs(grad));
  }
  for (auto& v : q) v *= gamma;
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * dot(memory[k].y, q);
    for (std::size_t i = 0; i < q.size(); ++i) q[i] += memory[k].s[i] * (alpha[k] - beta);
  }
  for (auto& v : q) v = -v;
  return q;
}

}  // namespace

OptimizerResult minimize_lbfgs(const Objective& objective, std::vector<double> x0,
                               const OptimizerOptions& options) {
  const std::size_t n = x0.size();
  OptimizerResult r;
  r.x = std::move(x0);
  r.gradient.assign(n, 0.0);
  r.value = objective(r.x, r.gradient);
  if (!std::isfinite(r.value)) {
    throw Error(ErrorCode::NonFiniteLikelihood, "objective is not finite at the starting point");
  }
  r.trace.push_back(r.value);
  r.grad_norm = max_abs(r.gradient);

  std::deque<Pair> memory;
  std::vector<double> x_new(n);
  std::vector<double> g_new(n);
  while (true) {
    if (r.grad_norm < options.grad_tolerance) {
      r.converged = true;
      r.stop_reason = "gradient tolerance reached";
      break;
    }
    if (r.iterations >= options.max_iterations) {
      r.stop_reason = "iteration limit reached";
      break;
    }
    auto d = direction(memory, r.gradient);
    double slope = dot(d, r.gradient);
    if (!(slope < 0.0)) {
      memory.clear();
      d = direction(memory, r.gradient);
      slope = dot(d, r.gradient);
    }

    double step = 1.0;
    double f_new = std::numeric_limits<double>::infinity();
    bool accepted = false;
    for (int trial = 0; trial < 60; ++trial) {
      for (std::size_t i = 0; i < n; ++i) x_new[i] = r.x[i] + step * d[i];
      try {
        f_new = objective(x_new, g_new);
      } catch (const Error&) {
        f_new = std::numeric_limits<double>::infinity();
      }
      if (std::isfinite(f_new) && f_new <= r.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        memory.clear();
        continue;
      }
      r.stop_reason = "line search failed";
      break;
    }

    ++r.iterations;
    Pair p{std::vector<double>(n), std::vector<double>(n), 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      p.s[i] = x_new[i] - r.x[i];
      p.y[i] = g_new[i] - r.gradient[i];
    }
    const double sy = dot(p.s, p.y);
    if (sy > 1e-12 * std::sqrt(dot(p.s, p.s) * dot(p.y, p.y))) {
      p.rho = 1.0 / sy;
      memory.push_back(std::move(p));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double change = std::fabs(r.value - f_new) / std::max(1.0, std::fabs(r.value));
    r.x = x_new;
    r.gradient = g_new;
    r.value = f_new;
    r.grad_norm = max_abs(r.gradient);
    r.trace.push_back(r.value);
    if (change < options.rel_tolerance && r.grad_norm >= options.grad_tolerance) {
      r.stop_reason = "relative change below tolerance";
      break;
    }
  }
  return r;
}

}  // namespace thresholds
