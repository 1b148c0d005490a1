#include "thresholds/likelihood.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "thresholds/error.hpp"
#include "thresholds/parallel.hpp"

namespace thresholds {

// ---------------------------------------------------------------------------
// Observation densities

double log_density_continuous(ResponseFunctionKind response, const DifficultyFunction& delta,
                              double theta, double y) {
  const double slope = delta.eval_deriv(y);
  if (!(slope > 0.0)) {
    std::ostringstream os;
    os << "difficulty derivative " << slope << " at y=" << y << " is not positive";
    throw Error(ErrorCode::ZeroDerivative, os.str());
  }
  return log_pdf(response, theta - delta.eval(y)) + delta.log_eval_deriv(y);
}

double log_density_discrete(ResponseFunctionKind response, const DifficultyFunction& delta,
                            double theta, double y) {
  const double upper = delta.eval(y);
  const double lower = y > 0.0 ? delta.eval(y - 1.0) : -kInf;
  const double p = cdf_difference(response, theta - lower, theta - upper);
  return std::log(std::max(p, kProbabilityFloor));
}

double log_density(ResponseFunctionKind response, const DifficultyFunction& delta,
                   DensityBranch branch, double theta, double y) {
  return branch == DensityBranch::Continuous ? log_density_continuous(response, delta, theta, y)
                                             : log_density_discrete(response, delta, theta, y);
}

// ---------------------------------------------------------------------------
// ParameterLayout

namespace {

bool inert_slope(const ItemSpec& item) {
  return item.family.is_parametric() && item.treat_as == DensityBranch::Discrete &&
         item.support.is_finite_discrete() && item.support.category_count() == 2;
}

std::shared_ptr<const BSplineBasis> spline_basis(const ItemSpec& item, std::array<double, 2> range) {
  return std::make_shared<const BSplineBasis>(
      BSplineBasis::build(range[0], range[1], item.family.n_basis, item.family.degree));
}

std::vector<double> template_coefficients(const ItemSpec& item, const BSplineBasis* basis) {
  switch (item.family.kind) {
    case FamilyKind::FreeOrdinal: {
      std::vector<double> c(coefficient_count(item));
      for (std::size_t r = 0; r < c.size(); ++r) c[r] = static_cast<double>(r);
      return c;
    }
    case FamilyKind::BSpline: return basis->greville();
    default: return {0.0, 1.0};
  }
}

}  // namespace

ParameterLayout ParameterLayout::build(const ItemResponseMatrix& data, const ModelSpec& spec,
                                       std::optional<double> fixed_sigma) {
  spec.validate();
  if (fixed_sigma && !(*fixed_sigma > 0.0 && std::isfinite(*fixed_sigma))) {
    throw Error(ErrorCode::InvalidConfig, "fixed sigma must be positive and finite");
  }
  ParameterLayout layout;
  layout.fixed_sigma_ = fixed_sigma;
  const std::size_t n_items = data.item_count();
  layout.items_.resize(n_items);

  const bool common_shape = spec.slope_mode == SlopeMode::SplineCommonShape;
  std::shared_ptr<const BSplineBasis> shared_basis;
  std::vector<std::size_t> spline_items;
  for (std::size_t i = 0; i < n_items; ++i) {
    if (data.item(i).family.kind == FamilyKind::BSpline) spline_items.push_back(i);
  }
  if (common_shape) {
    if (spline_items.empty()) {
      throw Error(ErrorCode::InvalidConfig, "spline_common_shape needs at least one bspline item");
    }
    const auto& first = data.item(spline_items.front());
    std::array<double, 2> range{kInf, -kInf};
    for (std::size_t i : spline_items) {
      const auto& item = data.item(i);
      if (item.family.n_basis != first.family.n_basis || item.family.degree != first.family.degree) {
        throw Error(ErrorCode::InvalidConfig,
                    "spline_common_shape needs the same n_basis and degree for every spline item");
      }
      const auto r = default_knot_range(item, data.observed_range(i));
      range[0] = std::min(range[0], r[0]);
      range[1] = std::max(range[1], r[1]);
    }
    shared_basis = spline_basis(first, range);
  }
  if (spec.slope_mode == SlopeMode::SplineFree && spec.penalty_lambda > 0.0) {
    for (std::size_t i : spline_items) {
      if (data.item(i).family.n_basis != data.item(spline_items.front()).family.n_basis) {
        throw Error(ErrorCode::InvalidConfig,
                    "the shape penalty needs the same n_basis for every spline item");
      }
    }
    layout.penalty_items_ = spline_items;
  }

  auto add = [&layout](std::string name) {
    layout.names_.push_back(std::move(name));
    return layout.names_.size() - 1;
  };

  std::vector<std::size_t> shared_slope_users;
  std::vector<std::size_t> shape_users;
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto& item = data.item(i);
    auto& block = layout.items_[i];
    std::shared_ptr<const BSplineBasis> basis;
    if (item.family.kind == FamilyKind::BSpline) {
      basis = common_shape ? shared_basis
                           : spline_basis(item, default_knot_range(item, data.observed_range(i)));
    }
    layout.templates_.push_back(make_difficulty(
        item, spec.response_function, basis, template_coefficients(item, basis.get())));
    block.n_coefficients = coefficient_count(item);

    if (item.family.is_parametric()) {
      block.globals.push_back(add(item.id + ".intercept"));
      if (inert_slope(item)) {
        block.link = Link::InertSlope;
      } else if (spec.slope_mode == SlopeMode::CommonSlope) {
        block.link = Link::Parametric;
        shared_slope_users.push_back(i);
      } else {
        block.link = Link::Parametric;
        block.globals.push_back(add(item.id + ".log_slope"));
      }
    } else if (item.family.kind == FamilyKind::BSpline && common_shape) {
      block.link = Link::CommonShape;
      shape_users.push_back(i);
    } else {
      block.link = Link::Ordered;
      const bool ordinal = item.family.kind == FamilyKind::FreeOrdinal;
      block.globals.push_back(add(item.id + (ordinal ? ".threshold0" : ".c0")));
      for (std::size_t l = 1; l < block.n_coefficients; ++l) {
        block.globals.push_back(add(item.id + (ordinal ? ".log_gap" : ".log_diff") + std::to_string(l)));
      }
    }
  }
  if (!shared_slope_users.empty()) {
    const std::size_t idx = add("common.log_slope");
    for (std::size_t i : shared_slope_users) layout.items_[i].globals.push_back(idx);
  }
  if (!shape_users.empty()) {
    std::vector<std::size_t> shape;
    const std::size_t m = static_cast<std::size_t>(shared_basis->size());
    shape.push_back(add("shape.c0"));
    for (std::size_t l = 1; l < m; ++l) shape.push_back(add("shape.log_diff" + std::to_string(l)));
    for (std::size_t k = 0; k < shape_users.size(); ++k) {
      auto& block = layout.items_[shape_users[k]];
      block.globals = shape;
      // The first spline item's offset is fixed at zero.
      if (k > 0) block.globals.push_back(add(data.item(shape_users[k]).id + ".offset"));
    }
  }
  if (!fixed_sigma) add("log_sigma");
  return layout;
}

double ParameterLayout::sigma(std::span<const double> u) const {
  return fixed_sigma_ ? *fixed_sigma_ : std::exp(u[sigma_index()]);
}

void ParameterLayout::item_coefficients(std::size_t item, std::span<const double> u,
                                        std::vector<double>& c,
                                        std::vector<double>& jacobian) const {
  const auto& block = items_[item];
  const std::size_t nc = block.n_coefficients;
  const std::size_t ng = block.globals.size();
  c.assign(nc, 0.0);
  jacobian.assign(nc * ng, 0.0);
  const auto g = [&](std::size_t k) { return u[block.globals[k]]; };
  switch (block.link) {
    case Link::Parametric: {
      const double slope = std::exp(g(1));
      c[0] = g(0);
      c[1] = slope;
      jacobian[0 * ng + 0] = 1.0;
      jacobian[1 * ng + 1] = slope;
      break;
    }
    case Link::InertSlope:
      c[0] = g(0);
      c[1] = 1.0;
      jacobian[0] = 1.0;
      break;
    case Link::Ordered:
    case Link::CommonShape: {
      const bool offset = block.link == Link::CommonShape && ng > nc;
      const double shift = offset ? g(nc) : 0.0;
      double running = g(0);
      c[0] = running + shift;
      for (std::size_t l = 0; l < nc; ++l) jacobian[l * ng + 0] = 1.0;
      for (std::size_t m = 1; m < nc; ++m) {
        const double step = std::exp(g(m));
        running += step;
        c[m] = running + shift;
        for (std::size_t l = m; l < nc; ++l) jacobian[l * ng + m] = step;
      }
      if (offset) {
        for (std::size_t l = 0; l < nc; ++l) jacobian[l * ng + nc] = 1.0;
      }
      break;
    }
  }
}

std::vector<DifficultyFunction> ParameterLayout::difficulties(std::span<const double> u) const {
  std::vector<DifficultyFunction> out;
  std::vector<double> c;
  std::vector<double> jac;
  for (std::size_t i = 0; i < items_.size(); ++i) {
    item_coefficients(i, u, c, jac);
    out.push_back(templates_[i].with_coefficients(c));
  }
  return out;
}

std::vector<double> ParameterLayout::pack(const std::vector<DifficultyFunction>& difficulties,
                                          double sigma) const {
  if (difficulties.size() != items_.size()) {
    throw Error(ErrorCode::InvalidConfig, "pack needs one difficulty function per item");
  }
  std::vector<double> u(size(), 0.0);
  std::vector<bool> set(size(), false);
  auto put = [&](std::size_t idx, double v) {
    if (!set[idx]) {
      u[idx] = v;
      set[idx] = true;
    }
  };
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& block = items_[i];
    const auto& c = difficulties[i].coefficients();
    if (c.size() != block.n_coefficients) {
      throw Error(ErrorCode::InvalidConfig, "pack: coefficient count mismatch");
    }
    switch (block.link) {
      case Link::Parametric:
        put(block.globals[0], c[0]);
        put(block.globals[1], std::log(c[1]));
        break;
      case Link::InertSlope: put(block.globals[0], c[0]); break;
      case Link::Ordered: {
        const auto v = difficulties[i].to_unconstrained();
        for (std::size_t k = 0; k < v.size(); ++k) put(block.globals[k], v[k]);
        break;
      }
      case Link::CommonShape: {
        const bool first = block.globals.size() == block.n_coefficients;
        if (first) {
          const auto v = ordered_to_unconstrained(c, kSplineDifferenceFloor);
          for (std::size_t k = 0; k < v.size(); ++k) put(block.globals[k], v[k]);
        }
        break;
      }
    }
  }
  // Offsets relative to the shape, once the shape is known.
  for (std::size_t i = 0; i < items_.size(); ++i) {
    const auto& block = items_[i];
    if (block.link != Link::CommonShape || block.globals.size() == block.n_coefficients) continue;
    const std::size_t shape0 = block.globals[0];
    put(block.globals.back(), difficulties[i].coefficients()[0] - u[shape0]);
  }
  if (has_sigma()) {
    if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidConfig, "sigma must be positive");
    put(sigma_index(), std::log(sigma));
  }
  return u;
}

// ---------------------------------------------------------------------------
// MarginalLikelihood

struct MarginalLikelihood::BlockResult {
  double loglik = 0.0;
  double dlog_sigma = 0.0;
  std::vector<double> grad;  // d l / d c, flattened over items
  std::size_t underflows = 0;

  void add(const BlockResult& other) {
    loglik += other.loglik;
    dlog_sigma += other.dlog_sigma;
    for (std::size_t k = 0; k < grad.size(); ++k) grad[k] += other.grad[k];
    underflows += other.underflows;
  }
};

MarginalLikelihood::MarginalLikelihood(ItemResponseMatrix data, ModelSpec spec,
                                       LikelihoodOptions options)
    : data_(std::move(data)),
      spec_(spec),
      options_(options),
      layout_(ParameterLayout::build(data_, spec_, options.fixed_sigma)),
      rule_(gauss_hermite(spec.quadrature_nodes)) {
  precompute();
}

void MarginalLikelihood::precompute() {
  const auto& templates = layout_.templates();
  coefficient_offset_.assign(data_.item_count(), 0);
  total_coefficients_ = 0;
  for (std::size_t i = 0; i < data_.item_count(); ++i) {
    coefficient_offset_[i] = total_coefficients_;
    total_coefficients_ += templates[i].coefficient_count();
  }
  person_start_.assign(data_.persons() + 1, 0);
  for (std::size_t p = 0; p < data_.persons(); ++p) {
    person_start_[p] = observations_.size();
    for (std::size_t i = 0; i < data_.item_count(); ++i) {
      if (!data_.observed(p, i)) continue;
      const auto& delta = templates[i];
      const std::size_t nc = delta.coefficient_count();
      const double y = data_.value(p, i);
      Observation obs;
      obs.item = static_cast<std::uint32_t>(i);
      obs.continuous = data_.item(i).treat_as == DensityBranch::Continuous;
      auto push_basis = [&](double at, bool deriv) {
        const std::size_t off = basis_values_.size();
        basis_values_.resize(off + nc);
        std::span<double> out(basis_values_.data() + off, nc);
        if (deriv) {
          delta.basis_deriv(at, out);
        } else {
          delta.basis(at, out);
        }
        return off;
      };
      if (obs.continuous) {
        obs.phi = push_basis(y, false);
        obs.phi_lower = push_basis(y, true);
      } else {
        const auto& support = delta.support();
        obs.has_upper = !(support.is_finite_discrete() && y == support.top_category());
        obs.has_lower = y > 0.0;
        if (obs.has_upper) obs.phi = push_basis(y, false);
        if (obs.has_lower) obs.phi_lower = push_basis(y - 1.0, false);
      }
      observations_.push_back(obs);
    }
  }
  person_start_[data_.persons()] = observations_.size();
}

namespace {

double dot(const double* a, const std::vector<double>& c) {
  double s = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) s += a[k] * c[k];
  return s;
}

}  // namespace

void MarginalLikelihood::evaluate_block(std::size_t block,
                                        const std::vector<std::vector<double>>& coefficients,
                                        double sigma, bool with_gradient, BlockResult& out,
                                        std::vector<double>* person_ll) const {
  const auto response = spec_.response_function;
  const std::size_t n_nodes = rule_.nodes.size();
  std::vector<double> theta(n_nodes);
  std::vector<double> log_w(n_nodes);
  for (std::size_t k = 0; k < n_nodes; ++k) {
    theta[k] = std::numbers::sqrt2 * sigma * rule_.nodes[k];
    log_w[k] = std::log(rule_.weights[k]);
  }
  std::vector<double> node_ll(n_nodes);
  std::vector<double> node_dtheta(n_nodes);
  std::vector<double> post(n_nodes);
  // Per observation and node: coefficients multiplying basis(y-1) / basis(y).
  std::vector<double> coef_lower;
  std::vector<double> coef_upper;
  std::vector<double> obs_delta_upper;
  std::vector<double> obs_delta_lower;

  const std::size_t p_begin = block * kPersonBlock;
  const std::size_t p_end = std::min(data_.persons(), p_begin + kPersonBlock);
  out.grad.assign(with_gradient ? total_coefficients_ : 0, 0.0);
  for (std::size_t p = p_begin; p < p_end; ++p) {
    const std::size_t o_begin = person_start_[p];
    const std::size_t o_end = person_start_[p + 1];
    const std::size_t n_obs = o_end - o_begin;
    std::copy(log_w.begin(), log_w.end(), node_ll.begin());
    std::fill(node_dtheta.begin(), node_dtheta.end(), 0.0);
    if (with_gradient) {
      coef_lower.assign(n_obs * n_nodes, 0.0);
      coef_upper.assign(n_obs * n_nodes, 0.0);
    }
    obs_delta_upper.assign(n_obs, 0.0);
    obs_delta_lower.assign(n_obs, 0.0);
    for (std::size_t o = 0; o < n_obs; ++o) {
      const auto& obs = observations_[o_begin + o];
      const auto& c = coefficients[obs.item];
      if (obs.continuous) {
        const double d = dot(&basis_values_[obs.phi], c);
        const double slope = dot(&basis_values_[obs.phi_lower], c);
        if (!(slope > 0.0)) {
          std::ostringstream os;
          os << "person " << p << ", item '" << data_.item(obs.item).id
             << "': difficulty derivative " << slope << " is not positive";
          throw Error(ErrorCode::ZeroDerivative, os.str());
        }
        obs_delta_upper[o] = d;
        obs_delta_lower[o] = slope;
        const double log_slope = std::log(slope);
        for (std::size_t k = 0; k < n_nodes; ++k) {
          const double z = theta[k] - d;
          node_ll[k] += log_pdf(response, z) + log_slope;
          const double g = dlog_pdf(response, z);
          node_dtheta[k] += g;
          if (with_gradient) coef_upper[o * n_nodes + k] = -g;
        }
      } else {
        const double d_up = obs.has_upper ? dot(&basis_values_[obs.phi], c) : kInf;
        const double d_lo = obs.has_lower ? dot(&basis_values_[obs.phi_lower], c) : -kInf;
        for (std::size_t k = 0; k < n_nodes; ++k) {
          const double a = theta[k] - d_lo;
          const double b = theta[k] - d_up;
          double prob = cdf_difference(response, a, b);
          if (!(prob >= kProbabilityFloor)) {
            prob = kProbabilityFloor;
            ++out.underflows;
          }
          node_ll[k] += std::log(prob);
          const double fa = obs.has_lower ? pdf(response, a) : 0.0;
          const double fb = obs.has_upper ? pdf(response, b) : 0.0;
          node_dtheta[k] += (fa - fb) / prob;
          if (with_gradient) {
            coef_lower[o * n_nodes + k] = -fa / prob;
            coef_upper[o * n_nodes + k] = fb / prob;
          }
        }
      }
    }
    double max_ll = -kInf;
    for (double v : node_ll) max_ll = std::max(max_ll, v);
    double total = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) {
      post[k] = std::exp(node_ll[k] - max_ll);
      total += post[k];
    }
    const double ll = max_ll + std::log(total);
    if (!std::isfinite(ll)) {
      throw Error(ErrorCode::NonFiniteLikelihood,
                  "marginal likelihood of person " + std::to_string(p) + " is not finite");
    }
    out.loglik += ll;
    if (person_ll) (*person_ll)[p] = ll;
    if (!with_gradient) continue;
    for (auto& v : post) v /= total;

    double ds = 0.0;
    for (std::size_t k = 0; k < n_nodes; ++k) ds += post[k] * node_dtheta[k] * theta[k];
    out.dlog_sigma += ds;

    for (std::size_t o = 0; o < n_obs; ++o) {
      const auto& obs = observations_[o_begin + o];
      const std::size_t nc = coefficients[obs.item].size();
      double* g = &out.grad[coefficient_offset_[obs.item]];
      double lower = 0.0;
      double upper = 0.0;
      for (std::size_t k = 0; k < n_nodes; ++k) {
        lower += post[k] * coef_lower[o * n_nodes + k];
        upper += post[k] * coef_upper[o * n_nodes + k];
      }
      if (obs.continuous) {
        const double* phi = &basis_values_[obs.phi];
        const double* dphi = &basis_values_[obs.phi_lower];
        const double inv_slope = 1.0 / obs_delta_lower[o];
        for (std::size_t l = 0; l < nc; ++l) g[l] += upper * phi[l] + dphi[l] * inv_slope;
      } else {
        if (obs.has_upper) {
          const double* phi = &basis_values_[obs.phi];
          for (std::size_t l = 0; l < nc; ++l) g[l] += upper * phi[l];
        }
        if (obs.has_lower) {
          const double* phi = &basis_values_[obs.phi_lower];
          for (std::size_t l = 0; l < nc; ++l) g[l] += lower * phi[l];
        }
      }
    }
  }
}

Evaluation MarginalLikelihood::evaluate(std::span<const double> u, bool with_gradient) const {
  if (u.size() != layout_.size()) {
    throw Error(ErrorCode::InvalidConfig, "parameter vector has length " + std::to_string(u.size()) +
                                              ", expected " + std::to_string(layout_.size()));
  }
  const std::size_t n_items = data_.item_count();
  std::vector<std::vector<double>> coefficients(n_items);
  std::vector<std::vector<double>> jacobians(n_items);
  for (std::size_t i = 0; i < n_items; ++i) {
    layout_.item_coefficients(i, u, coefficients[i], jacobians[i]);
  }
  const double sigma = layout_.sigma(u);

  const std::size_t n_blocks = (data_.persons() + kPersonBlock - 1) / kPersonBlock;
  std::vector<BlockResult> blocks(n_blocks);
  run_blocks(n_blocks, options_.threads, [&](std::size_t b) {
    evaluate_block(b, coefficients, sigma, with_gradient, blocks[b], nullptr);
  });
  // Fixed-order pairwise reduction.
  for (std::size_t stride = 1; stride < n_blocks; stride *= 2) {
    for (std::size_t b = 0; b + stride < n_blocks; b += 2 * stride) blocks[b].add(blocks[b + stride]);
  }

  Evaluation eval;
  if (n_blocks == 0) return eval;
  eval.loglik = blocks[0].loglik;
  eval.underflows = blocks[0].underflows;
  if (!with_gradient) return eval;
  eval.gradient.assign(layout_.size(), 0.0);
  for (std::size_t i = 0; i < n_items; ++i) {
    const auto& globals = layout_.item_globals(i);
    const std::size_t nc = coefficients[i].size();
    const std::size_t ng = globals.size();
    const double* g = &blocks[0].grad[coefficient_offset_[i]];
    for (std::size_t l = 0; l < nc; ++l) {
      for (std::size_t m = 0; m < ng; ++m) eval.gradient[globals[m]] += g[l] * jacobians[i][l * ng + m];
    }
  }
  if (layout_.has_sigma()) eval.gradient[layout_.sigma_index()] += blocks[0].dlog_sigma;
  return eval;
}

std::vector<double> MarginalLikelihood::person_values(std::span<const double> u) const {
  if (u.size() != layout_.size()) throw Error(ErrorCode::InvalidConfig, "parameter vector has the wrong length");
  std::vector<std::vector<double>> coefficients(data_.item_count());
  std::vector<double> jac;
  for (std::size_t i = 0; i < data_.item_count(); ++i) layout_.item_coefficients(i, u, coefficients[i], jac);
  std::vector<double> out(data_.persons());
  const std::size_t n_blocks = (data_.persons() + kPersonBlock - 1) / kPersonBlock;
  std::vector<BlockResult> blocks(n_blocks);
  run_blocks(n_blocks, options_.threads, [&](std::size_t b) {
    evaluate_block(b, coefficients, layout_.sigma(u), false, blocks[b], &out);
  });
  return out;
}

PenaltyValue MarginalLikelihood::penalty(std::span<const double> u) const {
  PenaltyValue out;
  out.gradient.assign(layout_.size(), 0.0);
  const auto& items = layout_.penalty_items();
  if (spec_.slope_mode != SlopeMode::SplineFree || items.size() < 2) return out;
  const double lambda = spec_.penalty_lambda;
  std::vector<std::vector<double>> c(items.size());
  std::vector<std::vector<double>> jac(items.size());
  for (std::size_t k = 0; k < items.size(); ++k) layout_.item_coefficients(items[k], u, c[k], jac[k]);
  const std::size_t m = c[0].size();
  std::vector<std::vector<double>> grad_c(items.size(), std::vector<double>(m, 0.0));
  // Every adjacent difference l = 1..M-1 of item k is tied to that of item k-1.
  for (std::size_t k = 1; k < items.size(); ++k) {
    for (std::size_t l = 1; l < m; ++l) {
      const double e = (c[k][l] - c[k][l - 1]) - (c[k - 1][l] - c[k - 1][l - 1]);
      out.value += lambda * e * e;
      const double g = 2.0 * lambda * e;
      grad_c[k][l] += g;
      grad_c[k][l - 1] -= g;
      grad_c[k - 1][l] -= g;
      grad_c[k - 1][l - 1] += g;
    }
  }
  for (std::size_t k = 0; k < items.size(); ++k) {
    const auto& globals = layout_.item_globals(items[k]);
    const std::size_t ng = globals.size();
    for (std::size_t l = 0; l < m; ++l) {
      for (std::size_t j = 0; j < ng; ++j) out.gradient[globals[j]] += grad_c[k][l] * jac[k][l * ng + j];
    }
  }
  return out;
}

double marginal_log_likelihood(std::span<const double> params, const ItemResponseMatrix& data,
                               const ModelSpec& spec) {
  return MarginalLikelihood(data, spec).value(params);
}

std::vector<double> score(std::span<const double> params, const ItemResponseMatrix& data,
                          const ModelSpec& spec) {
  return MarginalLikelihood(data, spec).evaluate(params, true).gradient;
}

PenaltyValue shape_penalty(std::span<const double> params, const ItemResponseMatrix& data,
                           const ModelSpec& spec) {
  if (spec.slope_mode != SlopeMode::SplineFree) {
    throw Error(ErrorCode::WrongMode, "the shape penalty applies to spline_free models only");
  }
  return MarginalLikelihood(data, spec).penalty(params);
}

}  // namespace thresholds
