// Acceptance suite: one PASS/FAIL/SKIP line per criterion. Exit status is
// nonzero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"

using namespace thresholds;
using namespace fixtures;

namespace {

constexpr auto kNormal = ResponseFunctionKind::Normal;
constexpr auto kLogistic = ResponseFunctionKind::Logistic;
constexpr ResponseFunctionKind kBoth[] = {kNormal, kLogistic};

enum class Status { Pass, Fail, Skip };

struct Outcome {
  Status status = Status::Pass;
  std::string detail;
};

Outcome pass_if(bool ok, std::string detail) { return {ok ? Status::Pass : Status::Fail, std::move(detail)}; }

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof(buf), format, args...);
  return buf;
}

// ---- 1: cognition data --------------------------------------------------

struct TableRow {
  double intercept;
  double slope;
};

// Varying-slopes estimates for the six cognition items. The reference table
// prints +3.652171 for the second intercept; the sign is taken as negative,
// which is the only value consistent with the item's fitted curves.
constexpr TableRow kCognitionVarying[6] = {
    {-6.109906362, 1.158343367}, {-3.652171312, 1.587816368}, {-2.626962524, 0.855081205},
    {-3.147872726, 1.038892679}, {-5.725666544, 1.027512137}, {-3.345427435, 1.537712898}};

Outcome cognition() {
  const std::filesystem::path path = std::filesystem::path(THRESHOLDS_DATA_DIR) / "lakes_cognition.csv";
  if (!std::filesystem::exists(path)) {
    return {Status::Skip, "data file " + path.string() + " not found"};
  }
  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  std::vector<ItemSpec> items;
  std::stringstream hs(header);
  for (std::string id; std::getline(hs, id, ',');) {
    if (!id.empty() && id.back() == '\r') id.pop_back();
    items.push_back(continuous_item(id));
  }
  const auto data = ingest_csv(path, items);
  ModelSpec varying;
  ModelSpec common;
  common.slope_mode = SlopeMode::CommonSlope;
  const auto full = fit(data, varying);
  const auto reduced = fit(data, common);
  if (!full.converged || !reduced.converged) return {Status::Fail, "a fit did not converge"};
  const auto lr = lr_test(full, reduced);
  double worst = 0.0;
  for (std::size_t i = 0; i < std::min<std::size_t>(6, full.model.items.size()); ++i) {
    const auto& c = full.model.difficulties[i].coefficients();
    worst = std::max({worst, std::fabs(c[0] - kCognitionVarying[i].intercept),
                      std::fabs(c[1] - kCognitionVarying[i].slope)});
  }
  const bool ok = data.item_count() == 6 && std::fabs(reduced.loglik + 1500.006) <= 0.5 &&
                  std::fabs(full.loglik + 1446.046) <= 0.5 && std::fabs(lr.statistic - 107.92) <= 1.0 &&
                  lr.df == 5 && worst <= 0.05;
  return pass_if(ok, fmt("common %.3f, varying %.3f, LR %.2f on %d df, max estimate gap %.4f",
                         reduced.loglik, full.loglik, lr.statistic, lr.df, worst));
}

// ---- 2: gradient --------------------------------------------------------

Outcome gradient() {
  const auto sim = simulate_dataset(mixed_scenario(20, 20240617));
  double worst = 0.0;
  for (auto F : kBoth) {
    for (auto mode : {SlopeMode::VaryingSlopes, SlopeMode::CommonSlope}) {
      ModelSpec spec;
      spec.response_function = F;
      spec.slope_mode = mode;
      MarginalLikelihood lik(sim.data, spec);
      auto u = starting_values(lik);
      std::mt19937_64 gen(static_cast<std::uint64_t>(F) * 10 + static_cast<std::uint64_t>(mode));
      std::uniform_real_distribution<double> jitter(-0.2, 0.2);
      for (auto& v : u) v += jitter(gen);
      const auto g = lik.evaluate(u, true).gradient;
      const auto fd = fd_gradient(lik, u);
      for (std::size_t k = 0; k < u.size(); ++k) worst = std::max(worst, gradient_discrepancy(g[k], fd[k]));
    }
  }
  return pass_if(worst < 1e-5, fmt("max relative discrepancy %.2e (tolerance 1e-5)", worst));
}

// ---- 3: quadrature ------------------------------------------------------

Outcome quadrature() {
  ModelSpec spec;
  spec.quadrature_nodes = 30;
  const auto data = ItemResponseMatrix::create({binary_item("b")}, 1, {1.0}, {1});
  MarginalLikelihood lik(data, spec);
  double worst = 0.0;
  // A 30-node rule loses the 1e-6 accuracy beyond sigma = 2 (about 1e-5 at 2.5).
  for (double d0 : {-2.0, -0.8, 0.0, 0.6, 1.7}) {
    for (double sigma : {0.25, 0.6, 1.0, 1.5, 2.0}) {
      const std::vector<double> u = {d0, std::log(sigma)};
      const double expected = oracle_cdf(kNormal, -d0 / std::sqrt(1.0 + sigma * sigma));
      worst = std::max(worst, std::fabs(std::exp(lik.value(u)) - expected));
    }
  }
  return pass_if(worst <= 1e-6, fmt("max error %.2e over 25 (delta0, sigma <= 2) pairs (tolerance 1e-6)", worst));
}

// ---- 4: model equivalences ----------------------------------------------

Outcome equivalence() {
  std::mt19937_64 gen(4);
  std::uniform_real_distribution<double> unif(-2.5, 2.5);
  std::uniform_real_distribution<double> pos(0.3, 2.5);
  double rasch = 0.0;
  double grm = 0.0;
  double categorized = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const double theta = unif(gen);
    // Rasch.
    const double d0 = unif(gen);
    const auto bin = DifficultyFunction::parametric(FamilyKind::Linear, d0, 1, SupportKind::binary());
    const double p = 1.0 / (1.0 + std::exp(-(theta - d0)));
    rasch = std::max(rasch, std::fabs(std::exp(log_density_discrete(kLogistic, bin, theta, 1)) - p));
    rasch = std::max(rasch, std::fabs(std::exp(log_density_discrete(kLogistic, bin, theta, 0)) - (1 - p)));
    // Graded response with random thresholds.
    std::vector<double> t(2 + rep % 5);
    for (auto& v : t) v = unif(gen);
    std::sort(t.begin(), t.end());
    const int k = static_cast<int>(t.size()) + 1;
    const auto ord = DifficultyFunction::free_ordinal(t, SupportKind::ordinal(k));
    for (auto F : kBoth) {
      for (int r = 0; r < k; ++r) {
        grm = std::max(grm, std::fabs(std::exp(log_density_discrete(F, ord, theta, r)) -
                                      grm_probability(F, t, theta, r)));
      }
    }
    // Categorizing a continuous item: the GRM with thresholds delta(tau_r)
    // against P(tau_r < Y <= tau_{r+1}) from the distribution of Y itself.
    const bool use_log = rep % 2 == 1;
    const double c0 = unif(gen);
    const double c1 = pos(gen);
    std::vector<double> tau(2 + rep % 4);
    for (auto& v : tau) v = use_log ? std::exp(unif(gen)) : unif(gen);
    std::sort(tau.begin(), tau.end());
    const auto cont = DifficultyFunction::parametric(use_log ? FamilyKind::Log : FamilyKind::Linear, c0, c1,
                                                     use_log ? SupportKind::continuous(0, kInf)
                                                             : SupportKind::continuous());
    std::vector<double> cut(tau.size());
    for (std::size_t r = 0; r < tau.size(); ++r) cut[r] = cont.eval(tau[r]);
    const int kc = static_cast<int>(tau.size()) + 1;
    const auto cat = DifficultyFunction::free_ordinal(cut, SupportKind::ordinal(kc));
    for (auto F : kBoth) {
      const auto exceed = [&](int r) {
        if (r < 0) return 1.0;
        if (r >= static_cast<int>(tau.size())) return 0.0;
        const double g = use_log ? std::log(tau[r]) : tau[r];
        return oracle_cdf(F, theta - c0 - c1 * g);
      };
      for (int r = 0; r < kc; ++r) {
        const double direct = exceed(r - 1) - exceed(r);
        categorized = std::max(categorized,
                               std::fabs(std::exp(log_density_discrete(F, cat, theta, r)) - direct));
      }
    }
  }
  const bool ok = rasch <= 1e-12 && grm <= 1e-12 && categorized <= 1e-12;
  return pass_if(ok, fmt("max errors: Rasch %.1e, graded response %.1e, categorization %.1e (tolerance 1e-12)",
                         rasch, grm, categorized));
}

// ---- 5: moments of linear-difficulty responses --------------------------

Outcome moments() {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  std::uniform_real_distribution<double> pos(0.3, 3.0);
  const int n = 1000000;
  int failures = 0;
  double worst = 0.0;  // largest deviation in MC standard errors
  for (auto F : kBoth) {
    const auto mc = moment_constants(F);
    for (int rep = 0; rep < 20; ++rep) {
      const double theta = unif(gen);
      const double d0 = unif(gen);
      const double d1 = pos(gen);
      const auto d = DifficultyFunction::parametric(FamilyKind::Linear, d0, d1, SupportKind::continuous());
      Rng rng = Rng::substream(555, static_cast<std::uint64_t>(F) * 100 + rep);
      std::vector<double> y(n);
      for (auto& v : y) v = sample_response(F, d, DensityBranch::Continuous, theta, rng.uniform());
      double mean = 0.0;
      for (double v : y) mean += v;
      mean /= n;
      double m2 = 0.0;
      double m4 = 0.0;
      for (double v : y) {
        const double e = (v - mean) * (v - mean);
        m2 += e;
        m4 += e * e;
      }
      m2 /= n;
      m4 /= n;
      const double mean_se = std::sqrt(m2 / n);
      const double var_se = std::sqrt((m4 - m2 * m2) / n);
      const double z_mean = std::fabs(mean - (theta - d0 - mc.e_f) / d1) / mean_se;
      const double z_var = std::fabs(m2 - mc.var_f / (d1 * d1)) / var_se;
      worst = std::max({worst, z_mean, z_var});
      failures += (z_mean > 3.0) + (z_var > 3.0);
    }
  }
  return pass_if(failures == 0, fmt("40 configurations x 10^6 draws, largest deviation %.2f MC SE, %d outside 3 SE",
                                    worst, failures));
}

// ---- 6: normalization ---------------------------------------------------

Outcome normalization() {
  double finite = 0.0;
  double tail = 0.0;
  double continuous = 0.0;
  const auto ord = DifficultyFunction::free_ordinal({-1.6, -0.5, 0.1, 0.9, 2.2}, SupportKind::ordinal(6));
  const auto bin = DifficultyFunction::parametric(FamilyKind::Linear, -0.4, 1, SupportKind::binary());
  const auto cnt = DifficultyFunction::parametric(FamilyKind::LogP1, -0.3, 1.4, SupportKind::count());
  auto basis = std::make_shared<const BSplineBasis>(BSplineBasis::build(-2, 3, 8, 3));
  for (auto F : kBoth) {
    for (double theta : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
      double s = 0.0;
      for (int r = 0; r < 6; ++r) s += std::exp(log_density_discrete(F, ord, theta, r));
      finite = std::max(finite, std::fabs(s - 1.0));
      s = std::exp(log_density_discrete(F, bin, theta, 0)) + std::exp(log_density_discrete(F, bin, theta, 1));
      finite = std::max(finite, std::fabs(s - 1.0));
      s = 0.0;
      for (int R = 0; R < 60; ++R) {
        s += std::exp(log_density_discrete(F, cnt, theta, R));
        tail = std::max(tail, std::fabs((1.0 - s) - cdf(F, theta - cnt.eval(R))));
      }
    }
    const std::vector<DifficultyFunction> deltas = {
        DifficultyFunction::parametric(FamilyKind::Linear, 0.3, 1.7, SupportKind::continuous()),
        DifficultyFunction::parametric(FamilyKind::Log, -0.2, 1.3, SupportKind::continuous(0, kInf)),
        DifficultyFunction::parametric(FamilyKind::LogP1, 0.1, 2.0, SupportKind::continuous(-1, kInf)),
        DifficultyFunction::parametric(FamilyKind::InverseCdf, 0.2, 0.9, SupportKind::continuous(0, 1), F),
        DifficultyFunction::bspline(basis, {-2.0, -1.5, -1.4, -0.3, 0.0, 0.9, 1.0, 2.5},
                                    SupportKind::continuous()),
    };
    for (const auto& d : deltas) {
      for (double theta : {-1.3, 0.0, 0.8}) {
        continuous = std::max(continuous, std::fabs(density_mass(F, d, theta) - 1.0));
      }
    }
  }
  const bool ok = finite <= 1e-14 && tail <= 1e-14 && continuous <= 1e-6;
  return pass_if(ok, fmt("finite sums %.1e, count tail %.1e (tolerance 1e-14), continuous mass %.1e (tolerance 1e-6)",
                         finite, tail, continuous));
}

// ---- 7: parameter recovery ----------------------------------------------

Outcome recovery() {
  const auto report = recovery_study(recovery_scenario(100, 7001, 20), {}, 4);
  const bool ok = report.converged == 20 && report.mean_theta_correlation >= 0.85 &&
                  report.intercept_rmse <= 0.4 && report.item_parameter_coverage >= 0.9;
  return pass_if(ok, fmt("%d/20 converged, mean correlation %.3f (>= 0.85), intercept RMSE %.3f (<= 0.4), "
                         "coverage %.3f (>= 0.90)",
                         report.converged, report.mean_theta_correlation, report.intercept_rmse,
                         report.item_parameter_coverage));
}

// ---- 8: penalty ---------------------------------------------------------

Outcome penalty() {
  const std::vector<double> shape = {-2.4, -1.3, -0.5, 0.1, 0.8, 1.9, 2.6};
  std::vector<ItemSpec> items;
  for (int i = 0; i < 3; ++i) {
    ItemSpec s = continuous_item("s" + std::to_string(i + 1), FamilyKind::BSpline);
    s.family.n_basis = 7;
    s.family.knot_range = std::array<double, 2>{-3, 3};
    std::vector<double> c = shape;
    for (auto& v : c) v += 0.4 * i - 0.4;
    items.push_back(with_values(s, c));
  }
  SimulationScenario scenario;
  scenario.truth = FittedModel::from_item_values(items, kNormal, 1.0);
  scenario.persons = 300;
  scenario.seed = 8;
  const auto sim = simulate_dataset(scenario);
  ModelSpec spec;
  spec.slope_mode = SlopeMode::SplineFree;
  spec.penalty_lambda = 1e6;
  const auto f = fit(sim.data, spec);
  double worst = 0.0;
  const auto& ref = f.model.difficulties[0].coefficients();
  for (std::size_t i = 1; i < f.model.difficulties.size(); ++i) {
    const auto& c = f.model.difficulties[i].coefficients();
    for (std::size_t l = 1; l < c.size(); ++l) {
      worst = std::max(worst, std::fabs((c[l] - c[l - 1]) - (ref[l] - ref[l - 1])));
    }
  }
  return pass_if(f.converged && worst < 1e-3,
                 fmt("lambda 1e6, converged %s, max adjacent-difference discrepancy %.2e (tolerance 1e-3)",
                     f.converged ? "yes" : "no", worst));
}

// ---- 9: curve invariants ------------------------------------------------

std::vector<FittedModel> curve_corpus() {
  std::vector<FittedModel> models;
  const auto mixed = simulate_dataset(mixed_scenario(300, 91));
  for (auto F : kBoth) {
    for (auto mode : {SlopeMode::VaryingSlopes, SlopeMode::CommonSlope}) {
      ModelSpec spec;
      spec.response_function = F;
      spec.slope_mode = mode;
      models.push_back(fit(mixed.data, spec).model);
    }
  }
  const auto rec = simulate_dataset(recovery_scenario(100, 92, 1));
  models.push_back(fit(rec.data, ModelSpec{}).model);

  std::vector<ItemSpec> items = {
      with_values(continuous_item("logy", FamilyKind::Log, 0, kInf), {0.1, 1.2}),
      with_values(continuous_item("prop", FamilyKind::InverseCdf, 0, 1), {-0.2, 0.9}),
      with_values(count_item("cnt"), {-0.5, 1.1})};
  ItemSpec spline = continuous_item("spl", FamilyKind::BSpline);
  spline.family.n_basis = 6;
  spline.family.knot_range = std::array<double, 2>{-3, 3};
  items.push_back(with_values(spline, {-2.5, -1.2, -0.4, 0.3, 1.1, 2.4}));
  items[1].family.inverse_cdf_kind = kNormal;
  SimulationScenario s;
  s.truth = FittedModel::from_item_values(items, kNormal, 1.0);
  s.persons = 300;
  s.seed = 93;
  const auto other = simulate_dataset(s);
  ModelSpec free;
  free.slope_mode = SlopeMode::SplineFree;
  free.penalty_lambda = 1.0;
  models.push_back(fit(other.data, free).model);
  return models;
}

Outcome curves() {
  const auto models = curve_corpus();
  std::size_t tables = 0;
  std::string problem;
  for (const auto& m : models) {
    const auto thetas = default_theta_grid(m);
    std::vector<std::vector<CurveTable>> ic_by_y(2);
    for (std::size_t i = 0; i < m.items.size() && problem.empty(); ++i) {
      const auto ys = default_y_grid(m, i);
      std::vector<CurveTable> emitted;
      for (double theta : {-2.0, -1.0, 0.0, 1.0, 2.0}) emitted.push_back(pt_curve(m, i, theta, ys));
      emitted.push_back(difficulty_curve(m, i, ys));
      for (double y : ys) {
        try {
          emitted.push_back(ic_curve(m, i, y, thetas));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::OutOfSupport) throw;
        }
      }
      // IC curves at a common y across items.
      for (int k = 0; k < 2; ++k) {
        const double y = k == 0 ? 0.5 : 1.0;
        if (!m.difficulties[i].support().contains(y)) continue;
        try {
          ic_by_y[k].push_back(ic_curve(m, i, y, thetas));
        } catch (const Error& e) {
          if (e.code() != ErrorCode::OutOfSupport) throw;
        }
      }
      // IC curves of one item ordered in y.
      for (std::size_t a = 0; a + 1 < emitted.size() && problem.empty(); ++a) {
        if (emitted[a].kind == CurveKind::IC && emitted[a + 1].kind == CurveKind::IC) {
          problem = check_no_crossing(emitted[a], emitted[a + 1]);
        }
      }
      for (const auto& t : emitted) {
        if (problem.empty()) problem = check_curve(t);
      }
      tables += emitted.size();
    }
    for (const auto& group : ic_by_y) {
      for (std::size_t a = 0; a < group.size() && problem.empty(); ++a) {
        for (std::size_t b = a + 1; b < group.size() && problem.empty(); ++b) {
          problem = check_no_crossing(group[a], group[b]);
        }
      }
    }
  }
  if (!problem.empty()) return {Status::Fail, problem};
  return {Status::Pass, fmt("%zu tables over %zu fitted models hold all invariants", tables, models.size())};
}

// ---- 10: determinism ----------------------------------------------------

Outcome determinism() {
  const auto scenario = mixed_scenario(250, 1010);
  std::vector<std::string> reports;
  std::vector<std::string> datasets;
  std::vector<std::string> scores;
  std::vector<std::string> studies;
  for (unsigned threads : {1u, 2u, 8u}) {
    const auto sim = simulate_dataset(scenario);
    std::ostringstream csv;
    write_csv(csv, sim.data);
    datasets.push_back(csv.str());
    FitOptions options;
    options.threads = threads;
    options.random_starts = 2;
    options.seed = 3;
    const auto f = fit(sim.data, ModelSpec{}, options);
    reports.push_back(fit_report_json(f, R"({"threads_under_test": true})"));
    std::ostringstream sc;
    write_scores_csv(sc, score_persons(f.model, sim.data, threads));
    scores.push_back(sc.str());
    studies.push_back(recovery_report_json(recovery_study(recovery_scenario(60, 1011, 4), {}, threads)));
  }
  const auto same = [](const std::vector<std::string>& v) {
    return std::all_of(v.begin(), v.end(), [&](const std::string& s) { return s == v.front(); });
  };
  const bool ok = same(reports) && same(datasets) && same(scores) && same(studies);
  return pass_if(ok, fmt("fit report %s, dataset %s, scores %s, recovery report %s at 1/2/8 threads",
                         same(reports) ? "identical" : "DIFFERS", same(datasets) ? "identical" : "DIFFERS",
                         same(scores) ? "identical" : "DIFFERS", same(studies) ? "identical" : "DIFFERS"));
}

struct Criterion {
  int number;
  const char* name;
  double time_limit;  // seconds; 0 for none
  std::function<Outcome()> run;
};

}  // namespace

int main() {
  const std::vector<Criterion> criteria = {
      {1, "cognition data", 120, cognition},   {2, "gradient oracle", 10, gradient},
      {3, "quadrature oracle", 1, quadrature}, {4, "model equivalence", 0, equivalence},
      {5, "linear moments", 0, moments},       {6, "normalization", 0, normalization},
      {7, "parameter recovery", 300, recovery}, {8, "penalty behavior", 0, penalty},
      {9, "curve invariants", 0, curves},      {10, "determinism", 0, determinism},
  };
  int failed = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {Status::Fail, std::string("exception: ") + e.what()};
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (out.status == Status::Pass && c.time_limit > 0 && seconds > c.time_limit) {
      out.status = Status::Fail;
      out.detail += fmt("; exceeded %.0f s limit", c.time_limit);
    }
    const char* tag = out.status == Status::Pass ? "PASS" : out.status == Status::Fail ? "FAIL" : "SKIP";
    std::printf("%s %2d %s: %s [%.1f s]\n", tag, c.number, c.name, out.detail.c_str(), seconds);
    std::fflush(stdout);
    failed += out.status == Status::Fail;
  }
  return failed == 0 ? 0 : 1;
}
