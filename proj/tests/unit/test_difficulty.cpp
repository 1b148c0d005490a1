#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fixtures.hpp"

using namespace thresholds;
using namespace fixtures;

namespace {

std::shared_ptr<const BSplineBasis> make_basis(double lo, double hi, int n, int degree = 3) {
  return std::make_shared<const BSplineBasis>(BSplineBasis::build(lo, hi, n, degree));
}

std::vector<double> random_monotone(std::mt19937_64& gen, int n) {
  std::normal_distribution<double> start(0.0, 1.0);
  std::exponential_distribution<double> step(2.0);
  std::vector<double> c(n);
  c[0] = start(gen);
  for (int l = 1; l < n; ++l) c[l] = c[l - 1] + step(gen) + 1e-6;
  return c;
}

void expect_code(const std::function<void()>& f, ErrorCode code) {
  try {
    f();
    ADD_FAILURE() << "expected " << to_string(code);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), code) << e.what();
  }
}

}  // namespace

TEST(DifficultyFunction, EvalExamples) {
  const auto lin = DifficultyFunction::parametric(FamilyKind::Linear, 2, 3, SupportKind::continuous());
  EXPECT_EQ(lin.eval(1.0), 5.0);
  const auto lp1 = DifficultyFunction::parametric(FamilyKind::LogP1, 0, 1, SupportKind::count());
  EXPECT_EQ(lp1.eval(0.0), 0.0);
  const auto bin = DifficultyFunction::parametric(FamilyKind::Linear, 0.4, 1, SupportKind::binary());
  EXPECT_EQ(bin.eval(1.0), kInf);
  EXPECT_EQ(bin.eval(0.0), 0.4);
  const auto ord = DifficultyFunction::free_ordinal({-1, 0.5, 2}, SupportKind::ordinal(4));
  EXPECT_EQ(ord.eval(3.0), kInf);
  EXPECT_EQ(ord.eval(1.0), 0.5);
}

TEST(DifficultyFunction, OutOfSupport) {
  const auto ord = DifficultyFunction::free_ordinal({-1, 0.5, 2}, SupportKind::ordinal(4));
  expect_code([&] { ord.eval(4.0); }, ErrorCode::OutOfSupport);
  expect_code([&] { ord.eval(1.5); }, ErrorCode::OutOfSupport);
  const auto lg = DifficultyFunction::parametric(FamilyKind::Log, 0, 1, SupportKind::continuous(0, kInf));
  expect_code([&] { lg.eval(-1.0); }, ErrorCode::OutOfSupport);
}

TEST(DifficultyFunction, DerivativeExamples) {
  const auto lin = DifficultyFunction::parametric(FamilyKind::Linear, -4, 3, SupportKind::continuous());
  for (double y : {-3.0, 0.0, 7.5}) EXPECT_EQ(lin.eval_deriv(y), 3.0);
  const auto lg = DifficultyFunction::parametric(FamilyKind::Log, 0, 1, SupportKind::continuous(0, kInf));
  EXPECT_DOUBLE_EQ(lg.eval_deriv(2.0), 0.5);
  auto basis = make_basis(0, 1, 6);
  const auto flat = DifficultyFunction::bspline(basis, std::vector<double>(6, 0.7), SupportKind::continuous());
  for (double y : {-0.5, 0.0, 0.31, 0.77, 1.0, 1.4}) {
    EXPECT_NEAR(flat.eval_deriv(y), 0.0, 1e-14);
    EXPECT_NEAR(flat.eval(y), 0.7, 1e-14);
  }
  const auto ord = DifficultyFunction::free_ordinal({-1, 0.5, 2}, SupportKind::ordinal(4));
  expect_code([&] { ord.eval_deriv(1.0); }, ErrorCode::NotDifferentiable);
}

TEST(DifficultyFunction, InvertExamples) {
  const auto lin = DifficultyFunction::parametric(FamilyKind::Linear, 2, 3, SupportKind::continuous());
  EXPECT_DOUBLE_EQ(lin.invert(5.0), 1.0);
  const auto lp1 = DifficultyFunction::parametric(FamilyKind::LogP1, 0, 1, SupportKind::continuous(-1, kInf));
  EXPECT_NEAR(lp1.invert(std::log(4.0)), 3.0, 1e-14);
  const auto icdf = DifficultyFunction::parametric(FamilyKind::InverseCdf, 0.5, 2, SupportKind::continuous(0, 1));
  EXPECT_NEAR(icdf.invert(0.5), 0.5, 1e-15);
  expect_code([&] {
    DifficultyFunction::parametric(FamilyKind::Log, 0, 1, SupportKind::continuous(1, 2)).invert(5.0);
  }, ErrorCode::OutOfRange);
}

TEST(DifficultyFunction, SplineInversionResidual) {
  std::mt19937_64 gen(99);
  auto basis = make_basis(-1, 2, 8);
  for (int rep = 0; rep < 20; ++rep) {
    const auto d = DifficultyFunction::bspline(basis, random_monotone(gen, 8), SupportKind::continuous());
    std::uniform_real_distribution<double> t(d.eval(-3.0), d.eval(4.0));
    for (int k = 0; k < 25; ++k) {
      const double target = t(gen);
      EXPECT_NEAR(d.eval(d.invert(target)), target, 1e-10);
    }
  }
}

TEST(DifficultyFunction, MonotoneOnEveryFamily) {
  auto basis = make_basis(0, 5, 8);
  std::mt19937_64 gen(7);
  const std::vector<DifficultyFunction> deltas = {
      DifficultyFunction::parametric(FamilyKind::Linear, 0.3, 0.2, SupportKind::continuous()),
      DifficultyFunction::parametric(FamilyKind::Log, -1, 2, SupportKind::continuous(0, kInf)),
      DifficultyFunction::parametric(FamilyKind::LogP1, 1, 0.5, SupportKind::continuous(-1, kInf)),
      DifficultyFunction::parametric(FamilyKind::InverseCdf, 0, 1.5, SupportKind::continuous(0, 1),
                                     ResponseFunctionKind::Logistic),
      DifficultyFunction::bspline(basis, random_monotone(gen, 8), SupportKind::continuous()),
  };
  for (const auto& d : deltas) {
    const auto& s = d.support();
    const double lo = std::isfinite(s.lower) ? s.lower : -6.0;
    const double hi = std::isfinite(s.upper) ? s.upper : 9.0;
    double prev = -kInf;
    for (int k = 1; k < 500; ++k) {
      const double y = lo + (hi - lo) * k / 500.0;
      const double v = d.eval(y);
      if (d.kind() == FamilyKind::BSpline) {
        EXPECT_GE(v, prev);
      } else {
        EXPECT_GT(v, prev);
      }
      prev = v;
    }
  }
}

TEST(DifficultyFunction, DerivativeMatchesFiniteDifferences) {
  auto basis = make_basis(0, 5, 8);
  std::mt19937_64 gen(8);
  const std::vector<DifficultyFunction> deltas = {
      DifficultyFunction::parametric(FamilyKind::Log, -1, 2, SupportKind::continuous(0, kInf)),
      DifficultyFunction::parametric(FamilyKind::LogP1, 1, 0.5, SupportKind::continuous(-1, kInf)),
      DifficultyFunction::parametric(FamilyKind::InverseCdf, 0, 1.5, SupportKind::continuous(0, 1)),
      DifficultyFunction::bspline(basis, random_monotone(gen, 8), SupportKind::continuous()),
  };
  const double h = 1e-6;
  for (const auto& d : deltas) {
    const auto& s = d.support();
    const double lo = std::isfinite(s.lower) ? s.lower : -2.0;
    const double hi = std::isfinite(s.upper) ? s.upper : 7.0;
    for (int k = 1; k < 100; ++k) {
      const double y = lo + (hi - lo) * k / 100.0;
      const double fd = (d.eval(y + h) - d.eval(y - h)) / (2 * h);
      EXPECT_NEAR(d.eval_deriv(y), fd, 1e-6 * std::max(1.0, std::fabs(fd))) << to_string(d.kind()) << " " << y;
      EXPECT_NEAR(d.log_eval_deriv(y), std::log(d.eval_deriv(y)), 1e-12);
    }
  }
}

TEST(DifficultyFunction, UnconstrainedExamples) {
  const auto lin = DifficultyFunction::parametric(FamilyKind::Linear, -1, 1, SupportKind::continuous());
  const auto u = lin.to_unconstrained();
  ASSERT_EQ(u.size(), 2u);
  EXPECT_EQ(u[0], -1.0);
  EXPECT_EQ(u[1], 0.0);
  EXPECT_EQ(lin.from_unconstrained(u).coefficients(), lin.coefficients());

  const auto ord = DifficultyFunction::free_ordinal({1, 2, 4}, SupportKind::ordinal(4));
  const auto v = ord.to_unconstrained();
  EXPECT_NEAR(v[0], 1.0, 1e-15);
  EXPECT_NEAR(v[1], 0.0, 1e-15);
  EXPECT_NEAR(v[2], std::log(2.0), 1e-15);
  const auto back = ord.from_unconstrained(v).coefficients();
  for (std::size_t k = 0; k < 3; ++k) EXPECT_NEAR(back[k], ord.coefficients()[k], 1e-14);
}

TEST(DifficultyFunction, SplineRoundTrip) {
  std::mt19937_64 gen(11);
  auto basis = make_basis(0, 1, 10);
  for (int rep = 0; rep < 200; ++rep) {
    const auto c = random_monotone(gen, 10);
    const auto d = DifficultyFunction::bspline(basis, c, SupportKind::continuous());
    const auto back = d.from_unconstrained(d.to_unconstrained()).coefficients();
    for (std::size_t l = 0; l < c.size(); ++l) EXPECT_NEAR(back[l], c[l], 1e-12);
  }
}

TEST(DifficultyFunction, OrderedMapFloorsFlatSteps) {
  const std::vector<double> c = {0.0, 0.0, 1.0};
  const auto u = ordered_to_unconstrained(c, kSplineDifferenceFloor);
  EXPECT_NEAR(u[1], std::log(kSplineDifferenceFloor), 1e-12);
  expect_code([] { ordered_to_unconstrained(std::vector<double>{0.0, -1.0}, 0.0); }, ErrorCode::NonMonotoneInput);
  expect_code([] { ordered_to_unconstrained(std::vector<double>{0.0, 0.0}, 0.0); }, ErrorCode::NonMonotoneInput);
}

TEST(DifficultyFunction, RejectsNonMonotoneCoefficients) {
  expect_code([] { DifficultyFunction::free_ordinal({1, 1, 2}, SupportKind::ordinal(4)); },
              ErrorCode::NonMonotoneInput);
  auto basis = make_basis(0, 1, 4);
  expect_code([&] { DifficultyFunction::bspline(basis, {0, 1, 0.5, 2}, SupportKind::continuous()); },
              ErrorCode::NonMonotoneInput);
}

TEST(DifficultyFunction, CommonSlopeGivesParallelLines) {
  const auto a = DifficultyFunction::parametric(FamilyKind::Linear, -0.4, 1.3, SupportKind::continuous());
  const auto b = DifficultyFunction::parametric(FamilyKind::Linear, 0.9, 1.3, SupportKind::continuous());
  for (double y : {-2.0, 0.0, 0.5, 3.0}) EXPECT_NEAR(b.eval(y) - a.eval(y), 1.3, 1e-14);
}

TEST(BSplineBasis, PartitionOfUnityAndNonnegativity) {
  const auto basis = BSplineBasis::build(0, 1, 8, 3);
  EXPECT_EQ(basis.size(), 8);
  double sum = 0.0;
  for (double v : basis.evaluate(0.37)) sum += v;
  EXPECT_NEAR(sum, 1.0, 1e-14);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> y(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double at = y(gen);
    double s = 0.0;
    double ds = 0.0;
    for (double v : basis.evaluate(at)) {
      EXPECT_GE(v, 0.0);
      s += v;
    }
    for (double v : basis.derivative(at)) ds += v;
    EXPECT_NEAR(s, 1.0, 1e-13);
    EXPECT_NEAR(ds, 0.0, 1e-11);
  }
}

TEST(BSplineBasis, DerivativeMatchesFiniteDifferences) {
  const auto basis = BSplineBasis::build(-1, 2, 7, 3);
  const double h = 1e-6;
  for (double at : {-0.9, -0.2, 0.4, 1.1, 1.9}) {
    const auto up = basis.evaluate(at + h);
    const auto down = basis.evaluate(at - h);
    const auto d = basis.derivative(at);
    for (int l = 0; l < basis.size(); ++l) EXPECT_NEAR(d[l], (up[l] - down[l]) / (2 * h), 1e-6);
  }
}

TEST(BSplineBasis, GrevilleReproducesLines) {
  const auto basis = BSplineBasis::build(0, 4, 8, 3);
  const auto g = basis.greville();
  for (double at : {-1.0, 0.0, 0.9, 2.5, 4.0, 5.5}) {
    const auto phi = basis.evaluate(at);
    double v = 0.0;
    for (int l = 0; l < basis.size(); ++l) v += phi[l] * (1.5 + 2.0 * g[l]);
    EXPECT_NEAR(v, 1.5 + 2.0 * at, 1e-12) << at;
  }
}

TEST(BSplineBasis, RejectsBadConfigurations) {
  expect_code([] { BSplineBasis::build(0, 1, 3, 3); }, ErrorCode::InvalidConfig);
  expect_code([] { BSplineBasis::build(1, 1, 8, 3); }, ErrorCode::InvalidConfig);
  expect_code([] { BSplineBasis::build(0, 1, 8, 0); }, ErrorCode::InvalidConfig);
}

TEST(Families, DefaultKnotRanges) {
  EXPECT_EQ(default_knot_range(ordinal_item("o", 7, FamilyKind::BSpline), {0, 6}), (std::array<double, 2>{0, 5}));
  EXPECT_EQ(default_knot_range(continuous_item("c", FamilyKind::BSpline), {-1.5, 2}),
            (std::array<double, 2>{-1.5, 2}));
}
